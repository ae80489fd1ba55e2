//! Peer-normalized attendance analytics.
//!
//! The relative attendance index (RAI) of a student is the mean, over the
//! class units they registered for, of their attendance flag minus the
//! class's attendance rate. [`model`] ingests and validates the six input
//! tables and computes AR and RAI, [`stats`] correlates them with grades,
//! [`clustering`] runs PCA plus a DBSCAN grid search over per-category
//! features, and [`datagen`] produces seeded synthetic cohorts with known
//! ground truth.

// Matrix kernels index several arrays in lockstep.
#![allow(clippy::needless_range_loop)]

pub mod clustering;
pub mod commands;
pub mod datagen;
pub mod error;
pub mod io;
pub mod model;
pub mod stats;

pub use error::{Error, Result};
