//! Dimensionality reduction, density clustering and cluster profiling.

mod dbscan;
mod distance;
mod grid;
mod pca;
mod profile;
mod silhouette;

pub use dbscan::{dbscan, ClusterLabels};
pub use distance::{squared_euclidean, DistanceMatrix};
pub use grid::{
    grid_search, CellStatus, GridCell, GridChoice, GridOptions, GridOutcome, GridRanges,
    DEFAULT_NOISE_CAP,
};
pub use pca::{fit_pca, symmetric_eigen, PcaModel};
pub use profile::{
    gpa_decile_flags, majority_purity, profile_clusters, ClusterProfile, ClusterProfiles,
    DecileFlag, DecileFlags, MajorCell, MIN_MAJOR_SIZE, TOP_MAJORS,
};
pub use silhouette::silhouette;
