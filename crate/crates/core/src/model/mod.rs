//! Domain entities and the attendance measures computed over them.
//!
//! A [`Dataset`] is the validated, indexed join of the six input tables. The
//! attendance math only needs a [`Roster`] (who is registered where) and an
//! [`AttendanceMatrix`] (one flag per registration), so both are usable on
//! their own for synthetic or test instances.

mod dataset;
mod grades;
mod measures;
mod roster;

pub use dataset::{
    AttendanceRow, CatalogRow, Dataset, DatasetTables, GradeRow, IngestWarning, RegistrationRow,
    StudentRow,
};
pub use grades::GradeScale;
pub use measures::{
    category_cells, class_rate, contribution, feature_vectors, rai, semester_measures,
    student_rate, weighted_aggregate, CategoryCells, FeatureMatrix, MeasureTable, SemesterMeasure,
};
pub use roster::{AttendanceMatrix, Roster};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Category {
    pub code: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudentRecord {
    pub student_id: String,
    pub major: String,
    pub cohort: String,
    /// Mean grade points over letter-graded courses; `None` when the student
    /// has no letter grade.
    pub gpa: Option<f64>,
}

/// The unit at which a single boolean attendance flag exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassUnit {
    pub class_id: String,
    pub course_id: String,
    pub category: String,
    pub semester: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradeRecord {
    pub student_id: String,
    pub course_id: String,
    pub letter: String,
    /// `None` for non-letter grades (P/F and friends), which never enter
    /// correlation analyses.
    pub points: Option<f64>,
}

impl GradeRecord {
    pub fn is_excluded(&self) -> bool {
        self.points.is_none()
    }
}

/// Which attendance measure a computation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Plain attendance rate.
    Ar,
    /// Relative attendance index.
    Rai,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Ar => "ar",
            Measure::Rai => "rai",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ar" => Ok(Measure::Ar),
            "rai" => Ok(Measure::Rai),
            other => Err(Error::Config(format!("unknown measure `{other}`"))),
        }
    }
}
