use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Dataset;

pub const DEFAULT_BINS: usize = 20;

/// Equal-width histogram over [-1, 1] with proportions instead of counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `bins + 1` edges from -1 to 1.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub proportions: Vec<f64>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Total proportion of the bins whose lower edge is at or above
    /// `threshold`.
    pub fn mass_from(&self, threshold: f64) -> f64 {
        self.edges
            .iter()
            .zip(&self.proportions)
            .filter(|(lo, _)| **lo >= threshold)
            .map(|(_, p)| p)
            .sum()
    }
}

fn edges(bins: usize) -> Vec<f64> {
    (0..=bins)
        .map(|i| -1.0 + 2.0 * i as f64 / bins as f64)
        .collect()
}

/// Bin of `v`: bins are right-open except the last, which includes 1.
fn bin_of(v: f64, edges: &[f64]) -> usize {
    let bins = edges.len() - 1;
    let mut i = (((v + 1.0) / 2.0 * bins as f64).floor() as usize).min(bins - 1);
    while i + 1 < bins && v >= edges[i + 1] {
        i += 1;
    }
    while i > 0 && v < edges[i] {
        i -= 1;
    }
    i
}

pub fn rai_histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    if values.is_empty() {
        return Err(Error::EmptyInput("no values to bin".into()));
    }
    if let Some(&v) = values.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
        return Err(Error::Range {
            value: v,
            lo: -1.0,
            hi: 1.0,
        });
    }
    let edges = edges(bins);
    let mut counts = vec![0usize; bins];
    for &v in values {
        counts[bin_of(v, &edges)] += 1;
    }
    let n = values.len() as f64;
    let proportions = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(Histogram {
        edges,
        counts,
        proportions,
    })
}

/// Course-level RAI samples split by course grade.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradeSplit {
    /// Grade points at or above the high cut.
    pub high: Vec<f64>,
    /// Grade points at or below the low cut.
    pub low: Vec<f64>,
}

impl GradeSplit {
    pub fn histograms(&self, bins: usize) -> (Result<Histogram>, Result<Histogram>) {
        (
            rai_histogram(&self.high, bins),
            rai_histogram(&self.low, bins),
        )
    }
}

/// Builds (student, course, grade) triplets from letter grades, computes the
/// student's course RAI for each, and splits them at the two cuts.
pub fn grade_split(dataset: &Dataset, high_cut: &str, low_cut: &str) -> Result<GradeSplit> {
    let high_pts = dataset.scale().require(high_cut)?;
    let low_pts = dataset.scale().require(low_cut)?;
    if high_pts <= low_pts {
        return Err(Error::Config(format!(
            "high cut {high_cut} must rank above low cut {low_cut}"
        )));
    }
    let mut split = GradeSplit {
        high: Vec::new(),
        low: Vec::new(),
    };
    for g in dataset.grades() {
        let Some(points) = g.points else { continue };
        let s = dataset.student_index(&g.student_id)?;
        let rai = match dataset.course_rai_at(s, &g.course_id) {
            Ok(v) => v,
            Err(Error::NotRegistered { .. }) => continue,
            Err(e) => return Err(e),
        };
        if points >= high_pts {
            split.high.push(rai);
        } else if points <= low_pts {
            split.low.push(rai);
        }
    }
    Ok(split)
}

pub fn grade_split_histograms(
    dataset: &Dataset,
    high_cut: &str,
    low_cut: &str,
    bins: usize,
) -> Result<(Result<Histogram>, Result<Histogram>)> {
    Ok(grade_split(dataset, high_cut, low_cut)?.histograms(bins))
}
