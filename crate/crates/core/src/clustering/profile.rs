//! Per-cluster profiles: major composition, mean RAI and GPA-decile ratios.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;

use serde::Serialize;

use super::dbscan::ClusterLabels;
use crate::error::{Error, Result};
use crate::model::Dataset;

/// Majors with fewer students than this get low-confidence decile flags.
pub const MIN_MAJOR_SIZE: usize = 10;
pub const TOP_MAJORS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecileFlag {
    pub top: bool,
    pub last: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecileFlags {
    /// Aligned with `Dataset::students`; `None` when the student has no GPA.
    pub flags: Vec<Option<DecileFlag>>,
    pub low_confidence_majors: BTreeSet<String>,
}

/// Flags each student whose GPA is in the top or bottom tenth of their major.
///
/// With `m` graded students in a major and `k = ceil(m / 10)`, a student is
/// top when their GPA is at least the k-th highest value and last when it is
/// at most the k-th lowest. Ties share the flag.
pub fn gpa_decile_flags(dataset: &Dataset) -> DecileFlags {
    let students = dataset.students();
    let mut by_major: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for s in students {
        if let Some(g) = s.gpa {
            by_major.entry(s.major.as_str()).or_default().push(g);
        }
    }
    let mut cuts: HashMap<&str, (f64, f64)> = HashMap::new();
    let mut low_confidence_majors = BTreeSet::new();
    for (major, mut gpas) in by_major {
        gpas.sort_by(f64::total_cmp);
        let m = gpas.len();
        let k = m.div_ceil(10);
        cuts.insert(major, (gpas[m - k], gpas[k - 1]));
        if m < MIN_MAJOR_SIZE {
            low_confidence_majors.insert(major.to_string());
        }
    }
    let flags = students
        .iter()
        .map(|s| {
            let g = s.gpa?;
            let (hi, lo) = cuts[s.major.as_str()];
            Some(DecileFlag {
                top: g >= hi,
                last: g <= lo,
            })
        })
        .collect();
    DecileFlags {
        flags,
        low_confidence_majors,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorCell {
    pub major: String,
    pub count: usize,
    /// Share of the major's whole population that sits in this cluster.
    pub fraction_of_major: f64,
    pub mean_rai: Option<f64>,
    /// Among the cell's students with a GPA.
    pub top_decile_ratio: Option<f64>,
    pub last_decile_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterProfile {
    pub cluster: usize,
    pub size: usize,
    /// One cell per major in the dataset, sorted by major code.
    pub majors: Vec<MajorCell>,
    /// Up to five majors by count, ties broken by code.
    pub top_majors: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterProfiles {
    pub profiles: Vec<ClusterProfile>,
    pub noise_count: usize,
    pub total_students: usize,
    pub major_totals: BTreeMap<String, usize>,
    pub low_confidence_majors: BTreeSet<String>,
}

impl ClusterProfiles {
    pub fn majors(&self) -> impl Iterator<Item = &str> {
        self.major_totals.keys().map(String::as_str)
    }
}

/// Profiles each cluster; noise points are left out.
pub fn profile_clusters(labels: &ClusterLabels, dataset: &Dataset) -> Result<ClusterProfiles> {
    let students = dataset.students();
    if labels.len() != students.len() {
        return Err(Error::Shape(format!(
            "{} labels for {} students",
            labels.len(),
            students.len()
        )));
    }
    let rai = dataset.measures().rai();
    let deciles = gpa_decile_flags(dataset);

    let mut major_totals: BTreeMap<String, usize> = BTreeMap::new();
    for s in students {
        *major_totals.entry(s.major.clone()).or_default() += 1;
    }
    let major_index: HashMap<&str, usize> = major_totals
        .keys()
        .enumerate()
        .map(|(i, m)| (m.as_str(), i))
        .collect();

    #[derive(Default, Clone)]
    struct Acc {
        count: usize,
        rai_sum: f64,
        graded: usize,
        top: usize,
        last: usize,
    }
    let k = labels.cluster_count;
    let mut acc = vec![vec![Acc::default(); major_totals.len()]; k];
    for (i, label) in labels.labels.iter().enumerate() {
        let Some(c) = *label else { continue };
        let cell = &mut acc[c][major_index[students[i].major.as_str()]];
        cell.count += 1;
        cell.rai_sum += rai[i];
        if let Some(f) = deciles.flags[i] {
            cell.graded += 1;
            cell.top += usize::from(f.top);
            cell.last += usize::from(f.last);
        }
    }

    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let profiles = acc
        .into_iter()
        .enumerate()
        .map(|(cluster, cells)| {
            let majors: Vec<MajorCell> = major_totals
                .iter()
                .zip(cells)
                .map(|((major, &total), a)| MajorCell {
                    major: major.clone(),
                    count: a.count,
                    fraction_of_major: a.count as f64 / total as f64,
                    mean_rai: ratio(0, a.count).map(|_| a.rai_sum / a.count as f64),
                    top_decile_ratio: ratio(a.top, a.graded),
                    last_decile_ratio: ratio(a.last, a.graded),
                })
                .collect();
            let mut ranked: Vec<(String, usize)> = majors
                .iter()
                .filter(|m| m.count > 0)
                .map(|m| (m.major.clone(), m.count))
                .collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            ranked.truncate(TOP_MAJORS);
            ClusterProfile {
                cluster,
                size: majors.iter().map(|m| m.count).sum(),
                majors,
                top_majors: ranked,
            }
        })
        .collect();

    Ok(ClusterProfiles {
        profiles,
        noise_count: labels.noise_count(),
        total_students: students.len(),
        major_totals,
        low_confidence_majors: deciles.low_confidence_majors,
    })
}

/// Fraction of clustered points whose reference label is the most common
/// one in their cluster. Noise points are ignored; `None` if all are noise.
pub fn majority_purity<T: Eq + Hash>(labels: &ClusterLabels, truth: &[T]) -> Result<Option<f64>> {
    if labels.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} labels but {} reference labels",
            labels.len(),
            truth.len()
        )));
    }
    let mut counts: Vec<HashMap<&T, usize>> = vec![HashMap::new(); labels.cluster_count];
    for (l, t) in labels.labels.iter().zip(truth) {
        if let Some(c) = l {
            *counts[*c].entry(t).or_default() += 1;
        }
    }
    let clustered: usize = counts.iter().flat_map(|m| m.values()).sum();
    let majority: usize = counts
        .iter()
        .map(|m| m.values().copied().max().unwrap_or(0))
        .sum();
    Ok((clustered > 0).then(|| majority as f64 / clustered as f64))
}
