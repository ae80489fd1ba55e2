use super::dbscan::ClusterLabels;
use super::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// Mean silhouette over clustered (non-noise) points.
///
/// Points in singleton clusters score 0. Noise points are left out entirely.
pub fn silhouette(points: &[Vec<f64>], labels: &ClusterLabels) -> Result<f64> {
    if points.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} points but {} labels",
            points.len(),
            labels.len()
        )));
    }
    silhouette_with(&DistanceMatrix::new(points), labels)
}

pub(crate) fn silhouette_with(dist: &DistanceMatrix, labels: &ClusterLabels) -> Result<f64> {
    let k = labels.cluster_count;
    if k < 2 {
        return Err(Error::UndefinedScore(format!(
            "need at least 2 clusters, got {k}"
        )));
    }
    let sizes = labels.cluster_sizes();
    let members: Vec<(usize, usize)> = labels
        .labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.map(|c| (i, c)))
        .collect();

    let mut sums = vec![0.0; k];
    let mut total = 0.0;
    for &(i, own) in &members {
        if sizes[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for &(j, c) in &members {
            if j != i {
                sums[c] += dist.euclidean(i, j);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / members.len() as f64)
}
