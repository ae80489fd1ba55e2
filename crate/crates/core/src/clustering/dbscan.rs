//! Density-based clustering (DBSCAN).
//!
//! A point is core when at least `min_points` points, itself included, lie
//! within `eps`. Core points within `eps` of each other share a cluster.
//! A non-core point joins the cluster of its lowest-index core neighbor, or
//! is noise when it has none. Cluster ids are renumbered `0..k` in order of
//! first appearance by point index, so the result is fully determined by the
//! input order.

use std::collections::VecDeque;

use serde::Serialize;

use super::distance::DistanceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterLabels {
    /// Cluster per point; `None` is noise.
    pub labels: Vec<Option<usize>>,
    pub core: Vec<bool>,
    pub cluster_count: usize,
}

impl ClusterLabels {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cluster_count];
        for l in self.labels.iter().flatten() {
            sizes[*l] += 1;
        }
        sizes
    }

    /// A single cluster holding every point.
    pub fn single(n: usize) -> Self {
        Self {
            labels: vec![Some(0); n],
            core: vec![true; n],
            cluster_count: usize::from(n > 0),
        }
    }

    /// Builds labels from raw ids, renumbering clusters by first appearance.
    pub fn from_raw(raw: &[Option<usize>]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                l.map(|id| {
                    let next = map.len();
                    *map.entry(id).or_insert(next)
                })
            })
            .collect();
        Self {
            labels,
            core: vec![false; raw.len()],
            cluster_count: map.len(),
        }
    }
}

pub fn dbscan(points: &[Vec<f64>], eps: f64, min_points: usize) -> Result<ClusterLabels> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no points to cluster".into()));
    }
    validate(eps, min_points)?;
    let dist = DistanceMatrix::new(points);
    Ok(dbscan_neighborhoods(&dist.neighborhoods(eps), min_points))
}

pub(crate) fn validate(eps: f64, min_points: usize) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    if min_points == 0 {
        return Err(Error::Config("min_points must be at least 1".into()));
    }
    Ok(())
}

/// Clusters from precomputed neighborhoods (each containing the point itself).
pub(crate) fn dbscan_neighborhoods(neighbors: &[Vec<usize>], min_points: usize) -> ClusterLabels {
    let n = neighbors.len();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_points).collect();

    let mut component: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if !core[seed] || component[seed].is_some() {
            continue;
        }
        component[seed] = Some(next);
        queue.push_back(seed);
        while let Some(p) = queue.pop_front() {
            for &q in &neighbors[p] {
                if core[q] && component[q].is_none() {
                    component[q] = Some(next);
                    queue.push_back(q);
                }
            }
        }
        next += 1;
    }

    let raw: Vec<Option<usize>> = (0..n)
        .map(|i| {
            if core[i] {
                component[i]
            } else {
                neighbors[i]
                    .iter()
                    .filter(|&&j| core[j])
                    .min()
                    .and_then(|&j| component[j])
            }
        })
        .collect();
    let mut labels = ClusterLabels::from_raw(&raw);
    labels.core = core;
    labels
}
