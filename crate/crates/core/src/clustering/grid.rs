//! Exhaustive parameter search over PCA dimensionality and DBSCAN settings,
//! scored by silhouette.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::dbscan::{dbscan_neighborhoods, validate, ClusterLabels};
use super::distance::DistanceMatrix;
use super::pca::PcaModel;
use super::silhouette::silhouette_with;
use crate::error::{Error, Result};

pub const DEFAULT_NOISE_CAP: f64 = 0.25;

/// Candidate values per parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRanges {
    pub components: Vec<usize>,
    pub eps: Vec<f64>,
    pub min_points: Vec<usize>,
}

impl Default for GridRanges {
    /// Components 5..=15, eps 0.1..=1.0 in steps of 0.1, min_points 5..=20.
    fn default() -> Self {
        Self {
            components: (5..=15).collect(),
            eps: (1..=10).map(|i| i as f64 / 10.0).collect(),
            min_points: (5..=20).collect(),
        }
    }
}

impl GridRanges {
    pub fn cell_count(&self) -> usize {
        self.components.len() * self.eps.len() * self.min_points.len()
    }

    /// Sorted, deduplicated copy; tie-breaking relies on ascending order.
    fn normalized(&self) -> Result<Self> {
        let mut r = self.clone();
        r.components.sort_unstable();
        r.components.dedup();
        r.eps.sort_by(f64::total_cmp);
        r.eps.dedup();
        r.min_points.sort_unstable();
        r.min_points.dedup();
        if r.components.is_empty() || r.eps.is_empty() || r.min_points.is_empty() {
            return Err(Error::Config(
                "every grid range needs at least one value".into(),
            ));
        }
        if r.components.contains(&0) {
            return Err(Error::Config("n_components must be at least 1".into()));
        }
        for &e in &r.eps {
            validate(e, 1)?;
        }
        if r.min_points.contains(&0) {
            return Err(Error::Config("min_points must be at least 1".into()));
        }
        Ok(r)
    }
}

fn tidy(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn parse_ints(key: &str, value: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("cannot parse `{value}` for {key}"));
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

fn parse_floats(key: &str, value: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("cannot parse `{value}` for {key}"));
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(x.trim().parse().map_err(|_| bad())?),
            [a, b, step] => {
                let a: f64 = a.trim().parse().map_err(|_| bad())?;
                let b: f64 = b.trim().parse().map_err(|_| bad())?;
                let step: f64 = step.trim().parse().map_err(|_| bad())?;
                if step.is_nan() || step <= 0.0 || b < a {
                    return Err(bad());
                }
                let count = ((b - a) / step + 1e-9).floor() as usize + 1;
                out.extend((0..count).map(|i| tidy(a + i as f64 * step)));
            }
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

impl FromStr for GridRanges {
    type Err = Error;

    /// `components=5-15;eps=0.1:1.0:0.1;min_points=5-20`. Each value is a
    /// comma list; integer items may be `a-b` ranges and eps items
    /// `start:end:step`. Omitted keys keep their defaults.
    fn from_str(s: &str) -> Result<Self> {
        let mut ranges = GridRanges::default();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{part}`")))?;
            match key.trim() {
                "components" | "n_components" => ranges.components = parse_ints(key, value)?,
                "eps" => ranges.eps = parse_floats(key, value)?,
                "min_points" | "minpts" => ranges.min_points = parse_ints(key, value)?,
                other => return Err(Error::Config(format!("unknown grid key `{other}`"))),
            }
        }
        ranges.normalized()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptions {
    /// z-score columns before PCA.
    pub standardize: bool,
    /// Cells whose noise fraction exceeds this are rejected.
    pub noise_cap: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            standardize: true,
            noise_cap: DEFAULT_NOISE_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Scored,
    TooFewClusters,
    TooNoisy,
    ComponentsOutOfRange,
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellStatus::Scored => "scored",
            CellStatus::TooFewClusters => "too_few_clusters",
            CellStatus::TooNoisy => "too_noisy",
            CellStatus::ComponentsOutOfRange => "components_out_of_range",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub n_components: usize,
    pub eps: f64,
    pub min_points: usize,
    pub cluster_count: usize,
    pub noise_count: usize,
    pub silhouette: Option<f64>,
    pub status: CellStatus,
}

/// The winning parameter triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridChoice {
    pub n_components: usize,
    pub eps: f64,
    pub min_points: usize,
    pub silhouette: f64,
    pub cluster_count: usize,
    pub noise_count: usize,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub choice: GridChoice,
    pub labels: ClusterLabels,
    /// Every evaluated cell in (components, eps, min_points) order.
    pub cells: Vec<GridCell>,
    /// PCA truncated to the chosen dimensionality.
    pub pca: PcaModel,
}

fn evaluate(
    dist: &DistanceMatrix,
    neighbors: &[Vec<usize>],
    n_components: usize,
    eps: f64,
    min_points: usize,
    noise_cap: f64,
) -> GridCell {
    let labels = dbscan_neighborhoods(neighbors, min_points);
    let noise_count = labels.noise_count();
    let mut cell = GridCell {
        n_components,
        eps,
        min_points,
        cluster_count: labels.cluster_count,
        noise_count,
        silhouette: None,
        status: CellStatus::Scored,
    };
    if labels.cluster_count < 2 {
        cell.status = CellStatus::TooFewClusters;
    } else if noise_count as f64 > noise_cap * labels.len() as f64 {
        cell.status = CellStatus::TooNoisy;
    } else {
        match silhouette_with(dist, &labels) {
            Ok(s) => cell.silhouette = Some(s),
            Err(_) => cell.status = CellStatus::TooFewClusters,
        }
    }
    cell
}

/// Evaluates every (components, eps, min_points) cell and returns the one
/// with the highest silhouette. Ties go to fewer components, then smaller
/// eps, then smaller min_points. Cells run in parallel; the result is the
/// same as a sequential scan.
pub fn grid_search(
    matrix: &[Vec<f64>],
    ranges: &GridRanges,
    options: &GridOptions,
) -> Result<GridOutcome> {
    if matrix.is_empty() {
        return Err(Error::EmptyInput("no rows to cluster".into()));
    }
    if !(0.0..=1.0).contains(&options.noise_cap) {
        return Err(Error::Config(format!(
            "noise cap must lie in [0, 1], got {}",
            options.noise_cap
        )));
    }
    let ranges = ranges.normalized()?;
    let model = PcaModel::fit(matrix, options.standardize)?;
    let cols = model.n_components();

    let mut cells = Vec::with_capacity(ranges.cell_count());
    for &k in &ranges.components {
        if k > cols {
            for &eps in &ranges.eps {
                for &min_points in &ranges.min_points {
                    cells.push(GridCell {
                        n_components: k,
                        eps,
                        min_points,
                        cluster_count: 0,
                        noise_count: 0,
                        silhouette: None,
                        status: CellStatus::ComponentsOutOfRange,
                    });
                }
            }
            continue;
        }
        let projected = model.truncated(k)?.transform(matrix);
        let dist = DistanceMatrix::new(&projected);
        let block: Vec<Vec<GridCell>> = ranges
            .eps
            .par_iter()
            .map(|&eps| {
                let neighbors = dist.neighborhoods(eps);
                ranges
                    .min_points
                    .iter()
                    .map(|&mp| evaluate(&dist, &neighbors, k, eps, mp, options.noise_cap))
                    .collect()
            })
            .collect();
        cells.extend(block.into_iter().flatten());
    }

    let mut best: Option<&GridCell> = None;
    for cell in &cells {
        if let Some(s) = cell.silhouette {
            if best.is_none_or(|b| s > b.silhouette.expect("scored")) {
                best = Some(cell);
            }
        }
    }
    let best = best.ok_or(Error::NoValidClustering(cells.len()))?;

    let pca = model.truncated(best.n_components)?;
    let dist = DistanceMatrix::new(&pca.transform(matrix));
    let labels = dbscan_neighborhoods(&dist.neighborhoods(best.eps), best.min_points);
    let choice = GridChoice {
        n_components: best.n_components,
        eps: best.eps,
        min_points: best.min_points,
        silhouette: best.silhouette.expect("scored"),
        cluster_count: best.cluster_count,
        noise_count: best.noise_count,
    };
    Ok(GridOutcome {
        choice,
        labels,
        cells,
        pca,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> Vec<Vec<f64>> {
        // three tight blobs in 3-D, 8 points each
        let centers = [[0.0, 0.0, 0.0], [5.0, 0.0, 1.0], [0.0, 5.0, -1.0]];
        let mut pts = Vec::new();
        for (ci, c) in centers.iter().enumerate() {
            for i in 0..8 {
                let t = (i * 7 + ci * 3) as f64;
                pts.push(vec![
                    c[0] + 0.05 * t.sin(),
                    c[1] + 0.05 * t.cos(),
                    c[2] + 0.05 * (t * 0.3).sin(),
                ]);
            }
        }
        pts
    }

    #[test]
    fn default_ranges_are_the_published_grid() {
        let r = GridRanges::default();
        assert_eq!(r.components, (5..=15).collect::<Vec<_>>());
        assert_eq!(
            r.eps,
            vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
        );
        assert_eq!(r.min_points, (5..=20).collect::<Vec<_>>());
        assert_eq!(r.cell_count(), 11 * 10 * 16);
    }

    #[test]
    fn parse_ranges() {
        let r: GridRanges = "components=5-15;eps=0.1:1.0:0.1;min_points=5-20"
            .parse()
            .unwrap();
        assert_eq!(r, GridRanges::default());
        let r: GridRanges = "components=2,3;eps=0.5".parse().unwrap();
        assert_eq!(r.components, vec![2, 3]);
        assert_eq!(r.eps, vec![0.5]);
        assert_eq!(r.min_points, (5..=20).collect::<Vec<_>>());
        assert!("eps=abc".parse::<GridRanges>().is_err());
        assert!("foo=1".parse::<GridRanges>().is_err());
        assert!("components=0".parse::<GridRanges>().is_err());
    }

    #[test]
    fn finds_planted_blobs() {
        let ranges = GridRanges {
            components: vec![2, 3],
            eps: vec![0.3, 0.5, 1.0],
            min_points: vec![3, 5],
        };
        let out = grid_search(&blobs(), &ranges, &GridOptions::default()).unwrap();
        assert_eq!(out.choice.cluster_count, 3);
        assert_eq!(out.choice.noise_count, 0);
        assert!(out.choice.silhouette > 0.9);
        assert_eq!(out.cells.len(), 12);
        assert_eq!(out.labels.cluster_count, 3);
    }

    #[test]
    fn single_cell_and_rejection() {
        let pts = blobs();
        let one = GridRanges {
            components: vec![3],
            eps: vec![0.5],
            min_points: vec![5],
        };
        let out = grid_search(&pts, &one, &GridOptions::default()).unwrap();
        assert_eq!(out.cells.len(), 1);
        assert_eq!(out.choice.n_components, 3);

        // eps so large that everything merges
        let merged = GridRanges {
            components: vec![3],
            eps: vec![100.0],
            min_points: vec![5],
        };
        assert!(matches!(
            grid_search(&pts, &merged, &GridOptions::default()),
            Err(Error::NoValidClustering(1))
        ));
        // too many components for three columns
        let wide = GridRanges {
            components: vec![4],
            eps: vec![0.5],
            min_points: vec![5],
        };
        assert!(matches!(
            grid_search(&pts, &wide, &GridOptions::default()),
            Err(Error::NoValidClustering(1))
        ));
    }

    #[test]
    fn tie_break_prefers_fewer_components() {
        // Blobs are perfectly separated at every setting; identical scores
        // at several cells must resolve to the smallest triple.
        let pts = blobs();
        let ranges = GridRanges {
            components: vec![3, 2],
            eps: vec![1.0, 0.9],
            min_points: vec![4, 3],
        };
        let out = grid_search(&pts, &ranges, &GridOptions::default()).unwrap();
        let best = out
            .cells
            .iter()
            .filter_map(|c| c.silhouette)
            .fold(f64::NEG_INFINITY, f64::max);
        let first = out
            .cells
            .iter()
            .find(|c| c.silhouette == Some(best))
            .unwrap();
        assert_eq!(
            (
                out.choice.n_components,
                out.choice.eps,
                out.choice.min_points
            ),
            (first.n_components, first.eps, first.min_points)
        );
        assert_eq!(out.cells[0].n_components, 2);
        assert_eq!(out.cells[0].eps, 0.9);
        assert_eq!(out.cells[0].min_points, 3);
    }
}
