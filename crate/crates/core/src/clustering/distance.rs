/// Squared Euclidean distance.
#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Dense symmetric matrix of squared Euclidean distances.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    sq: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(points: &[Vec<f64>]) -> Self {
        let n = points.len();
        let mut sq = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = squared_euclidean(&points[i], &points[j]);
                sq[i * n + j] = d;
                sq[j * n + i] = d;
            }
        }
        Self { n, sq }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn squared(&self, i: usize, j: usize) -> f64 {
        self.sq[i * self.n + j]
    }

    #[inline]
    pub fn euclidean(&self, i: usize, j: usize) -> f64 {
        self.squared(i, j).sqrt()
    }

    /// Indices within `eps` of each point (itself included), ascending.
    pub fn neighborhoods(&self, eps: f64) -> Vec<Vec<usize>> {
        let eps_sq = eps * eps;
        (0..self.n)
            .map(|i| {
                let row = &self.sq[i * self.n..(i + 1) * self.n];
                row.iter()
                    .enumerate()
                    .filter(|(_, d)| **d <= eps_sq)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect()
    }
}
