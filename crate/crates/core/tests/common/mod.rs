//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's numerical code.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A raw (roster, attendance) instance: `flags[s]` lists `(class, attended)`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub students: usize,
    pub classes: usize,
    pub flags: Vec<Vec<(usize, bool)>>,
}

impl Instance {
    pub fn student_ids(&self) -> Vec<String> {
        (0..self.students).map(|s| format!("s{s:04}")).collect()
    }

    pub fn class_ids(&self) -> Vec<String> {
        (0..self.classes).map(|c| format!("c{c:04}")).collect()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.flags
            .iter()
            .enumerate()
            .flat_map(|(s, f)| f.iter().map(move |&(c, _)| (s, c)))
            .collect()
    }

    pub fn triples(&self) -> Vec<(usize, usize, bool)> {
        self.flags
            .iter()
            .enumerate()
            .flat_map(|(s, f)| f.iter().map(move |&(c, a)| (s, c, a)))
            .collect()
    }

    /// Class attendance rates by direct counting.
    pub fn class_rates(&self) -> Vec<f64> {
        let mut reg = vec![0usize; self.classes];
        let mut att = vec![0usize; self.classes];
        for f in &self.flags {
            for &(c, a) in f {
                reg[c] += 1;
                att[c] += usize::from(a);
            }
        }
        reg.iter()
            .zip(&att)
            .map(|(&r, &a)| a as f64 / r as f64)
            .collect()
    }

    /// Per-student (AR, RAI, contributions) straight from the definitions.
    pub fn measures(&self) -> Vec<(f64, f64, Vec<f64>)> {
        let rc = self.class_rates();
        self.flags
            .iter()
            .map(|f| {
                let n = f.len() as f64;
                let ar = f.iter().filter(|(_, a)| *a).count() as f64 / n;
                let d: Vec<f64> = f
                    .iter()
                    .map(|&(c, a)| f64::from(u8::from(a)) - rc[c])
                    .collect();
                let rai = d.iter().sum::<f64>() / n;
                (ar, rai, d)
            })
            .collect()
    }
}

/// Random instance where every student has at least one class and every
/// class at least one student. Shapes include single-class students,
/// single-registrant classes and all-present / all-absent classes.
pub fn random_instance(rng: &mut ChaCha8Rng, max_students: usize, max_classes: usize) -> Instance {
    let students = rng.random_range(1..=max_students);
    let classes = rng.random_range(1..=max_classes);
    let density: f64 = rng.random_range(0.05..1.0);
    let bias: f64 = rng.random_range(0.0..1.0);
    let mut member = vec![vec![false; classes]; students];
    for row in member.iter_mut() {
        for cell in row.iter_mut() {
            *cell = rng.random_bool(density);
        }
    }
    for (s, row) in member.iter_mut().enumerate() {
        if !row.iter().any(|&m| m) {
            row[s % classes] = true;
        }
    }
    for c in 0..classes {
        if !member.iter().any(|row| row[c]) {
            member[c % students][c] = true;
        }
    }
    let flags = member
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, m)| **m)
                .map(|(c, _)| (c, rng.random_bool(bias)))
                .collect()
        })
        .collect();
    Instance {
        students,
        classes,
        flags,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two-sided p-value of Pearson r with n samples, by Simpson integration of
/// the Student t density (n - 2 degrees of freedom). Uses t = tan(theta) so
/// the infinite tail becomes a finite interval, and normalizes the density
/// numerically instead of through gamma functions.
pub fn t_test_p_by_integration(r: f64, n: usize) -> f64 {
    let nu = (n - 2) as f64;
    let t0 = r.abs() * (nu / (1.0 - r * r)).sqrt();
    let kernel = |theta: f64| {
        let t = theta.tan();
        let c = theta.cos();
        (1.0 + t * t / nu).powf(-(nu + 1.0) / 2.0) / (c * c)
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let total = simpson(kernel, -half_pi + 1e-12, half_pi - 1e-12, 200_000);
    let tail = simpson(kernel, t0.atan(), half_pi - 1e-12, 200_000);
    2.0 * tail / total
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Textbook product-moment correlation written out longhand.
pub fn pearson_longhand(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let p = self.0[i];
        if p == i {
            return i;
        }
        let root = self.find(p);
        self.0[i] = root;
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Quadratic DBSCAN: core by neighbor count (self included, plain Euclidean
/// distance), clusters as union-find components over core pairs, border
/// points attached to their lowest-index core neighbor. Returns raw labels
/// (component root ids) and the core mask.
pub fn dbscan_reference(
    points: &[Vec<f64>],
    eps: f64,
    min_points: usize,
) -> (Vec<Option<usize>>, Vec<bool>) {
    let n = points.len();
    let near = |i: usize, j: usize| euclid(&points[i], &points[j]) <= eps;
    let core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_points)
        .collect();
    let mut uf = UnionFind((0..n).collect());
    for i in 0..n {
        for j in i + 1..n {
            if core[i] && core[j] && near(i, j) {
                uf.union(i, j);
            }
        }
    }
    let labels = (0..n)
        .map(|i| {
            if core[i] {
                Some(uf.find(i))
            } else {
                (0..n).find(|&j| core[j] && near(i, j)).map(|j| uf.find(j))
            }
        })
        .collect();
    (labels, core)
}

/// True when both labelings induce the same partition and the same noise set.
pub fn same_partition(a: &[Option<usize>], b: &[Option<usize>]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut ab: HashMap<usize, usize> = HashMap::new();
    let mut ba: HashMap<usize, usize> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        match (x, y) {
            (None, None) => {}
            (Some(x), Some(y)) => {
                if *ab.entry(*x).or_insert(*y) != *y || *ba.entry(*y).or_insert(*x) != *x {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

/// Silhouette by the direct double loop over point pairs.
pub fn silhouette_reference(points: &[Vec<f64>], labels: &[Option<usize>]) -> Option<f64> {
    let clusters: Vec<usize> = {
        let mut c: Vec<usize> = labels.iter().flatten().copied().collect();
        c.sort_unstable();
        c.dedup();
        c
    };
    if clusters.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (i, li) in labels.iter().enumerate() {
        let Some(own) = li else { continue };
        count += 1;
        let mean_to = |target: usize, skip_self: bool| {
            let mut sum = 0.0;
            let mut m = 0usize;
            for (j, lj) in labels.iter().enumerate() {
                if *lj == Some(target) && !(skip_self && j == i) {
                    sum += euclid(&points[i], &points[j]);
                    m += 1;
                }
            }
            (sum, m)
        };
        let (sa, ma) = mean_to(*own, true);
        if ma == 0 {
            continue; // singleton scores 0
        }
        let a = sa / ma as f64;
        let b = clusters
            .iter()
            .filter(|&&c| c != *own)
            .map(|&c| {
                let (s, m) = mean_to(c, false);
                s / m as f64
            })
            .fold(f64::INFINITY, f64::min);
        if a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    Some(total / count as f64)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(0.0..scale)).collect())
        .collect()
}

/// Default letter scale, written out independently of the library.
pub fn letter_points(letter: &str) -> Option<f64> {
    Some(match letter {
        "A" => 4.0,
        "A-" => 3.7,
        "B+" => 3.3,
        "B" => 3.0,
        "B-" => 2.7,
        "C+" => 2.3,
        "C" => 2.0,
        "C-" => 1.7,
        "D+" => 1.3,
        "D" => 1.0,
        "F" => 0.0,
        _ => return None,
    })
}

/// Student and course-level measures recomputed from raw attendance rows.
pub struct RawMeasures {
    pub ar: HashMap<String, f64>,
    pub rai: HashMap<String, f64>,
    /// (student, course) -> mean contribution over the course's units.
    pub course_rai: HashMap<(String, String), f64>,
    /// Unweighted mean points over letter grades.
    pub gpa: HashMap<String, f64>,
}

pub fn raw_measures(t: &rai::model::DatasetTables) -> RawMeasures {
    let course_of: HashMap<&str, &str> = t
        .classes
        .iter()
        .map(|c| (c.class_id.as_str(), c.course_id.as_str()))
        .collect();
    let mut class_tally: HashMap<&str, (f64, f64)> = HashMap::new();
    for a in &t.attendance {
        let e = class_tally.entry(a.class_id.as_str()).or_default();
        e.0 += 1.0;
        e.1 += f64::from(a.attended);
    }
    let mut student: HashMap<&str, (f64, f64, f64)> = HashMap::new();
    let mut course: HashMap<(String, String), (f64, f64)> = HashMap::new();
    for a in &t.attendance {
        let (n, k) = class_tally[a.class_id.as_str()];
        let flag = f64::from(a.attended);
        let d = flag - k / n;
        let e = student.entry(a.student_id.as_str()).or_default();
        e.0 += 1.0;
        e.1 += flag;
        e.2 += d;
        let key = (
            a.student_id.clone(),
            course_of[a.class_id.as_str()].to_string(),
        );
        let c = course.entry(key).or_default();
        c.0 += 1.0;
        c.1 += d;
    }
    let mut gpa_acc: HashMap<&str, (f64, f64)> = HashMap::new();
    for g in &t.grades {
        if let Some(p) = letter_points(&g.letter) {
            let e = gpa_acc.entry(g.student_id.as_str()).or_default();
            e.0 += 1.0;
            e.1 += p;
        }
    }
    RawMeasures {
        ar: student
            .iter()
            .map(|(s, v)| (s.to_string(), v.1 / v.0))
            .collect(),
        rai: student
            .iter()
            .map(|(s, v)| (s.to_string(), v.2 / v.0))
            .collect(),
        course_rai: course.into_iter().map(|(k, v)| (k, v.1 / v.0)).collect(),
        gpa: gpa_acc
            .into_iter()
            .map(|(s, v)| (s.to_string(), v.1 / v.0))
            .collect(),
    }
}
