use std::collections::BTreeMap;

use serde::Serialize;

use super::special::beta_reg;
use crate::error::{Error, Result};
use crate::model::{category_cells, Dataset, Measure};

/// Significance threshold applied to both measures of a category row.
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    /// Two-tailed p-value; `None` below three samples.
    pub p: Option<f64>,
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "sequences differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: x.len(),
        });
    }
    if is_constant(x) || is_constant(y) {
        return Err(Error::UndefinedCorrelation("constant input".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|x| *x == v[0])
}

/// Two-tailed p-value of a Pearson coefficient under the t statistic
/// `t = r * sqrt((n - 2) / (1 - r^2))` with `n - 2` degrees of freedom.
///
/// Uses `P(|T| > t) = I_{df / (df + t^2)}(df / 2, 1 / 2)`, where the beta
/// argument simplifies to `1 - r^2`.
pub fn p_value(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    if r.is_nan() || r.abs() > 1.0 {
        return Err(Error::Range {
            value: r,
            lo: -1.0,
            hi: 1.0,
        });
    }
    if r.abs() == 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let x = (1.0 - r * r).clamp(0.0, 1.0);
    Ok(beta_reg(0.5 * df, 0.5, x)?.clamp(0.0, 1.0))
}

/// Coefficient plus p-value when defined.
pub fn correlate(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    let r = pearson(x, y)?;
    let n = x.len();
    let p = if n >= 3 { Some(p_value(r, n)?) } else { None };
    Ok(CorrelationResult { r, n, p })
}

/// Rounds to two decimals, half away from zero (the precision of published
/// category tables).
pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Correlation between a per-student attendance measure and GPA, over the
/// students that have a GPA.
pub fn measure_gpa_correlation(dataset: &Dataset, measure: Measure) -> Result<CorrelationResult> {
    let values = dataset.measures().values(measure);
    let (xs, ys): (Vec<f64>, Vec<f64>) = dataset
        .students()
        .iter()
        .zip(values)
        .filter_map(|(s, v)| s.gpa.map(|g| (*v, g)))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: xs.len(),
        });
    }
    correlate(&xs, &ys)
}

/// One row of the per-category correlation table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryCorrelationRow {
    pub category: String,
    pub description: String,
    pub n: usize,
    pub corr_ar: Option<f64>,
    pub corr_rai: Option<f64>,
    pub p_ar: Option<f64>,
    pub p_rai: Option<f64>,
    pub retained: bool,
}

/// (grade points, within-category AR, course RAI) samples of one category.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategorySamples {
    pub points: Vec<f64>,
    pub ar: Vec<f64>,
    pub rai: Vec<f64>,
}

/// Collects, per category index, one sample per letter-graded (student,
/// course) pair whose student registered at least one unit of the course.
pub fn category_samples(dataset: &Dataset) -> Result<BTreeMap<usize, CategorySamples>> {
    let cells = category_cells(dataset);
    let mut out: BTreeMap<usize, CategorySamples> = BTreeMap::new();
    for g in dataset.grades() {
        let Some(points) = g.points else { continue };
        let Some(k) = dataset.course_category(&g.course_id) else {
            continue;
        };
        let s = dataset.student_index(&g.student_id)?;
        let rai = match dataset.course_rai_at(s, &g.course_id) {
            Ok(v) => v,
            Err(Error::NotRegistered { .. }) => continue,
            Err(e) => return Err(e),
        };
        let ar = cells
            .ar(s, k)
            .expect("registered in a unit of this category");
        let e = out.entry(k).or_default();
        e.points.push(points);
        e.ar.push(ar);
        e.rai.push(rai);
    }
    Ok(out)
}

fn lenient(x: &[f64], y: &[f64]) -> (Option<f64>, Option<f64>) {
    match correlate(x, y) {
        Ok(c) => (Some(c.r), c.p),
        Err(_) => (None, None),
    }
}

/// Per-category correlation of course grade points against the student's
/// within-category AR and course-level RAI, sorted by RAI correlation
/// (descending, undefined last, then by category code).
pub fn category_correlation_table(dataset: &Dataset) -> Result<Vec<CategoryCorrelationRow>> {
    let samples = category_samples(dataset)?;
    let empty = CategorySamples::default();
    let mut rows: Vec<CategoryCorrelationRow> = dataset
        .catalog()
        .iter()
        .enumerate()
        .map(|(k, cat)| {
            let s = samples.get(&k).unwrap_or(&empty);
            let (corr_ar, p_ar) = lenient(&s.ar, &s.points);
            let (corr_rai, p_rai) = lenient(&s.rai, &s.points);
            let retained =
                matches!((p_ar, p_rai), (Some(a), Some(b)) if a < SIGNIFICANCE && b < SIGNIFICANCE);
            CategoryCorrelationRow {
                category: cat.code.clone(),
                description: cat.description.clone(),
                n: s.points.len(),
                corr_ar,
                corr_rai,
                p_ar,
                p_rai,
                retained,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        let key = |r: &CategoryCorrelationRow| r.corr_rai.unwrap_or(f64::NEG_INFINITY);
        key(b)
            .total_cmp(&key(a))
            .then_with(|| a.corr_rai.is_none().cmp(&b.corr_rai.is_none()))
            .then_with(|| a.category.cmp(&b.category))
    });
    Ok(rows)
}
