//! Attendance rate, attendance contribution and the relative attendance
//! index.
//!
//! For a class `c` with `n_reg` registrants of whom `n_att` attended, the
//! class rate is `r_c = n_att / n_reg`. A student's contribution to a class
//! is `D_sc = a_sc - r_c` and the student's index is the mean of `D_sc` over
//! their registered classes. Because `a_sc = 1` forces `r_c > 0`, every
//! index lies strictly inside `(-1, 1)`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{AttendanceMatrix, Dataset, Measure, Roster};
use crate::error::{Error, Result};

fn check_class(roster: &Roster, c: usize) -> Result<()> {
    if c >= roster.class_count() {
        return Err(Error::NotFound {
            kind: "class",
            id: format!("#{c}"),
        });
    }
    if roster.n_reg_class(c) == 0 {
        return Err(Error::DegenerateClass(roster.class_id(c).to_string()));
    }
    Ok(())
}

fn check_student(roster: &Roster, s: usize) -> Result<()> {
    if s >= roster.student_count() {
        return Err(Error::NotFound {
            kind: "student",
            id: format!("#{s}"),
        });
    }
    if roster.n_reg_student(s) == 0 {
        return Err(Error::DegenerateStudent(roster.student_id(s).to_string()));
    }
    Ok(())
}

/// r_c: fraction of the class's registrants who attended.
pub fn class_rate(roster: &Roster, att: &AttendanceMatrix, c: usize) -> Result<f64> {
    check_class(roster, c)?;
    Ok(att.n_att_class(c) as f64 / roster.n_reg_class(c) as f64)
}

/// r_s: fraction of the student's registered classes attended.
pub fn student_rate(roster: &Roster, att: &AttendanceMatrix, s: usize) -> Result<f64> {
    check_student(roster, s)?;
    Ok(att.n_att_student(s) as f64 / roster.n_reg_student(s) as f64)
}

/// D_sc = a_sc - r_c.
pub fn contribution(roster: &Roster, att: &AttendanceMatrix, s: usize, c: usize) -> Result<f64> {
    check_student(roster, s)?;
    check_class(roster, c)?;
    let a = att
        .attended(roster, s, c)
        .ok_or_else(|| Error::NotRegistered {
            student: roster.student_id(s).to_string(),
            target: roster.class_id(c).to_string(),
        })?;
    let r = att.n_att_class(c) as f64 / roster.n_reg_class(c) as f64;
    Ok(indicator(a) - r)
}

/// Mean contribution over the student's registered classes.
pub fn rai(roster: &Roster, att: &AttendanceMatrix, s: usize) -> Result<f64> {
    check_student(roster, s)?;
    let classes = roster.registered_classes(s);
    let mut sum = 0.0;
    for &c in classes {
        sum += contribution(roster, att, s, c)?;
    }
    Ok(sum / classes.len() as f64)
}

#[inline]
fn indicator(a: bool) -> f64 {
    if a {
        1.0
    } else {
        0.0
    }
}

/// Per-class rates and per-student AR / RAI for a whole roster.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTable {
    class_rate: Vec<f64>,
    ar: Vec<f64>,
    rai: Vec<f64>,
}

impl MeasureTable {
    /// Fails on the first class or student without registrations.
    pub fn compute(roster: &Roster, att: &AttendanceMatrix) -> Result<Self> {
        let class_rate = (0..roster.class_count())
            .map(|c| class_rate(roster, att, c))
            .collect::<Result<Vec<_>>>()?;
        let ar = (0..roster.student_count())
            .map(|s| student_rate(roster, att, s))
            .collect::<Result<Vec<_>>>()?;
        let mut sum = vec![0.0; roster.student_count()];
        for (c, &r) in class_rate.iter().enumerate() {
            for (&s, &a) in roster.registered_students(c).iter().zip(att.class_flags(c)) {
                sum[s] += indicator(a) - r;
            }
        }
        let rai = sum
            .iter()
            .enumerate()
            .map(|(s, d)| d / roster.n_reg_student(s) as f64)
            .collect();
        Ok(Self {
            class_rate,
            ar,
            rai,
        })
    }

    pub fn class_rates(&self) -> &[f64] {
        &self.class_rate
    }

    pub fn class_rate(&self, c: usize) -> f64 {
        self.class_rate[c]
    }

    pub fn ar(&self) -> &[f64] {
        &self.ar
    }

    pub fn rai(&self) -> &[f64] {
        &self.rai
    }

    pub fn values(&self, measure: Measure) -> &[f64] {
        match measure {
            Measure::Ar => &self.ar,
            Measure::Rai => &self.rai,
        }
    }
}

/// Per (student, category) registration tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryCells {
    categories: usize,
    n_reg: Vec<u32>,
    n_att: Vec<u32>,
    sum_contribution: Vec<f64>,
}

impl CategoryCells {
    fn idx(&self, s: usize, k: usize) -> usize {
        s * self.categories + k
    }

    pub fn category_count(&self) -> usize {
        self.categories
    }

    pub fn registered(&self, s: usize, k: usize) -> u32 {
        self.n_reg[self.idx(s, k)]
    }

    /// Within-category attendance rate; `None` without registrations there.
    pub fn ar(&self, s: usize, k: usize) -> Option<f64> {
        let i = self.idx(s, k);
        (self.n_reg[i] > 0).then(|| self.n_att[i] as f64 / self.n_reg[i] as f64)
    }

    /// Mean contribution over the student's classes in the category.
    pub fn rai(&self, s: usize, k: usize) -> Option<f64> {
        let i = self.idx(s, k);
        (self.n_reg[i] > 0).then(|| self.sum_contribution[i] / self.n_reg[i] as f64)
    }

    pub fn get(&self, measure: Measure, s: usize, k: usize) -> Option<f64> {
        match measure {
            Measure::Ar => self.ar(s, k),
            Measure::Rai => self.rai(s, k),
        }
    }
}

pub fn category_cells(dataset: &Dataset) -> CategoryCells {
    let roster = dataset.roster();
    let att = dataset.attendance();
    let rates = dataset.measures().class_rates();
    let categories = dataset.catalog().len();
    let n = roster.student_count() * categories;
    let mut cells = CategoryCells {
        categories,
        n_reg: vec![0; n],
        n_att: vec![0; n],
        sum_contribution: vec![0.0; n],
    };
    for c in 0..roster.class_count() {
        let k = dataset.class_category(c);
        for (&s, &a) in roster.registered_students(c).iter().zip(att.class_flags(c)) {
            let i = cells.idx(s, k);
            cells.n_reg[i] += 1;
            cells.n_att[i] += a as u32;
            cells.sum_contribution[i] += indicator(a) - rates[c];
        }
    }
    cells
}

impl Dataset {
    pub fn class_rate(&self, class_id: &str) -> Result<f64> {
        class_rate(
            self.roster(),
            self.attendance(),
            self.roster().class(class_id)?,
        )
    }

    pub fn student_rate(&self, student_id: &str) -> Result<f64> {
        student_rate(
            self.roster(),
            self.attendance(),
            self.roster().student(student_id)?,
        )
    }

    pub fn contribution(&self, student_id: &str, class_id: &str) -> Result<f64> {
        let s = self.roster().student(student_id)?;
        let c = self.roster().class(class_id)?;
        contribution(self.roster(), self.attendance(), s, c)
    }

    pub fn rai(&self, student_id: &str) -> Result<f64> {
        rai(
            self.roster(),
            self.attendance(),
            self.roster().student(student_id)?,
        )
    }

    /// Mean contribution over the student's classes in `category`; `None`
    /// when the student registered none there.
    pub fn rai_by_category(&self, student_id: &str, category: &str) -> Result<Option<f64>> {
        let s = self.roster().student(student_id)?;
        let k = self.category(category)?;
        Ok(self.category_mean(s, |c| self.class_category(c) == k, Measure::Rai))
    }

    pub fn ar_by_category(&self, student_id: &str, category: &str) -> Result<Option<f64>> {
        let s = self.roster().student(student_id)?;
        let k = self.category(category)?;
        Ok(self.category_mean(s, |c| self.class_category(c) == k, Measure::Ar))
    }

    /// Mean contribution over the units of `course_id` the student registered.
    pub fn course_rai(&self, student_id: &str, course_id: &str) -> Result<f64> {
        let s = self.roster().student(student_id)?;
        self.course_rai_at(s, course_id)
    }

    /// Attendance rate over the units of `course_id` the student registered.
    pub fn course_ar(&self, student_id: &str, course_id: &str) -> Result<f64> {
        let s = self.roster().student(student_id)?;
        self.course_ar_at(s, course_id)
    }

    pub(crate) fn course_rai_at(&self, s: usize, course_id: &str) -> Result<f64> {
        self.course_measure(s, course_id, Measure::Rai)
    }

    pub(crate) fn course_ar_at(&self, s: usize, course_id: &str) -> Result<f64> {
        self.course_measure(s, course_id, Measure::Ar)
    }

    fn course_measure(&self, s: usize, course_id: &str, measure: Measure) -> Result<f64> {
        let units = &self.course(course_id)?.units;
        self.category_mean(s, |c| units.binary_search(&c).is_ok(), measure)
            .ok_or_else(|| Error::NotRegistered {
                student: self.roster().student_id(s).to_string(),
                target: course_id.to_string(),
            })
    }

    fn category_mean(
        &self,
        s: usize,
        keep: impl Fn(usize) -> bool,
        measure: Measure,
    ) -> Option<f64> {
        let roster = self.roster();
        let rates = self.measures().class_rates();
        let mut sum = 0.0;
        let mut n = 0usize;
        for &c in roster.registered_classes(s) {
            if !keep(c) {
                continue;
            }
            let a = indicator(self.attendance().attended(roster, s, c)?);
            sum += match measure {
                Measure::Ar => a,
                Measure::Rai => a - rates[c],
            };
            n += 1;
        }
        (n > 0).then(|| sum / n as f64)
    }
}

/// Students x categories feature matrix used for clustering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureMatrix {
    pub student_ids: Vec<String>,
    pub categories: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// One row per student (sorted by id), one column per catalog category.
///
/// Missing cells are imputed: RAI cells with 0.0 (doing what peers do), AR
/// cells with the column mean of the observed values, or 0.0 when nobody
/// registered the category.
pub fn feature_vectors(dataset: &Dataset, measure: Measure) -> Result<FeatureMatrix> {
    let n = dataset.students().len();
    let k = dataset.catalog().len();
    if n == 0 || k == 0 {
        return Err(Error::EmptyInput(
            "dataset has no students or no categories".into(),
        ));
    }
    let cells = category_cells(dataset);
    let fill: Vec<f64> = (0..k)
        .map(|j| match measure {
            Measure::Rai => 0.0,
            Measure::Ar => {
                let observed: Vec<f64> = (0..n).filter_map(|s| cells.ar(s, j)).collect();
                if observed.is_empty() {
                    0.0
                } else {
                    observed.iter().sum::<f64>() / observed.len() as f64
                }
            }
        })
        .collect();
    let rows = (0..n)
        .map(|s| {
            (0..k)
                .map(|j| cells.get(measure, s, j).unwrap_or(fill[j]))
                .collect()
        })
        .collect();
    Ok(FeatureMatrix {
        student_ids: dataset
            .students()
            .iter()
            .map(|s| s.student_id.clone())
            .collect(),
        categories: dataset.catalog().iter().map(|c| c.code.clone()).collect(),
        rows,
    })
}

/// AR and RAI of one student restricted to one semester.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemesterMeasure {
    pub student_id: String,
    pub semester: String,
    pub registered: usize,
    pub ar: f64,
    pub rai: f64,
}

/// Per-semester AR/RAI for every (student, semester) with registrations,
/// sorted by student then semester.
pub fn semester_measures(dataset: &Dataset) -> Vec<SemesterMeasure> {
    let roster = dataset.roster();
    let rates = dataset.measures().class_rates();
    let mut out = Vec::new();
    for s in 0..roster.student_count() {
        let mut acc: BTreeMap<usize, (usize, f64, f64)> = BTreeMap::new();
        for &c in roster.registered_classes(s) {
            let a = indicator(dataset.attendance().attended(roster, s, c).unwrap_or(false));
            let e = acc.entry(dataset.class_semester(c)).or_default();
            e.0 += 1;
            e.1 += a;
            e.2 += a - rates[c];
        }
        for (sem, (n, att, d)) in acc {
            out.push(SemesterMeasure {
                student_id: roster.student_id(s).to_string(),
                semester: dataset.semesters()[sem].clone(),
                registered: n,
                ar: att / n as f64,
                rai: d / n as f64,
            });
        }
    }
    out
}

/// Registration-weighted mean of per-semester values for each student,
/// returned as `student_id -> (ar, rai)`.
pub fn weighted_aggregate(per_semester: &[SemesterMeasure]) -> BTreeMap<String, (f64, f64)> {
    let mut acc: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    for m in per_semester {
        let e = acc.entry(m.student_id.clone()).or_default();
        e.0 += m.ar * m.registered as f64;
        e.1 += m.rai * m.registered as f64;
        e.2 += m.registered;
    }
    acc.into_iter()
        .map(|(id, (ar, rai, n))| (id, (ar / n as f64, rai / n as f64)))
        .collect()
}
