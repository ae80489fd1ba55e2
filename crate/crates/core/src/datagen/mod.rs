//! Synthetic cohorts with known ground truth.
//!
//! Each student has a latent motivation drawn from a Beta distribution. It
//! drives attendance, with probability
//! `clamp(floor * mandatory + motivation * (1 - floor * mandatory) + affinity)`,
//! and grades, as `max_points * clamp(motivation + noise * N(0, 1))` snapped
//! to the nearest letter. Mandatory courses therefore lift attendance for
//! everyone, which is the confounder a peer-normalized index removes.
//!
//! Randomness comes from ChaCha8 streams keyed by SHA-256 of
//! `seed|kind|entity`, so an entity's draws do not depend on how many other
//! entities exist.

mod config;

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{
    preset, preset_configs, preset_g1, preset_g2, preset_g3, GenConfig, GroupSpec, MajorSpec,
};

use crate::error::{Error, Result};
use crate::model::{
    AttendanceRow, CatalogRow, ClassUnit, Dataset, DatasetTables, GradeRow, GradeScale,
    IngestWarning, RegistrationRow, StudentRow,
};

/// Student ids added by the edge-case block.
pub const EDGE_ONE_CLASS: &str = "X-ONE";
pub const EDGE_NO_CLASS: &str = "X-NONE";
/// Course ids added by the edge-case block.
pub const EDGE_SOLO_COURSE: &str = "XSOLO";
pub const EDGE_EMPTY_COURSE: &str = "XEMPTY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentTruth {
    pub student_id: String,
    pub motivation: f64,
    pub group: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourseTruth {
    pub course_id: String,
    pub category: String,
    pub mandatory: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub students: Vec<StudentTruth>,
    pub courses: Vec<CourseTruth>,
}

impl GroundTruth {
    pub fn student(&self, id: &str) -> Option<&StudentTruth> {
        self.students.iter().find(|s| s.student_id == id)
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub tables: DatasetTables,
    pub truth: GroundTruth,
}

impl Generated {
    pub fn dataset(&self, scale: GradeScale) -> Result<(Dataset, Vec<IngestWarning>)> {
        Dataset::from_tables(&self.tables, scale)
    }
}

/// Independent generator for one entity.
pub fn stream(seed: u64, kind: &str, id: &str) -> ChaCha8Rng {
    let digest = Sha256::digest(format!("{seed}|{kind}|{id}").as_bytes());
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

struct Course {
    id: String,
    category: usize,
    semester: String,
    mandatory: bool,
}

impl Course {
    fn class_id(&self, unit: usize) -> String {
        format!("{}-U{:02}", self.id, unit + 1)
    }
}

fn category_code(k: usize) -> String {
    format!("K{:02}", k + 1)
}

/// Generates a cohort graded on the default letter scale.
pub fn generate(config: &GenConfig) -> Result<Generated> {
    generate_with_scale(config, &GradeScale::default())
}

pub fn generate_with_scale(config: &GenConfig, scale: &GradeScale) -> Result<Generated> {
    config.validate()?;
    let seed = config.seed;
    let mut tables = DatasetTables::default();
    let mut truth = GroundTruth::default();

    for k in 0..config.categories {
        tables.catalog.push(CatalogRow {
            category: category_code(k),
            description: format!("Category {:02}", k + 1),
        });
    }

    // Policies are set per category so whole categories can be compared.
    let n_courses = config.course_count();
    let n_mandatory = (config.mandatory_fraction * config.categories as f64).round() as usize;
    let mandatory: BTreeSet<usize> = index::sample(
        &mut stream(seed, "policy", "categories"),
        config.categories,
        n_mandatory,
    )
    .into_iter()
    .collect();
    let courses: Vec<Course> = (0..n_courses)
        .map(|i| {
            let (k, j) = (
                i / config.courses_per_category,
                i % config.courses_per_category,
            );
            Course {
                id: format!("K{:02}C{:02}", k + 1, j + 1),
                category: k,
                semester: format!("S{}", i % config.semesters + 1),
                mandatory: mandatory.contains(&k),
            }
        })
        .collect();
    for c in &courses {
        truth.courses.push(CourseTruth {
            course_id: c.id.clone(),
            category: category_code(c.category),
            mandatory: c.mandatory,
        });
        for u in 0..config.units_per_course {
            tables.classes.push(ClassUnit {
                class_id: c.class_id(u),
                course_id: c.id.clone(),
                category: category_code(c.category),
                semester: c.semester.clone(),
            });
        }
    }

    let motivation = Beta::new(config.motivation_alpha, config.motivation_beta)
        .map_err(|e| Error::Config(format!("motivation distribution: {e}")))?;
    let major_weights = WeightedIndex::new(config.majors.iter().map(|m| m.weight))
        .map_err(|e| Error::Config(format!("major weights: {e}")))?;
    let mut group_of = Vec::with_capacity(config.students);
    for (g, spec) in config.groups.iter().enumerate() {
        group_of.extend(std::iter::repeat_n(Some(g), spec.size));
    }
    group_of.resize(config.students, None);

    let max_points = scale.max_points();
    for (i, &group) in group_of.iter().enumerate() {
        let id = format!("S{:05}", i + 1);
        let spec = group.map(|g| &config.groups[g]);
        let mut rng = stream(seed, "student", &id);
        let m: f64 = motivation.sample(&mut rng);
        let major = match spec {
            Some(g) if !g.majors.is_empty() => {
                g.majors[rng.random_range(0..g.majors.len())].clone()
            }
            _ => config.majors[major_weights.sample(&mut rng)].code.clone(),
        };
        let cohort = (2014 + rng.random_range(0..6)).to_string();
        let mut taken: Vec<usize> = if config.registrations_per_student == n_courses {
            (0..n_courses).collect()
        } else if let Some(g) = spec {
            index::sample_weighted(
                &mut rng,
                n_courses,
                |c| (1.0 + g.affinity[courses[c].category]).max(0.05),
                config.registrations_per_student,
            )
            .map_err(|e| Error::Config(format!("registration weights: {e}")))?
            .into_iter()
            .collect()
        } else {
            index::sample(&mut rng, n_courses, config.registrations_per_student).into_vec()
        };
        taken.sort_unstable();

        tables.students.push(StudentRow {
            student_id: id.clone(),
            major,
            cohort,
        });
        truth.students.push(StudentTruth {
            student_id: id.clone(),
            motivation: m,
            group,
        });

        let mut att_rng = stream(seed, "attendance", &id);
        let mut grade_rng = stream(seed, "grade", &id);
        for &c in &taken {
            let course = &courses[c];
            let floor = if course.mandatory {
                config.policy_floor
            } else {
                0.0
            };
            let affinity = spec.map_or(0.0, |g| g.affinity[course.category]);
            let p = (floor + m * (1.0 - floor) + affinity).clamp(0.0, 1.0);
            for u in 0..config.units_per_course {
                let class_id = course.class_id(u);
                tables.registrations.push(RegistrationRow {
                    student_id: id.clone(),
                    class_id: class_id.clone(),
                });
                tables.attendance.push(AttendanceRow {
                    student_id: id.clone(),
                    class_id,
                    attended: u8::from(att_rng.random_bool(p)),
                });
            }
            let z: f64 = StandardNormal.sample(&mut grade_rng);
            let raw = max_points * (m + config.grade_noise * z).clamp(0.0, 1.0);
            tables.grades.push(GradeRow {
                student_id: id.clone(),
                course_id: course.id.clone(),
                letter: scale.quantize(raw).to_string(),
            });
        }
    }

    if config.edge_cases {
        add_edge_cases(&mut tables, &mut truth, scale);
    }
    Ok(Generated { tables, truth })
}

/// Appends: a student registered in exactly one class, a class with exactly
/// one registrant (graded P), a class with no registrants and a student with
/// no registrations. The last two are dropped on ingestion.
fn add_edge_cases(tables: &mut DatasetTables, truth: &mut GroundTruth, scale: &GradeScale) {
    let first_class = tables.classes[0].clone();
    let first_student = tables.students[0].student_id.clone();
    let category = first_class.category.clone();
    let semester = first_class.semester.clone();

    for course in [EDGE_SOLO_COURSE, EDGE_EMPTY_COURSE] {
        tables.classes.push(ClassUnit {
            class_id: format!("{course}-U01"),
            course_id: course.to_string(),
            category: category.clone(),
            semester: semester.clone(),
        });
        truth.courses.push(CourseTruth {
            course_id: course.to_string(),
            category: category.clone(),
            mandatory: false,
        });
    }
    tables.registrations.push(RegistrationRow {
        student_id: first_student.clone(),
        class_id: format!("{EDGE_SOLO_COURSE}-U01"),
    });
    tables.attendance.push(AttendanceRow {
        student_id: first_student.clone(),
        class_id: format!("{EDGE_SOLO_COURSE}-U01"),
        attended: 1,
    });
    tables.grades.push(GradeRow {
        student_id: first_student,
        course_id: EDGE_SOLO_COURSE.to_string(),
        letter: "P".to_string(),
    });

    for id in [EDGE_ONE_CLASS, EDGE_NO_CLASS] {
        tables.students.push(StudentRow {
            student_id: id.to_string(),
            major: tables.students[0].major.clone(),
            cohort: tables.students[0].cohort.clone(),
        });
        truth.students.push(StudentTruth {
            student_id: id.to_string(),
            motivation: 0.5,
            group: None,
        });
    }
    tables.registrations.push(RegistrationRow {
        student_id: EDGE_ONE_CLASS.to_string(),
        class_id: first_class.class_id.clone(),
    });
    tables.attendance.push(AttendanceRow {
        student_id: EDGE_ONE_CLASS.to_string(),
        class_id: first_class.class_id,
        attended: 1,
    });
    tables.grades.push(GradeRow {
        student_id: EDGE_ONE_CLASS.to_string(),
        course_id: first_class.course_id,
        letter: scale.quantize(0.75 * scale.max_points()).to_string(),
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::pearson;

    fn dataset(cfg: &GenConfig) -> (Dataset, GroundTruth, Vec<IngestWarning>) {
        let g = generate(cfg).unwrap();
        let (d, w) = g.dataset(GradeScale::default()).unwrap();
        (d, g.truth, w)
    }

    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &k in &idx[i..=j] {
                r[k] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }

    #[test]
    fn same_seed_same_tables() {
        for cfg in preset_configs() {
            let a = generate(&cfg).unwrap();
            let b = generate(&cfg).unwrap();
            assert_eq!(a.tables, b.tables);
            assert_eq!(a.truth, b.truth);
        }
        let mut other = preset_g1();
        other.seed += 1;
        assert_ne!(
            generate(&other).unwrap().tables,
            generate(&preset_g1()).unwrap().tables
        );
    }

    #[test]
    fn adding_students_keeps_existing_ones() {
        let mut cfg = preset_g1();
        cfg.students = 50;
        let small = generate(&cfg).unwrap();
        cfg.students = 80;
        let large = generate(&cfg).unwrap();
        assert_eq!(small.tables.students[..], large.tables.students[..50]);
        assert_eq!(small.truth.students[..], large.truth.students[..50]);
        let n = small.tables.attendance.len();
        assert_eq!(small.tables.attendance[..], large.tables.attendance[..n]);
    }

    #[test]
    fn generated_data_passes_ingestion() {
        for cfg in [preset_g1(), preset_g2()] {
            let (d, truth, warnings) = dataset(&cfg);
            assert!(warnings.is_empty(), "{warnings:?}");
            assert_eq!(d.students().len(), cfg.students);
            assert_eq!(truth.students.len(), cfg.students);
            assert_eq!(truth.courses.len(), cfg.course_count());
            assert_eq!(
                d.roster().registration_count(),
                cfg.students * cfg.registrations_per_student * cfg.units_per_course
            );
        }
    }

    #[test]
    fn g3_exercises_degenerate_paths() {
        let (d, _, warnings) = dataset(&preset_g3());
        let kinds: BTreeSet<&str> = warnings.iter().map(IngestWarning::kind).collect();
        assert!(kinds.contains("dropped_class"));
        assert!(kinds.contains("dropped_student"));
        assert!(kinds.contains("excluded_grade"));
        let r = d.roster();
        let one = r.student(EDGE_ONE_CLASS).unwrap();
        assert_eq!(r.n_reg_student(one), 1);
        let solo = r.class(&format!("{EDGE_SOLO_COURSE}-U01")).unwrap();
        assert_eq!(r.n_reg_class(solo), 1);
        assert!(r.student(EDGE_NO_CLASS).is_err());
    }

    #[test]
    fn full_enforcement_flattens_everything() {
        let mut cfg = preset_g1();
        cfg.students = 60;
        cfg.mandatory_fraction = 1.0;
        cfg.policy_floor = 1.0;
        let (d, _, _) = dataset(&cfg);
        assert!(d.measures().ar().iter().all(|&a| a == 1.0));
        assert!(d.measures().rai().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn noiseless_grades_track_motivation() {
        let mut cfg = preset_g1();
        cfg.mandatory_fraction = 0.0;
        cfg.grade_noise = 0.0;
        let (d, truth, _) = dataset(&cfg);
        let gpa: Vec<f64> = d.students().iter().map(|s| s.gpa.unwrap()).collect();
        let m: Vec<f64> = truth.students.iter().map(|s| s.motivation).collect();
        // every course gets the same letter, so GPA is monotone in motivation
        let mut order: Vec<usize> = (0..m.len()).collect();
        order.sort_by(|&a, &b| m[a].total_cmp(&m[b]));
        assert!(order.windows(2).all(|w| gpa[w[0]] <= gpa[w[1]]));
        assert!(pearson(&ranks(&m), &ranks(&gpa)).unwrap() > 0.99);
    }

    #[test]
    fn mandatory_policies_compress_attendance_signal() {
        let rank_corr = |frac: f64| {
            let mut cfg = preset_g1();
            cfg.grade_noise = 0.0;
            cfg.mandatory_fraction = frac;
            let (d, truth, _) = dataset(&cfg);
            let m: Vec<f64> = truth.students.iter().map(|s| s.motivation).collect();
            pearson(&ranks(&m), &ranks(d.measures().ar())).unwrap()
        };
        let open = rank_corr(0.0);
        let strict = rank_corr(0.9);
        assert!(open > 0.0);
        assert!(open >= strict, "{open} < {strict}");
    }

    #[test]
    fn planted_groups_partition_students() {
        let cfg = preset_g2();
        let g = generate(&cfg).unwrap();
        for (gi, spec) in cfg.groups.iter().enumerate() {
            let members = g
                .truth
                .students
                .iter()
                .filter(|s| s.group == Some(gi))
                .count();
            assert_eq!(members, spec.size);
        }
        for (row, t) in g.tables.students.iter().zip(&g.truth.students) {
            let spec = &cfg.groups[t.group.unwrap()];
            assert!(spec.majors.contains(&row.major));
        }
    }
}
