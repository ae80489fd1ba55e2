use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorSpec {
    pub code: String,
    /// Relative share of the population; need not sum to one.
    pub weight: f64,
}

/// A planted group of students sharing category-level attendance habits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub size: usize,
    /// Majors drawn uniformly for members; empty means the global mix.
    #[serde(default)]
    pub majors: Vec<String>,
    /// Additive attendance-probability shift per category.
    pub affinity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub name: String,
    pub seed: u64,
    pub students: usize,
    pub majors: Vec<MajorSpec>,
    pub categories: usize,
    pub courses_per_category: usize,
    /// Attendance flags (meetings) per course.
    pub units_per_course: usize,
    pub registrations_per_student: usize,
    pub semesters: usize,
    /// Share of categories whose courses all enforce attendance.
    pub mandatory_fraction: f64,
    /// Probability of attending a mandatory course regardless of motivation.
    pub policy_floor: f64,
    pub motivation_alpha: f64,
    pub motivation_beta: f64,
    /// Standard deviation of the normal noise added to motivation for grades.
    pub grade_noise: f64,
    #[serde(default)]
    pub groups: Vec<GroupSpec>,
    /// Append hand-built degenerate entities (see `generate`).
    #[serde(default)]
    pub edge_cases: bool,
}

impl GenConfig {
    pub fn course_count(&self) -> usize {
        self.categories * self.courses_per_category
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for (name, v) in [
            ("students", self.students),
            ("categories", self.categories),
            ("courses_per_category", self.courses_per_category),
            ("units_per_course", self.units_per_course),
            ("registrations_per_student", self.registrations_per_student),
            ("semesters", self.semesters),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.registrations_per_student > self.course_count() {
            return bad(format!(
                "{} registrations per student but only {} courses",
                self.registrations_per_student,
                self.course_count()
            ));
        }
        for (name, p) in [
            ("mandatory_fraction", self.mandatory_fraction),
            ("policy_floor", self.policy_floor),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.motivation_alpha > 0.0 && self.motivation_beta > 0.0) {
            return bad("motivation Beta parameters must be positive".into());
        }
        if !(self.grade_noise >= 0.0 && self.grade_noise.is_finite()) {
            return bad(format!(
                "grade_noise must be non-negative, got {}",
                self.grade_noise
            ));
        }
        if self.majors.is_empty() {
            return bad("at least one major is required".into());
        }
        if self
            .majors
            .iter()
            .any(|m| !(m.weight > 0.0 && m.weight.is_finite()))
        {
            return bad("major weights must be positive".into());
        }
        if !self.groups.is_empty() {
            let total: usize = self.groups.iter().map(|g| g.size).sum();
            if total != self.students {
                return bad(format!(
                    "group sizes sum to {total} but there are {} students",
                    self.students
                ));
            }
            for (i, g) in self.groups.iter().enumerate() {
                if g.affinity.len() != self.categories {
                    return bad(format!(
                        "group {i} has {} affinities for {} categories",
                        g.affinity.len(),
                        self.categories
                    ));
                }
                if g.affinity.iter().any(|a| !(-1.0..=1.0).contains(a)) {
                    return bad(format!("group {i} affinities must lie in [-1, 1]"));
                }
                if let Some(m) = g
                    .majors
                    .iter()
                    .find(|m| !self.majors.iter().any(|s| &s.code == *m))
                {
                    return bad(format!("group {i} names unknown major `{m}`"));
                }
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: GenConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn majors(codes: &[(&str, f64)]) -> Vec<MajorSpec> {
    codes
        .iter()
        .map(|(c, w)| MajorSpec {
            code: c.to_string(),
            weight: *w,
        })
        .collect()
}

/// Correlation demo: half the categories enforce attendance.
pub fn preset_g1() -> GenConfig {
    GenConfig {
        name: "G1".into(),
        seed: 1,
        students: 600,
        majors: majors(&[
            ("CS", 3.0),
            ("ECO", 2.0),
            ("MATH", 1.5),
            ("PSY", 1.5),
            ("BIO", 1.0),
            ("ART", 1.0),
        ]),
        categories: 8,
        courses_per_category: 5,
        units_per_course: 8,
        registrations_per_student: 10,
        semesters: 2,
        mandatory_fraction: 0.5,
        policy_floor: 0.9,
        motivation_alpha: 2.0,
        motivation_beta: 2.0,
        grade_noise: 0.15,
        groups: Vec::new(),
        edge_cases: false,
    }
}

/// Planted-cluster demo: four groups, each over-attending its own block of
/// four categories; every student takes every course.
pub fn preset_g2() -> GenConfig {
    const GROUPS: usize = 4;
    const CATEGORIES: usize = 16;
    let block = CATEGORIES / GROUPS;
    let codes = ["CS", "EE", "ECO", "FIN", "PSY", "SOC", "ART", "MUS"];
    let groups = (0..GROUPS)
        .map(|g| GroupSpec {
            size: 90,
            majors: codes[2 * g..2 * g + 2]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            affinity: (0..CATEGORIES)
                .map(|k| if k / block == g { 0.3 } else { -0.3 })
                .collect(),
        })
        .collect();
    GenConfig {
        name: "G2".into(),
        seed: 2,
        students: 90 * GROUPS,
        majors: majors(&codes.iter().map(|c| (*c, 1.0)).collect::<Vec<_>>()),
        categories: CATEGORIES,
        courses_per_category: 1,
        units_per_course: 24,
        registrations_per_student: CATEGORIES,
        semesters: 1,
        mandatory_fraction: 0.0,
        policy_floor: 0.9,
        motivation_alpha: 30.0,
        motivation_beta: 30.0,
        grade_noise: 0.1,
        groups,
        edge_cases: false,
    }
}

/// Small cohort with degenerate entities appended.
pub fn preset_g3() -> GenConfig {
    GenConfig {
        name: "G3".into(),
        seed: 3,
        students: 24,
        majors: majors(&[("CS", 1.0), ("ECO", 1.0), ("ART", 1.0)]),
        categories: 3,
        courses_per_category: 2,
        units_per_course: 2,
        registrations_per_student: 3,
        semesters: 1,
        mandatory_fraction: 0.5,
        policy_floor: 0.9,
        motivation_alpha: 2.0,
        motivation_beta: 2.0,
        grade_noise: 0.2,
        groups: Vec::new(),
        edge_cases: true,
    }
}

/// The shipped presets by name.
pub fn preset_configs() -> Vec<GenConfig> {
    vec![preset_g1(), preset_g2(), preset_g3()]
}

pub fn preset(name: &str) -> Result<GenConfig> {
    preset_configs()
        .into_iter()
        .find(|c| c.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}` (expected G1, G2 or G3)")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_round_trip() {
        for cfg in preset_configs() {
            cfg.validate().unwrap();
            let text = cfg.to_toml().unwrap();
            assert_eq!(GenConfig::from_toml(&text).unwrap(), cfg);
        }
        assert_eq!(preset("g1").unwrap().name, "G1");
        assert!(preset("G9").is_err());
    }

    #[test]
    fn g2_groups_have_distinct_affinities() {
        let cfg = preset_g2();
        assert!(cfg.groups.len() >= 3);
        for (i, a) in cfg.groups.iter().enumerate() {
            for b in &cfg.groups[i + 1..] {
                assert_ne!(a.affinity, b.affinity);
            }
        }
    }

    #[test]
    fn infeasible_configs_are_rejected() {
        let mut cfg = preset_g1();
        cfg.registrations_per_student = cfg.course_count() + 1;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));

        let mut cfg = preset_g1();
        cfg.policy_floor = 1.5;
        assert!(cfg.validate().is_err());

        let mut cfg = preset_g2();
        cfg.groups[0].size += 1;
        assert!(cfg.validate().is_err());

        let mut cfg = preset_g2();
        cfg.groups[1].affinity.pop();
        assert!(cfg.validate().is_err());

        let mut cfg = preset_g1();
        cfg.students = 0;
        assert!(cfg.validate().is_err());
    }
}
