use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::measures::MeasureTable;
use super::{
    AttendanceMatrix, Category, ClassUnit, GradeRecord, GradeScale, Roster, StudentRecord,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentRow {
    pub student_id: String,
    pub major: String,
    pub cohort: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistrationRow {
    pub student_id: String,
    pub class_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttendanceRow {
    pub student_id: String,
    pub class_id: String,
    pub attended: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeRow {
    pub student_id: String,
    pub course_id: String,
    pub letter: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogRow {
    pub category: String,
    pub description: String,
}

/// The six input tables, row for row, before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetTables {
    pub students: Vec<StudentRow>,
    pub classes: Vec<ClassUnit>,
    pub registrations: Vec<RegistrationRow>,
    pub attendance: Vec<AttendanceRow>,
    pub grades: Vec<GradeRow>,
    pub catalog: Vec<CatalogRow>,
}

/// Something ingestion dropped or excluded instead of failing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IngestWarning {
    DroppedClass {
        class_id: String,
    },
    DroppedStudent {
        student_id: String,
    },
    /// Non-letter grade kept in storage but excluded from analysis.
    ExcludedGrade {
        student_id: String,
        course_id: String,
        letter: String,
    },
    /// Grade belonging to a dropped student.
    DroppedGrade {
        student_id: String,
        course_id: String,
    },
}

impl IngestWarning {
    pub fn kind(&self) -> &'static str {
        match self {
            IngestWarning::DroppedClass { .. } => "dropped_class",
            IngestWarning::DroppedStudent { .. } => "dropped_student",
            IngestWarning::ExcludedGrade { .. } => "excluded_grade",
            IngestWarning::DroppedGrade { .. } => "dropped_grade",
        }
    }
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestWarning::DroppedClass { class_id } => {
                write!(f, "class {class_id} has no registrations; dropped")
            }
            IngestWarning::DroppedStudent { student_id } => {
                write!(f, "student {student_id} has no registrations; dropped")
            }
            IngestWarning::ExcludedGrade {
                student_id,
                course_id,
                letter,
            } => write!(
                f,
                "grade `{letter}` of {student_id} in {course_id} is not a letter grade; excluded"
            ),
            IngestWarning::DroppedGrade {
                student_id,
                course_id,
            } => write!(
                f,
                "grade of dropped student {student_id} in {course_id}; dropped"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Course {
    pub category: usize,
    /// Retained class-unit indices, ascending.
    pub units: Vec<usize>,
}

/// Validated, indexed join of the input tables.
///
/// Students and classes are stored sorted by id; that order is the row
/// order of every per-student output.
#[derive(Debug, Clone)]
pub struct Dataset {
    catalog: Vec<Category>,
    category_index: HashMap<String, usize>,
    students: Vec<StudentRecord>,
    classes: Vec<ClassUnit>,
    class_category: Vec<usize>,
    semesters: Vec<String>,
    class_semester: Vec<usize>,
    courses: BTreeMap<String, Course>,
    roster: Roster,
    attendance: AttendanceMatrix,
    measures: MeasureTable,
    grades: Vec<GradeRecord>,
    scale: GradeScale,
}

const STUDENTS: &str = "students.csv";
const CLASSES: &str = "classes.csv";
const REGISTRATIONS: &str = "registrations.csv";
const ATTENDANCE: &str = "attendance.csv";
const GRADES: &str = "grades.csv";
const CATALOG: &str = "catalog.csv";

/// Header is line 1.
fn line(i: usize) -> u64 {
    i as u64 + 2
}

impl Dataset {
    /// Validates referential integrity and builds the indexed dataset.
    ///
    /// Classes without registrants and students without registrations are
    /// dropped with a warning; non-letter grades are kept but flagged.
    pub fn from_tables(
        tables: &DatasetTables,
        scale: GradeScale,
    ) -> Result<(Self, Vec<IngestWarning>)> {
        let mut warnings = Vec::new();

        let mut catalog = Vec::with_capacity(tables.catalog.len());
        let mut category_index = HashMap::new();
        for (i, row) in tables.catalog.iter().enumerate() {
            if category_index
                .insert(row.category.clone(), catalog.len())
                .is_some()
            {
                return Err(Error::integrity(
                    CATALOG,
                    line(i),
                    format!("duplicate category {}", row.category),
                ));
            }
            catalog.push(Category {
                code: row.category.clone(),
                description: row.description.clone(),
            });
        }

        let mut student_rows: HashMap<&str, &StudentRow> = HashMap::new();
        for (i, row) in tables.students.iter().enumerate() {
            if student_rows.insert(&row.student_id, row).is_some() {
                return Err(Error::integrity(
                    STUDENTS,
                    line(i),
                    format!("duplicate student_id {}", row.student_id),
                ));
            }
        }

        let mut class_rows: HashMap<&str, &ClassUnit> = HashMap::new();
        let mut course_category: HashMap<&str, &str> = HashMap::new();
        for (i, row) in tables.classes.iter().enumerate() {
            if class_rows.insert(&row.class_id, row).is_some() {
                return Err(Error::integrity(
                    CLASSES,
                    line(i),
                    format!("duplicate class_id {}", row.class_id),
                ));
            }
            if !category_index.contains_key(&row.category) {
                return Err(Error::integrity(
                    CLASSES,
                    line(i),
                    format!("category {} is not in the catalog", row.category),
                ));
            }
            match course_category.get(row.course_id.as_str()) {
                Some(cat) if *cat != row.category => {
                    return Err(Error::integrity(
                        CLASSES,
                        line(i),
                        format!(
                            "course {} has units in categories {} and {}",
                            row.course_id, cat, row.category
                        ),
                    ))
                }
                _ => {
                    course_category.insert(&row.course_id, &row.category);
                }
            }
        }

        // registration pair -> line index
        let mut registrations: HashMap<(&str, &str), usize> = HashMap::new();
        for (i, row) in tables.registrations.iter().enumerate() {
            if !student_rows.contains_key(row.student_id.as_str()) {
                return Err(Error::integrity(
                    REGISTRATIONS,
                    line(i),
                    format!("unknown student_id {}", row.student_id),
                ));
            }
            if !class_rows.contains_key(row.class_id.as_str()) {
                return Err(Error::integrity(
                    REGISTRATIONS,
                    line(i),
                    format!("unknown class_id {}", row.class_id),
                ));
            }
            if registrations
                .insert((&row.student_id, &row.class_id), i)
                .is_some()
            {
                return Err(Error::integrity(
                    REGISTRATIONS,
                    line(i),
                    format!(
                        "duplicate registration ({}, {})",
                        row.student_id, row.class_id
                    ),
                ));
            }
        }

        let mut flags: HashMap<(&str, &str), bool> = HashMap::new();
        for (i, row) in tables.attendance.iter().enumerate() {
            let key = (row.student_id.as_str(), row.class_id.as_str());
            if !registrations.contains_key(&key) {
                return Err(Error::integrity(
                    ATTENDANCE,
                    line(i),
                    format!(
                        "attendance for unregistered pair ({}, {})",
                        row.student_id, row.class_id
                    ),
                ));
            }
            let attended = match row.attended {
                0 => false,
                1 => true,
                v => {
                    return Err(Error::integrity(
                        ATTENDANCE,
                        line(i),
                        format!("attended must be 0 or 1, got {v}"),
                    ))
                }
            };
            if flags.insert(key, attended).is_some() {
                return Err(Error::integrity(
                    ATTENDANCE,
                    line(i),
                    format!(
                        "duplicate attendance for ({}, {})",
                        row.student_id, row.class_id
                    ),
                ));
            }
        }
        if flags.len() != registrations.len() {
            let (&(s, c), &i) = registrations
                .iter()
                .filter(|(k, _)| !flags.contains_key(*k))
                .min_by_key(|(_, i)| **i)
                .expect("some registration lacks a flag");
            return Err(Error::integrity(
                REGISTRATIONS,
                line(i),
                format!("registration ({s}, {c}) has no attendance record"),
            ));
        }

        let mut grade_keys: HashSet<(&str, &str)> = HashSet::new();
        for (i, row) in tables.grades.iter().enumerate() {
            if !student_rows.contains_key(row.student_id.as_str()) {
                return Err(Error::integrity(
                    GRADES,
                    line(i),
                    format!("unknown student_id {}", row.student_id),
                ));
            }
            if !course_category.contains_key(row.course_id.as_str()) {
                return Err(Error::integrity(
                    GRADES,
                    line(i),
                    format!("unknown course_id {}", row.course_id),
                ));
            }
            if !grade_keys.insert((&row.student_id, &row.course_id)) {
                return Err(Error::integrity(
                    GRADES,
                    line(i),
                    format!(
                        "duplicate grade for ({}, {})",
                        row.student_id, row.course_id
                    ),
                ));
            }
        }

        // Degenerate entities.
        let registered_classes: HashSet<&str> = registrations.keys().map(|(_, c)| *c).collect();
        let registered_students: HashSet<&str> = registrations.keys().map(|(s, _)| *s).collect();

        let mut class_ids: Vec<&str> = class_rows.keys().copied().collect();
        class_ids.sort_unstable();
        let mut kept_classes = Vec::with_capacity(class_ids.len());
        for id in class_ids {
            if registered_classes.contains(id) {
                kept_classes.push(id);
            } else {
                log::warn!("class {id} has no registrations; dropped");
                warnings.push(IngestWarning::DroppedClass {
                    class_id: id.to_string(),
                });
            }
        }

        let mut student_ids: Vec<&str> = student_rows.keys().copied().collect();
        student_ids.sort_unstable();
        let mut kept_students = Vec::with_capacity(student_ids.len());
        for id in student_ids {
            if registered_students.contains(id) {
                kept_students.push(id);
            } else {
                log::warn!("student {id} has no registrations; dropped");
                warnings.push(IngestWarning::DroppedStudent {
                    student_id: id.to_string(),
                });
            }
        }

        let classes: Vec<ClassUnit> = kept_classes
            .iter()
            .map(|id| (*class_rows[id]).clone())
            .collect();
        let semesters: Vec<String> = classes
            .iter()
            .map(|c| c.semester.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let class_semester = classes
            .iter()
            .map(|c| {
                semesters
                    .binary_search(&c.semester)
                    .expect("semester listed")
            })
            .collect();
        let class_category: Vec<usize> = classes
            .iter()
            .map(|c| category_index[&c.category])
            .collect();

        let mut courses: BTreeMap<String, Course> = BTreeMap::new();
        for (course, cat) in &course_category {
            courses.insert(
                course.to_string(),
                Course {
                    category: category_index[*cat],
                    units: Vec::new(),
                },
            );
        }
        for (c, unit) in classes.iter().enumerate() {
            courses
                .get_mut(&unit.course_id)
                .expect("course indexed")
                .units
                .push(c);
        }

        let student_pos: HashMap<&str, usize> = kept_students
            .iter()
            .enumerate()
            .map(|(i, id)| (*id, i))
            .collect();
        let class_pos: HashMap<&str, usize> = kept_classes
            .iter()
            .enumerate()
            .map(|(i, id)| (*id, i))
            .collect();

        // Registrations only ever reference kept entities.
        let mut pairs: Vec<(usize, usize, bool)> = flags
            .iter()
            .map(|(&(s, c), &a)| (student_pos[s], class_pos[c], a))
            .collect();
        pairs.sort_unstable();
        let roster = Roster::new(
            kept_students.iter().map(|s| s.to_string()).collect(),
            kept_classes.iter().map(|c| c.to_string()).collect(),
            pairs.iter().map(|&(s, c, _)| (s, c)),
        )?;
        let attendance = AttendanceMatrix::new(&roster, pairs.iter().copied())?;
        let measures = MeasureTable::compute(&roster, &attendance)?;

        let mut grades = Vec::with_capacity(tables.grades.len());
        for row in &tables.grades {
            if !student_pos.contains_key(row.student_id.as_str()) {
                warnings.push(IngestWarning::DroppedGrade {
                    student_id: row.student_id.clone(),
                    course_id: row.course_id.clone(),
                });
                continue;
            }
            let points = scale.points(&row.letter);
            if points.is_none() {
                warnings.push(IngestWarning::ExcludedGrade {
                    student_id: row.student_id.clone(),
                    course_id: row.course_id.clone(),
                    letter: row.letter.clone(),
                });
            }
            grades.push(GradeRecord {
                student_id: row.student_id.clone(),
                course_id: row.course_id.clone(),
                letter: row.letter.trim().to_string(),
                points,
            });
        }
        grades.sort_by(|a, b| {
            (a.student_id.as_str(), a.course_id.as_str())
                .cmp(&(b.student_id.as_str(), b.course_id.as_str()))
        });

        let mut gpa_acc = vec![(0.0, 0usize); kept_students.len()];
        for g in &grades {
            if let Some(p) = g.points {
                let acc = &mut gpa_acc[student_pos[g.student_id.as_str()]];
                acc.0 += p;
                acc.1 += 1;
            }
        }
        let students = kept_students
            .iter()
            .zip(&gpa_acc)
            .map(|(id, &(sum, n))| {
                let row = student_rows[id];
                StudentRecord {
                    student_id: row.student_id.clone(),
                    major: row.major.clone(),
                    cohort: row.cohort.clone(),
                    gpa: (n > 0).then(|| sum / n as f64),
                }
            })
            .collect();

        let dataset = Dataset {
            catalog,
            category_index,
            students,
            classes,
            class_category,
            semesters,
            class_semester,
            courses,
            roster,
            attendance,
            measures,
            grades,
            scale,
        };
        Ok((dataset, warnings))
    }

    pub fn catalog(&self) -> &[Category] {
        &self.catalog
    }

    pub fn category(&self, code: &str) -> Result<usize> {
        self.category_index
            .get(code)
            .copied()
            .ok_or_else(|| Error::NotFound {
                kind: "category",
                id: code.to_string(),
            })
    }

    pub fn students(&self) -> &[StudentRecord] {
        &self.students
    }

    pub fn classes(&self) -> &[ClassUnit] {
        &self.classes
    }

    pub fn grades(&self) -> &[GradeRecord] {
        &self.grades
    }

    pub fn scale(&self) -> &GradeScale {
        &self.scale
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn attendance(&self) -> &AttendanceMatrix {
        &self.attendance
    }

    pub fn measures(&self) -> &MeasureTable {
        &self.measures
    }

    pub fn semesters(&self) -> &[String] {
        &self.semesters
    }

    pub fn class_semester(&self, c: usize) -> usize {
        self.class_semester[c]
    }

    pub fn class_category(&self, c: usize) -> usize {
        self.class_category[c]
    }

    pub fn student_index(&self, id: &str) -> Result<usize> {
        self.roster.student(id)
    }

    /// Category index of a course, if the course is known.
    pub fn course_category(&self, course_id: &str) -> Option<usize> {
        self.courses.get(course_id).map(|c| c.category)
    }

    pub(crate) fn course(&self, course_id: &str) -> Result<&Course> {
        self.courses.get(course_id).ok_or_else(|| Error::NotFound {
            kind: "course",
            id: course_id.to_string(),
        })
    }

    /// Course ids in ascending order.
    pub fn course_ids(&self) -> impl Iterator<Item = &str> {
        self.courses.keys().map(String::as_str)
    }

    /// Retained class units of a course.
    pub fn course_units(&self, course_id: &str) -> Result<&[usize]> {
        Ok(&self.course(course_id)?.units)
    }
}
