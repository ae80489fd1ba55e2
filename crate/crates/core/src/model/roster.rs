use std::collections::HashMap;

use crate::error::{Error, Result};

/// Bipartite registration structure between students and classes.
///
/// Students and classes are addressed by dense indices; the string ids are
/// kept for lookups and error messages. Adjacency lists are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Roster {
    student_ids: Vec<String>,
    class_ids: Vec<String>,
    student_index: HashMap<String, usize>,
    class_index: HashMap<String, usize>,
    by_class: Vec<Vec<usize>>,
    by_student: Vec<Vec<usize>>,
}

impl Roster {
    /// Builds a roster from index pairs `(student, class)`. Duplicate pairs and
    /// out-of-range indices are rejected. Students or classes without any
    /// registration are allowed here; the measure functions report them as
    /// degenerate.
    pub fn new(
        student_ids: Vec<String>,
        class_ids: Vec<String>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let student_index = index_of(&student_ids, "student")?;
        let class_index = index_of(&class_ids, "class")?;
        let mut by_class = vec![Vec::new(); class_ids.len()];
        let mut by_student = vec![Vec::new(); student_ids.len()];
        for (s, c) in pairs {
            if s >= student_ids.len() || c >= class_ids.len() {
                return Err(Error::Shape(format!(
                    "registration ({s}, {c}) out of range for {} students x {} classes",
                    student_ids.len(),
                    class_ids.len()
                )));
            }
            by_class[c].push(s);
            by_student[s].push(c);
        }
        for (c, list) in by_class.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Shape(format!(
                    "duplicate registration in class {}",
                    class_ids[c]
                )));
            }
        }
        for list in &mut by_student {
            list.sort_unstable();
        }
        Ok(Self {
            student_ids,
            class_ids,
            student_index,
            class_index,
            by_class,
            by_student,
        })
    }

    pub fn student_count(&self) -> usize {
        self.student_ids.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_ids.len()
    }

    pub fn student_id(&self, s: usize) -> &str {
        &self.student_ids[s]
    }

    pub fn class_id(&self, c: usize) -> &str {
        &self.class_ids[c]
    }

    pub fn student_ids(&self) -> &[String] {
        &self.student_ids
    }

    pub fn class_ids(&self) -> &[String] {
        &self.class_ids
    }

    pub fn student(&self, id: &str) -> Result<usize> {
        self.student_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::NotFound {
                kind: "student",
                id: id.to_string(),
            })
    }

    pub fn class(&self, id: &str) -> Result<usize> {
        self.class_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::NotFound {
                kind: "class",
                id: id.to_string(),
            })
    }

    /// reg(c), sorted.
    pub fn registered_students(&self, c: usize) -> &[usize] {
        &self.by_class[c]
    }

    /// K_s, sorted.
    pub fn registered_classes(&self, s: usize) -> &[usize] {
        &self.by_student[s]
    }

    pub fn n_reg_class(&self, c: usize) -> usize {
        self.by_class[c].len()
    }

    pub fn n_reg_student(&self, s: usize) -> usize {
        self.by_student[s].len()
    }

    pub fn is_registered(&self, s: usize, c: usize) -> bool {
        self.slot(s, c).is_some()
    }

    pub fn registration_count(&self) -> usize {
        self.by_class.iter().map(Vec::len).sum()
    }

    /// Position of `s` within `reg(c)`.
    fn slot(&self, s: usize, c: usize) -> Option<usize> {
        self.by_class.get(c)?.binary_search(&s).ok()
    }
}

fn index_of(ids: &[String], kind: &str) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if map.insert(id.clone(), i).is_some() {
            return Err(Error::Shape(format!("duplicate {kind} id {id}")));
        }
    }
    Ok(map)
}

/// One attendance flag per registration, stored aligned with
/// [`Roster::registered_students`]. The domain of the flags is exactly the
/// roster's registration set.
#[derive(Debug, Clone, PartialEq)]
pub struct AttendanceMatrix {
    flags: Vec<Vec<bool>>,
    n_att_class: Vec<usize>,
    n_att_student: Vec<usize>,
}

impl AttendanceMatrix {
    /// Every registered pair must receive exactly one flag and every flag
    /// must belong to a registered pair.
    pub fn new(
        roster: &Roster,
        flags: impl IntoIterator<Item = (usize, usize, bool)>,
    ) -> Result<Self> {
        let mut cells: Vec<Vec<Option<bool>>> = (0..roster.class_count())
            .map(|c| vec![None; roster.n_reg_class(c)])
            .collect();
        for (s, c, a) in flags {
            let slot = roster.slot(s, c).ok_or_else(|| Error::NotRegistered {
                student: id_or_index(roster.student_ids.get(s), s),
                target: id_or_index(roster.class_ids.get(c), c),
            })?;
            if cells[c][slot].replace(a).is_some() {
                return Err(Error::Shape(format!(
                    "duplicate attendance flag for ({}, {})",
                    roster.student_id(s),
                    roster.class_id(c)
                )));
            }
        }
        let mut n_att_class = vec![0; roster.class_count()];
        let mut n_att_student = vec![0; roster.student_count()];
        let mut out = Vec::with_capacity(cells.len());
        for (c, row) in cells.into_iter().enumerate() {
            let mut flags = Vec::with_capacity(row.len());
            for (slot, cell) in row.into_iter().enumerate() {
                let s = roster.by_class[c][slot];
                let a = cell.ok_or_else(|| {
                    Error::Shape(format!(
                        "missing attendance flag for ({}, {})",
                        roster.student_id(s),
                        roster.class_id(c)
                    ))
                })?;
                if a {
                    n_att_class[c] += 1;
                    n_att_student[s] += 1;
                }
                flags.push(a);
            }
            out.push(flags);
        }
        Ok(Self {
            flags: out,
            n_att_class,
            n_att_student,
        })
    }

    /// a_sc; `None` when `(s, c)` is not a registration.
    pub fn attended(&self, roster: &Roster, s: usize, c: usize) -> Option<bool> {
        roster.slot(s, c).map(|slot| self.flags[c][slot])
    }

    /// Flags of `reg(c)` in roster order.
    pub fn class_flags(&self, c: usize) -> &[bool] {
        &self.flags[c]
    }

    pub fn n_att_class(&self, c: usize) -> usize {
        self.n_att_class[c]
    }

    pub fn n_att_student(&self, s: usize) -> usize {
        self.n_att_student[s]
    }
}

fn id_or_index(id: Option<&String>, i: usize) -> String {
    id.cloned().unwrap_or_else(|| format!("#{i}"))
}
