use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_SCALE: [(&str, f64); 11] = [
    ("A", 4.0),
    ("A-", 3.7),
    ("B+", 3.3),
    ("B", 3.0),
    ("B-", 2.7),
    ("C+", 2.3),
    ("C", 2.0),
    ("C-", 1.7),
    ("D+", 1.3),
    ("D", 1.0),
    ("F", 0.0),
];

/// Letter grade to grade-point map. Letters absent from the map are treated
/// as non-letter grades and excluded from analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeScale {
    points: BTreeMap<String, f64>,
}

impl Default for GradeScale {
    fn default() -> Self {
        Self {
            points: DEFAULT_SCALE
                .iter()
                .map(|(l, p)| (l.to_string(), *p))
                .collect(),
        }
    }
}

#[derive(Deserialize)]
struct ScaleRow {
    letter: String,
    points: f64,
}

impl GradeScale {
    pub fn new(entries: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let points: BTreeMap<String, f64> = entries.into_iter().collect();
        if points.is_empty() {
            return Err(Error::Config("grade scale is empty".into()));
        }
        if let Some((l, p)) = points.iter().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(Error::Config(format!("grade `{l}` has invalid points {p}")));
        }
        Ok(Self { points })
    }

    /// Reads a `letter,points` CSV.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let mut entries = Vec::new();
        for row in reader.deserialize::<ScaleRow>() {
            let row = row.map_err(|source| Error::Csv {
                file: path.display().to_string(),
                source,
            })?;
            entries.push((row.letter.trim().to_string(), row.points));
        }
        Self::new(entries)
    }

    pub fn points(&self, letter: &str) -> Option<f64> {
        self.points.get(letter.trim()).copied()
    }

    /// Like [`points`](Self::points) but an unknown letter is a config error.
    pub fn require(&self, letter: &str) -> Result<f64> {
        self.points(letter)
            .ok_or_else(|| Error::Config(format!("letter `{letter}` is not on the grade scale")))
    }

    pub fn max_points(&self) -> f64 {
        self.points.values().copied().fold(0.0, f64::max)
    }

    /// Letters with their points, highest first. Equal points keep letter order.
    pub fn letters_desc(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<_> = self.points.iter().map(|(l, p)| (l.as_str(), *p)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// Snaps raw points to the nearest scale value, returning its letter.
    /// Ties go to the higher grade.
    pub fn quantize(&self, raw: f64) -> &str {
        let mut best: Option<(&str, f64)> = None;
        for (letter, p) in self.letters_desc() {
            let d = (p - raw).abs();
            match best {
                Some((_, bd)) if d >= bd => {}
                _ => best = Some((letter, d)),
            }
        }
        best.map(|(l, _)| l).unwrap_or("F")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scale_values() {
        let s = GradeScale::default();
        assert_eq!(s.points("A"), Some(4.0));
        assert_eq!(s.points("B+"), Some(3.3));
        assert_eq!(s.points("C"), Some(2.0));
        assert_eq!(s.points("F"), Some(0.0));
        assert_eq!(s.points("P"), None);
        assert_eq!(s.max_points(), 4.0);
    }

    #[test]
    fn quantize_snaps_to_nearest() {
        let s = GradeScale::default();
        assert_eq!(s.quantize(4.3), "A");
        assert_eq!(s.quantize(3.31), "B+");
        assert_eq!(s.quantize(0.4), "F");
        assert_eq!(s.quantize(-3.0), "F");
    }

    #[test]
    fn rejects_empty_and_negative() {
        assert!(GradeScale::new(Vec::new()).is_err());
        assert!(GradeScale::new(vec![("A".to_string(), -1.0)]).is_err());
    }
}
