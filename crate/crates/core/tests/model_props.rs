mod common;

use common::Instance;
use proptest::prelude::*;
use rai::model::{contribution, rai, student_rate, AttendanceMatrix, MeasureTable, Roster};

/// Student x class membership matrix with attendance, repaired so nobody is
/// left without a registration.
fn instance() -> impl Strategy<Value = Instance> {
    (1usize..9, 1usize..7)
        .prop_flat_map(|(s, c)| {
            (
                Just(s),
                Just(c),
                prop::collection::vec(prop::collection::vec(prop::option::of(any::<bool>()), c), s),
            )
        })
        .prop_map(|(students, classes, mut m)| {
            for (s, row) in m.iter_mut().enumerate() {
                if row.iter().all(Option::is_none) {
                    row[s % classes] = Some(s % 2 == 0);
                }
            }
            for c in 0..classes {
                if m.iter().all(|row| row[c].is_none()) {
                    m[c % students][c] = Some(true);
                }
            }
            let flags = m
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter_map(|(c, a)| a.map(|a| (c, a)))
                        .collect()
                })
                .collect();
            Instance {
                students,
                classes,
                flags,
            }
        })
}

fn build(inst: &Instance) -> (Roster, AttendanceMatrix) {
    let roster = Roster::new(inst.student_ids(), inst.class_ids(), inst.pairs()).unwrap();
    let att = AttendanceMatrix::new(&roster, inst.triples()).unwrap();
    (roster, att)
}

proptest! {
    #[test]
    fn rai_lies_strictly_inside_unit_interval(inst in instance()) {
        let (roster, att) = build(&inst);
        for s in 0..inst.students {
            let v = rai(&roster, &att, s).unwrap();
            prop_assert!(v > -1.0 && v < 1.0, "{v}");
        }
    }

    #[test]
    fn measures_match_direct_counting(inst in instance()) {
        let (roster, att) = build(&inst);
        let table = MeasureTable::compute(&roster, &att).unwrap();
        for (s, (ar, r, _)) in inst.measures().iter().enumerate() {
            prop_assert!((table.ar()[s] - ar).abs() < 1e-12);
            prop_assert!((table.rai()[s] - r).abs() < 1e-12);
        }
    }

    #[test]
    fn rai_is_rate_minus_mean_class_rate(inst in instance()) {
        let (roster, att) = build(&inst);
        let table = MeasureTable::compute(&roster, &att).unwrap();
        for s in 0..inst.students {
            let classes = roster.registered_classes(s);
            let mean_rc = classes.iter().map(|&c| table.class_rate(c)).sum::<f64>() / classes.len() as f64;
            let lhs = rai(&roster, &att, s).unwrap();
            let rhs = student_rate(&roster, &att, s).unwrap() - mean_rc;
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn contributions_cancel_within_each_class(inst in instance()) {
        let (roster, att) = build(&inst);
        for c in 0..inst.classes {
            let sum: f64 = roster
                .registered_students(c)
                .iter()
                .map(|&s| contribution(&roster, &att, s, c).unwrap())
                .sum();
            prop_assert!(sum.abs() < 1e-12, "{sum}");
        }
    }

    #[test]
    fn registration_weighted_rai_sums_to_zero(inst in instance()) {
        let (roster, att) = build(&inst);
        let table = MeasureTable::compute(&roster, &att).unwrap();
        let total: f64 = (0..inst.students)
            .map(|s| roster.n_reg_student(s) as f64 * table.rai()[s])
            .sum();
        prop_assert!(total.abs() < 1e-9, "{total}");
    }

    #[test]
    fn attending_one_more_class_raises_rai_unless_alone(inst in instance(), pick in any::<prop::sample::Index>()) {
        let absences: Vec<(usize, usize)> = inst
            .triples()
            .into_iter()
            .filter(|t| !t.2)
            .map(|(s, c, _)| (s, c))
            .collect();
        prop_assume!(!absences.is_empty());
        let (s, c) = absences[pick.index(absences.len())];
        let (roster, att) = build(&inst);
        let before = rai(&roster, &att, s).unwrap();
        let mut flipped = inst.clone();
        for f in flipped.flags[s].iter_mut() {
            if f.0 == c {
                f.1 = true;
            }
        }
        let (roster2, att2) = build(&flipped);
        let after = rai(&roster2, &att2, s).unwrap();
        // own flag +1, class rate +1/n: the change is (1 - 1/n) / |K_s|,
        // strictly positive unless the student is the class's only member
        let n = roster.n_reg_class(c) as f64;
        let expected = (1.0 - 1.0 / n) / roster.n_reg_student(s) as f64;
        prop_assert!((after - before - expected).abs() < 1e-12);
        if n >= 2.0 {
            prop_assert!(after > before, "{before} -> {after}");
        } else {
            prop_assert_eq!(after, before);
        }
    }
}
