use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rai::io::{load_dataset, DatasetFiles};
use rai::model::GradeScale;

fn rai_cmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rai"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

/// Three students, three class units in two courses.
///
/// | unit | course | cat | A | B | C | rate |
/// | U1   | C1     | K1  | 1 | 0 | 1 | 2/3  |
/// | U2   | C1     | K1  | 1 | 1 | - | 1    |
/// | U3   | C2     | K2  | 0 | - | 1 | 1/2  |
///
/// AR: A 2/3, B 1/2, C 1. RAI: A (1/3 + 0 - 1/2)/3 = -1/18,
/// B (-2/3 + 0)/2 = -1/3, C (1/3 + 1/2)/2 = 5/12.
fn fixture(dir: &Path, grades: &str) {
    write(
        dir,
        "students.csv",
        "student_id,major,cohort\nA,CS,2020\nB,CS,2020\nC,ECO,2021\n",
    );
    write(
        dir,
        "classes.csv",
        "class_id,course_id,category,semester\nU1,C1,K1,S1\nU2,C1,K1,S1\nU3,C2,K2,S1\n",
    );
    write(
        dir,
        "registrations.csv",
        "student_id,class_id\nA,U1\nA,U2\nA,U3\nB,U1\nB,U2\nC,U1\nC,U3\n",
    );
    write(
        dir,
        "attendance.csv",
        "student_id,class_id,attended\nA,U1,1\nA,U2,1\nA,U3,0\nB,U1,0\nB,U2,1\nC,U1,1\nC,U3,1\n",
    );
    write(dir, "grades.csv", grades);
    write(
        dir,
        "catalog.csv",
        "category,description\nK2,second\nK1,first\n",
    );
}

const LETTER_GRADES: &str =
    "student_id,course_id,letter\nA,C1,A\nA,C2,B\nB,C1,C\nC,C1,B+\nC,C2,A-\n";

fn csv_rows(path: &Path) -> Vec<HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            header
                .iter()
                .zip(rec.unwrap().iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn compute_per_student_matches_hand_values() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), LETTER_GRADES);
    let out = dir.path().join("out");
    let d = dir.path().to_str().unwrap();
    let o = out.to_str().unwrap();
    let res = rai_cmd(&["--data-dir", d, "--out", o, "compute"]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let rows = csv_rows(&out.join("compute_student.csv"));
    let want = [
        ("A", 2.0 / 3.0, -1.0 / 18.0, "3"),
        ("B", 0.5, -1.0 / 3.0, "2"),
        ("C", 1.0, 5.0 / 12.0, "2"),
    ];
    assert_eq!(rows.len(), 3);
    for (row, (id, ar, rai, n)) in rows.iter().zip(want) {
        assert_eq!(row["student_id"], id);
        assert_eq!(row["n_classes"], n);
        assert!((num(&row["ar"]) - ar).abs() < 1e-12);
        assert!((num(&row["rai"]) - rai).abs() < 1e-12);
    }
    let report = String::from_utf8_lossy(&res.stderr);
    let json: serde_json::Value = serde_json::from_str(report.trim()).unwrap();
    assert_eq!(json["command"], "compute");
}

#[test]
fn category_columns_follow_catalog_order() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), LETTER_GRADES);
    let out = dir.path().join("out");
    let res = rai_cmd(&[
        "--data-dir",
        dir.path().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "compute",
        "--per",
        "category",
    ]);
    assert_eq!(code(&res), 0);
    let text = fs::read_to_string(out.join("compute_category.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "student_id,K2_ar,K2_rai,K1_ar,K1_rai"
    );
    // B never registered in K2
    let b = text.lines().find(|l| l.starts_with("B,")).unwrap();
    assert!(b.starts_with("B,,,"), "{b}");
    let rows = csv_rows(&out.join("compute_category.csv"));
    // A in K1: flags 1,1 against rates 2/3, 1
    assert!((num(&rows[0]["K1_rai"]) - 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn histogram_with_one_bin_holds_everything() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), LETTER_GRADES);
    let out = dir.path().join("out");
    let res = rai_cmd(&[
        "--data-dir",
        dir.path().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "hist",
        "--bins",
        "1",
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    for name in ["hist_high.csv", "hist_low.csv"] {
        let rows = csv_rows(&out.join(name));
        assert_eq!(rows.len(), 1);
        assert_eq!(num(&rows[0]["proportion"]), 1.0);
    }
}

#[test]
fn exit_codes_follow_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path();
    let out = base.join("out");
    let o = out.to_str().unwrap();

    // missing input files
    let empty = base.join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(
        code(&rai_cmd(&[
            "--data-dir",
            empty.to_str().unwrap(),
            "--out",
            o,
            "compute"
        ])),
        3
    );

    // malformed attendance flag
    let bad = base.join("bad");
    fs::create_dir(&bad).unwrap();
    fixture(&bad, LETTER_GRADES);
    write(
        &bad,
        "attendance.csv",
        "student_id,class_id,attended\nA,U1,yes\n",
    );
    assert_eq!(
        code(&rai_cmd(&[
            "--data-dir",
            bad.to_str().unwrap(),
            "--out",
            o,
            "compute"
        ])),
        4
    );

    // pass/fail grades only: nothing to correlate
    let pf = base.join("pf");
    fs::create_dir(&pf).unwrap();
    fixture(&pf, "student_id,course_id,letter\nA,C1,P\nB,C1,P\nC,C2,P\n");
    assert_eq!(
        code(&rai_cmd(&[
            "--data-dir",
            pf.to_str().unwrap(),
            "--out",
            o,
            "correlate"
        ])),
        5
    );

    // a grid that cannot produce two clusters
    let ok = base.join("ok");
    fs::create_dir(&ok).unwrap();
    fixture(&ok, LETTER_GRADES);
    let res = rai_cmd(&[
        "--data-dir",
        ok.to_str().unwrap(),
        "--out",
        o,
        "cluster",
        "--grid",
        "components=1;eps=0.5;min_points=50",
    ]);
    assert_eq!(code(&res), 6);

    assert_eq!(code(&rai_cmd(&["--out", o, "gen", "--preset", "G9"])), 7);
    let res = rai_cmd(&[
        "--data-dir",
        ok.to_str().unwrap(),
        "--out",
        o,
        "cluster",
        "--grid",
        "eps=oops",
    ]);
    assert_eq!(code(&res), 7);
}

#[test]
fn gen_is_deterministic_and_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let res = rai_cmd(&["--out", out.to_str().unwrap(), "gen", "--preset", "G3"]);
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    }
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert!(names.contains(&"config.toml".to_string()));
    for name in &names {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }

    let (dataset, warnings) =
        load_dataset(&DatasetFiles::in_dir(&a), GradeScale::default()).unwrap();
    assert!(!warnings.is_empty());
    let students = csv_rows(&a.join("students.csv"));
    assert!(
        dataset.students().len() < students.len(),
        "degenerate student dropped"
    );

    // a different seed changes the attendance
    let c = dir.path().join("c");
    rai_cmd(&[
        "--out",
        c.to_str().unwrap(),
        "gen",
        "--preset",
        "G3",
        "--seed",
        "99",
    ]);
    assert_ne!(
        fs::read(a.join("attendance.csv")).unwrap(),
        fs::read(c.join("attendance.csv")).unwrap()
    );

    // the written config regenerates the same cohort
    let d = dir.path().join("d");
    let res = rai_cmd(&[
        "--out",
        d.to_str().unwrap(),
        "gen",
        "--config",
        a.join("config.toml").to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0);
    assert_eq!(
        fs::read(a.join("attendance.csv")).unwrap(),
        fs::read(d.join("attendance.csv")).unwrap()
    );
}

#[test]
fn json_format_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), LETTER_GRADES);
    let out = dir.path().join("out");
    let res = rai_cmd(&[
        "--data-dir",
        dir.path().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
        "compute",
    ]);
    assert_eq!(code(&res), 0);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("compute_student.json")).unwrap())
            .unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1]["student_id"], "B");
    assert!((rows[1]["rai"].as_f64().unwrap() + 1.0 / 3.0).abs() < 1e-12);
}
