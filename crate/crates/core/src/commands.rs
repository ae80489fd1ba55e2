//! The five CLI commands as library functions. Each builds its result tables
//! in memory, writes them under the output directory and returns the paths.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::clustering::{
    grid_search, profile_clusters, ClusterProfiles, GridCell, GridChoice, GridOptions, GridOutcome,
    GridRanges,
};
use crate::datagen::{generate_with_scale, GenConfig, GroundTruth};
use crate::error::{Error, Result};
use crate::io::{self, Cell, DatasetFiles, OutputFormat, Table};
use crate::model::{category_cells, feature_vectors, Dataset, GradeScale, IngestWarning, Measure};
use crate::stats::{
    category_correlation_table, grade_split, measure_gpa_correlation, rai_histogram, round2,
    CorrelationResult, Histogram,
};

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub data_dir: PathBuf,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub scale: GradeScale,
}

#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<IngestWarning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureChoice {
    Ar,
    Rai,
    Both,
}

impl MeasureChoice {
    fn measures(self) -> Vec<Measure> {
        match self {
            MeasureChoice::Ar => vec![Measure::Ar],
            MeasureChoice::Rai => vec![Measure::Rai],
            MeasureChoice::Both => vec![Measure::Ar, Measure::Rai],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Per {
    Student,
    Course,
    Category,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelateBy {
    Overall,
    Category,
}

fn load(ctx: &Context) -> Result<(Dataset, Vec<IngestWarning>)> {
    io::load_dataset(&DatasetFiles::in_dir(&ctx.data_dir), ctx.scale.clone())
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

/// AR and/or RAI per student, per (student, course) or per (student,
/// category). Category output is wide; a category the student never
/// registered in is an empty cell.
pub fn compute_table(dataset: &Dataset, measure: MeasureChoice, per: Per) -> Result<Table> {
    let measures = measure.measures();
    let roster = dataset.roster();
    let students = dataset.students();
    match per {
        Per::Student => {
            let mut t = Table::new(["student_id", "major", "n_classes"]);
            t.header.extend(measures.iter().map(|m| m.to_string()));
            for (s, rec) in students.iter().enumerate() {
                let mut row: Vec<Cell> = vec![
                    rec.student_id.as_str().into(),
                    rec.major.as_str().into(),
                    roster.n_reg_student(s).into(),
                ];
                row.extend(
                    measures
                        .iter()
                        .map(|&m| Cell::Num(dataset.measures().values(m)[s])),
                );
                t.push(row);
            }
            Ok(t)
        }
        Per::Course => {
            let mut t = Table::new(["student_id", "course_id", "category", "n_units"]);
            t.header.extend(measures.iter().map(|m| m.to_string()));
            let classes = dataset.classes();
            for (s, rec) in students.iter().enumerate() {
                let mut units: std::collections::BTreeMap<&str, usize> = Default::default();
                for &c in roster.registered_classes(s) {
                    *units.entry(classes[c].course_id.as_str()).or_default() += 1;
                }
                for (course, n) in units {
                    let k = dataset.course_category(course).expect("known course");
                    let mut row: Vec<Cell> = vec![
                        rec.student_id.as_str().into(),
                        course.into(),
                        dataset.catalog()[k].code.as_str().into(),
                        n.into(),
                    ];
                    for &m in &measures {
                        let v = match m {
                            Measure::Ar => dataset.course_ar(&rec.student_id, course)?,
                            Measure::Rai => dataset.course_rai(&rec.student_id, course)?,
                        };
                        row.push(v.into());
                    }
                    t.push(row);
                }
            }
            Ok(t)
        }
        Per::Category => {
            let cells = category_cells(dataset);
            let single = measures.len() == 1;
            let mut t = Table::new(["student_id"]);
            for cat in dataset.catalog() {
                for m in &measures {
                    t.header.push(if single {
                        cat.code.clone()
                    } else {
                        format!("{}_{m}", cat.code)
                    });
                }
            }
            for (s, rec) in students.iter().enumerate() {
                let mut row: Vec<Cell> = vec![rec.student_id.as_str().into()];
                for k in 0..dataset.catalog().len() {
                    row.extend(measures.iter().map(|&m| Cell::num(cells.get(m, s, k))));
                }
                t.push(row);
            }
            Ok(t)
        }
    }
}

pub fn cmd_compute(ctx: &Context, measure: MeasureChoice, per: Per) -> Result<CommandOutput> {
    let (dataset, warnings) = load(ctx)?;
    ensure_out(&ctx.out)?;
    let table = compute_table(&dataset, measure, per)?;
    let stem = match per {
        Per::Student => "compute_student",
        Per::Course => "compute_course",
        Per::Category => "compute_category",
    };
    Ok(CommandOutput {
        files: vec![table.write(&ctx.out, stem, ctx.format)?],
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSummary {
    pub r: f64,
    pub r_2dp: f64,
    pub n: usize,
    pub p: Option<f64>,
}

impl From<&CorrelationResult> for CorrelationSummary {
    fn from(c: &CorrelationResult) -> Self {
        Self {
            r: c.r,
            r_2dp: round2(c.r),
            n: c.n,
            p: c.p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverallSummary {
    pub ar: CorrelationSummary,
    pub rai: CorrelationSummary,
    pub rai_exceeds_ar: bool,
}

/// Student-level correlation of AR and RAI with GPA.
pub fn overall_correlation(dataset: &Dataset) -> Result<(Table, OverallSummary)> {
    let ar = measure_gpa_correlation(dataset, Measure::Ar)?;
    let rai = measure_gpa_correlation(dataset, Measure::Rai)?;
    let mut t = Table::new(["measure", "r", "r_2dp", "n", "p"]);
    for (m, c) in [("ar", &ar), ("rai", &rai)] {
        t.push(vec![
            m.into(),
            c.r.into(),
            round2(c.r).into(),
            c.n.into(),
            c.p.into(),
        ]);
    }
    let summary = OverallSummary {
        ar: (&ar).into(),
        rai: (&rai).into(),
        rai_exceeds_ar: rai.r > ar.r,
    };
    Ok((t, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategorySummaryRow {
    pub category: String,
    pub n: usize,
    pub corr_ar_2dp: Option<f64>,
    pub corr_rai_2dp: Option<f64>,
    pub retained: bool,
}

pub fn cmd_correlate(ctx: &Context, by: CorrelateBy) -> Result<CommandOutput> {
    let (dataset, warnings) = load(ctx)?;
    ensure_out(&ctx.out)?;
    let mut files = Vec::new();
    match by {
        CorrelateBy::Overall => {
            let (table, summary) = overall_correlation(&dataset)?;
            files.push(table.write(&ctx.out, "correlation_overall", ctx.format)?);
            let path = ctx.out.join("summary.json");
            io::write_json(&path, &summary)?;
            files.push(path);
        }
        CorrelateBy::Category => {
            let rows = category_correlation_table(&dataset)?;
            let mut t = Table::new([
                "category",
                "description",
                "n",
                "corr_ar",
                "corr_rai",
                "p_ar",
                "p_rai",
                "retained",
            ]);
            for r in &rows {
                t.push(vec![
                    r.category.as_str().into(),
                    r.description.as_str().into(),
                    r.n.into(),
                    r.corr_ar.into(),
                    r.corr_rai.into(),
                    r.p_ar.into(),
                    r.p_rai.into(),
                    r.retained.into(),
                ]);
            }
            files.push(t.write(&ctx.out, "correlation_category", ctx.format)?);
            let summary: Vec<CategorySummaryRow> = rows
                .iter()
                .map(|r| CategorySummaryRow {
                    category: r.category.clone(),
                    n: r.n,
                    corr_ar_2dp: r.corr_ar.map(round2),
                    corr_rai_2dp: r.corr_rai.map(round2),
                    retained: r.retained,
                })
                .collect();
            let path = ctx.out.join("summary.json");
            io::write_json(&path, &summary)?;
            files.push(path);
        }
    }
    Ok(CommandOutput { files, warnings })
}

pub fn histogram_table(h: &Histogram) -> Table {
    let mut t = Table::new(["bin", "lower", "upper", "count", "proportion"]);
    for i in 0..h.bins() {
        t.push(vec![
            i.into(),
            h.edges[i].into(),
            h.edges[i + 1].into(),
            h.counts[i].into(),
            h.proportions[i].into(),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetSummary {
    pub n: usize,
    pub mean_rai: Option<f64>,
    /// Share of samples with RAI strictly above zero.
    pub share_positive: Option<f64>,
}

impl SetSummary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let nf = n as f64;
        Self {
            n,
            mean_rai: (n > 0).then(|| values.iter().sum::<f64>() / nf),
            share_positive: (n > 0)
                .then(|| values.iter().filter(|v| **v > 0.0).count() as f64 / nf),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistSummary {
    pub high_cut: String,
    pub low_cut: String,
    pub bins: usize,
    pub high: SetSummary,
    pub low: SetSummary,
}

pub fn cmd_hist(
    ctx: &Context,
    high_cut: &str,
    low_cut: &str,
    bins: usize,
) -> Result<CommandOutput> {
    let (dataset, warnings) = load(ctx)?;
    let split = grade_split(&dataset, high_cut, low_cut)?;
    if split.high.is_empty() && split.low.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no grades at or above {high_cut} or at or below {low_cut}"
        )));
    }
    ensure_out(&ctx.out)?;
    let mut files = Vec::new();
    for (name, values) in [("hist_high", &split.high), ("hist_low", &split.low)] {
        if values.is_empty() {
            log::warn!("{name}: no samples; file not written");
            continue;
        }
        let h = rai_histogram(values, bins)?;
        files.push(histogram_table(&h).write(&ctx.out, name, ctx.format)?);
    }
    let summary = HistSummary {
        high_cut: high_cut.to_string(),
        low_cut: low_cut.to_string(),
        bins,
        high: SetSummary::of(&split.high),
        low: SetSummary::of(&split.low),
    };
    let path = ctx.out.join("hist_summary.json");
    io::write_json(&path, &summary)?;
    files.push(path);
    Ok(CommandOutput { files, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub measure: Measure,
    pub standardize: bool,
    pub noise_cap: f64,
    pub students: usize,
    pub features: usize,
    pub choice: GridChoice,
    pub cluster_sizes: Vec<usize>,
    pub explained_variance: Vec<f64>,
    pub evaluated_cells: usize,
    pub scored_cells: usize,
    pub low_confidence_majors: BTreeSet<String>,
}

/// Feature extraction, grid search and profiling without touching disk.
pub fn run_clustering(
    dataset: &Dataset,
    measure: Measure,
    ranges: &GridRanges,
    options: &GridOptions,
) -> Result<(GridOutcome, ClusterProfiles)> {
    let features = feature_vectors(dataset, measure)?;
    let outcome = grid_search(&features.rows, ranges, options)?;
    let profiles = profile_clusters(&outcome.labels, dataset)?;
    Ok((outcome, profiles))
}

fn grid_table(cells: &[GridCell]) -> Table {
    let mut t = Table::new([
        "n_components",
        "eps",
        "min_points",
        "cluster_count",
        "noise_count",
        "silhouette",
        "status",
    ]);
    for c in cells {
        t.push(vec![
            c.n_components.into(),
            c.eps.into(),
            c.min_points.into(),
            c.cluster_count.into(),
            c.noise_count.into(),
            c.silhouette.into(),
            c.status.to_string().into(),
        ]);
    }
    t
}

/// The five per-cluster x per-major panels plus the top-majors list.
pub fn profile_tables(p: &ClusterProfiles) -> Vec<(&'static str, Table)> {
    type Pick = fn(&crate::clustering::MajorCell) -> Cell;
    let panels: [(&'static str, Pick); 5] = [
        ("profile_a_counts", |m| m.count.into()),
        ("profile_b_fraction_of_major", |m| {
            m.fraction_of_major.into()
        }),
        ("profile_c_mean_rai", |m| m.mean_rai.into()),
        ("profile_d_top_decile", |m| m.top_decile_ratio.into()),
        ("profile_e_last_decile", |m| m.last_decile_ratio.into()),
    ];
    let mut out = Vec::new();
    for (name, pick) in panels {
        let mut t = Table::new(["cluster", "size"]);
        t.header.extend(p.majors().map(str::to_string));
        for c in &p.profiles {
            let mut row: Vec<Cell> = vec![c.cluster.into(), c.size.into()];
            row.extend(c.majors.iter().map(pick));
            t.push(row);
        }
        out.push((name, t));
    }
    let mut top = Table::new(["cluster", "rank", "major", "count"]);
    for c in &p.profiles {
        for (i, (major, count)) in c.top_majors.iter().enumerate() {
            top.push(vec![
                c.cluster.into(),
                (i + 1).into(),
                major.as_str().into(),
                (*count).into(),
            ]);
        }
    }
    out.push(("profile_top_majors", top));
    out
}

pub fn cmd_cluster(
    ctx: &Context,
    measure: Measure,
    ranges: &GridRanges,
    options: &GridOptions,
) -> Result<CommandOutput> {
    let (dataset, warnings) = load(ctx)?;
    let (outcome, profiles) = run_clustering(&dataset, measure, ranges, options)?;
    ensure_out(&ctx.out)?;
    let mut files = Vec::new();

    let mut labels = Table::new(["student_id", "major", "cluster", "core"]);
    for ((rec, l), core) in dataset
        .students()
        .iter()
        .zip(&outcome.labels.labels)
        .zip(&outcome.labels.core)
    {
        labels.push(vec![
            rec.student_id.as_str().into(),
            rec.major.as_str().into(),
            l.map_or(Cell::Missing, Cell::from),
            (*core).into(),
        ]);
    }
    files.push(labels.write(&ctx.out, "labels", ctx.format)?);
    files.push(grid_table(&outcome.cells).write(&ctx.out, "grid", ctx.format)?);
    for (name, table) in profile_tables(&profiles) {
        files.push(table.write(&ctx.out, name, ctx.format)?);
    }

    let summary = ClusterSummary {
        measure,
        standardize: options.standardize,
        noise_cap: options.noise_cap,
        students: dataset.students().len(),
        features: dataset.catalog().len(),
        choice: outcome.choice.clone(),
        cluster_sizes: outcome.labels.cluster_sizes(),
        explained_variance: outcome.pca.explained.clone(),
        evaluated_cells: outcome.cells.len(),
        scored_cells: outcome
            .cells
            .iter()
            .filter(|c| c.silhouette.is_some())
            .count(),
        low_confidence_majors: profiles.low_confidence_majors.clone(),
    };
    let path = ctx.out.join("grid_choice.json");
    io::write_json(&path, &summary)?;
    files.push(path);
    Ok(CommandOutput { files, warnings })
}

pub fn truth_tables(truth: &GroundTruth) -> (Table, Table) {
    let mut students = Table::new(["student_id", "motivation", "group"]);
    for s in &truth.students {
        students.push(vec![
            s.student_id.as_str().into(),
            s.motivation.into(),
            s.group.map_or(Cell::Missing, Cell::from),
        ]);
    }
    let mut courses = Table::new(["course_id", "category", "mandatory"]);
    for c in &truth.courses {
        courses.push(vec![
            c.course_id.as_str().into(),
            c.category.as_str().into(),
            c.mandatory.into(),
        ]);
    }
    (students, courses)
}

/// Writes the six dataset CSVs, the ground truth and the config used.
pub fn cmd_gen(out: &Path, config: &GenConfig, scale: &GradeScale) -> Result<CommandOutput> {
    let generated = generate_with_scale(config, scale)?;
    let mut files = io::write_tables(out, &generated.tables)?;
    let (students, courses) = truth_tables(&generated.truth);
    files.push(students.write(out, "truth_students", OutputFormat::Csv)?);
    files.push(courses.write(out, "truth_courses", OutputFormat::Csv)?);
    let path = out.join("config.toml");
    io::write_text(&path, &config.to_toml()?)?;
    files.push(path);
    Ok(CommandOutput {
        files,
        warnings: Vec::new(),
    })
}
