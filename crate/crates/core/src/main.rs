use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use rai::clustering::{GridOptions, GridRanges, DEFAULT_NOISE_CAP};
use rai::commands::{self, CommandOutput, Context, CorrelateBy, MeasureChoice, Per};
use rai::datagen::{self, GenConfig};
use rai::io::{OutputFormat, RunReport};
use rai::model::{GradeScale, Measure};
use rai::{Error, Result};

/// Attendance analytics: relative attendance index, grade correlation,
/// histograms, clustering and synthetic cohorts.
#[derive(Debug, Parser, Serialize)]
#[command(name = "rai", version)]
struct Cli {
    /// Directory holding the six input CSV files.
    #[arg(long, global = true, default_value = ".")]
    data_dir: PathBuf,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Format of result tables.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// CSV with `letter,points` rows replacing the default letter scale.
    #[arg(long, global = true)]
    grade_scale: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// AR and RAI per student, course or category.
    Compute {
        #[arg(long, value_enum, default_value_t = MeasureChoice::Both)]
        measure: MeasureChoice,
        #[arg(long, value_enum, default_value_t = Per::Student)]
        per: Per,
    },
    /// Correlation of AR and RAI with grades.
    Correlate {
        #[arg(long, value_enum, default_value_t = CorrelateBy::Overall)]
        by: CorrelateBy,
    },
    /// Course-level RAI histograms for high and low grades.
    Hist {
        #[arg(long, default_value = "B+")]
        high_cut: String,
        #[arg(long, default_value = "C")]
        low_cut: String,
        #[arg(long, default_value_t = rai::stats::DEFAULT_BINS)]
        bins: usize,
    },
    /// PCA + DBSCAN grid search over category features, with profiles.
    Cluster {
        #[arg(long, default_value = "rai")]
        measure: Measure,
        /// e.g. `components=5-15;eps=0.1:1.0:0.1;min_points=5-20`
        #[arg(long)]
        grid: Option<String>,
        /// Center features without scaling to unit variance.
        #[arg(long)]
        no_scale: bool,
        /// Reject grid cells whose noise fraction exceeds this.
        #[arg(long, default_value_t = DEFAULT_NOISE_CAP)]
        noise_cap: f64,
        /// Accepted for scripting; clustering uses no randomness.
        #[arg(long)]
        seedless: bool,
    },
    /// Generate a synthetic cohort into the output directory.
    Gen {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        preset: Option<String>,
        /// TOML generator config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Compute { .. } => "compute",
            Command::Correlate { .. } => "correlate",
            Command::Hist { .. } => "hist",
            Command::Cluster { .. } => "cluster",
            Command::Gen { .. } => "gen",
        }
    }
}

fn gen_config(
    preset: &Option<String>,
    config: &Option<PathBuf>,
    seed: Option<u64>,
) -> Result<GenConfig> {
    let mut cfg = match (preset, config) {
        (Some(name), _) => datagen::preset(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            GenConfig::from_toml(&text)?
        }
        (None, None) => return Err(Error::Config("gen needs --preset or --config".into())),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<CommandOutput> {
    let scale = match &cli.grade_scale {
        Some(path) => GradeScale::from_csv(path)?,
        None => GradeScale::default(),
    };
    let ctx = Context {
        data_dir: cli.data_dir.clone(),
        out: cli.out.clone(),
        format: cli.format,
        scale,
    };
    match &cli.command {
        Command::Compute { measure, per } => commands::cmd_compute(&ctx, *measure, *per),
        Command::Correlate { by } => commands::cmd_correlate(&ctx, *by),
        Command::Hist {
            high_cut,
            low_cut,
            bins,
        } => commands::cmd_hist(&ctx, high_cut, low_cut, *bins),
        Command::Cluster {
            measure,
            grid,
            no_scale,
            noise_cap,
            seedless: _,
        } => {
            let ranges = match grid {
                Some(text) => text.parse()?,
                None => GridRanges::default(),
            };
            let options = GridOptions {
                standardize: !no_scale,
                noise_cap: *noise_cap,
            };
            commands::cmd_cluster(&ctx, *measure, &ranges, &options)
        }
        Command::Gen {
            preset,
            config,
            seed,
        } => {
            let cfg = gen_config(preset, config, *seed)?;
            commands::cmd_gen(&ctx.out, &cfg, &ctx.scale)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(output) => {
            let report = RunReport::new(
                cli.command.name(),
                serde_json::to_value(&cli).unwrap_or_default(),
                output.warnings,
                output.files,
                start.elapsed(),
            );
            match serde_json::to_string(&report) {
                Ok(text) => eprintln!("{text}"),
                Err(e) => log::error!("cannot render run report: {e}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
