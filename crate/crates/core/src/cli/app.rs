use std::ffi::OsString;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use super::analyze::{analyze, AnalyzeOptions};
use super::dataset::{load_csv, ColumnMap, Dataset, PhaseLabels};
use super::diagnose::resampling_diagnostic;
use super::preprocess::Preprocessing;
use super::report::render_text;
use crate::posthoc::critical_value;
use crate::simulation::{outcome_table, parse_scenarios, run_scenario_with, write_outcomes_csv, RunOptions};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;

/// Equality of treatment AUCs with subject-level random effects.
#[derive(Debug, Parser)]
#[command(name = "aovauc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the F test (and optionally the post hoc comparisons) on a CSV.
    ///
    /// The "Average random-effects standard error" line lists the square root
    /// of each group's between-subject variance estimate followed, first, by
    /// their unweighted mean.
    Analyze(AnalyzeArgs),
    /// Run simulation scenarios from a config file.
    Simulate(SimulateArgs),
    /// Print the post hoc critical value for k groups.
    Thresholds(ThresholdArgs),
    /// Compare resampled null F statistics with the reference F law.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Long-format CSV, one measurement per row.
    #[arg(long)]
    data: PathBuf,
    /// Column holding the measurement.
    #[arg(long)]
    value: String,
    /// Column holding the treatment label.
    #[arg(long)]
    group: String,
    /// Column holding the subject id.
    #[arg(long)]
    subject: String,
    /// Column holding the phase label.
    #[arg(long)]
    phase: String,
    #[arg(long, default_value = "pre")]
    pre_label: String,
    #[arg(long, default_value = "post")]
    post_label: String,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let columns = ColumnMap {
            value: self.value.clone(),
            group: self.group.clone(),
            subject: self.subject.clone(),
            phase: self.phase.clone(),
        };
        let labels = PhaseLabels {
            pre: self.pre_label.clone(),
            post: self.post_label.clone(),
        };
        load_csv(&self.data, &columns, &labels)
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Add the all-pairs post hoc comparison.
    #[arg(long)]
    posthoc: bool,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Replicates for the post hoc reference distribution.
    #[arg(long = "R", default_value_t = 1_000_000)]
    replicates: usize,
    #[arg(long, env = "AOVAUC_SEED", default_value_t = 1)]
    seed: u64,
    /// Clip each subject's pre and post values to median ± 3·MAD.
    #[arg(long)]
    winsorize: bool,
    /// Rescale each subject by its pre-treatment mean and sd.
    #[arg(long)]
    standardize: bool,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Run only the named scenario.
    #[arg(long)]
    cell: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides every scenario's seed.
    #[arg(long, env = "AOVAUC_SEED")]
    seed: Option<u64>,
    /// Write results as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the post hoc step on every iteration, not only after rejection.
    #[arg(long)]
    ungated: bool,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long = "R", default_value_t = 1_000_000)]
    replicates: usize,
    #[arg(long, env = "AOVAUC_SEED", default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Number of resampling replicates.
    #[arg(long = "B", default_value_t = 2000)]
    replicates: usize,
    #[arg(long, env = "AOVAUC_SEED", default_value_t = 1)]
    seed: u64,
    /// Also write the F samples and KS distance as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn stdout_error(e: std::io::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

fn run_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let dataset = args.data.load()?;
    let options = AnalyzeOptions {
        posthoc: args.posthoc,
        alpha: args.alpha,
        replicates: args.replicates,
        seed: args.seed,
        preprocessing: Preprocessing {
            winsorize: args.winsorize,
            standardize: args.standardize,
        },
    };
    let doc = analyze(&dataset, &options)?;
    out.write_all(render_text(&doc).as_bytes()).map_err(stdout_error)?;
    if let Some(path) = &args.json {
        write_file(path, serde_json::to_string_pretty(&doc)?.as_bytes())?;
    }
    Ok(())
}

fn run_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(&args.config).map_err(|e| Error::Io {
        path: args.config.clone(),
        source: e,
    })?;
    let mut scenarios = parse_scenarios(&text)?;
    if let Some(cell) = &args.cell {
        scenarios.retain(|s| &s.name == cell);
        if scenarios.is_empty() {
            return Err(Error::Validation(vec![format!("no scenario named {cell}")]));
        }
    }
    if let Some(seed) = args.seed {
        scenarios.iter_mut().for_each(|s| s.seed = seed);
    }
    let options = RunOptions {
        workers: args.workers,
        gated_posthoc: !args.ungated,
    };
    let outcomes = scenarios
        .iter()
        .map(|s| run_scenario_with(s, options))
        .collect::<Result<Vec<_>>>()?;
    out.write_all(outcome_table(&outcomes).as_bytes()).map_err(stdout_error)?;
    if let Some(path) = &args.out {
        let file = File::create(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        write_outcomes_csv(file, &outcomes)?;
    }
    Ok(())
}

fn run_thresholds(args: &ThresholdArgs, out: &mut dyn Write) -> Result<()> {
    let c = critical_value(args.k, args.alpha, args.replicates, args.seed)?;
    writeln!(out, "{c:.3}").map_err(stdout_error)
}

fn run_diagnose(args: &DiagnoseArgs, out: &mut dyn Write) -> Result<()> {
    let dataset = args.data.load()?;
    let d = resampling_diagnostic(&dataset, args.replicates, args.seed)?;
    let (d1, d2) = d.reference_df;
    writeln!(
        out,
        "KS distance {:.4} against F({d1}, {d2}) over B = {} replicates (1% critical value {:.4})",
        d.ks_distance,
        d.f_samples.len(),
        d.ks_critical_1pct()
    )
    .map_err(stdout_error)?;
    if let Some(path) = &args.json {
        write_file(path, serde_json::to_string_pretty(&d)?.as_bytes())?;
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 on usage or validation errors, 2 on
/// I/O errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_VALIDATION
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => run_analyze(a, out),
        Command::Simulate(a) => run_simulate(a, out),
        Command::Thresholds(a) => run_thresholds(a, out),
        Command::Diagnose(a) => run_diagnose(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_VALIDATION
            }
        }
    }
}
