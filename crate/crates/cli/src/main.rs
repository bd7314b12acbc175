//! `walkersim` command-line front end.
//!
//! Failures print one JSON object on stderr and exit with a code that
//! separates configuration, format and incomplete-run errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use walkersim_core::batch::{read_report, run_batch, BatchSpec};
use walkersim_core::gait::{analyze_traces, event_thresholds, Foot};
use walkersim_core::io::{read_trace_csv, to_json_string, write_run_outputs, AnalysisReport};
use walkersim_core::plot::write_plots;
use walkersim_core::sim::{run_scenario, RunStatus, ScenarioConfig};
use walkersim_core::stats::{summary_text, TTestVariant};
use walkersim_core::{Error, SCHEMA_VERSION};

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;
const EXIT_FORMAT: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "walkersim",
    version,
    about = "Robotic walker and walking-assist simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Simulate one trial and write its telemetry, traces, events and features.
    Run {
        /// Scenario JSON; the default condition-A scenario when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Replaces the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        exclude_steps: Option<usize>,
    },
    /// Simulate a batch of trials and compare the two conditions.
    Batch {
        /// Batch JSON; two trials per condition when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Shifts all run seeds so the smallest equals this value.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_variant)]
        variant: Option<TTestVariant>,
        #[arg(long)]
        exclude_steps: Option<usize>,
    },
    /// Extract gait features from a pair of `t,force` CSV traces.
    Analyze {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Walked distance [m].
        #[arg(long, default_value_t = 8.0)]
        path_length: f64,
        #[arg(long, default_value_t = 2)]
        exclude_steps: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the four bar charts from a batch report.
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_variant(s: &str) -> Result<TTestVariant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Core(Error),
    Incomplete { trial_id: String, end_time: f64 },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    Ok(fs::read_to_string(path)?)
}

fn cmd_run(
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    exclude: Option<usize>,
) -> Result<(), Failure> {
    let mut scenario = match config {
        Some(p) => ScenarioConfig::from_json(&read_text(p)?)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        scenario.rng_seed = s;
    }
    if let Some(n) = exclude {
        scenario.exclude_first_steps = n;
    }
    let record = run_scenario(&scenario)?;
    let features = write_run_outputs(out, &record, &scenario)?;
    log::info!(
        "{}: {:?} at t = {:.2} s, x = {:.3} m",
        record.trial_id,
        record.status,
        record.end_time,
        features.final_position
    );
    if record.status == RunStatus::Incomplete {
        return Err(Failure::Incomplete {
            trial_id: record.trial_id,
            end_time: record.end_time,
        });
    }
    Ok(())
}

fn cmd_batch(
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    variant: Option<TTestVariant>,
    exclude: Option<usize>,
) -> Result<(), Failure> {
    let mut spec = match config {
        Some(p) => BatchSpec::from_json(&read_text(p)?)?,
        None => BatchSpec::standard(seed.unwrap_or(1)),
    };
    if let Some(s) = seed {
        spec.reseed(s);
    }
    if let Some(v) = variant {
        spec.variant = v;
    }
    if let Some(n) = exclude {
        spec.set_exclude_first_steps(n);
    }
    let outcome = run_batch(&spec, Some(out))?;
    if let Some(report) = &outcome.report {
        print!("{}", summary_text(report));
    }
    if let Some(r) = outcome
        .runs
        .iter()
        .find(|r| r.status == RunStatus::Incomplete)
    {
        return Err(Failure::Incomplete {
            trial_id: r.trial_id.clone(),
            end_time: r.end_time,
        });
    }
    Ok(())
}

fn cmd_analyze(
    left: &Path,
    right: &Path,
    path_length: f64,
    exclude: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let left = read_trace_csv(fs::File::open(left)?, Foot::Left)?;
    let right = read_trace_csv(fs::File::open(right)?, Foot::Right)?;
    let analysis = analyze_traces(&left, &right, path_length, exclude, &event_thresholds())?;
    let text = to_json_string(&AnalysisReport::new(
        path_length,
        exclude,
        analysis.features,
    ))?;
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_plot(report: &Path, out: &Path) -> Result<(), Failure> {
    let report = read_report(&read_text(report)?)?;
    for spec in write_plots(out, &report)? {
        log::info!("wrote {}", spec.path.display());
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Run { source, .. } | Error::Comparison { source, .. } => exit_code(source),
        _ => match e.kind() {
            "config" => EXIT_CONFIG,
            "format" => EXIT_FORMAT,
            _ => EXIT_OTHER,
        },
    }
}

fn report_failure(failure: &Failure) -> u8 {
    let (code, error) = match failure {
        Failure::Core(e) => {
            let mut error = serde_json::json!({ "kind": e.kind(), "message": e.to_string() });
            match e {
                Error::Config { field, .. } => error["field"] = field.clone().into(),
                Error::Format { row, .. } => error["row"] = (*row).into(),
                Error::Run { label, .. } => error["run"] = label.clone().into(),
                _ => {}
            }
            (exit_code(e), error)
        }
        Failure::Incomplete { trial_id, end_time } => (
            EXIT_INCOMPLETE,
            serde_json::json!({
                "kind": "incomplete",
                "message": format!("run `{trial_id}` did not finish before the time cap"),
                "run": trial_id,
                "end_time": end_time,
            }),
        ),
    };
    eprintln!(
        "{}",
        serde_json::json!({ "schema_version": SCHEMA_VERSION, "error": error })
    );
    code
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WALKERSIM_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Run {
            config,
            out,
            seed,
            exclude_steps,
        } => cmd_run(config.as_deref(), out, *seed, *exclude_steps),
        Cmd::Batch {
            config,
            out,
            seed,
            variant,
            exclude_steps,
        } => cmd_batch(config.as_deref(), out, *seed, *variant, *exclude_steps),
        Cmd::Analyze {
            left,
            right,
            path_length,
            exclude_steps,
            out,
        } => cmd_analyze(left, right, *path_length, *exclude_steps, out.as_deref()),
        Cmd::Plot { report, out } => cmd_plot(report, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => ExitCode::from(report_failure(&f)),
    }
}
