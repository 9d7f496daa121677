//! Command-line front end: metrics, expected losses, curves, calibration and comparisons.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "costspace", version, about = "Expected loss of scored binary classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct LossOptions {
    /// Threshold choice methods: sf=T, rf=R, su, sd, ru, rd, opt (repeatable or comma separated).
    #[arg(long = "method", value_delimiter = ',', default_values_t = ["su".to_string(), "sd".to_string(), "ru".to_string(), "rd".to_string(), "opt".to_string()])]
    pub methods: Vec<String>,
    /// Operating-condition distribution: uniform or beta:A,B.
    #[arg(long, default_value = "uniform")]
    pub weight: String,
    /// Operating condition: cost or skew.
    #[arg(long, default_value = "cost")]
    pub condition: String,
    /// Adds a score-fixed method at this threshold.
    #[arg(long)]
    pub fixed_threshold: Option<f64>,
    /// Adds a rate-fixed method at this rate.
    #[arg(long)]
    pub fixed_rate: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum CurveType {
    /// Loss of one threshold choice method per condition.
    Cost,
    /// Score-driven loss curve.
    Brier,
    /// Lower envelope of all cost lines.
    Optimal,
    /// Score-driven curve of the PAV-calibrated scores.
    Refinement,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Calibrator {
    Pav,
    Est,
}

#[derive(Subcommand)]
enum Command {
    /// Scalar metrics of a scored dataset as JSON.
    Metrics {
        input: PathBuf,
        /// Also report accuracies at this threshold.
        #[arg(long)]
        fixed_threshold: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected loss of each method next to its closed form, as JSON.
    Loss {
        input: PathBuf,
        #[command(flatten)]
        opts: LossOptions,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Loss curve over operating conditions as CSV.
    Curves {
        input: PathBuf,
        #[arg(long = "type", value_enum, default_value = "cost")]
        curve: CurveType,
        /// Method of a cost curve.
        #[arg(long, default_value = "sd")]
        method: String,
        #[arg(long, default_value = "cost")]
        condition: String,
        /// Evenly spaced conditions, breakpoints added.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recalibrated scores appended as a calibrated_score column.
    Calibrate {
        input: PathBuf,
        #[arg(long, value_enum)]
        method: Calibrator,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of expected losses, one row per method and one column per input.
    Compare {
        #[arg(num_args = 2.., required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        opts: LossOptions,
        /// Writes the table as JSON to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in continuous score models.
    Continuous {
        #[command(subcommand)]
        command: ContinuousCommand,
    },
    /// Same as `continuous demo`.
    #[command(name = "continuous-demo")]
    ContinuousDemo(DemoArgs),
}

#[derive(Subcommand)]
enum ContinuousCommand {
    /// Loss summary and interval map as JSON, curve CSVs into --out.
    Demo(DemoArgs),
    /// Names, aliases and descriptions of the built-in models.
    List,
}

#[derive(Args)]
pub struct DemoArgs {
    /// Built-in model name or alias.
    #[arg(long)]
    pub model: String,
    /// Points per curve.
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    /// Directory receiving the curve CSVs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Metrics { input, fixed_threshold, out } => commands::metrics(&input, fixed_threshold, out.as_deref()),
        Command::Loss { input, opts, out } => commands::loss(&input, &opts, out.as_deref()),
        Command::Curves { input, curve, method, condition, grid, out } => {
            commands::curves(&input, curve, &method, &condition, grid, out.as_deref())
        }
        Command::Calibrate { input, method, out } => commands::calibrate(&input, method, out.as_deref()),
        Command::Compare { inputs, opts, out } => commands::compare(&inputs, &opts, out.as_deref()),
        Command::Continuous { command: ContinuousCommand::Demo(args) } | Command::ContinuousDemo(args) => {
            commands::continuous_demo(&args)
        }
        Command::Continuous { command: ContinuousCommand::List } => commands::continuous_list(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
