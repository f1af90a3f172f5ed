use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "pericycle",
    version,
    about = "Periodic open/close epidemic control: schedules, costs, CFR fits and data checks"
)]
pub struct Cli {
    /// TOML file with default values for any flag (flags take precedence).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Open and close phase lengths of a periodic cycle.
    Schedule(ScheduleArgs),
    /// Active-case trajectory of a control schedule.
    Simulate(SimulateArgs),
    /// Costs of the OC, CO and constant strategies.
    CompareCosts(ScheduleArgs),
    /// Fit the delayed geometric CFR kernel to a country's data.
    FitCfr(FitArgs),
    /// Convert JHU time series into long-format CSV or JSON.
    Ingest(IngestArgs),
    /// Two-cycle death-ratio check on a pinned snapshot.
    Validate(ValidateArgs),
    /// Download the current JHU global time series (not reproducible).
    Fetch(FetchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Order {
    #[value(name = "oc", alias = "OC")]
    #[serde(rename = "oc", alias = "OC")]
    Oc,
    #[value(name = "co", alias = "CO")]
    #[serde(rename = "co", alias = "CO")]
    Co,
    #[value(name = "oc-then-co", alias = "OC-then-CO")]
    #[serde(rename = "oc-then-co", alias = "OC-then-CO")]
    OcThenCo,
}

impl Order {
    pub fn label(self) -> &'static str {
        match self {
            Order::Oc => "OC",
            Order::Co => "CO",
            Order::OcThenCo => "OC-then-CO",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Structured output format; a human-readable summary is printed when absent.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write output to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Net growth rate while open, 1/day.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Net decay rate while closed, 1/day.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Removal rate, 1/day [default: 1/14].
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Reproduction number while open.
    #[arg(long, allow_hyphen_values = true)]
    pub r_open: Option<f64>,
    /// Reproduction number while closed.
    #[arg(long, allow_hyphen_values = true)]
    pub r_close: Option<f64>,
    /// Active cases at the start of the cycle [default: 21000].
    #[arg(long, allow_hyphen_values = true)]
    pub i0: Option<f64>,
    /// Cycle length in days [default: 54].
    #[arg(long, allow_hyphen_values = true)]
    pub period: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Cycle order.
    #[arg(long, value_enum, ignore_case = true)]
    pub order: Option<Order>,
    /// Sampling interval in days [default: 1].
    #[arg(long)]
    pub step: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// Directory holding the three JHU global CSV files [default: data/jhu,
    /// or $JHU_SNAPSHOT_DIR].
    #[arg(long, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
    /// Country/Region as spelled in the JHU files [default: Israel].
    #[arg(long)]
    pub country: Option<String>,
    /// First day, YYYY-MM-DD.
    #[arg(long)]
    pub from: Option<NaiveDate>,
    /// Last day, YYYY-MM-DD.
    #[arg(long)]
    pub to: Option<NaiveDate>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct KernelArgs {
    /// Smallest delay tried [default: 0].
    #[arg(long)]
    pub k_min: Option<usize>,
    /// Largest delay tried [default: 15].
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Trailing moving-average window in days [default: 7].
    #[arg(long)]
    pub smoothing: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated series kinds to emit [default: all].
    #[arg(long, value_delimiter = ',')]
    pub kinds: Vec<String>,
    /// Apply a trailing moving average of this many days to daily series.
    #[arg(long)]
    pub smoothing: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// First cycle boundary [default: 2020-08-30].
    #[arg(long)]
    pub cycle_start: Option<NaiveDate>,
    /// Length of each cycle in days [default: 54].
    #[arg(long)]
    pub cycle_days: Option<usize>,
    /// Use the published CFR of 0.0085 instead of fitting one.
    #[arg(long)]
    pub reference_cfr: bool,
    /// Compare against the published Israel figures; exit 3 on a miss.
    #[arg(long)]
    pub check: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Destination directory [default: data/jhu-live].
    #[arg(long, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
    /// Base URL of the time-series folder.
    #[arg(long)]
    pub base_url: Option<String>,
}
