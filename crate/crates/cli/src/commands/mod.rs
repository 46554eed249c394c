//! Subcommand arguments and implementations.

mod applications;
mod identify;
mod propcheck;
mod solve;
mod tariff;

use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::Value;

use crate::report::{Failure, Format};

pub(crate) use applications::{elicit, project, sticky};
pub(crate) use identify::identify;
pub(crate) use propcheck::propcheck;
pub(crate) use solve::solve;
pub(crate) use tariff::tariff;

/// Output destination and format shared by the tabular subcommands.
#[derive(Debug, Clone, Args)]
pub struct TableOutput {
    /// Report path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Scenario JSON file, or `builtin:<name>` for a bundled scenario.
    #[arg(long)]
    pub scenario: String,
    /// Overrides the scenario's regret weight.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Recorded in the report; solving is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest regret accepted by the internal assertion (regret is never positive).
    #[arg(long, default_value_t = 1e-9)]
    pub regret_tolerance: f64,
    #[command(flatten)]
    pub output: TableOutput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstructionChoice {
    /// Separable payoffs for every third seed, monotone products otherwise.
    Mixed,
    Products,
    Separable,
}

#[derive(Debug, Clone, Args)]
pub struct PropcheckArgs {
    /// Number of generated instances.
    #[arg(long, default_value_t = 10_000)]
    pub seeds: u64,
    /// First instance seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `sampled` for per-seed sizes, or a fixed shape such as `c3xg2x3xt4xs2` (optionally `xk<terms>`).
    #[arg(long, default_value = "sampled")]
    pub sizes: String,
    #[arg(long, value_enum, default_value_t = ConstructionChoice::Mixed)]
    pub construction: ConstructionChoice,
    /// Appends an instance that violates increasing differences.
    #[arg(long)]
    pub inject_corrupt: bool,
    #[command(flatten)]
    pub output: TableOutput,
}

#[derive(Debug, Clone, Args)]
pub struct IdentifyArgs {
    /// Representation JSON file (`z1`, `z2`, `gamma`, `u`, `extremes`), or `id-small-1`.
    #[arg(long, conflicts_with = "random")]
    pub rep: Option<String>,
    /// Seed of a random regular representation with 2 to 4 extremes.
    #[arg(long)]
    pub random: Option<u64>,
    /// Directions classified for the agreement rates.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Smallest accepted agreement between probe and ground-truth classification.
    #[arg(long, default_value_t = 0.99)]
    pub min_agreement: f64,
    /// Largest accepted angle in radians between recovered and true normals.
    #[arg(long, default_value_t = 1e-2)]
    pub normal_tolerance: f64,
    /// Largest accepted error of the recovered regret weight.
    #[arg(long, default_value_t = 1e-2)]
    pub gamma_tolerance: f64,
    /// JSON report path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TariffArgs {
    /// Marginal cost.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub gamma: f64,
    /// `uniform01` or `power:<k>`; ignored when `--config` gives a distribution file.
    #[arg(long, default_value = "uniform01")]
    pub dist: String,
    /// Distribution JSON such as `{"kind": "quantile_table", "knots": [[0, 0], [1, 1]]}`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `classical`, `naif` or `soph`.
    #[arg(long, default_value = "naif")]
    pub consumer: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Points of the demand curve on `[0, 1]`.
    #[arg(long, default_value_t = 101)]
    pub curve_points: usize,
    /// JSON solution path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Demand-curve CSV path.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ProjectArgs {
    /// Project instance JSON; the quadratic default when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub gamma: f64,
    /// First effort value; the naif choice when omitted.
    #[arg(long)]
    pub a1: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: TableOutput,
}

#[derive(Debug, Clone, Args)]
pub struct StickyArgs {
    /// Sticky instance JSON (`kind` = `quadratic` or `table`); the quadratic default when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub gamma: f64,
    /// First action value; every action on the grid when omitted.
    #[arg(long)]
    pub a1: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: TableOutput,
}

#[derive(Debug, Clone, Args)]
pub struct ElicitArgs {
    /// `default` for the Bernoulli family, or a family JSON file.
    #[arg(long, default_value = "default")]
    pub family: String,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    /// Run `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// True parameter value; the material one when omitted.
    #[arg(long)]
    pub theta_true: Option<f64>,
    /// First report; the classical optimum when omitted.
    #[arg(long)]
    pub a1: Option<f64>,
    /// Points of the report grid on `[0, 1]`.
    #[arg(long, default_value_t = 201)]
    pub report_points: usize,
    #[command(flatten)]
    pub output: TableOutput,
}

#[derive(Debug, Clone, Args)]
pub struct GoldenArgs {
    /// Recorded in the report; the golden cases are deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: TableOutput,
}

pub(crate) fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

/// Parses JSON text into a value for hashing; the typed parse reports schema errors.
pub(crate) fn json_value(text: &str, what: &str) -> Result<Value, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Input(format!("{what}: {e}")))
}

/// Typed parse of a JSON config.
pub(crate) fn parse_config<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Input(format!("{what}: {e}")))
}

/// Index of `value` in `grid` within `1e-9`.
pub(crate) fn grid_index(grid: &[f64], value: f64, what: &str) -> Result<usize, Failure> {
    grid.iter()
        .position(|g| (g - value).abs() <= 1e-9)
        .ok_or_else(|| Failure::Input(format!("{what} {value} is not on the grid")))
}

pub(crate) fn check_finite(value: f64, what: &str) -> Result<(), Failure> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!("{what} must be finite")))
    }
}
