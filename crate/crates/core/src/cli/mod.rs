//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad flags, 3 data or validation error,
//! 4 estimation error. Diagnostics go to standard error, data to standard
//! output.

mod binscatter;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dgp::{generate_panel, run_monte_carlo, DgpSpec, McEstimator, McSummary};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_diff_disc_fd, estimate_diff_disc_pooled, estimate_diff_disc_pooled_repeated,
    estimate_sharp_rd, EstimatorConfig, ResultRecord,
};
use crate::local::{BandwidthSpec, KernelKind};
use crate::panel::{
    first_difference, format_f64, load_panel_path, period_slice, validate_panel, ColumnMapping,
    IssueKind, PanelDataset,
};

pub use binscatter::{bin_cross_section, Bin, BinnedSeries, SeriesLabel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_ESTIMATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "diffdisc",
    version,
    about = "Geographic regression discontinuity and difference-in-discontinuities estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a discontinuity from a panel CSV.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo study on simulated panels.
    Simulate(SimulateArgs),
    /// Export binned means on each side of the cutoff as CSV.
    Binscatter(BinscatterArgs),
    /// Write one simulated panel as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EstimatorArg {
    /// Sharp RD on one period (see --period).
    Rd,
    /// RD on first-differenced outcomes.
    DiffDiscFd,
    /// Pooled interaction regression.
    DiffDiscPooled,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelArg {
    Uniform,
    Triangular,
    Epanechnikov,
}

impl From<KernelArg> for KernelKind {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Uniform => KernelKind::Uniform,
            KernelArg::Triangular => KernelKind::Triangular,
            KernelArg::Epanechnikov => KernelKind::Epanechnikov,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputArg {
    Text,
    JsonLines,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SeriesArg {
    Period0,
    Period1,
    Fd,
    All,
}

#[derive(Debug, Clone, Copy)]
enum BandwidthArg {
    Auto,
    Fixed(f64),
}

fn parse_bandwidth(s: &str) -> std::result::Result<BandwidthArg, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(BandwidthArg::Auto);
    }
    match s.parse::<f64>() {
        Ok(h) if h.is_finite() && h > 0.0 => Ok(BandwidthArg::Fixed(h)),
        _ => Err(format!("expected `auto` or a positive number, got `{s}`")),
    }
}

fn parse_level(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(l) if l > 0.0 && l < 1.0 => Ok(l),
        _ => Err(format!("expected a number strictly between 0 and 1, got `{s}`")),
    }
}

fn parse_period(s: &str) -> std::result::Result<u8, String> {
    match s {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(format!("period must be 0 or 1, got `{s}`")),
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long, value_enum, default_value = "triangular")]
    kernel: KernelArg,
    /// `auto` runs leave-one-out cross-validation over 12 geometrically
    /// spaced bandwidths from range/50 to range/2, where range is the spread
    /// of observed distances. A number fixes the bandwidth.
    #[arg(long, default_value = "auto", value_parser = parse_bandwidth)]
    bandwidth: BandwidthArg,
    /// Local polynomial order.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    order: u64,
    /// Confidence level for the interval.
    #[arg(long, default_value = "0.95", value_parser = parse_level)]
    level: f64,
}

impl FitArgs {
    /// Resolves `auto` against the spread of the given distances.
    fn config(&self, distances: impl Iterator<Item = f64>) -> EstimatorConfig {
        let bandwidth = match self.bandwidth {
            BandwidthArg::Fixed(h) => BandwidthSpec::Fixed(h),
            BandwidthArg::Auto => {
                let (lo, hi) = distances.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
                    (lo.min(d), hi.max(d))
                });
                BandwidthSpec::auto_for_range(hi - lo)
            }
        };
        EstimatorConfig {
            kernel: self.kernel.into(),
            bandwidth,
            order: self.order as usize,
            confidence_level: self.level,
        }
    }
}

#[derive(Debug, Args)]
struct ColumnArgs {
    #[arg(long, default_value = "unit_id")]
    col_unit: String,
    #[arg(long, default_value = "period")]
    col_period: String,
    #[arg(long, default_value = "outcome")]
    col_outcome: String,
    #[arg(long, default_value = "distance")]
    col_distance: String,
}

impl ColumnArgs {
    fn mapping(&self) -> ColumnMapping {
        ColumnMapping {
            unit: self.col_unit.clone(),
            period: self.col_period.clone(),
            outcome: self.col_outcome.clone(),
            distance: self.col_distance.clone(),
        }
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "diff-disc-fd")]
    estimator: EstimatorArg,
    /// Period used by `--estimator rd`.
    #[arg(long, default_value = "1", value_parser = parse_period)]
    period: u8,
    /// With `diff-disc-pooled`: accept repeated cross-sections whose units
    /// differ between periods.
    #[arg(long)]
    repeated_cross_sections: bool,
    #[command(flatten)]
    fit: FitArgs,
    #[command(flatten)]
    columns: ColumnArgs,
    #[arg(long, value_enum, default_value = "text")]
    output: OutputArg,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Flat key-value (TOML) simulation spec; omitted keys take defaults.
    /// Without this flag the built-in default spec is used.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `rd` is the naive sharp RD on the post period.
    #[arg(long, value_enum, default_value = "diff-disc-fd")]
    estimator: EstimatorArg,
    #[command(flatten)]
    fit: FitArgs,
    /// Worker threads for replications; 0 uses all cores. Output does not
    /// depend on this.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, value_enum, default_value = "text")]
    output: OutputArg,
}

#[derive(Debug, Args)]
struct BinscatterArgs {
    #[arg(long)]
    input: PathBuf,
    /// Bins per side.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..))]
    bins: u64,
    #[arg(long, value_enum, default_value = "all")]
    series: SeriesArg,
    #[command(flatten)]
    columns: ColumnArgs,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A failure already tagged with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_estimation_failure() {
            EXIT_ESTIMATION
        } else {
            EXIT_DATA
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };

    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Binscatter(a) => cmd_binscatter(&a, out),
        Command::Generate(a) => cmd_generate(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::from(Error::Io(e))
}

fn write_record<T: Serialize>(out: &mut dyn Write, record: &T, format: OutputArg) -> CmdResult {
    match format {
        OutputArg::JsonLines => {
            let line = serde_json::to_string(record).expect("records serialize");
            writeln!(out, "{line}").map_err(io_failure)
        }
        OutputArg::Text => {
            let value = serde_json::to_value(record).expect("records serialize");
            let map = value.as_object().expect("records are flat objects");
            for (key, v) in map {
                let text = match v {
                    serde_json::Value::Null => "NA".to_string(),
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Number(n) => match n.as_f64() {
                        Some(x) if !n.is_u64() && !n.is_i64() => format_f64(x),
                        _ => n.to_string(),
                    },
                    other => other.to_string(),
                };
                writeln!(out, "{key}={text}").map_err(io_failure)?;
            }
            Ok(())
        }
    }
}

fn load(input: &Path, columns: &ColumnArgs) -> std::result::Result<PanelDataset, Failure> {
    load_panel_path(input, &columns.mapping()).map_err(|e| Failure {
        code: EXIT_DATA,
        message: e.to_string(),
    })
}

/// Runs the chosen estimator on an in-memory panel exactly as
/// `diffdisc estimate` would, `auto` bandwidth included.
fn estimate_record(data: &PanelDataset, a: &EstimateArgs) -> Result<ResultRecord> {
    match a.estimator {
        EstimatorArg::Rd => {
            let slice = period_slice(data, a.period)?;
            let config = a.fit.config(slice.distances());
            Ok(ResultRecord::from(&estimate_sharp_rd(&slice, &config)?))
        }
        EstimatorArg::DiffDiscFd => {
            let config = a.fit.config(data.observations().iter().map(|o| o.distance));
            Ok(ResultRecord::from(&estimate_diff_disc_fd(data, &config)?))
        }
        EstimatorArg::DiffDiscPooled => {
            let config = a.fit.config(data.observations().iter().map(|o| o.distance));
            let (est, _) = if a.repeated_cross_sections {
                estimate_diff_disc_pooled_repeated(data, &config)?
            } else {
                estimate_diff_disc_pooled(data, &config)?
            };
            Ok(ResultRecord::from(&est))
        }
    }
}

fn cmd_estimate(a: &EstimateArgs, out: &mut dyn Write) -> CmdResult {
    let data = load(&a.input, &a.columns)?;
    let record = estimate_record(&data, a)?;
    write_record(out, &record, a.output)
}

fn load_spec(path: &Option<PathBuf>) -> std::result::Result<DgpSpec, Failure> {
    match path {
        Some(p) => DgpSpec::load(p).map_err(|e| Failure {
            code: EXIT_DATA,
            message: format!("{}: {e}", p.display()),
        }),
        None => Ok(DgpSpec::default()),
    }
}

#[derive(Serialize)]
struct SimulateRecord {
    estimator: String,
    reps: usize,
    seed: u64,
    true_effect: f64,
    mean_estimate: f64,
    bias: f64,
    sd: f64,
    rmse: f64,
    coverage_rate: f64,
    mean_se: Option<f64>,
    failures: usize,
}

impl SimulateRecord {
    fn new(s: &McSummary, seed: u64) -> Self {
        Self {
            estimator: s.estimator.name().into(),
            reps: s.reps,
            seed,
            true_effect: s.true_effect,
            mean_estimate: s.mean_estimate,
            bias: s.bias,
            sd: s.sd,
            rmse: s.rmse,
            coverage_rate: s.coverage_rate,
            mean_se: s.mean_se,
            failures: s.failures,
        }
    }
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let spec = load_spec(&a.spec)?;
    let crate::dgp::DistanceLaw::Uniform { half_width } = spec.distance_law;
    // The support of the distance law stands in for the observed range.
    let config = a.fit.config([-half_width, half_width].into_iter());
    let estimator = match a.estimator {
        EstimatorArg::Rd => McEstimator::NaiveRdPost,
        EstimatorArg::DiffDiscFd => McEstimator::DiffDiscFd,
        EstimatorArg::DiffDiscPooled => McEstimator::DiffDiscPooled,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads)
        .build()
        .map_err(|e| Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        })?;
    let summary = pool.install(|| run_monte_carlo(&spec, estimator, &config, a.reps as usize, a.seed))?;
    write_record(out, &SimulateRecord::new(&summary, a.seed), a.output)
}

fn cmd_binscatter(a: &BinscatterArgs, out: &mut dyn Write) -> CmdResult {
    let data = load(&a.input, &a.columns)?;
    let report = validate_panel(&data);
    if !report.is_valid {
        let only_empty_sides = report.errors().all(|i| i.kind == IssueKind::EmptySide);
        return Err(Failure {
            code: if only_empty_sides { EXIT_ESTIMATION } else { EXIT_DATA },
            message: format!("invalid panel: {}", report.summary()),
        });
    }
    let labels: &[SeriesLabel] = match a.series {
        SeriesArg::Period0 => &[SeriesLabel::Period0],
        SeriesArg::Period1 => &[SeriesLabel::Period1],
        SeriesArg::Fd => &[SeriesLabel::FirstDifference],
        SeriesArg::All => &[SeriesLabel::Period0, SeriesLabel::Period1, SeriesLabel::FirstDifference],
    };
    let mut series = Vec::new();
    for &label in labels {
        let cs = match label {
            SeriesLabel::Period0 => period_slice(&data, 0)?,
            SeriesLabel::Period1 => period_slice(&data, 1)?,
            SeriesLabel::FirstDifference => first_difference(&data)?,
        };
        series.push(bin_cross_section(&cs, a.bins as usize, label)?);
    }
    binscatter::write_series(out, &series)?;
    Ok(())
}

fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> CmdResult {
    let spec = load_spec(&a.spec)?;
    let data = generate_panel(&spec, a.seed)?;
    data.write_csv(out, &ColumnMapping::default())?;
    Ok(())
}
