use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::{generate_panel, oracle_true_effect, DgpSpec};
use crate::error::{Error, Result};
use crate::estimators::{estimate_diff_disc_fd, estimate_diff_disc_pooled, estimate_sharp_rd, EstimatorConfig};
use crate::panel::{period_slice, POST};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum McEstimator {
    /// Sharp RD on the post-period slice alone.
    NaiveRdPost,
    DiffDiscFd,
    DiffDiscPooled,
}

impl McEstimator {
    pub fn name(self) -> &'static str {
        match self {
            McEstimator::NaiveRdPost => "naive_rd_post",
            McEstimator::DiffDiscFd => "diff_disc_fd",
            McEstimator::DiffDiscPooled => "diff_disc_pooled",
        }
    }
}

impl fmt::Display for McEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for McEstimator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "naive_rd_post" => Ok(McEstimator::NaiveRdPost),
            "diff_disc_fd" => Ok(McEstimator::DiffDiscFd),
            "diff_disc_pooled" => Ok(McEstimator::DiffDiscPooled),
            other => Err(format!("unknown Monte Carlo estimator `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub estimator: McEstimator,
    pub reps: usize,
    pub true_effect: f64,
    pub mean_estimate: f64,
    /// `mean_estimate - true_effect`.
    pub bias: f64,
    /// Sample standard deviation (divisor `reps - 1`) of the estimates.
    pub sd: f64,
    pub rmse: f64,
    /// Share of successful replications whose interval covers the true
    /// effect. A replication without an interval counts as not covering.
    pub coverage_rate: f64,
    /// Mean reported standard error over replications that have one.
    pub mean_se: Option<f64>,
    pub failures: usize,
}

/// SplitMix64 finalizer applied to `master` and the replication index.
/// Replication `r` gets the same seed whether or not other replications run.
pub fn derive_seed(master_seed: u64, rep: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(master_seed) ^ rep)
}

struct Draw {
    estimate: f64,
    se: Option<f64>,
    ci: Option<(f64, f64)>,
}

fn one_replication(spec: &DgpSpec, estimator: McEstimator, config: &EstimatorConfig, seed: u64) -> Result<Draw> {
    let data = generate_panel(spec, seed)?;
    let (estimate, se, ci) = match estimator {
        McEstimator::NaiveRdPost => {
            let e = estimate_sharp_rd(&period_slice(&data, POST)?, config)?;
            (e.tau_hat, e.se, e.ci)
        }
        McEstimator::DiffDiscFd => {
            let e = estimate_diff_disc_fd(&data, config)?;
            (e.tau_hat, e.se, e.ci)
        }
        McEstimator::DiffDiscPooled => {
            let (e, _) = estimate_diff_disc_pooled(&data, config)?;
            (e.tau_hat, e.se, e.ci)
        }
    };
    Ok(Draw { estimate, se, ci })
}

/// Runs `reps` independent replications, in parallel, and summarizes them
/// against `oracle_true_effect(spec)`.
///
/// Aggregation walks replications in index order, so the summary is
/// bit-identical for any thread count.
pub fn run_monte_carlo(
    spec: &DgpSpec,
    estimator: McEstimator,
    config: &EstimatorConfig,
    reps: usize,
    master_seed: u64,
) -> Result<McSummary> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    spec.validate()?;
    config.validate()?;
    let truth = oracle_true_effect(spec);

    let draws: Vec<Result<Draw>> = (0..reps)
        .into_par_iter()
        .map(|r| one_replication(spec, estimator, config, derive_seed(master_seed, r as u64)))
        .collect();

    let mut ok = Vec::with_capacity(reps);
    let mut first_failure = None;
    let mut failures = 0;
    for d in draws {
        match d {
            Ok(d) => ok.push(d),
            Err(e) => {
                failures += 1;
                first_failure.get_or_insert(e);
            }
        }
    }
    if ok.is_empty() {
        return Err(Error::AllReplicationsFailed {
            reps,
            first: Box::new(first_failure.expect("reps >= 1")),
        });
    }

    let m = ok.len() as f64;
    let mean = ok.iter().map(|d| d.estimate).sum::<f64>() / m;
    let sd = if ok.len() > 1 {
        (ok.iter().map(|d| (d.estimate - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    let rmse = (ok.iter().map(|d| (d.estimate - truth).powi(2)).sum::<f64>() / m).sqrt();
    let covered = ok
        .iter()
        .filter(|d| d.ci.is_some_and(|(lo, hi)| lo <= truth && truth <= hi))
        .count();
    let ses: Vec<f64> = ok.iter().filter_map(|d| d.se).collect();
    let mean_se = (!ses.is_empty()).then(|| ses.iter().sum::<f64>() / ses.len() as f64);

    Ok(McSummary {
        estimator,
        reps,
        true_effect: truth,
        mean_estimate: mean,
        bias: mean - truth,
        sd,
        rmse,
        coverage_rate: covered as f64 / m,
        mean_se,
        failures,
    })
}
