//! Sharp RD and difference-in-discontinuities estimators.
//!
//! Every estimate uses one bandwidth for both sides and, for the
//! diff-in-disc forms, both periods. That is what makes the per-period
//! decomposition and the equivalence of the first-difference and pooled
//! forms hold exactly.

mod diffdisc;
mod inference;
mod rd;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::local::{BandwidthSpec, KernelKind};

pub use diffdisc::{
    estimate_diff_disc_fd, estimate_diff_disc_pooled, estimate_diff_disc_pooled_repeated,
};
pub use inference::{confidence_interval, normal_quantile, robust_standard_error, WeightedDesign};
pub use rd::estimate_sharp_rd;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorConfig {
    pub kernel: KernelKind,
    pub bandwidth: BandwidthSpec,
    /// Local polynomial order, at least 1.
    pub order: usize,
    pub confidence_level: f64,
}

impl EstimatorConfig {
    /// Triangular kernel, local linear, 95% intervals.
    pub fn new(bandwidth: BandwidthSpec) -> Self {
        Self {
            kernel: KernelKind::Triangular,
            bandwidth,
            order: 1,
            confidence_level: 0.95,
        }
    }

    pub fn fixed(h: f64) -> Self {
        Self::new(BandwidthSpec::Fixed(h))
    }

    pub fn with_kernel(mut self, kernel: KernelKind) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_confidence_level(mut self, level: f64) -> Self {
        self.confidence_level = level;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::InvalidArgument(format!(
                "order must be at least 1, got {}",
                self.order
            )));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "confidence level must lie strictly inside (0, 1), got {}",
                self.confidence_level
            )));
        }
        self.bandwidth.validate()
    }
}

/// Sharp RD discontinuity at the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdEstimate {
    /// `intercept_right - intercept_left`.
    pub tau_hat: f64,
    /// `None` when the sandwich variance is not computable.
    pub se: Option<f64>,
    pub ci: Option<(f64, f64)>,
    /// Limit from below.
    pub intercept_left: f64,
    /// Limit from above.
    pub intercept_right: f64,
    pub n_left: usize,
    pub n_right: usize,
    pub bandwidth_used: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffDiscVariant {
    FirstDifference,
    Pooled,
}

impl DiffDiscVariant {
    pub fn name(self) -> &'static str {
        match self {
            DiffDiscVariant::FirstDifference => "first_difference",
            DiffDiscVariant::Pooled => "pooled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffDiscEstimate {
    /// Treatment effect at the cutoff.
    pub tau_hat: f64,
    pub se: Option<f64>,
    pub ci: Option<(f64, f64)>,
    /// Time-invariant jump at the cutoff; equals `disc_pre`.
    pub gamma_hat: f64,
    /// Pre-period discontinuity.
    pub disc_pre: f64,
    /// Post-period discontinuity.
    pub disc_post: f64,
    pub variant: DiffDiscVariant,
    pub bandwidth_used: f64,
    /// Units with positive kernel weight.
    pub n_units_effective: usize,
    pub n_left: usize,
    pub n_right: usize,
}

/// Coefficients of the pooled interaction regression
///
/// `y = Σ_k D^k [δ_k + R γ_k + T (α_k + R β_k)]`
///
/// with `R = 1(D >= 0)` and `T = 1(t = 1)`. Entry `k` of each vector is the
/// coefficient on `D^k`; with local linear fits these are the eight
/// coefficients `δ0, δ1, γ0, γ1, α0, α1, β0, β1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PooledCoefficients {
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl PooledCoefficients {
    /// The difference-in-discontinuities estimate.
    pub fn beta0(&self) -> f64 {
        self.beta[0]
    }
}

/// Flat, stable result record shared by every estimator.
///
/// Fields that do not apply to an estimator are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub tau_hat: f64,
    pub se: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    pub gamma_hat: Option<f64>,
    pub disc_pre: Option<f64>,
    pub disc_post: Option<f64>,
    pub bandwidth: f64,
    pub n_left: usize,
    pub n_right: usize,
    pub variant: String,
}

impl ResultRecord {
    pub const KEYS: [&'static str; 11] = [
        "tau_hat",
        "se",
        "ci_lower",
        "ci_upper",
        "gamma_hat",
        "disc_pre",
        "disc_post",
        "bandwidth",
        "n_left",
        "n_right",
        "variant",
    ];
}

impl From<&RdEstimate> for ResultRecord {
    fn from(e: &RdEstimate) -> Self {
        Self {
            tau_hat: e.tau_hat,
            se: e.se,
            ci_lower: e.ci.map(|c| c.0),
            ci_upper: e.ci.map(|c| c.1),
            gamma_hat: None,
            disc_pre: None,
            disc_post: None,
            bandwidth: e.bandwidth_used,
            n_left: e.n_left,
            n_right: e.n_right,
            variant: "rd".into(),
        }
    }
}

impl From<&DiffDiscEstimate> for ResultRecord {
    fn from(e: &DiffDiscEstimate) -> Self {
        Self {
            tau_hat: e.tau_hat,
            se: e.se,
            ci_lower: e.ci.map(|c| c.0),
            ci_upper: e.ci.map(|c| c.1),
            gamma_hat: Some(e.gamma_hat),
            disc_pre: Some(e.disc_pre),
            disc_post: Some(e.disc_post),
            bandwidth: e.bandwidth_used,
            n_left: e.n_left,
            n_right: e.n_right,
            variant: e.variant.name().into(),
        }
    }
}

type Inference = (Option<f64>, Option<(f64, f64)>);

/// Standard error and interval, or `None` for both when inference is
/// infeasible. Other errors propagate.
fn inference_or_none(se: Result<f64>, tau_hat: f64, level: f64) -> Result<Inference> {
    match se {
        Ok(se) => Ok((Some(se), Some(confidence_interval(tau_hat, se, level)))),
        Err(Error::InferenceInfeasible(_)) => Ok((None, None)),
        Err(e) => Err(e),
    }
}
