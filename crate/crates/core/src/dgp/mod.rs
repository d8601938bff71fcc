//! Synthetic two-period border panels and a deterministic Monte Carlo
//! harness around the estimators.
//!
//! Outcomes follow
//!
//! ```text
//! y_it = f_t(D_i) + γ(D_i) 1(D_i >= 0) + τ(D_i) 1(D_i >= 0) 1(t = 1) + η_i + u_it
//! ```
//!
//! with `γ(D) = gamma0 + gamma_slope D` the time-invariant jump (sorting or
//! other policies at the border), `τ(D) = tau0 + tau_slope D` the effect of
//! interest, `η_i` a unit effect shared by both periods and `u_it`
//! idiosyncratic noise.

mod montecarlo;
mod spec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::panel::{Observation, PanelDataset};

pub use montecarlo::{derive_seed, run_monte_carlo, McEstimator, McSummary};
pub use spec::{DgpSpec, DistanceLaw, Violation};

/// The treatment effect at the cutoff, `τ(0)`.
pub fn oracle_true_effect(spec: &DgpSpec) -> f64 {
    spec.tau0
}

/// Draws a balanced panel. Identical `(spec, seed)` pairs give bit-identical
/// panels.
///
/// Per unit the draws are, in order: distance, unit effect, period-0 noise,
/// period-1 noise. Zero standard deviations still consume their draws, so
/// switching noise off leaves the distances unchanged.
pub fn generate_panel(spec: &DgpSpec, seed: u64) -> Result<PanelDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let DistanceLaw::Uniform { half_width } = spec.distance_law;
    let mut observations = Vec::with_capacity(2 * spec.n_units);
    for i in 0..spec.n_units {
        let d: f64 = rng.random_range(-half_width..half_width);
        let eta = spec.unit_effect_sd * rng.sample::<f64, _>(StandardNormal);
        let u0 = spec.noise_sd * rng.sample::<f64, _>(StandardNormal);
        let u1 = spec.noise_sd * rng.sample::<f64, _>(StandardNormal);
        let id = format!("u{i}");
        observations.push(Observation::new(id.clone(), 0, spec.mean_outcome(d, 0) + eta + u0, d));
        observations.push(Observation::new(id, 1, spec.mean_outcome(d, 1) + eta + u1, d));
    }
    let source = format!("dgp seed={seed} violation={}", spec.violation.label());
    Ok(PanelDataset::new(observations, source))
}
