use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;

use super::inference::{robust_standard_error, WeightedDesign};
use super::rd::rd_at_bandwidth;
use super::{inference_or_none, DiffDiscEstimate, DiffDiscVariant, EstimatorConfig, PooledCoefficients};
use crate::error::{Error, Result};
use crate::local::{select_bandwidth, select_bandwidth_pooled, wls, Side};
use crate::panel::{first_difference, period_slice, validate_panel, IssueKind, Observation, PanelDataset, POST, PRE};

/// Difference-in-discontinuities as a sharp RD on `y_1 - y_0`.
///
/// The bandwidth is chosen on the differenced outcome and reused for the
/// per-period discontinuities reported alongside.
pub fn estimate_diff_disc_fd(data: &PanelDataset, config: &EstimatorConfig) -> Result<DiffDiscEstimate> {
    config.validate()?;
    let fd = first_difference(data)?;
    let h = select_bandwidth(&fd, &config.bandwidth, config.order, config.kernel)?;
    let main = rd_at_bandwidth(&fd, h, config, true)?;
    let pre = rd_at_bandwidth(&period_slice(data, PRE)?, h, config, false)?;
    let post = rd_at_bandwidth(&period_slice(data, POST)?, h, config, false)?;

    Ok(DiffDiscEstimate {
        tau_hat: main.tau_hat,
        se: main.se,
        ci: main.ci,
        gamma_hat: pre.tau_hat,
        disc_pre: pre.tau_hat,
        disc_post: post.tau_hat,
        variant: DiffDiscVariant::FirstDifference,
        bandwidth_used: h,
        n_units_effective: main.n_left + main.n_right,
        n_left: main.n_left,
        n_right: main.n_right,
    })
}

/// Difference-in-discontinuities from the pooled interaction regression on a
/// balanced panel. Standard errors cluster by unit.
pub fn estimate_diff_disc_pooled(data: &PanelDataset, config: &EstimatorConfig) -> Result<(DiffDiscEstimate, PooledCoefficients)> {
    config.validate()?;
    let report = validate_panel(data);
    if !report.is_valid {
        return Err(Error::InvalidPanel(Box::new(report)));
    }
    pooled(data, config)
}

/// Pooled estimator for repeated cross-sections: units need not appear in
/// both periods and their ids need not match across periods.
pub fn estimate_diff_disc_pooled_repeated(data: &PanelDataset, config: &EstimatorConfig) -> Result<(DiffDiscEstimate, PooledCoefficients)> {
    config.validate()?;
    let report = validate_panel(data);
    let blocking = report
        .errors()
        .any(|i| !matches!(i.kind, IssueKind::Unbalanced | IssueKind::DistanceDrift));
    if blocking {
        return Err(Error::InvalidPanel(Box::new(report)));
    }
    pooled(data, config)
}

fn pooled(data: &PanelDataset, config: &EstimatorConfig) -> Result<(DiffDiscEstimate, PooledCoefficients)> {
    let pre = period_slice(data, PRE)?;
    let post = period_slice(data, POST)?;
    let h = select_bandwidth_pooled(&[&pre, &post], &config.bandwidth, config.order, config.kernel)?;
    pooled_at_bandwidth(data.observations(), h, config)
}

/// Column blocks of the interaction design, each holding `D^0..D^p`.
const BLOCKS: usize = 4;

fn block_active(block: usize, right: bool, post: bool) -> bool {
    match block {
        0 => true,
        1 => right,
        2 => post,
        _ => right && post,
    }
}

pub(crate) fn pooled_at_bandwidth(observations: &[Observation], h: f64, config: &EstimatorConfig) -> Result<(DiffDiscEstimate, PooledCoefficients)> {
    let k = config.order + 1;
    let mut rows: Vec<&Observation> = Vec::new();
    let mut weights = Vec::new();
    let mut cells = [[0usize; 2]; 2];
    for obs in observations {
        let w = config.kernel.weight(obs.distance / h);
        if w > 0.0 {
            rows.push(obs);
            weights.push(w);
            cells[obs.period as usize][(Side::of(obs.distance) == Side::Right) as usize] += 1;
        }
    }
    for period_cells in cells {
        for (side, found) in [Side::Left, Side::Right].into_iter().zip(period_cells) {
            if found < k {
                return Err(Error::InsufficientData {
                    side,
                    needed: k,
                    found,
                });
            }
        }
    }

    let n = rows.len();
    let x = DMatrix::from_fn(n, BLOCKS * k, |i, col| {
        let obs = rows[i];
        let (block, power) = (col / k, col % k);
        if block_active(block, obs.distance >= 0.0, obs.period == POST) {
            (obs.distance / h).powi(power as i32)
        } else {
            0.0
        }
    });
    let y: Vec<f64> = rows.iter().map(|o| o.outcome).collect();
    let b = wls::solve(&x, &y, &weights).ok_or(Error::SingularPooled)?;
    let fitted = &x * &b;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(y, f)| y - f).collect();

    let unscale = |block: usize| -> Vec<f64> {
        (0..k)
            .map(|j| b[block * k + j] / h.powi(j as i32))
            .collect()
    };
    let coefs = PooledCoefficients {
        delta: unscale(0),
        gamma: unscale(1),
        alpha: unscale(2),
        beta: unscale(3),
    };

    let mut cluster_of: HashMap<&str, usize> = HashMap::new();
    let clusters: Vec<usize> = rows
        .iter()
        .map(|o| {
            let next = cluster_of.len();
            *cluster_of.entry(o.unit_id.as_str()).or_insert(next)
        })
        .collect();
    let mut contrast = vec![0.0; BLOCKS * k];
    contrast[3 * k] = 1.0;
    let tau_hat = coefs.beta0();
    let design = WeightedDesign {
        x,
        weights,
        residuals,
    };
    let (se, ci) = inference_or_none(
        robust_standard_error(&design, &contrast, Some(&clusters)),
        tau_hat,
        config.confidence_level,
    )?;

    let mut left_units = HashSet::new();
    let mut right_units = HashSet::new();
    for o in &rows {
        match Side::of(o.distance) {
            Side::Left => left_units.insert(o.unit_id.as_str()),
            Side::Right => right_units.insert(o.unit_id.as_str()),
        };
    }

    let disc_pre = coefs.gamma[0];
    let estimate = DiffDiscEstimate {
        tau_hat,
        se,
        ci,
        gamma_hat: disc_pre,
        disc_pre,
        disc_post: disc_pre + tau_hat,
        variant: DiffDiscVariant::Pooled,
        bandwidth_used: h,
        n_units_effective: cluster_of.len(),
        n_left: left_units.len(),
        n_right: right_units.len(),
    };
    Ok((estimate, coefs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::KernelKind;

    /// y_t = D + 2 R + 1.5 R t on an even grid.
    fn noiseless_panel() -> PanelDataset {
        let mut obs = Vec::new();
        for i in 0..40 {
            let d = -0.975 + 0.05 * i as f64;
            let r = if d >= 0.0 { 1.0 } else { 0.0 };
            obs.push(Observation::new(format!("u{i}"), 0, d + 2.0 * r, d));
            obs.push(Observation::new(format!("u{i}"), 1, d + 3.5 * r, d));
        }
        PanelDataset::new(obs, "noiseless")
    }

    #[test]
    fn fd_recovers_tau_and_gamma() {
        let est = estimate_diff_disc_fd(&noiseless_panel(), &EstimatorConfig::fixed(0.5)).unwrap();
        assert!((est.tau_hat - 1.5).abs() < 1e-10);
        assert!((est.gamma_hat - 2.0).abs() < 1e-10);
        assert!((est.disc_post - 3.5).abs() < 1e-10);
        assert_eq!(est.n_units_effective, 20);
    }

    #[test]
    fn pooled_recovers_tau() {
        let (est, coefs) = estimate_diff_disc_pooled(&noiseless_panel(), &EstimatorConfig::fixed(0.5)).unwrap();
        assert!((coefs.beta0() - 1.5).abs() < 1e-10);
        assert!((coefs.gamma[0] - 2.0).abs() < 1e-10);
        assert!((coefs.delta[1] - 1.0).abs() < 1e-10);
        assert!(coefs.alpha.iter().all(|a| a.abs() < 1e-10));
        assert_eq!(est.tau_hat, coefs.beta0());
        assert_eq!(est.variant, DiffDiscVariant::Pooled);
    }

    #[test]
    fn identical_periods_give_zero() {
        let data = noiseless_panel();
        let flat: Vec<Observation> = data
            .observations()
            .iter()
            .map(|o| Observation {
                outcome: o.distance.powi(2) + if o.distance >= 0.0 { 2.0 } else { 0.0 },
                ..o.clone()
            })
            .collect();
        let est = estimate_diff_disc_fd(&PanelDataset::new(flat, "flat"), &EstimatorConfig::fixed(0.5)).unwrap();
        assert_eq!(est.tau_hat, 0.0);
    }

    #[test]
    fn repeated_cross_sections() {
        let rcs: Vec<Observation> = noiseless_panel()
            .observations()
            .iter()
            .map(|o| Observation {
                unit_id: format!("{}-t{}", o.unit_id, o.period),
                ..o.clone()
            })
            .collect();
        let data = PanelDataset::new(rcs, "rcs");
        let cfg = EstimatorConfig::fixed(0.5);
        let (est, _) = estimate_diff_disc_pooled_repeated(&data, &cfg).unwrap();
        assert!((est.tau_hat - 1.5).abs() < 1e-10);
        assert!(matches!(estimate_diff_disc_fd(&data, &cfg), Err(Error::InvalidPanel(_))));
        assert!(matches!(estimate_diff_disc_pooled(&data, &cfg), Err(Error::InvalidPanel(_))));
    }

    #[test]
    fn pooled_insufficient_cell() {
        let obs: Vec<Observation> = noiseless_panel()
            .observations()
            .iter()
            .filter(|o| !(o.period == 1 && o.distance > 0.0 && o.distance < 0.3))
            .cloned()
            .collect();
        let data = PanelDataset::new(obs, "gappy");
        let cfg = EstimatorConfig::fixed(0.3).with_kernel(KernelKind::Triangular);
        assert!(matches!(
            estimate_diff_disc_pooled_repeated(&data, &cfg),
            Err(Error::InsufficientData { side: Side::Right, .. })
        ));
    }
}
