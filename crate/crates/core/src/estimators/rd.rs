use super::inference::{robust_standard_error, WeightedDesign};
use super::{inference_or_none, EstimatorConfig, RdEstimate};
use crate::error::Result;
use crate::local::{fit_local_polynomial, select_bandwidth, LocalFit, Side};
use crate::panel::CrossSection;

fn design_of(fit: &LocalFit) -> WeightedDesign {
    WeightedDesign {
        x: fit.scaled_design(),
        weights: fit.weights.clone(),
        residuals: fit.residuals.clone(),
    }
}

/// Sharp RD at a given bandwidth. Skips the variance when `with_se` is false.
pub(crate) fn rd_at_bandwidth(points: &CrossSection, h: f64, config: &EstimatorConfig, with_se: bool) -> Result<RdEstimate> {
    let left = fit_local_polynomial(points, Side::Left, config.order, config.kernel, h)?;
    let right = fit_local_polynomial(points, Side::Right, config.order, config.kernel, h)?;
    let tau_hat = right.intercept() - left.intercept();

    let (se, ci) = if with_se {
        let stacked = WeightedDesign::stack(&[design_of(&left), design_of(&right)]);
        let k = config.order + 1;
        let mut contrast = vec![0.0; 2 * k];
        contrast[0] = -1.0;
        contrast[k] = 1.0;
        inference_or_none(
            robust_standard_error(&stacked, &contrast, None),
            tau_hat,
            config.confidence_level,
        )?
    } else {
        (None, None)
    };

    Ok(RdEstimate {
        tau_hat,
        se,
        ci,
        intercept_left: left.intercept(),
        intercept_right: right.intercept(),
        n_left: left.n_effective,
        n_right: right.n_effective,
        bandwidth_used: h,
    })
}

/// Jump in the conditional mean of `points` at distance zero.
pub fn estimate_sharp_rd(points: &CrossSection, config: &EstimatorConfig) -> Result<RdEstimate> {
    config.validate()?;
    let h = select_bandwidth(points, &config.bandwidth, config.order, config.kernel)?;
    rd_at_bandwidth(points, h, config, true)
}
