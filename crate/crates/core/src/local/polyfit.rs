use nalgebra::DMatrix;

use super::{wls, KernelKind, Side};
use crate::error::{Error, Result};
use crate::panel::CrossSection;

/// Kernel-weighted polynomial fit on one side of the cutoff.
///
/// Per-point vectors cover only the points that received positive weight,
/// in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFit {
    pub side: Side,
    pub order: usize,
    /// Coefficient on `D^k` for `k = 0..=order`, in distance units. The
    /// first entry is the fitted value at the cutoff.
    pub coefficients: Vec<f64>,
    pub distances: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub residuals: Vec<f64>,
    pub n_effective: usize,
    pub bandwidth_used: f64,
    center: f64,
}

impl LocalFit {
    /// Fitted value at the evaluation point (the one-sided limit at the cutoff).
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    /// Design rows `((D - c) / h)^k` for the effective points. The intercept
    /// column is unscaled, so contrasts on it are unaffected by the scaling.
    pub(crate) fn scaled_design(&self) -> DMatrix<f64> {
        design(&self.distances, self.center, self.bandwidth_used, self.order)
    }
}

fn design(distances: &[f64], center: f64, h: f64, order: usize) -> DMatrix<f64> {
    let k = order + 1;
    DMatrix::from_fn(distances.len(), k, |i, j| {
        ((distances[i] - center) / h).powi(j as i32)
    })
}

pub(crate) fn check_order_bandwidth(order: usize, bandwidth: f64) -> Result<()> {
    if order < 1 {
        return Err(Error::InvalidArgument(format!(
            "polynomial order must be at least 1, got {order}"
        )));
    }
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive and finite, got {bandwidth}"
        )));
    }
    Ok(())
}

/// Fits a polynomial in `D - center` to `(distance, value)` pairs with
/// weights `K((D - center) / h)`. `side` only labels errors; callers pass
/// pairs already restricted to one side.
pub fn fit_pairs(
    pairs: &[(f64, f64)],
    center: f64,
    side: Side,
    order: usize,
    kernel: KernelKind,
    bandwidth: f64,
) -> Result<LocalFit> {
    let k = order + 1;
    let mut distances = Vec::new();
    let mut values = Vec::new();
    let mut weights = Vec::new();
    for &(d, y) in pairs {
        let w = kernel.weight((d - center) / bandwidth);
        if w > 0.0 {
            distances.push(d);
            values.push(y);
            weights.push(w);
        }
    }
    let n = distances.len();
    if n < k {
        return Err(Error::InsufficientData {
            side,
            needed: k,
            found: n,
        });
    }

    let x = design(&distances, center, bandwidth, order);
    let b = wls::solve(&x, &values, &weights).ok_or(Error::Singular { side })?;
    let fitted = &x * &b;
    let residuals = values.iter().zip(fitted.iter()).map(|(y, f)| y - f).collect();
    let coefficients = b
        .iter()
        .enumerate()
        .map(|(j, bj)| bj / bandwidth.powi(j as i32))
        .collect();

    Ok(LocalFit {
        side,
        order,
        coefficients,
        distances,
        values,
        weights,
        residuals,
        n_effective: n,
        bandwidth_used: bandwidth,
        center,
    })
}

/// Local polynomial fit of order `order` at the cutoff, using only the
/// points on `side`.
pub fn fit_local_polynomial(
    points: &CrossSection,
    side: Side,
    order: usize,
    kernel: KernelKind,
    bandwidth: f64,
) -> Result<LocalFit> {
    check_order_bandwidth(order, bandwidth)?;
    fit_pairs(&points.side(side), 0.0, side, order, kernel, bandwidth)
}
