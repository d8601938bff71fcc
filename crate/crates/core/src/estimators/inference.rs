//! Heteroskedasticity-robust (HC1) and cluster-robust sandwich variances for
//! a linear contrast of weighted least squares coefficients.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::local::wls;

/// What a sandwich variance needs from a weighted fit: the design actually
/// used (rows with positive weight), the weights and the residuals.
#[derive(Debug, Clone)]
pub struct WeightedDesign {
    pub x: DMatrix<f64>,
    pub weights: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl WeightedDesign {
    /// Block-diagonal stack of independent fits sharing no coefficients.
    pub fn stack(blocks: &[WeightedDesign]) -> WeightedDesign {
        let n: usize = blocks.iter().map(|b| b.x.nrows()).sum();
        let k: usize = blocks.iter().map(|b| b.x.ncols()).sum();
        let mut x = DMatrix::zeros(n, k);
        let (mut r0, mut c0) = (0, 0);
        let mut weights = Vec::with_capacity(n);
        let mut residuals = Vec::with_capacity(n);
        for b in blocks {
            x.view_mut((r0, c0), b.x.shape()).copy_from(&b.x);
            r0 += b.x.nrows();
            c0 += b.x.ncols();
            weights.extend_from_slice(&b.weights);
            residuals.extend_from_slice(&b.residuals);
        }
        WeightedDesign {
            x,
            weights,
            residuals,
        }
    }
}

/// Standard error of `contrast' b` for the weighted least squares fit `b`.
///
/// Without clusters this is HC1: `n / (n - k) * a' X' W E^2 W X a` with
/// `a = (X' W X)^{-1} contrast`. With clusters the per-row scores
/// `w_i e_i x_i' a` are summed within each cluster before squaring and the
/// small-sample factor becomes `G / (G - 1) * (n - 1) / (n - k)`.
pub fn robust_standard_error(design: &WeightedDesign, contrast: &[f64], clusters: Option<&[usize]>) -> Result<f64> {
    let (n, k) = design.x.shape();
    if contrast.len() != k || design.weights.len() != n || design.residuals.len() != n {
        return Err(Error::InvalidArgument(format!(
            "design is {n}x{k} but contrast has {} entries, weights {}, residuals {}",
            contrast.len(),
            design.weights.len(),
            design.residuals.len()
        )));
    }
    if n <= k {
        return Err(Error::InferenceInfeasible(format!(
            "{n} observations for {k} coefficients leaves no residual degrees of freedom"
        )));
    }
    let c = DVector::from_column_slice(contrast);
    let a = wls::gram_inverse_times(&design.x, &design.weights, &c)
        .ok_or_else(|| Error::InferenceInfeasible("singular design".into()))?;
    let xa = &design.x * a;
    let scores = xa
        .iter()
        .zip(&design.weights)
        .zip(&design.residuals)
        .map(|((xa, w), e)| xa * w * e);

    let n_f = n as f64;
    let k_f = k as f64;
    let var = match clusters {
        None => scores.map(|s| s * s).sum::<f64>() * n_f / (n_f - k_f),
        Some(ids) => {
            if ids.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "{} cluster ids for {n} rows",
                    ids.len()
                )));
            }
            let g = ids.iter().max().map_or(0, |m| m + 1);
            let mut sums = vec![0.0; g];
            let mut seen = vec![false; g];
            for (s, &id) in scores.zip(ids) {
                sums[id] += s;
                seen[id] = true;
            }
            let n_clusters = seen.iter().filter(|s| **s).count();
            if n_clusters < 2 {
                return Err(Error::InferenceInfeasible(
                    "cluster-robust variance needs at least two clusters".into(),
                ));
            }
            let g_f = n_clusters as f64;
            let meat: f64 = sums.iter().map(|s| s * s).sum();
            meat * g_f / (g_f - 1.0) * (n_f - 1.0) / (n_f - k_f)
        }
    };
    Ok(var.max(0.0).sqrt())
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// `tau_hat ± z se` with `z` the `(1 + level) / 2` normal quantile.
pub fn confidence_interval(tau_hat: f64, se: f64, level: f64) -> (f64, f64) {
    let z = normal_quantile(0.5 * (1.0 + level));
    (tau_hat - z * se, tau_hat + z * se)
}
