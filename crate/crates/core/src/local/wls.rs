//! Weighted least squares through a Householder QR of the row-scaled design.

use nalgebra::{DMatrix, DVector};

/// Relative rank tolerance: a column whose component orthogonal to the
/// preceding columns is below this fraction of its own norm is dependent.
pub(crate) const RANK_TOL: f64 = 1e-10;

/// Upper-triangular factor of `W^{1/2} X`, or `None` if rank-deficient.
fn factor(x: &DMatrix<f64>, w: &[f64]) -> Option<(nalgebra::linalg::QR<f64, nalgebra::Dyn, nalgebra::Dyn>, DMatrix<f64>)> {
    let (n, k) = x.shape();
    debug_assert_eq!(n, w.len());
    if n < k || k == 0 {
        return None;
    }
    let mut xw = x.clone();
    for (i, wi) in w.iter().enumerate() {
        let s = wi.sqrt();
        for j in 0..k {
            xw[(i, j)] *= s;
        }
    }
    let norms: Vec<f64> = (0..k).map(|j| xw.column(j).norm()).collect();
    let qr = xw.qr();
    let r = qr.r();
    for (j, norm) in norms.iter().enumerate() {
        let d = r[(j, j)].abs();
        if !(norm.is_finite() && *norm > 0.0 && d > RANK_TOL * norm) {
            return None;
        }
    }
    Some((qr, r))
}

/// Minimizes `sum_i w_i (y_i - x_i' b)^2`.
pub(crate) fn solve(x: &DMatrix<f64>, y: &[f64], w: &[f64]) -> Option<DVector<f64>> {
    let (qr, r) = factor(x, w)?;
    let k = x.ncols();
    let mut rhs = DVector::from_iterator(y.len(), y.iter().zip(w).map(|(yi, wi)| yi * wi.sqrt()));
    qr.q_tr_mul(&mut rhs);
    let top = rhs.rows(0, k).into_owned();
    r.solve_upper_triangular(&top)
}

/// `(X' W X)^{-1} c`, computed from the QR factor as `R^{-1} R^{-T} c`.
pub(crate) fn gram_inverse_times(x: &DMatrix<f64>, w: &[f64], c: &DVector<f64>) -> Option<DVector<f64>> {
    let (_, r) = factor(x, w)?;
    let z = r.transpose().solve_lower_triangular(c)?;
    r.solve_upper_triangular(&z)
}
