//! Test-only oracles, written independently of the library's fitting path:
//! explicit normal equations in raw powers of distance, solved by Gaussian
//! elimination with partial pivoting.

#![allow(dead_code)]

use diffdisc::dgp::{DgpSpec, DistanceLaw, Violation};
use diffdisc::{CrossSection, KernelKind, Side};
use rand::Rng;

pub fn kernel(kind: KernelKind, u: f64) -> f64 {
    match kind {
        KernelKind::Uniform => {
            if u.abs() <= 1.0 {
                0.5
            } else {
                0.0
            }
        }
        KernelKind::Triangular => {
            if u.abs() < 1.0 {
                1.0 - u.abs()
            } else {
                0.0
            }
        }
        KernelKind::Epanechnikov => {
            if u.abs() < 1.0 {
                0.75 * (1.0 - u * u)
            } else {
                0.0
            }
        }
    }
}

/// Solves `a x = b` in place; `None` if a pivot vanishes.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        let scale = a.iter().flat_map(|r| r.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        if a[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Weighted polynomial fit in powers of `d - center` via explicit normal
/// equations. Returns `None` with fewer than `order + 1` weighted points.
pub fn dense_local_fit(
    pairs: &[(f64, f64)],
    center: f64,
    order: usize,
    kind: KernelKind,
    h: f64,
) -> Option<Vec<f64>> {
    let k = order + 1;
    let mut xtwx = vec![vec![0.0; k]; k];
    let mut xtwy = vec![0.0; k];
    let mut used = 0;
    for &(d, y) in pairs {
        let w = kernel(kind, (d - center) / h);
        if w <= 0.0 {
            continue;
        }
        used += 1;
        let x: Vec<f64> = (0..k).map(|j| (d - center).powi(j as i32)).collect();
        for r in 0..k {
            xtwy[r] += w * x[r] * y;
            for c in 0..k {
                xtwx[r][c] += w * x[r] * x[c];
            }
        }
    }
    if used < k {
        return None;
    }
    gauss_solve(xtwx, xtwy)
}

pub fn side_pairs(points: &CrossSection, side: Side) -> Vec<(f64, f64)> {
    points
        .points()
        .iter()
        .filter(|p| (p.distance >= 0.0) == (side == Side::Right))
        .map(|p| (p.distance, p.value))
        .collect()
}

/// Brute-force leave-one-out CV objective: every held-out point is predicted
/// by a dense fit over all other same-side points.
pub fn brute_force_cv(points: &CrossSection, h: f64, order: usize, kind: KernelKind) -> Option<f64> {
    let mut total = 0.0;
    for side in [Side::Left, Side::Right] {
        let pairs = side_pairs(points, side);
        dense_local_fit(&pairs, 0.0, order, kind, h)?;
        for i in 0..pairs.len() {
            let others: Vec<(f64, f64)> = pairs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| *p)
                .collect();
            let b = dense_local_fit(&others, pairs[i].0, order, kind, h)?;
            total += (pairs[i].1 - b[0]).powi(2);
        }
    }
    Some(total)
}

pub fn random_kernel<R: Rng>(rng: &mut R) -> KernelKind {
    KernelKind::ALL[rng.random_range(0..3)]
}

pub fn random_coeffs<R: Rng>(rng: &mut R, degree: usize) -> Vec<f64> {
    (0..=degree).map(|_| rng.random_range(-3.0..3.0)).collect()
}

/// Random simulation spec with polynomial location components of degree at
/// most `max_degree`.
pub fn random_spec<R: Rng>(rng: &mut R, max_degree: usize, noisy: bool) -> DgpSpec {
    let deg0 = rng.random_range(0..=max_degree);
    let deg1 = rng.random_range(0..=max_degree);
    DgpSpec {
        n_units: rng.random_range(150..600),
        distance_law: DistanceLaw::Uniform {
            half_width: rng.random_range(0.5..3.0),
        },
        f0_coeffs: random_coeffs(rng, deg0),
        f1_coeffs: random_coeffs(rng, deg1),
        gamma0: rng.random_range(-5.0..5.0),
        gamma_slope: rng.random_range(-2.0..2.0),
        tau0: rng.random_range(-5.0..5.0),
        tau_slope: rng.random_range(-2.0..2.0),
        noise_sd: if noisy { rng.random_range(0.1..2.0) } else { 0.0 },
        unit_effect_sd: if noisy { rng.random_range(0.0..2.0) } else { 0.0 },
        violation: Violation::None,
    }
}
