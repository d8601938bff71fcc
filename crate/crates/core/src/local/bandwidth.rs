//! Bandwidth selection: fixed, leave-one-out cross-validation over a grid,
//! and a Silverman-style pilot.

use rayon::prelude::*;
use serde::Serialize;

use super::polyfit::{check_order_bandwidth, fit_pairs};
use super::{KernelKind, Side};
use crate::error::{Error, Result};
use crate::panel::CrossSection;

/// Number of grid points used by [`BandwidthSpec::auto_for_range`].
pub const AUTO_GRID_POINTS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthSpec {
    Fixed(f64),
    LeaveOneOutCv { grid: Vec<f64> },
    /// `1.06 * sd(D) * n^(-1/5)`. A pilot heuristic, never used implicitly.
    RuleOfThumb,
}

impl BandwidthSpec {
    /// `n` points evenly spaced in log scale from `lo` to `hi` inclusive.
    pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
        (0..n)
            .map(|i| if i == n - 1 { hi } else { lo * ratio.powi(i as i32) })
            .collect()
    }

    /// Leave-one-out CV over 12 geometric steps spanning
    /// `[range / 50, range / 2]`, where `range` is the spread of distances.
    pub fn auto_for_range(range: f64) -> Self {
        BandwidthSpec::LeaveOneOutCv {
            grid: Self::geometric_grid(range / 50.0, range / 2.0, AUTO_GRID_POINTS),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BandwidthSpec::Fixed(h) => {
                if !(h.is_finite() && *h > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "fixed bandwidth must be positive, got {h}"
                    )));
                }
            }
            BandwidthSpec::LeaveOneOutCv { grid } => {
                if grid.is_empty() {
                    return Err(Error::InvalidArgument("empty CV bandwidth grid".into()));
                }
                if let Some(h) = grid.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
                    return Err(Error::InvalidArgument(format!(
                        "CV grid entries must be positive, got {h}"
                    )));
                }
            }
            BandwidthSpec::RuleOfThumb => {}
        }
        Ok(())
    }
}

fn sorted_side(points: &CrossSection, side: Side) -> Vec<(f64, f64)> {
    let mut pairs = points.side(side);
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Leave-one-out squared prediction error of one side's points.
///
/// Each held-out point is predicted by a local polynomial centred on it,
/// fitted to the remaining same-side points within `h`.
fn side_loo_sse(sorted: &[(f64, f64)], h: f64, order: usize, kernel: KernelKind, side: Side) -> Option<f64> {
    let mut sse = 0.0;
    let mut window = Vec::new();
    for (i, &(di, yi)) in sorted.iter().enumerate() {
        let lo = sorted.partition_point(|p| p.0 < di - h);
        let hi = sorted.partition_point(|p| p.0 <= di + h);
        window.clear();
        window.extend(
            sorted[lo..hi]
                .iter()
                .enumerate()
                .filter(|(j, _)| lo + j != i)
                .map(|(_, p)| *p),
        );
        let fit = fit_pairs(&window, di, side, order, kernel, h).ok()?;
        let e = yi - fit.intercept();
        sse += e * e;
    }
    Some(sse)
}

/// Leave-one-out CV objective at bandwidth `h`, summed over both sides.
///
/// `None` when `h` is infeasible: the cutoff fit fails on either side or
/// some held-out point cannot be predicted.
pub fn cv_score(points: &CrossSection, h: f64, order: usize, kernel: KernelKind) -> Option<f64> {
    let mut total = 0.0;
    for side in [Side::Left, Side::Right] {
        let sorted = sorted_side(points, side);
        fit_pairs(&sorted, 0.0, side, order, kernel, h).ok()?;
        total += side_loo_sse(&sorted, h, order, kernel, side)?;
    }
    Some(total)
}

/// CV objective for every grid entry, in grid order.
pub fn cv_scores(points: &CrossSection, grid: &[f64], order: usize, kernel: KernelKind) -> Vec<(f64, Option<f64>)> {
    grid.par_iter()
        .map(|&h| (h, cv_score(points, h, order, kernel)))
        .collect()
}

/// Smallest score wins; equal scores go to the smaller bandwidth.
fn argmin(scored: Vec<(f64, Option<f64>)>) -> Result<f64> {
    let mut feasible: Vec<(f64, f64)> = scored
        .into_iter()
        .filter_map(|(h, s)| s.map(|s| (h, s)))
        .collect();
    feasible.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(f64, f64)> = None;
    for (h, s) in feasible {
        match best {
            Some((_, bs)) if s >= bs => {}
            _ => best = Some((h, s)),
        }
    }
    best.map(|(h, _)| h).ok_or(Error::NoFeasibleBandwidth)
}

fn rule_of_thumb(distances: &[f64]) -> Result<f64> {
    let n = distances.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "rule-of-thumb bandwidth needs at least two points".into(),
        ));
    }
    let mean = distances.iter().sum::<f64>() / n as f64;
    let var = distances.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let h = 1.06 * var.sqrt() * (n as f64).powf(-0.2);
    if h > 0.0 {
        Ok(h)
    } else {
        Err(Error::InvalidArgument(
            "rule-of-thumb bandwidth undefined: all distances equal".into(),
        ))
    }
}

fn require_both_sides(points: &CrossSection, order: usize) -> Result<()> {
    for side in [Side::Left, Side::Right] {
        if points.count_side(side) == 0 {
            return Err(Error::InsufficientData {
                side,
                needed: order + 1,
                found: 0,
            });
        }
    }
    Ok(())
}

pub fn select_bandwidth(points: &CrossSection, spec: &BandwidthSpec, order: usize, kernel: KernelKind) -> Result<f64> {
    spec.validate()?;
    check_order_bandwidth(order, 1.0)?;
    require_both_sides(points, order)?;
    match spec {
        BandwidthSpec::Fixed(h) => Ok(*h),
        BandwidthSpec::RuleOfThumb => rule_of_thumb(&points.distances().collect::<Vec<_>>()),
        BandwidthSpec::LeaveOneOutCv { grid } => argmin(cv_scores(points, grid, order, kernel)),
    }
}

/// Bandwidth for an estimator that fits several cross-sections jointly
/// (the two periods of a pooled regression). CV sums the per-section
/// objectives; the pilot uses all distances together.
pub fn select_bandwidth_pooled(sections: &[&CrossSection], spec: &BandwidthSpec, order: usize, kernel: KernelKind) -> Result<f64> {
    spec.validate()?;
    check_order_bandwidth(order, 1.0)?;
    for s in sections {
        require_both_sides(s, order)?;
    }
    match spec {
        BandwidthSpec::Fixed(h) => Ok(*h),
        BandwidthSpec::RuleOfThumb => {
            let all: Vec<f64> = sections.iter().flat_map(|s| s.distances()).collect();
            rule_of_thumb(&all)
        }
        BandwidthSpec::LeaveOneOutCv { grid } => {
            let scored = grid
                .par_iter()
                .map(|&h| {
                    let total = sections
                        .iter()
                        .map(|s| cv_score(s, h, order, kernel))
                        .sum::<Option<f64>>();
                    (h, total)
                })
                .collect();
            argmin(scored)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_passes_through() {
        let cs = CrossSection::from_pairs(&[-1.0, 1.0], &[0.0, 0.0]).unwrap();
        let h = select_bandwidth(&cs, &BandwidthSpec::Fixed(0.4), 1, KernelKind::Triangular).unwrap();
        assert_eq!(h, 0.4);
    }

    #[test]
    fn rule_of_thumb_closed_form() {
        // 512 points at -a and 512 at +a with sample sd exactly 1.
        let a = (1023.0f64 / 1024.0).sqrt();
        let d: Vec<f64> = (0..1024).map(|i| if i % 2 == 0 { -a } else { a }).collect();
        let cs = CrossSection::from_pairs(&d, &vec![0.0; 1024]).unwrap();
        let h = select_bandwidth(&cs, &BandwidthSpec::RuleOfThumb, 1, KernelKind::Triangular).unwrap();
        // 1.06 * 1024^(-1/5) = 1.06 / 4
        assert!((h - 0.265).abs() < 1e-12, "{h}");
    }

    #[test]
    fn rejects_bad_specs() {
        let cs = CrossSection::from_pairs(&[-1.0, 1.0], &[0.0, 0.0]).unwrap();
        let k = KernelKind::Triangular;
        assert!(select_bandwidth(&cs, &BandwidthSpec::Fixed(0.0), 1, k).is_err());
        assert!(select_bandwidth(&cs, &BandwidthSpec::LeaveOneOutCv { grid: vec![] }, 1, k).is_err());
        assert!(select_bandwidth(&cs, &BandwidthSpec::LeaveOneOutCv { grid: vec![0.1, -0.2] }, 1, k).is_err());
    }

    #[test]
    fn empty_side_is_insufficient() {
        let cs = CrossSection::from_pairs(&[0.5, 1.0], &[0.0, 0.0]).unwrap();
        assert!(matches!(
            select_bandwidth(&cs, &BandwidthSpec::Fixed(1.0), 1, KernelKind::Uniform),
            Err(Error::InsufficientData { side: Side::Left, .. })
        ));
    }

    #[test]
    fn infeasible_grid() {
        let d = [-0.9, -0.5, 0.5, 0.9];
        let cs = CrossSection::from_pairs(&d, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        let spec = BandwidthSpec::LeaveOneOutCv { grid: vec![0.01, 0.02] };
        assert!(matches!(
            select_bandwidth(&cs, &spec, 1, KernelKind::Triangular),
            Err(Error::NoFeasibleBandwidth)
        ));
    }

    #[test]
    fn ties_go_to_smaller_bandwidth() {
        assert_eq!(argmin(vec![(0.4, Some(1.0)), (0.2, Some(1.0)), (0.1, None)]).unwrap(), 0.2);
        assert_eq!(argmin(vec![(0.4, Some(0.5)), (0.2, Some(1.0))]).unwrap(), 0.4);
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = BandwidthSpec::geometric_grid(0.04, 1.0, 12);
        assert_eq!(g.len(), 12);
        assert_eq!(g[0], 0.04);
        assert_eq!(g[11], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let ratios: Vec<f64> = g.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|r| (r - ratios[0]).abs() < 1e-12));
    }
}
