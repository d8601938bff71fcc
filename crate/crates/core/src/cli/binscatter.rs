//! Binned means of a cross-section on each side of the cutoff.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::local::Side;
use crate::panel::{format_f64, CrossSection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesLabel {
    Period0,
    Period1,
    FirstDifference,
}

impl SeriesLabel {
    pub fn name(self) -> &'static str {
        match self {
            SeriesLabel::Period0 => "period0",
            SeriesLabel::Period1 => "period1",
            SeriesLabel::FirstDifference => "first_difference",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub bin_center: f64,
    pub mean_value: f64,
    pub count: usize,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedSeries {
    pub series_label: SeriesLabel,
    /// Left-side bins then right-side bins, each in increasing distance.
    pub bins: Vec<Bin>,
}

/// Equal-width bins per side over the observed distance range: left bins
/// tile `[min, 0)`, right bins tile `[0, max]`. Empty bins are omitted.
pub fn bin_cross_section(points: &CrossSection, n_bins: usize, label: SeriesLabel) -> Result<BinnedSeries> {
    if n_bins < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 bins, got {n_bins}")));
    }
    let mut bins = Vec::new();
    for side in [Side::Left, Side::Right] {
        let pairs = points.side(side);
        if pairs.is_empty() {
            return Err(Error::InsufficientData {
                side,
                needed: 1,
                found: 0,
            });
        }
        let (lo, hi) = match side {
            Side::Left => (pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min), 0.0),
            Side::Right => (0.0, pairs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)),
        };
        let width = (hi - lo) / n_bins as f64;
        let mut sums = vec![0.0; n_bins];
        let mut counts = vec![0usize; n_bins];
        for (d, y) in pairs {
            let idx = if width > 0.0 {
                (((d - lo) / width).floor() as usize).min(n_bins - 1)
            } else {
                0
            };
            sums[idx] += y;
            counts[idx] += 1;
        }
        for idx in 0..n_bins {
            if counts[idx] > 0 {
                bins.push(Bin {
                    bin_center: lo + (idx as f64 + 0.5) * width,
                    mean_value: sums[idx] / counts[idx] as f64,
                    count: counts[idx],
                    side,
                });
            }
        }
    }
    Ok(BinnedSeries {
        series_label: label,
        bins,
    })
}

pub(crate) fn write_series<W: Write>(out: W, series: &[BinnedSeries]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["series", "side", "bin_center", "mean_value", "count"])?;
    for s in series {
        for b in &s.bins {
            wtr.write_record([
                s.series_label.name().to_string(),
                b.side.to_string(),
                format_f64(b.bin_center),
                format_f64(b.mean_value),
                b.count.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_respect_cutoff() {
        let d: Vec<f64> = (0..100).map(|i| -1.0 + 0.02 * i as f64 + 0.01).collect();
        let y: Vec<f64> = d.iter().map(|&d| if d >= 0.0 { 1.0 + d } else { d }).collect();
        let cs = CrossSection::from_pairs(&d, &y).unwrap();
        let s = bin_cross_section(&cs, 5, SeriesLabel::Period0).unwrap();
        assert_eq!(s.bins.len(), 10);
        for side in [Side::Left, Side::Right] {
            let b: Vec<&Bin> = s.bins.iter().filter(|b| b.side == side).collect();
            assert!(b.windows(2).all(|w| w[0].bin_center < w[1].bin_center));
            assert_eq!(b.iter().map(|b| b.count).sum::<usize>(), 50);
        }
        assert!(s.bins.iter().all(|b| (b.bin_center < 0.0) == (b.side == Side::Left)));
        // Each bin mean is the mean of its members, which for a line is the
        // line at the members' mean distance.
        let right0 = s.bins.iter().find(|b| b.side == Side::Right).unwrap();
        assert!((right0.mean_value - 1.1).abs() < 1e-12);
    }

    #[test]
    fn single_point_right_side() {
        let cs = CrossSection::from_pairs(&[-0.5, 0.0], &[1.0, 2.0]).unwrap();
        let s = bin_cross_section(&cs, 3, SeriesLabel::Period1).unwrap();
        assert_eq!(s.bins.len(), 2);
        assert_eq!(s.bins[1].bin_center, 0.0);
    }

    #[test]
    fn empty_side_and_too_few_bins() {
        let cs = CrossSection::from_pairs(&[0.5, 1.0], &[1.0, 2.0]).unwrap();
        assert!(matches!(
            bin_cross_section(&cs, 3, SeriesLabel::Period0),
            Err(Error::InsufficientData { side: Side::Left, .. })
        ));
        assert!(bin_cross_section(&cs, 1, SeriesLabel::Period0).is_err());
    }
}
