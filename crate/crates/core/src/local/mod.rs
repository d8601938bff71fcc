//! One-sided local polynomial regression at the cutoff.

mod bandwidth;
mod kernel;
mod polyfit;
pub(crate) mod wls;

use std::fmt;

use serde::Serialize;

pub use bandwidth::{
    cv_score, cv_scores, select_bandwidth, select_bandwidth_pooled, BandwidthSpec,
    AUTO_GRID_POINTS,
};
pub use kernel::{kernel_weight, KernelKind};
pub use polyfit::{fit_local_polynomial, fit_pairs, LocalFit};

/// Side of the cutoff. Distance zero belongs to the right (treated) side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `distance < 0`
    Left,
    /// `distance >= 0`
    Right,
}

impl Side {
    #[inline]
    pub fn of(distance: f64) -> Side {
        if distance >= 0.0 {
            Side::Right
        } else {
            Side::Left
        }
    }

    pub fn contains(self, distance: f64) -> bool {
        Side::of(distance) == self
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}
