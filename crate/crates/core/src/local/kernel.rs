use std::fmt;
use std::str::FromStr;

use serde::Serialize;

/// Compactly supported kernels on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `0.5` on `|u| <= 1`.
    Uniform,
    /// `1 - |u|`.
    #[default]
    Triangular,
    /// `0.75 (1 - u^2)`.
    Epanechnikov,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [
        KernelKind::Uniform,
        KernelKind::Triangular,
        KernelKind::Epanechnikov,
    ];

    #[inline]
    pub fn weight(self, u: f64) -> f64 {
        let a = u.abs();
        match self {
            KernelKind::Uniform => {
                if a <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
            KernelKind::Triangular => (1.0 - a).max(0.0),
            KernelKind::Epanechnikov => (0.75 * (1.0 - u * u)).max(0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Uniform => "uniform",
            KernelKind::Triangular => "triangular",
            KernelKind::Epanechnikov => "epanechnikov",
        }
    }
}

#[inline]
pub fn kernel_weight(kind: KernelKind, u: f64) -> f64 {
    kind.weight(u)
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(KernelKind::Uniform),
            "triangular" => Ok(KernelKind::Triangular),
            "epanechnikov" => Ok(KernelKind::Epanechnikov),
            other => Err(format!("unknown kernel `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_forms() {
        assert_eq!(kernel_weight(KernelKind::Triangular, 0.0), 1.0);
        assert_eq!(kernel_weight(KernelKind::Triangular, 1.5), 0.0);
        assert_eq!(kernel_weight(KernelKind::Epanechnikov, 0.5), 0.5625);
        assert_eq!(kernel_weight(KernelKind::Uniform, 1.0), 0.5);
        assert_eq!(kernel_weight(KernelKind::Uniform, 1.0 + 1e-12), 0.0);
    }

    proptest! {
        #[test]
        fn shape(u in -3.0f64..3.0) {
            for k in KernelKind::ALL {
                let w = k.weight(u);
                prop_assert!(w >= 0.0);
                prop_assert_eq!(w, k.weight(-u));
                prop_assert!(w <= k.weight(0.0));
                if u.abs() > 1.0 {
                    prop_assert_eq!(w, 0.0);
                }
            }
        }
    }
}
