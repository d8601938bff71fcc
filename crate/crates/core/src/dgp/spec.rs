use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceLaw {
    /// Uniform on `(-half_width, half_width)`.
    Uniform { half_width: f64 },
}

/// Breaks exactly one continuity condition in the post period by adding
/// `shift * 1(D >= 0)` to period-1 outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    None,
    /// New sorting between periods: a jump in the post-period error mean.
    Period1Sorting { shift: f64 },
    /// A policy switching on between periods: a jump in `f_1`.
    Period1Policy { shift: f64 },
}

impl Violation {
    pub fn label(self) -> &'static str {
        match self {
            Violation::None => "none",
            Violation::Period1Sorting { .. } => "period1_sorting",
            Violation::Period1Policy { .. } => "period1_policy",
        }
    }

    pub fn shift(self) -> f64 {
        match self {
            Violation::None => 0.0,
            Violation::Period1Sorting { shift } | Violation::Period1Policy { shift } => shift,
        }
    }
}

/// Data-generating process for a two-period border panel.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpSpec {
    pub n_units: usize,
    pub distance_law: DistanceLaw,
    /// `f_0(D) = Σ_k f0_coeffs[k] D^k`.
    pub f0_coeffs: Vec<f64>,
    pub f1_coeffs: Vec<f64>,
    pub gamma0: f64,
    pub gamma_slope: f64,
    pub tau0: f64,
    pub tau_slope: f64,
    pub noise_sd: f64,
    pub unit_effect_sd: f64,
    pub violation: Violation,
}

impl Default for DgpSpec {
    fn default() -> Self {
        Self {
            n_units: 2000,
            distance_law: DistanceLaw::Uniform { half_width: 1.0 },
            f0_coeffs: vec![0.0, 1.0],
            f1_coeffs: vec![0.5, 1.0],
            gamma0: 2.0,
            gamma_slope: 0.0,
            tau0: 1.5,
            tau_slope: 0.0,
            noise_sd: 1.0,
            unit_effect_sd: 1.0,
            violation: Violation::None,
        }
    }
}

fn poly(coeffs: &[f64], d: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * d + c)
}

impl DgpSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n_units < 2 {
            return bad(format!("n_units must be at least 2, got {}", self.n_units));
        }
        let DistanceLaw::Uniform { half_width } = self.distance_law;
        if !(half_width.is_finite() && half_width > 0.0) {
            return bad(format!("distance half-width must be positive, got {half_width}"));
        }
        for (name, sd) in [("noise_sd", self.noise_sd), ("unit_effect_sd", self.unit_effect_sd)] {
            if !(sd.is_finite() && sd >= 0.0) {
                return bad(format!("{name} must be finite and nonnegative, got {sd}"));
            }
        }
        let scalars = [
            self.gamma0,
            self.gamma_slope,
            self.tau0,
            self.tau_slope,
            self.violation.shift(),
        ];
        if self.f0_coeffs.iter().chain(&self.f1_coeffs).chain(&scalars).any(|c| !c.is_finite()) {
            return bad("coefficients must be finite".into());
        }
        Ok(())
    }

    pub fn f(&self, period: u8, d: f64) -> f64 {
        if period == 0 {
            poly(&self.f0_coeffs, d)
        } else {
            poly(&self.f1_coeffs, d)
        }
    }

    pub fn gamma(&self, d: f64) -> f64 {
        self.gamma0 + self.gamma_slope * d
    }

    pub fn tau(&self, d: f64) -> f64 {
        self.tau0 + self.tau_slope * d
    }

    /// Conditional mean of `y_t` given `D = d`, including any violation.
    pub fn mean_outcome(&self, d: f64, period: u8) -> f64 {
        let treated = if d >= 0.0 { 1.0 } else { 0.0 };
        let post = if period == 1 { 1.0 } else { 0.0 };
        self.f(period, d)
            + self.gamma(d) * treated
            + self.tau(d) * treated * post
            + self.violation.shift() * treated * post
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SpecFile = toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        let spec = file.into_spec()?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&SpecFile::from(self)).expect("flat spec always serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// On-disk form: flat keys, anything omitted falls back to the default spec.
#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SpecFile {
    n_units: usize,
    distance_half_width: f64,
    f0_coeffs: Vec<f64>,
    f1_coeffs: Vec<f64>,
    gamma0: f64,
    gamma_slope: f64,
    tau0: f64,
    tau_slope: f64,
    noise_sd: f64,
    unit_effect_sd: f64,
    violation: String,
    violation_shift: f64,
}

impl Default for SpecFile {
    fn default() -> Self {
        SpecFile::from(&DgpSpec::default())
    }
}

impl From<&DgpSpec> for SpecFile {
    fn from(s: &DgpSpec) -> Self {
        let DistanceLaw::Uniform { half_width } = s.distance_law;
        SpecFile {
            n_units: s.n_units,
            distance_half_width: half_width,
            f0_coeffs: s.f0_coeffs.clone(),
            f1_coeffs: s.f1_coeffs.clone(),
            gamma0: s.gamma0,
            gamma_slope: s.gamma_slope,
            tau0: s.tau0,
            tau_slope: s.tau_slope,
            noise_sd: s.noise_sd,
            unit_effect_sd: s.unit_effect_sd,
            violation: s.violation.label().into(),
            violation_shift: s.violation.shift(),
        }
    }
}

impl SpecFile {
    fn into_spec(self) -> Result<DgpSpec> {
        let shift = self.violation_shift;
        let violation = match self.violation.as_str() {
            "none" => Violation::None,
            "period1_sorting" => Violation::Period1Sorting { shift },
            "period1_policy" => Violation::Period1Policy { shift },
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown violation `{other}` (expected none, period1_sorting or period1_policy)"
                )))
            }
        };
        Ok(DgpSpec {
            n_units: self.n_units,
            distance_law: DistanceLaw::Uniform {
                half_width: self.distance_half_width,
            },
            f0_coeffs: self.f0_coeffs,
            f1_coeffs: self.f1_coeffs,
            gamma0: self.gamma0,
            gamma_slope: self.gamma_slope,
            tau0: self.tau0,
            tau_slope: self.tau_slope,
            noise_sd: self.noise_sd,
            unit_effect_sd: self.unit_effect_sd,
            violation,
        })
    }
}
