//! Physical parameters and the Markov-validity report.
//!
//! Units: `c = 1`. When `Γ > 0` the rate unit is `Γ` (so `Γ = 1`), otherwise
//! the rate unit is `Δ`. Times are measured in inverse rate units and lengths
//! in `c` times that.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default ratio below which a time-scale separation counts as "≫".
pub const DEFAULT_WARN_RATIO: f64 = 0.05;
/// Ratio above which the CLI refuses to run without `--force`.
pub const DEFAULT_FAIL_RATIO: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams<T> {
    /// Single-atom amplitude decay rate `Γ`.
    pub gamma: T,
    /// Spectral width `Δ` of the incident Gaussian.
    pub delta: T,
    /// Transition frequency `ω₀`.
    pub omega0: T,
    /// Speed of light, fixed to one.
    pub c: T,
    pub z1: T,
    pub z2: T,
    /// `|z₂ − z₁|`.
    pub l: T,
    /// `ω₀ l / c`, stored exactly as given so closed forms see the caller's value.
    pub k0l: T,
    /// `ω₀ z₁ / c` and `ω₀ z₂ / c`.
    pub k0z1: T,
    pub k0z2: T,
}

impl<T: Real> SimParams<T> {
    /// Atom 1 at the origin, atom 2 at `l = k0l·c/ω₀`.
    pub fn new(gamma: T, delta: T, omega0: T, k0l: T) -> Result<Self> {
        let c = T::one();
        let p = Self {
            gamma,
            delta,
            omega0,
            c,
            z1: T::zero(),
            z2: k0l * c / omega0,
            l: k0l * c / omega0,
            k0l,
            k0z1: T::zero(),
            k0z2: k0l,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the dimensionless ratios used on the command line.
    ///
    /// `gamma_over_delta = 0` switches the rate unit to `Δ` (no scatterer).
    pub fn from_ratios(gamma_over_delta: T, k0l: T, omega0_over_gamma: T) -> Result<Self> {
        if !(gamma_over_delta >= T::zero()) {
            return Err(Error::Config(format!("gamma_over_delta must be ≥ 0, got {gamma_over_delta}")));
        }
        if gamma_over_delta == T::zero() {
            Self::new(T::zero(), T::one(), omega0_over_gamma, k0l)
        } else {
            Self::new(T::one(), T::one() / gamma_over_delta, omega0_over_gamma, k0l)
        }
    }

    /// Places the atoms explicitly; `l` and `k0l` follow from the positions.
    pub fn with_positions(mut self, z1: T, z2: T) -> Result<Self> {
        self.z1 = z1;
        self.z2 = z2;
        self.l = (z2 - z1).abs();
        self.k0z1 = self.omega0 * z1 / self.c;
        self.k0z2 = self.omega0 * z2 / self.c;
        self.k0l = (self.k0z2 - self.k0z1).abs();
        self.validate()?;
        Ok(self)
    }

    /// Exchanges the two atoms without recomputing any phase.
    pub fn swapped(&self) -> Self {
        Self { z1: self.z2, z2: self.z1, k0z1: self.k0z2, k0z2: self.k0z1, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.gamma, self.delta, self.omega0, self.c, self.z1, self.z2, self.l, self.k0l]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("parameters must be finite".into()));
        }
        if self.gamma < T::zero() {
            return Err(Error::Config(format!("gamma must be ≥ 0, got {}", self.gamma)));
        }
        if self.delta <= T::zero() {
            return Err(Error::Config(format!("delta must be > 0, got {}", self.delta)));
        }
        if self.omega0 <= T::zero() {
            return Err(Error::Config(format!("omega0 must be > 0, got {}", self.omega0)));
        }
        if self.c <= T::zero() {
            return Err(Error::Config("c must be > 0".into()));
        }
        if self.l < T::zero() || self.k0l < T::zero() {
            return Err(Error::Config("interatomic distance must be ≥ 0".into()));
        }
        let gap = (self.z2 - self.z1).abs();
        if (gap - self.l).abs() > T::lit(1e-9) * (T::one() + self.l) {
            return Err(Error::Config(format!("|z2 − z1| = {gap} disagrees with l = {}", self.l)));
        }
        Ok(())
    }

    pub fn gamma_over_delta(&self) -> T {
        self.gamma / self.delta
    }

    /// `(ω₀ ≫ Γ, Δ, c/l ≫ Γ, Δ)` at the given factor.
    pub fn markov_flags(&self, factor: T) -> MarkovFlags {
        let fastest = self.gamma.max(self.delta);
        MarkovFlags {
            carrier_separated: self.omega0 >= factor * fastest,
            flight_time_separated: self.l * fastest * factor <= self.c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkovFlags {
    pub carrier_separated: bool,
    pub flight_time_separated: bool,
}

impl MarkovFlags {
    pub fn all(&self) -> bool {
        self.carrier_separated && self.flight_time_separated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioCheck {
    pub name: &'static str,
    pub value: f64,
    pub status: Status,
}

/// Time-scale separations behind the Markov reduction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub checks: Vec<RatioCheck>,
    pub warn_ratio: f64,
    pub fail_ratio: f64,
}

impl ValidityReport {
    pub fn worst(&self) -> Status {
        self.checks.iter().map(|c| c.status).max().unwrap_or(Status::Pass)
    }

    pub fn get(&self, name: &str) -> Option<&RatioCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Reports `Γ/ω₀`, `Δ/ω₀` and `l(Γ+Δ)/c` against the warn/fail thresholds.
pub fn markov_guard<T: Real>(params: &SimParams<T>) -> ValidityReport {
    markov_guard_with(params, DEFAULT_WARN_RATIO, DEFAULT_FAIL_RATIO)
}

pub fn markov_guard_with<T: Real>(params: &SimParams<T>, warn_ratio: f64, fail_ratio: f64) -> ValidityReport {
    let classify = |v: f64| {
        if v > fail_ratio {
            Status::Fail
        } else if v > warn_ratio {
            Status::Warn
        } else {
            Status::Pass
        }
    };
    let g = params.gamma.as_f64();
    let d = params.delta.as_f64();
    let w0 = params.omega0.as_f64();
    let values = [
        ("gamma_over_omega0", g / w0),
        ("delta_over_omega0", d / w0),
        ("flight_time", params.l.as_f64() * (g + d) / params.c.as_f64()),
    ];
    ValidityReport {
        checks: values.iter().map(|&(name, value)| RatioCheck { name, value, status: classify(value) }).collect(),
        warn_ratio,
        fail_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_separated_scales_pass() {
        // ω₀ = 1000Γ, Δ = Γ, l = 0.01 c/Γ  ⇒  k0l = ω₀ l / c = 10
        let p = SimParams::<f64>::new(1.0, 1.0, 1000.0, 10.0).unwrap();
        assert!((p.l - 0.01).abs() < 1e-15);
        assert_eq!(markov_guard(&p).worst(), Status::Pass);
        assert!(p.markov_flags(20.0).all());
    }

    #[test]
    fn long_separation_warns_on_flight_time() {
        // l = c/Γ with Δ ≪ Γ so the ratio is ≈ 1 … but only lΓ/c matters here.
        let p = SimParams::new(1.0, 1e-3, 1e4, 1e4).unwrap();
        let r = markov_guard(&p);
        assert_ne!(r.get("flight_time").unwrap().status, Status::Pass);
        assert!(!p.markov_flags(20.0).flight_time_separated);
    }

    #[test]
    fn slow_carrier_warns() {
        let p = SimParams::new(1.0, 0.01, 10.0, 0.1).unwrap();
        let r = markov_guard(&p);
        let c = r.get("gamma_over_omega0").unwrap();
        assert!((c.value - 0.1).abs() < 1e-15);
        assert_eq!(c.status, Status::Warn);
    }

    #[test]
    fn ratios_constructor_and_zero_gamma() {
        let p = SimParams::from_ratios(4.0, std::f64::consts::FRAC_PI_4, 1e4).unwrap();
        assert_eq!(p.gamma, 1.0);
        assert_eq!(p.delta, 0.25);
        assert_eq!(p.k0z2, std::f64::consts::FRAC_PI_4);
        let q = SimParams::from_ratios(0.0, 1.0, 1e4).unwrap();
        assert_eq!(q.gamma, 0.0);
        assert_eq!(q.delta, 1.0);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(SimParams::new(-1.0, 1.0, 1.0, 0.0).is_err());
        assert!(SimParams::new(1.0, 0.0, 1.0, 0.0).is_err());
        assert!(SimParams::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(SimParams::new(1.0, 1.0, 1.0, -0.5).is_err());
        assert!(SimParams::new(1.0, f64::NAN, 1.0, 0.5).is_err());
    }

    #[test]
    fn explicit_positions_swap() {
        let p = SimParams::<f64>::new(1.0, 1.0, 100.0, 0.5).unwrap();
        let s = p.with_positions(p.z2, p.z1).unwrap();
        assert!((s.l - p.l).abs() < 1e-15);
        assert!((s.k0z1 - p.k0z2).abs() < 1e-15);
    }
}
