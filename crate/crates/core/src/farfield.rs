//! Far-field photodetection diagnostics: suppression of the non-resonant
//! intensities `I₂`, `I₃` relative to `I₁`, and the incident/reflected
//! identification through `f₊`.
//!
//! Frequencies are absolute, lengths are `c = 1` lengths, and `a` is a
//! propagation distance `|z − zⱼ|`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::AmplitudeTrajectory;
use crate::error::{domain, Error, Result};
use crate::fields::Fields;
use crate::params::SimParams;
use crate::quadrature::GaussLegendre;
use crate::scalar::{cis, Real};
use crate::specfun::{ci_value, si_value};

/// Default factor for "≫" in detector checks.
pub const DEFAULT_SEPARATION_FACTOR: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec<T> {
    /// Lower band edge `ω₁`.
    pub omega1: T,
    /// Upper band edge `ω₂`.
    pub omega2: T,
    /// Detector position.
    pub z: T,
    /// Low-frequency cutoff for the `I₃` estimate.
    pub omega_c: T,
    /// Factor used for the "≫" flags.
    pub factor: T,
}

impl<T: Real> DetectorSpec<T> {
    /// Band `ω₀ ± Δ₀/2`.
    pub fn centered(omega0: T, delta0: T, z: T, omega_c: T) -> Result<Self> {
        let half = delta0 / T::lit(2.0);
        let d = Self {
            omega1: omega0 - half,
            omega2: omega0 + half,
            z,
            omega_c,
            factor: T::lit(DEFAULT_SEPARATION_FACTOR),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn delta0(&self) -> T {
        self.omega2 - self.omega1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega1 > T::zero() && self.omega2 > self.omega1) {
            return Err(Error::Config(format!(
                "detector band needs 0 < ω₁ < ω₂, got [{}, {}]",
                self.omega1, self.omega2
            )));
        }
        if !self.z.is_finite() {
            return Err(Error::Config("detector position must be finite".into()));
        }
        Ok(())
    }

    /// `Δ₀ ≥ factor·max(Δ, Γ)`.
    pub fn collects_all(&self, params: &SimParams<T>) -> bool {
        self.delta0() >= self.factor * params.delta.max(params.gamma)
    }

    /// `ω₁ |z − zⱼ| / c` for the nearer atom.
    pub fn far_field_parameter(&self, params: &SimParams<T>) -> T {
        let near = (self.z - params.z1).abs().min((self.z - params.z2).abs());
        self.omega1 * near / params.c
    }

    pub fn is_far_field(&self, params: &SimParams<T>) -> bool {
        self.far_field_parameter(params) >= self.factor
    }
}

/// Antiderivative of `(1/c) cos(ωa) / (ω(ω₀ + ω))` in `ω`.
pub fn eval_f<T: Real>(omega: T, omega0: T, a: T) -> Result<T> {
    check_args("eval_f", omega, omega0, a)?;
    let wa = omega * a;
    let sa = (omega + omega0) * a;
    let (s0, c0) = (omega0 * a).sin_cos();
    Ok((-c0 * ci_value(sa)? + ci_value(wa)? - s0 * si_value(sa)?) / omega0)
}

/// Antiderivative of `e^{iωa} / (ω(ω + ω₀))` in `ω`; its real part is `c·f`.
pub fn eval_f_plus<T: Real>(omega: T, omega0: T, a: T) -> Result<Complex<T>> {
    check_args("eval_f_plus", omega, omega0, a)?;
    f_plus_any(omega, omega0, a)
}

fn check_args<T: Real>(func: &'static str, omega: T, omega0: T, a: T) -> Result<()> {
    if a == T::zero() {
        return Err(domain(func, "a = 0 (Ci diverges at 0)"));
    }
    if !(omega > T::zero() && omega0 > T::zero() && a > T::zero()) {
        return Err(domain(func, format!("need ω, ω₀, a > 0, got ({omega}, {omega0}, {a})")));
    }
    Ok(())
}

/// `f₊` for arbitrary signs, using `∫ e^{ixa}/x dx = Ci(|xa|) + i Si(xa)`.
fn f_plus_any<T: Real>(omega: T, omega0: T, a: T) -> Result<Complex<T>> {
    let e1 = |x: T| -> Result<Complex<T>> {
        let xa = x * a;
        if xa == T::zero() {
            return Err(domain("eval_f_plus", "argument hits the Ci singularity"));
        }
        Ok(Complex::new(ci_value(xa.abs())?, si_value(xa)?))
    };
    Ok((e1(omega)? - cis(-omega0 * a) * e1(omega + omega0)?) / omega0)
}

/// `℘∫_{ω₁}^{ω₂} e^{−iωa} / (ω(ω − ω₀)) dω` from `f₊` differences.
pub fn reflected_phase_integral<T: Real>(omega1: T, omega2: T, omega0: T, a: T) -> Result<Complex<T>> {
    if !(omega2 > omega1 && omega1 > T::zero() && a > T::zero()) {
        return Err(domain("reflected_phase_integral", "need 0 < ω₁ < ω₂ and a > 0"));
    }
    Ok(f_plus_any(omega2, -omega0, -a)? - f_plus_any(omega1, -omega0, -a)?)
}

/// Large-band limit of [`reflected_phase_integral`]: `−(iπ/ω₀) e^{−iω₀a}`.
pub fn reflected_phase_limit<T: Real>(omega0: T, a: T) -> Complex<T> {
    cis(-omega0 * a) * Complex::new(T::zero(), -T::PI() / omega0)
}

/// `max_t I₂ / max_t I₁` at the detector.
///
/// `I₁` is the resonant intensity of the field reaching the detector
/// (transmitted beyond both atoms, reflected before both). `I₂` is
/// `|2 Σⱼ βⱼ(t) (cω₀√Γ/2π) [f(ω₂) − f(ω₁)]_{a=|z−zⱼ|}|²`.
pub fn i2_ratio<T: Real>(
    traj: &AmplitudeTrajectory<T>,
    fields: &Fields<T>,
    detector: &DetectorSpec<T>,
    params: &SimParams<T>,
) -> Result<T> {
    detector.validate()?;
    let lo = params.z1.min(params.z2);
    let hi = params.z1.max(params.z2);
    let env = if detector.z > hi {
        &fields.transmitted
    } else if detector.z < lo {
        &fields.reflected
    } else {
        return Err(Error::NearField(
            "detector sits between the atoms; a non-RWA detection model is needed there".into(),
        ));
    };
    if !detector.is_far_field(params) {
        return Err(Error::NearField(format!(
            "ω₁|z − zⱼ|/c = {} is below {}; a non-RWA detection model is needed in the near field",
            detector.far_field_parameter(params),
            detector.factor
        )));
    }
    let band = |zj: T| -> Result<T> {
        let a = (detector.z - zj).abs();
        Ok(eval_f(detector.omega2, params.omega0, a)? - eval_f(detector.omega1, params.omega0, a)?)
    };
    let coeff = params.c * params.omega0 * params.gamma.sqrt() / T::TAU() * T::lit(2.0);
    let (w1, w2) = (band(params.z1)? * coeff, band(params.z2)? * coeff);
    let i2_max =
        traj.beta1.iter().zip(&traj.beta2).map(|(b1, b2)| (*b1 * w1 + *b2 * w2).norm_sqr()).fold(T::zero(), T::max);
    let i1_max = env.samples.iter().map(|a| a.norm_sqr()).fold(T::zero(), T::max);
    if i2_max == T::zero() {
        return Ok(T::zero());
    }
    Ok(i2_max / i1_max)
}

/// Printed estimate `I₃/I₁ ≈ √(1/2π) (Γ/ω₀) ln(ω₀/ω_c)`.
pub fn i3_bound<T: Real>(params: &SimParams<T>, detector: &DetectorSpec<T>) -> Result<T> {
    let wc = detector.omega_c;
    if !(wc > T::zero()) || wc >= params.omega0 {
        return Err(domain("i3_bound", format!("need 0 < ω_c < ω₀, got ω_c = {wc}")));
    }
    Ok((T::one() / T::TAU()).sqrt() * params.gamma / params.omega0 * (params.omega0 / wc).ln())
}

/// `∫ g_k² / (2(ω₀ + ω_k)²) dk_z` over both propagation directions with
/// `g_k² = Γω₀/(2πω_k)` and the infrared cutoff `ω_c`, by quadrature in
/// `x = ω/ω₀` on a logarithmic grid.
pub fn i3_quadrature<T: Real>(params: &SimParams<T>, detector: &DetectorSpec<T>) -> Result<T> {
    let wc = detector.omega_c;
    if !(wc > T::zero()) || wc >= params.omega0 {
        return Err(domain("i3_quadrature", format!("need 0 < ω_c < ω₀, got ω_c = {wc}")));
    }
    // x = e^s: ∫ dx/(x(1+x)²) = ∫ ds/(1+e^s)².
    let rule = GaussLegendre::<T>::new(16);
    let lo = (wc / params.omega0).ln();
    let hi = T::lit(40.0);
    let panels = ((hi - lo) * T::lit(4.0)).ceil().to_usize().unwrap_or(64);
    let integral: T = rule.composite(lo, hi, panels, |s: T| {
        let d = T::one() + s.exp();
        T::one() / (d * d)
    });
    Ok(params.gamma / (T::TAU() * params.omega0) * integral)
}
