//! Inter-atomic coupling `M` under the full (non-RWA) theory and three RWA
//! variants, plus a principal-value quadrature oracle for the path
//! contributions `M₁..M₄`.
//!
//! With `x = k₀l`:
//!
//! ```text
//! M₁ = Γ/2 e^{ix}  + Γ/2π [ e^{ix}(Si x + π/2 + i Ci x) − G₊ ]
//! M₂ =               Γ/2π [ e^{−ix}(Si x − π/2 − i Ci x) + G₊ ]
//! M₃ = Γ/2 e^{−ix} + Γ/2π [ −e^{−ix}(Si x + π/2 − i Ci x) − G₋ ]
//! M₄ =               Γ/2π [ −e^{ix}(Si x − π/2 + i Ci x) + G₋ ]
//! G± = ±π/2 + i Ci(ε l / c)
//! ```
//!
//! The `G±` terms cancel pairwise and `M = ΣMᵢ = Γ e^{ix}`. Single parts are
//! reported at a reference infrared cutoff `ε_ref = REFERENCE_CUTOFF·ω₀`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::params::SimParams;
use crate::quadrature::GaussLegendre;
use crate::scalar::{cis, Real};
use crate::specfun::{ci_value, si_value};

/// `ε_ref / ω₀` used when reporting individual path contributions.
pub const REFERENCE_CUTOFF: f64 = 1e-9;
/// `|Ci(εl/c)|` above which an RWA-with-cutoff coupling is flagged divergent.
pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum CouplingModel<T> {
    /// Non-RWA theory, `M = Γ e^{ik₀l}`.
    Full,
    /// RWA with an infrared cutoff `ε` (a frequency).
    RwaCutoff { epsilon: T },
    /// RWA with a frequency-independent coupling constant.
    RwaConstG,
    /// RWA with the frequency integral extended to negative frequencies.
    RwaNegFreq,
}

impl<T: Real> CouplingModel<T> {
    pub fn name(&self) -> &'static str {
        match self {
            CouplingModel::Full => "full",
            CouplingModel::RwaCutoff { .. } => "rwa-cutoff",
            CouplingModel::RwaConstG => "rwa-constg",
            CouplingModel::RwaNegFreq => "rwa-negfreq",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CouplingModel::RwaCutoff { epsilon } if !(epsilon > T::zero()) || !epsilon.is_finite() => {
                Err(domain("coupling_rwa_cutoff", format!("epsilon must be > 0, got {epsilon}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingResult<T> {
    pub m_total: Complex<T>,
    /// `M₁..M₄`; only the full model carries them.
    pub m_parts: Option<[Complex<T>; 4]>,
    /// `Re M`, carried by resonant (real) photons.
    pub real_photon_part: T,
    /// `Im M`, carried by virtual photons.
    pub virtual_photon_part: T,
    pub diverged: bool,
}

impl<T: Real> CouplingResult<T> {
    fn from_total(m_total: Complex<T>, m_parts: Option<[Complex<T>; 4]>, diverged: bool) -> Self {
        Self { m_total, m_parts, real_photon_part: m_total.re, virtual_photon_part: m_total.im, diverged }
    }

    /// Wraps an arbitrary coupling constant, e.g. to probe the dynamics with
    /// a deliberately wrong `M`.
    pub fn custom(m_total: Complex<T>) -> Self {
        Self::from_total(m_total, None, false)
    }
}

/// Evaluates `model` with default thresholds.
pub fn evaluate<T: Real>(params: &SimParams<T>, model: &CouplingModel<T>) -> Result<CouplingResult<T>> {
    match *model {
        CouplingModel::Full => coupling_full(params),
        CouplingModel::RwaCutoff { epsilon } => coupling_rwa_cutoff(params, epsilon),
        CouplingModel::RwaConstG => coupling_rwa_const_g(params),
        CouplingModel::RwaNegFreq => coupling_rwa_negfreq(params),
    }
}

/// Full coupling `M = Γ e^{ik₀l}` with its four path contributions.
pub fn coupling_full<T: Real>(params: &SimParams<T>) -> Result<CouplingResult<T>> {
    coupling_full_with_reference(params, T::lit(REFERENCE_CUTOFF))
}

/// As [`coupling_full`], with the parts reported at `ε_ref = reference·ω₀`.
pub fn coupling_full_with_reference<T: Real>(params: &SimParams<T>, reference: T) -> Result<CouplingResult<T>> {
    params.validate()?;
    if !(reference > T::zero()) {
        return Err(domain("coupling_full", "reference cutoff must be > 0"));
    }
    let x = params.k0l;
    let g = params.gamma;
    let total = cis(x) * g;
    let parts = if x == T::zero() {
        parts_at_contact(g, reference)
    } else {
        let ci_ref = ci_value(reference * x)?;
        let half_pi = T::FRAC_PI_2();
        let g_plus = Complex::new(half_pi, ci_ref);
        let g_minus = Complex::new(-half_pi, ci_ref);
        path_parts_with_g(params, g_plus, g_minus)?
    };
    Ok(CouplingResult::from_total(total, Some(parts), false))
}

/// `M₁..M₄` from the closed forms with explicit `G±`. Requires `k₀l > 0`.
pub fn path_parts_with_g<T: Real>(
    params: &SimParams<T>,
    g_plus: Complex<T>,
    g_minus: Complex<T>,
) -> Result<[Complex<T>; 4]> {
    let x = params.k0l;
    if !(x > T::zero()) {
        return Err(domain("path_parts", "k0l must be > 0 (Ci diverges at 0)"));
    }
    let g = params.gamma;
    let s = si_value(x)?;
    let c = ci_value(x)?;
    let half_pi = T::FRAC_PI_2();
    let scale = g / T::TAU();
    let fwd = cis(x);
    let bwd = cis(-x);
    let half = T::lit(0.5) * g;

    let m1 = fwd * half + (fwd * Complex::new(s + half_pi, c) - g_plus) * scale;
    let m2 = (bwd * Complex::new(s - half_pi, -c) + g_plus) * scale;
    let m3 = bwd * half + (-bwd * Complex::new(s + half_pi, -c) - g_minus) * scale;
    let m4 = (-fwd * Complex::new(s - half_pi, c) + g_minus) * scale;
    Ok([m1, m2, m3, m4])
}

/// `k₀l → 0` limit: `Ci(x) − Ci(ε_ref x/ω₀) → −ln(ε_ref/ω₀)`.
fn parts_at_contact<T: Real>(g: T, reference: T) -> [Complex<T>; 4] {
    let log_term = Complex::new(T::zero(), -g / T::TAU() * reference.ln());
    let half = Complex::new(T::lit(0.5) * g, T::zero());
    [half + log_term, -log_term, half + log_term, -log_term]
}

/// RWA coupling `M₁ + M₃` with an infrared cutoff `ε`.
pub fn coupling_rwa_cutoff<T: Real>(params: &SimParams<T>, epsilon: T) -> Result<CouplingResult<T>> {
    coupling_rwa_cutoff_with(params, epsilon, T::lit(DEFAULT_DIVERGENCE_THRESHOLD))
}

pub fn coupling_rwa_cutoff_with<T: Real>(
    params: &SimParams<T>,
    epsilon: T,
    divergence_threshold: T,
) -> Result<CouplingResult<T>> {
    params.validate()?;
    CouplingModel::RwaCutoff { epsilon }.validate()?;
    let x = params.k0l;
    let g = params.gamma;
    let (sx, cx) = (x.sin(), x.cos());
    let (shift, diverged) = if x == T::zero() {
        // cos x Ci(x) − Ci(εl/c) → ln(ω₀/ε) as l → 0.
        ((params.omega0 / epsilon).ln(), true)
    } else {
        let cutoff_arg = epsilon * params.l / params.c;
        let ci_cut = ci_value(cutoff_arg)?;
        let s = si_value(x)?;
        let c = ci_value(x)?;
        (sx * (s + T::FRAC_PI_2()) + cx * c - ci_cut, ci_cut.abs() > divergence_threshold)
    };
    let m = Complex::new(g * cx, g / T::PI() * shift);
    Ok(CouplingResult::from_total(m, None, diverged))
}

/// RWA coupling with frequency-independent `g`: the cutoff term is dropped.
pub fn coupling_rwa_const_g<T: Real>(params: &SimParams<T>) -> Result<CouplingResult<T>> {
    params.validate()?;
    let x = params.k0l;
    if x == T::zero() {
        return Err(domain("coupling_rwa_const_g", "k0l = 0 (Ci diverges at 0)"));
    }
    let g = params.gamma;
    let s = si_value(x)?;
    let c = ci_value(x)?;
    let m = Complex::new(g * x.cos(), g / T::PI() * (x.sin() * (s + T::FRAC_PI_2()) + x.cos() * c));
    Ok(CouplingResult::from_total(m, None, false))
}

/// RWA with the frequency integral extended over the whole real line.
pub fn coupling_rwa_negfreq<T: Real>(params: &SimParams<T>) -> Result<CouplingResult<T>> {
    params.validate()?;
    Ok(CouplingResult::from_total(cis(params.k0l) * params.gamma, None, false))
}

/// `(Re M, Im M)`: resonant-photon and virtual-photon contributions.
pub fn real_virtual_split<T: Real>(result: &CouplingResult<T>) -> (T, T) {
    (result.m_total.re, result.m_total.im)
}

// ---------------------------------------------------------------------------
// Principal-value oracle
// ---------------------------------------------------------------------------

/// Which contribution the oracle integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleTarget {
    /// A single `Mᵢ`, `i ∈ 1..=4`, reported at the reference cutoff.
    Part(u8),
    /// `M₁ + M₂`, cutoff-free.
    Pair12,
    /// `M₃ + M₄`, cutoff-free.
    Pair34,
}

/// Direct numerical evaluation of the frequency integrals behind `Mᵢ`.
///
/// Works in `u = ω/ω₀`. Principal values are taken by subtracting the pole
/// residue over a symmetric window `|u − 1| ≤ pv_excision/ω₀`, where the odd
/// kernel integrates to zero. Panels are at most half an oscillation period
/// wide. The oscillatory tail is cut at `omega_max` rounded to a whole number
/// of periods and Richardson-extrapolated over `omega_max/4, /2, /1`; the
/// infrared end is Richardson-extrapolated over three cutoffs `η₀/4, /8, /16`,
/// with `η₀` divided by `k₀l` when `k₀l > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalValueOracle<T> {
    /// Upper frequency limit, in units of `ω₀`.
    pub omega_max: T,
    /// Half-width of the principal-value window, in units of `ω₀`.
    pub pv_excision: T,
    /// Absolute tolerance, in units of `Γ`.
    pub tolerance: T,
    /// Largest infrared cutoff `η₀`, in units of `ω₀`.
    pub ir_cutoff: T,
    /// Reference cutoff for single parts, in units of `ω₀`.
    pub reference: T,
    pub order: usize,
}

impl<T: Real> Default for PrincipalValueOracle<T> {
    fn default() -> Self {
        Self {
            omega_max: T::lit(1e4),
            pv_excision: T::lit(0.5),
            tolerance: T::lit(1e-6),
            ir_cutoff: T::lit(1e-2),
            reference: T::lit(REFERENCE_CUTOFF),
            order: 12,
        }
    }
}

/// Oracle with default tolerances. `omega_max` and `pv_excision` are
/// absolute frequencies.
pub fn coupling_oracle<T: Real>(
    params: &SimParams<T>,
    target: OracleTarget,
    omega_max: T,
    pv_excision: T,
) -> Result<Complex<T>> {
    let oracle = PrincipalValueOracle {
        omega_max: omega_max / params.omega0,
        pv_excision: pv_excision / params.omega0,
        ..PrincipalValueOracle::default()
    };
    oracle.evaluate(params, target)
}

#[derive(Clone, Copy)]
struct Kernel<T> {
    /// Direction of the phase `e^{i s a u}`.
    sign: T,
    /// `true`: `w(u) = r(u)/(1 − u)`; `false`: `w(u) = 1/((1+u)u)`.
    pole: bool,
    /// With a pole: `r(u) = 1/u` (single part) or `2/(1+u)` (pair).
    pair: bool,
}

impl<T: Real> Kernel<T> {
    fn regular(&self, u: T) -> T {
        if self.pair {
            T::lit(2.0) / (T::one() + u)
        } else {
            T::one() / u
        }
    }

    fn weight(&self, u: T) -> T {
        if self.pole {
            self.regular(u) / (T::one() - u)
        } else {
            T::one() / ((T::one() + u) * u)
        }
    }

    /// Residue of `w(u)·u` at `u → 0` (coefficient of the log divergence).
    fn ir_coefficient(&self) -> T {
        if self.pair {
            T::zero()
        } else {
            T::one()
        }
    }
}

impl<T: Real> PrincipalValueOracle<T> {
    pub fn evaluate(&self, params: &SimParams<T>, target: OracleTarget) -> Result<Complex<T>> {
        params.validate()?;
        let a = params.k0l;
        if !(a > T::zero()) {
            return Err(domain("coupling_oracle", "k0l must be > 0"));
        }
        if !(self.pv_excision > T::zero() && self.pv_excision < T::one()) {
            return Err(domain("coupling_oracle", "pv_excision must lie in (0, ω₀)"));
        }
        if !(self.omega_max > T::lit(4.0)) {
            return Err(domain("coupling_oracle", "omega_max must be ≫ ω₀"));
        }
        let g = params.gamma;
        let i_scale = Complex::new(T::zero(), g / T::TAU());
        let half = T::lit(0.5) * g;
        let one = T::one();
        let (kernel, prefactor, delta_term) = match target {
            OracleTarget::Part(1) => (Kernel { sign: one, pole: true, pair: false }, i_scale, cis(a) * half),
            OracleTarget::Part(2) => {
                (Kernel { sign: one, pole: false, pair: false }, -i_scale, Complex::new(T::zero(), T::zero()))
            }
            OracleTarget::Part(3) => (Kernel { sign: -one, pole: true, pair: false }, i_scale, cis(-a) * half),
            OracleTarget::Part(4) => {
                (Kernel { sign: -one, pole: false, pair: false }, -i_scale, Complex::new(T::zero(), T::zero()))
            }
            OracleTarget::Pair12 => (Kernel { sign: one, pole: true, pair: true }, i_scale, cis(a) * half),
            OracleTarget::Pair34 => (Kernel { sign: -one, pole: true, pair: true }, i_scale, cis(-a) * half),
            OracleTarget::Part(i) => return Err(domain("coupling_oracle", format!("part index {i} not in 1..=4"))),
        };
        let scale = prefactor.norm().max(T::min_positive_value());
        let finite = self.finite_part(a, kernel, self.tolerance / scale)?;
        let c0 = kernel.ir_coefficient();
        Ok(delta_term + prefactor * (finite - Complex::new(c0 * self.reference.ln(), T::zero())))
    }

    /// `lim_{η→0} [ ℘∫_η^∞ e^{isau} w(u) du + c₀ ln η ]`.
    fn finite_part(&self, a: T, k: Kernel<T>, tol: T) -> Result<Complex<T>> {
        let rule = GaussLegendre::<T>::new(self.order);
        let half_period = T::PI() / a;
        let phase = |u: T| cis(k.sign * a * u);
        let f = |u: T| phase(u) * k.weight(u);

        // Keep aη small on every infrared level.
        let eta0 = self.ir_cutoff * T::one().min(T::one() / a);
        let h = self.pv_excision;

        // Infrared: L(η) = ∫_η^{η₀} f + c₀ ln η, extrapolated to η → 0.
        let c0 = k.ir_coefficient();
        let etas: Vec<T> = (2..5).map(|p| eta0 / T::lit(f64::from(1u32 << p))).collect();
        let ir_levels: Vec<Complex<T>> = etas
            .iter()
            .map(|&eta| {
                let v = integrate_graded(&rule, eta, eta0, eta, half_period, &f);
                v + Complex::new(c0 * eta.ln(), T::zero())
            })
            .collect();
        // Errors ~ η, η²: halving ratios 2 then 4.
        let r1a = ir_levels[1] * T::lit(2.0) - ir_levels[0];
        let r1b = ir_levels[2] * T::lit(2.0) - ir_levels[1];
        let ir = (r1b * T::lit(4.0) - r1a) / T::lit(3.0);
        let ir_residual = (ir - r1b).norm();

        // Body up to the first tail level; pole window handled by subtraction.
        let periods = (self.omega_max * a / (T::lit(8.0) * T::PI())).ceil() * T::lit(4.0);
        let u_top = periods * T::TAU() / a;
        let u1 = u_top / T::lit(4.0);
        let mut body = Complex::new(T::zero(), T::zero());
        if k.pole {
            let lo = T::one() - h;
            let hi = T::one() + h;
            body = body + integrate_graded(&rule, eta0, lo, eta0, half_period, &f);
            let at_pole = phase(T::one()) * k.regular(T::one());
            let quotient = |u: T| (phase(u) * k.regular(u) - at_pole) / (T::one() - u);
            let panels = ((T::lit(2.0) * h / half_period).ceil().to_usize().unwrap_or(1)).max(2);
            let panels = panels + panels % 2;
            body = body + rule.composite(lo, hi, panels, quotient);
            if u1 <= hi {
                return Err(domain("coupling_oracle", "omega_max too small for the pole window"));
            }
            // Panels grow away from the pole so none is wide next to it.
            body = body + integrate_graded(&rule, hi, u1, h, half_period, &f);
        } else {
            body = body + integrate_graded(&rule, eta0, u1, eta0, half_period, &f);
        }

        // Tail: levels at u_top/4, /2, /1 (whole periods), errors ~ U⁻², U⁻³.
        let u2 = u_top / T::lit(2.0);
        let t1 = Complex::new(T::zero(), T::zero());
        let t2 = integrate_uniform(&rule, u1, u2, half_period, &f);
        let t3 = t2 + integrate_uniform(&rule, u2, u_top, half_period, &f);
        let r2a = (t2 * T::lit(4.0) - t1) / T::lit(3.0);
        let r2b = (t3 * T::lit(4.0) - t2) / T::lit(3.0);
        let tail = (r2b * T::lit(8.0) - r2a) / T::lit(7.0);
        let tail_residual = (tail - r2b).norm();

        let residual = ir_residual + tail_residual;
        if residual > tol {
            return Err(Error::Convergence {
                what: "principal-value coupling oracle",
                residual: residual.as_f64(),
                tolerance: tol.as_f64(),
            });
        }
        Ok(ir + body + tail)
    }
}

/// `∫_lo^hi f` on panels growing geometrically (×2) from `first` up to
/// `max_width`, then uniform.
fn integrate_graded<T: Real, F>(rule: &GaussLegendre<T>, lo: T, hi: T, first: T, max_width: T, f: &F) -> Complex<T>
where
    F: Fn(T) -> Complex<T>,
{
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut left = lo;
    let mut width = first.min(max_width);
    while left < hi {
        let right = (left + width).min(hi);
        acc = acc + rule.integrate(left, right, f);
        left = right;
        width = (width * T::lit(2.0)).min(max_width);
    }
    acc
}

fn integrate_uniform<T: Real, F>(rule: &GaussLegendre<T>, lo: T, hi: T, max_width: T, f: &F) -> Complex<T>
where
    F: Fn(T) -> Complex<T>,
{
    if hi <= lo {
        return Complex::new(T::zero(), T::zero());
    }
    let panels = ((hi - lo) / max_width).ceil().to_usize().unwrap_or(1).max(1);
    rule.composite(lo, hi, panels, f)
}
