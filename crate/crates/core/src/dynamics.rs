//! Incident source term and the Markovian amplitude equations
//!
//! ```text
//! β̇ⱼ = S₀ⱼ(t) − Γβⱼ − M β_{j'}
//! ```
//!
//! integrated with fixed-step RK4, plus an independent solution through the
//! symmetric and antisymmetric modes `u = β₁ + β₂`, `v = β₁ − β₂`.
//!
//! The incident photon has the Gaussian spectrum
//! `α(k) ∝ e^{−((ω_k − ω₀)/Δ)²}` for `k > 0`. Under [`Normalization::UnitExcitation`]
//! its photon-flux envelope is `a(t) = (2π)^{−1/4} √Δ e^{−Δ²t²/4}` with
//! `∫|a|² dt = 1`, and the narrowband source is `S₀ⱼ = −i√Γ e^{ik₀zⱼ} a(t)`.
//! The envelope delay `zⱼ/c` is dropped and only the carrier phase is kept,
//! consistent with the Markov limit used for the coupling.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingResult;
use crate::error::{Error, Result};
use crate::params::SimParams;
pub use crate::params::{markov_guard, markov_guard_with, ValidityReport};
use crate::quadrature::GaussLegendre;
use crate::scalar::{cis, Real};

/// Samples beyond `|t|Δ` of this size are zero to double precision.
const ENVELOPE_CUTOFF: f64 = 40.0;
/// Minimum half-span of the time grid around the pulse centre, in `1/Δ`.
const MIN_PULSE_SPAN: f64 = 6.0;
/// Longest post-pulse window accepted by the default grid, in `1/Γ`.
const MAX_POST_WINDOW: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `α = √(c/Δ)·√(1/2π)·e^{−((ω−ω₀)/Δ)²}` as printed.
    PaperPrefactor,
    /// Rescaled so that `∫|α|² dk = 1`.
    UnitExcitation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceMethod {
    /// Spectral integral including the `√(ω₀/ω)` factor.
    Quadrature,
    /// Narrowband Gaussian with `√(ω₀/ω) → 1`.
    GaussianClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentWavepacket<T> {
    pub delta: T,
    pub omega0: T,
    pub normalization: Normalization,
    /// Half-width of the spectral integration window, in units of `Δ`.
    pub spectral_span: T,
    /// Gauss–Legendre panels per unit of `Δ·(1 + |t|Δ)` in the spectral integral.
    pub spectral_density: usize,
}

impl<T: Real> IncidentWavepacket<T> {
    pub fn new(delta: T, omega0: T, normalization: Normalization) -> Self {
        Self { delta, omega0, normalization, spectral_span: T::lit(8.0), spectral_density: 2 }
    }

    pub fn for_params(params: &SimParams<T>) -> Self {
        Self::new(params.delta, params.omega0, Normalization::UnitExcitation)
    }

    /// Ratio of the chosen normalization to the unit-norm one.
    pub fn scale(&self) -> T {
        match self.normalization {
            Normalization::UnitExcitation => T::one(),
            Normalization::PaperPrefactor => (T::TAU()).powf(T::lit(-0.5)) / (T::lit(2.0) / T::PI()).powf(T::lit(0.25)),
        }
    }

    /// `α(k)` at `t → −∞` for frequency `ω = c k`; zero for `k ≤ 0`.
    pub fn spectral_amplitude(&self, omega: T) -> T {
        if omega <= T::zero() {
            return T::zero();
        }
        let x = (omega - self.omega0) / self.delta;
        let unit = (T::one() / self.delta).sqrt() * (T::lit(2.0) / T::PI()).powf(T::lit(0.25));
        self.scale() * unit * (-x * x).exp()
    }

    /// `∫|α|² dk` by quadrature over `ω₀ ± span·Δ`.
    pub fn norm_squared(&self) -> T {
        let lo = (self.omega0 - self.spectral_span * self.delta).max(T::zero());
        let hi = self.omega0 + self.spectral_span * self.delta;
        let rule = GaussLegendre::<T>::new(16);
        rule.composite(lo, hi, 64, |w| {
            let a = self.spectral_amplitude(w);
            a * a
        })
    }

    /// Incident photon-flux envelope `A_inc(τ)` in the retarded frame.
    pub fn envelope(&self, tau: T) -> T {
        let x = self.delta * tau;
        if x.abs() > T::lit(ENVELOPE_CUTOFF) {
            return T::zero();
        }
        self.scale() * T::TAU().powf(T::lit(-0.25)) * self.delta.sqrt() * (-x * x / T::lit(4.0)).exp()
    }

    /// `Ã_inc(ν) = ∫ A_inc(τ) e^{iντ} dτ` (real, Gaussian).
    pub fn envelope_spectrum(&self, nu: T) -> T {
        let x = nu / self.delta;
        self.scale() * T::TAU().powf(T::lit(-0.25)) * self.delta.sqrt() * T::lit(2.0) * T::PI().sqrt() / self.delta
            * (-x * x).exp()
    }

    /// Dimensionless spectral envelope `⟨√(ω₀/ω)⟩(t)` normalised so that the
    /// narrowband limit equals `A_inc(t)`.
    fn spectral_envelope(&self, t: T) -> Complex<T> {
        if (t * self.delta).abs() > T::lit(ENVELOPE_CUTOFF) {
            return Complex::new(T::zero(), T::zero());
        }
        let span = self.spectral_span * self.delta;
        let lo = (-span).max(-self.omega0 * T::lit(0.999_999));
        let hi = span;
        let wiggles = T::one() + (t * self.delta).abs();
        let panels = (self.spectral_span * wiggles * T::from_usize_lossy(self.spectral_density))
            .ceil()
            .to_usize()
            .unwrap_or(16)
            .max(16);
        let rule = GaussLegendre::<T>::new(16);
        let integral: Complex<T> = rule.composite(lo, hi, panels, |d: T| {
            let x = d / self.delta;
            let weight = (self.omega0 / (self.omega0 + d)).sqrt() * (-x * x).exp();
            cis(-d * t) * weight
        });
        let bracket = T::TAU().powf(T::lit(-0.5)) * (T::lit(2.0) / T::PI()).powf(T::lit(0.25)) / self.delta.sqrt();
        integral * (bracket * self.scale())
    }
}

/// Uniform grid `t_k = t0 + k·dt`, `k = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<T> {
    pub t0: T,
    pub dt: T,
    pub n: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t0: T, dt: T, n: usize) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::Config(format!("time step must be finite and > 0, got {dt}")));
        }
        if n < 3 {
            return Err(Error::Config("time grid needs at least 3 points".into()));
        }
        Ok(Self { t0, dt, n })
    }

    /// Grid covering `[t0, t1]` with step at most `dt`.
    pub fn spanning(t0: T, t1: T, dt: T) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::Config("empty time window".into()));
        }
        let steps = ((t1 - t0) / dt).ceil().to_usize().unwrap_or(0).max(2);
        Self::new(t0, dt, steps + 1)
    }

    /// Default grid: `t ∈ [−8s/Δ, s(8/Δ + T_post)]`,
    /// `dt = min(1/Δ, 1/Γ, 1/|M|)/100`, where `T_post` is twelve decay times
    /// of the slowest mode the incident photon excites.
    pub fn default_for(params: &SimParams<T>, coupling: &CouplingResult<T>, span_factor: T) -> Result<Self> {
        if !(span_factor >= T::one()) {
            return Err(Error::Config(format!("grid span factor must be ≥ 1, got {span_factor}")));
        }
        let dt = max_step(params, coupling) / T::lit(2.0);
        let post = post_pulse_window(params, coupling)?;
        let pulse = T::lit(8.0) / params.delta;
        Self::spanning(-span_factor * pulse, span_factor * (pulse + post), dt)
    }

    pub fn with_step(&self, dt: T) -> Result<Self> {
        Self::spanning(self.t0, self.t_end(), dt)
    }

    /// Same window with the step divided by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.t0, self.dt / T::from_usize_lossy(factor), (self.n - 1) * factor + 1)
    }

    pub fn t(&self, k: usize) -> T {
        self.t0 + self.dt * T::from_usize_lossy(k)
    }

    pub fn t_end(&self) -> T {
        self.t(self.n - 1)
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.n).map(|k| self.t(k)).collect()
    }
}

/// Largest step allowed by the RK4 precondition: `min(1/Δ, 1/Γ, 1/|M|)/50`.
pub fn max_step<T: Real>(params: &SimParams<T>, coupling: &CouplingResult<T>) -> T {
    let inv = |r: T| if r > T::zero() { T::one() / r } else { T::infinity() };
    let slowest = inv(params.delta).min(inv(params.gamma)).min(inv(coupling.m_total.norm()));
    slowest / T::lit(50.0)
}

/// Twelve `1/e` times of the slowest driven mode (`u` rate `Γ+M`, `v` rate `Γ−M`).
fn post_pulse_window<T: Real>(params: &SimParams<T>, coupling: &CouplingResult<T>) -> Result<T> {
    if params.gamma == T::zero() {
        return Ok(T::zero());
    }
    let phase = cis(params.k0z2 - params.k0z1);
    let one = Complex::new(T::one(), T::zero());
    let modes = [
        ((one + phase).norm() / T::lit(2.0), params.gamma + coupling.m_total.re),
        ((one - phase).norm() / T::lit(2.0), params.gamma - coupling.m_total.re),
    ];
    let mut window = T::lit(12.0) / params.gamma;
    for (weight, rate) in modes {
        if weight > T::lit(1e-9) {
            if !(rate > T::zero()) {
                return Err(Error::Config(format!(
                    "a driven mode does not decay (rate {rate}); the amplitudes never return to zero"
                )));
            }
            window = window.max(T::lit(12.0) / rate);
        }
    }
    if window > T::lit(MAX_POST_WINDOW) / params.gamma {
        return Err(Error::Config(format!(
            "slowest driven mode needs a post-pulse window of {window}; pick k0l away from a dark configuration"
        )));
    }
    Ok(window)
}

/// Source samples on a grid, stored at half steps so RK4 midpoints are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerm<T> {
    pub grid: TimeGrid<T>,
    pub method: SourceMethod,
    wavepacket: IncidentWavepacket<T>,
    sqrt_gamma: T,
    phases: [Complex<T>; 2],
    /// `S₀ⱼ(t0 + k·dt/2)`, `k = 0..2n−1`.
    half: [Vec<Complex<T>>; 2],
}

impl<T: Real> SourceTerm<T> {
    /// `S₀ⱼ(t_k)` on the grid points.
    pub fn at_grid(&self, j: usize) -> Vec<Complex<T>> {
        self.half[j].iter().step_by(2).copied().collect()
    }

    /// `S₀ⱼ` at grid point `k`.
    pub fn sample(&self, j: usize, k: usize) -> Complex<T> {
        self.half[j][2 * k]
    }

    /// `S₀ⱼ(t)` at an arbitrary time.
    pub fn eval(&self, j: usize, t: T) -> Complex<T> {
        let shape = match self.method {
            SourceMethod::GaussianClosedForm => Complex::new(self.wavepacket.envelope(t), T::zero()),
            SourceMethod::Quadrature => self.wavepacket.spectral_envelope(t),
        };
        shape * self.phases[j] * Complex::new(T::zero(), -self.sqrt_gamma)
    }

    pub fn scaled(&self, lambda: Complex<T>) -> Self {
        let mut out = self.clone();
        out.phases = [self.phases[0] * lambda, self.phases[1] * lambda];
        for s in &mut out.half {
            for v in s.iter_mut() {
                *v = *v * lambda;
            }
        }
        out
    }

    pub fn zero(grid: TimeGrid<T>, wavepacket: IncidentWavepacket<T>) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        let len = 2 * grid.n - 1;
        Self {
            grid,
            method: SourceMethod::GaussianClosedForm,
            wavepacket,
            sqrt_gamma: T::zero(),
            phases: [z, z],
            half: [vec![z; len], vec![z; len]],
        }
    }
}

/// Builds `S₀₁`, `S₀₂` on `grid`.
pub fn build_source<T: Real>(
    wavepacket: &IncidentWavepacket<T>,
    params: &SimParams<T>,
    grid: &TimeGrid<T>,
    method: SourceMethod,
) -> Result<SourceTerm<T>> {
    params.validate()?;
    let need = T::lit(MIN_PULSE_SPAN) / wavepacket.delta;
    if grid.t0 > -need || grid.t_end() < need {
        return Err(Error::Config(format!(
            "time grid [{}, {}] must cover ±{} around the pulse centre",
            grid.t0,
            grid.t_end(),
            need
        )));
    }
    let phases = [cis(params.k0z1), cis(params.k0z2)];
    let sqrt_gamma = params.gamma.sqrt();
    let half_dt = grid.dt / T::lit(2.0);
    let shapes: Vec<Complex<T>> = (0..2 * grid.n - 1)
        .map(|k| {
            let t = grid.t0 + half_dt * T::from_usize_lossy(k);
            match method {
                SourceMethod::GaussianClosedForm => Complex::new(wavepacket.envelope(t), T::zero()),
                SourceMethod::Quadrature => wavepacket.spectral_envelope(t),
            }
        })
        .collect();
    let minus_i_sqrt_g = Complex::new(T::zero(), -sqrt_gamma);
    let half = [0, 1].map(|j| {
        let f = phases[j] * minus_i_sqrt_g;
        shapes.iter().map(|&s| s * f).collect()
    });
    Ok(SourceTerm { grid: *grid, method, wavepacket: *wavepacket, sqrt_gamma, phases, half })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory<T> {
    pub grid: TimeGrid<T>,
    pub beta1: Vec<Complex<T>>,
    pub beta2: Vec<Complex<T>>,
}

impl<T: Real> AmplitudeTrajectory<T> {
    pub fn populations(&self) -> (Vec<T>, Vec<T>) {
        (self.beta1.iter().map(|b| b.norm_sqr()).collect(), self.beta2.iter().map(|b| b.norm_sqr()).collect())
    }

    /// `max_t (|β₁|² + |β₂|²)`.
    pub fn max_excitation(&self) -> T {
        self.beta1.iter().zip(&self.beta2).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).fold(T::zero(), T::max)
    }

    /// `max(sup|β₁ − β₁'|, sup|β₂ − β₂'|) / max(sup|β₁|, sup|β₂|)`.
    pub fn relative_distance(&self, other: &Self) -> T {
        let diff = self
            .beta1
            .iter()
            .zip(&other.beta1)
            .chain(self.beta2.iter().zip(&other.beta2))
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max);
        let scale = self.beta1.iter().chain(&self.beta2).map(|b| b.norm()).fold(T::zero(), T::max);
        if scale == T::zero() {
            diff
        } else {
            diff / scale
        }
    }
}

fn check_inputs<T: Real>(
    source: &SourceTerm<T>,
    coupling: &CouplingResult<T>,
    params: &SimParams<T>,
    grid: &TimeGrid<T>,
) -> Result<()> {
    params.validate()?;
    if source.grid != *grid {
        return Err(Error::Config("source and integration grids differ".into()));
    }
    let limit = max_step(params, coupling);
    if grid.dt > limit * T::lit(1.000_000_1) {
        return Err(Error::Config(format!("time step {} exceeds min(1/Δ, 1/Γ, 1/|M|)/50 = {limit}", grid.dt)));
    }
    Ok(())
}

/// Fixed-step RK4 for the coupled amplitude equations, `β(t0) = 0`.
pub fn integrate_markovian<T: Real>(
    source: &SourceTerm<T>,
    coupling: &CouplingResult<T>,
    params: &SimParams<T>,
    grid: &TimeGrid<T>,
) -> Result<AmplitudeTrajectory<T>> {
    check_inputs(source, coupling, params, grid)?;
    let g = Complex::new(params.gamma, T::zero());
    let m = coupling.m_total;
    let rhs =
        |b1: Complex<T>, b2: Complex<T>, s1: Complex<T>, s2: Complex<T>| (s1 - g * b1 - m * b2, s2 - g * b2 - m * b1);
    let h = grid.dt;
    let half = h / T::lit(2.0);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let [s1, s2] = &source.half;

    let zero = Complex::new(T::zero(), T::zero());
    let mut beta1 = Vec::with_capacity(grid.n);
    let mut beta2 = Vec::with_capacity(grid.n);
    let (mut b1, mut b2) = (zero, zero);
    beta1.push(b1);
    beta2.push(b2);
    for k in 0..grid.n - 1 {
        let (a0, a1, a2) = (2 * k, 2 * k + 1, 2 * k + 2);
        let (k1a, k1b) = rhs(b1, b2, s1[a0], s2[a0]);
        let (k2a, k2b) = rhs(b1 + k1a * half, b2 + k1b * half, s1[a1], s2[a1]);
        let (k3a, k3b) = rhs(b1 + k2a * half, b2 + k2b * half, s1[a1], s2[a1]);
        let (k4a, k4b) = rhs(b1 + k3a * h, b2 + k3b * h, s1[a2], s2[a2]);
        b1 = b1 + (k1a + k2a * two + k3a * two + k4a) * sixth;
        b2 = b2 + (k1b + k2b * two + k3b * two + k4b) * sixth;
        if !(b1.re.is_finite() && b1.im.is_finite() && b2.re.is_finite() && b2.im.is_finite()) {
            return Err(Error::Numerical { time: grid.t(k + 1).as_f64() });
        }
        beta1.push(b1);
        beta2.push(b2);
    }
    Ok(AmplitudeTrajectory { grid: *grid, beta1, beta2 })
}

/// Mode solution: `u = β₁+β₂` and `v = β₁−β₂` obey scalar equations with
/// rates `Γ ± M`; each step propagates exactly and adds the source
/// convolution over the step by 8-point Gauss–Legendre.
pub fn oracle_modes<T: Real>(
    source: &SourceTerm<T>,
    coupling: &CouplingResult<T>,
    params: &SimParams<T>,
    grid: &TimeGrid<T>,
) -> Result<AmplitudeTrajectory<T>> {
    check_inputs(source, coupling, params, grid)?;
    let g = Complex::new(params.gamma, T::zero());
    let lam_u = g + coupling.m_total;
    let lam_v = g - coupling.m_total;
    let rule = GaussLegendre::<T>::new(8);
    let h = grid.dt;
    let decay_u = (-lam_u * h).exp();
    let decay_v = (-lam_v * h).exp();

    // Offsets and weights on [0, h] are the same for every step.
    let nodes: Vec<(T, T)> = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&x, &w)| ((x + T::one()) * h / T::lit(2.0), w * h / T::lit(2.0)))
        .collect();
    let ku: Vec<Complex<T>> = nodes.iter().map(|&(s, w)| (-lam_u * (h - s)).exp() * w).collect();
    let kv: Vec<Complex<T>> = nodes.iter().map(|&(s, w)| (-lam_v * (h - s)).exp() * w).collect();

    let zero = Complex::new(T::zero(), T::zero());
    let (mut u, mut v) = (zero, zero);
    let half = T::lit(0.5);
    let mut beta1 = vec![zero; grid.n];
    let mut beta2 = vec![zero; grid.n];
    for k in 0..grid.n - 1 {
        let t = grid.t(k);
        let mut iu = zero;
        let mut iv = zero;
        for (i, &(s, _)) in nodes.iter().enumerate() {
            let a = source.eval(0, t + s);
            let b = source.eval(1, t + s);
            iu = iu + (a + b) * ku[i];
            iv = iv + (a - b) * kv[i];
        }
        u = decay_u * u + iu;
        v = decay_v * v + iv;
        if !(u.re.is_finite() && u.im.is_finite() && v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Numerical { time: grid.t(k + 1).as_f64() });
        }
        beta1[k + 1] = (u + v) * half;
        beta2[k + 1] = (u - v) * half;
    }
    Ok(AmplitudeTrajectory { grid: *grid, beta1, beta2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::coupling_full;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn setup(gamma_over_delta: f64, k0l: f64) -> (SimParams<f64>, CouplingResult<f64>, TimeGrid<f64>, SourceTerm<f64>) {
        let p = SimParams::from_ratios(gamma_over_delta, k0l, 1e4).unwrap();
        let m = coupling_full(&p).unwrap();
        let g = TimeGrid::default_for(&p, &m, 1.0).unwrap();
        let wp = IncidentWavepacket::for_params(&p);
        let s = build_source(&wp, &p, &g, SourceMethod::GaussianClosedForm).unwrap();
        (p, m, g, s)
    }

    #[test]
    fn unit_excitation_is_normalised() {
        let wp = IncidentWavepacket::<f64>::new(0.7, 1e4, Normalization::UnitExcitation);
        assert!((wp.norm_squared() - 1.0).abs() < 1e-10);
        let paper = IncidentWavepacket::new(0.7, 1e4, Normalization::PaperPrefactor);
        let expect = (1.0 / 0.7f64).sqrt() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((paper.spectral_amplitude(1e4) - expect).abs() < 1e-14);
        assert_eq!(wp.spectral_amplitude(-1.0), 0.0);
    }

    #[test]
    fn envelope_has_unit_flux_and_matches_spectrum() {
        let wp = IncidentWavepacket::new(2.0, 1e4, Normalization::UnitExcitation);
        let rule = GaussLegendre::<f64>::new(16);
        let flux: f64 = rule.composite(-30.0, 30.0, 200, |t| wp.envelope(t).powi(2));
        assert!((flux - 1.0).abs() < 1e-12);
        let area: f64 = rule.composite(-30.0, 30.0, 200, |t| wp.envelope(t));
        assert!((area - wp.envelope_spectrum(0.0)).abs() < 1e-12);
    }

    #[test]
    fn quadrature_source_matches_closed_form_in_narrowband_limit() {
        let p = SimParams::<f64>::new(1.0, 1.0, 1e3, 0.3).unwrap();
        let m = coupling_full(&p).unwrap();
        let g = TimeGrid::default_for(&p, &m, 1.0).unwrap();
        let wp = IncidentWavepacket::for_params(&p);
        let q = build_source(&wp, &p, &g, SourceMethod::Quadrature).unwrap();
        let c = build_source(&wp, &p, &g, SourceMethod::GaussianClosedForm).unwrap();
        let k0 = ((0.0 - g.t0) / g.dt).round() as usize;
        let (a, b) = (q.sample(0, k0), c.sample(0, k0));
        assert!((a - b).norm() / b.norm() < 1e-3);
    }

    #[test]
    fn source_peak_and_phase() {
        let (p, _, g, s) = setup(1.0, 0.9);
        let k0 = ((0.0 - g.t0) / g.dt).round() as usize;
        let s1 = s.at_grid(0);
        let peak = (0..g.n).max_by(|&a, &b| s1[a].norm().total_cmp(&s1[b].norm())).unwrap();
        assert!((g.t(peak) - g.t(k0)).abs() <= g.dt);
        let ratio = s.sample(1, k0) / s.sample(0, k0);
        assert!((ratio.arg() - p.k0l).abs() < 1e-6);
        assert!((ratio.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn grid_too_short_is_rejected() {
        let p = SimParams::new(1.0, 1.0, 1e4, 0.5).unwrap();
        let g = TimeGrid::spanning(-2.0, 20.0, 0.01).unwrap();
        let wp = IncidentWavepacket::for_params(&p);
        assert!(matches!(build_source(&wp, &p, &g, SourceMethod::GaussianClosedForm), Err(Error::Config(_))));
    }

    #[test]
    fn single_atom_matches_convolution() {
        let (p, _, g, s) = setup(1.0, 0.7);
        let none = CouplingResult::custom(Complex::new(0.0, 0.0));
        let rk = integrate_markovian(&s, &none, &p, &g).unwrap();
        // Independent convolution ∫ S(t') e^{−Γ(t−t')} dt' by composite GL.
        let rule = GaussLegendre::<f64>::new(16);
        let mut worst: f64 = 0.0;
        let scale = rk.beta1.iter().map(|b| b.norm()).fold(0.0, f64::max);
        for k in (0..g.n).step_by(g.n / 37) {
            let t = g.t(k);
            let exact: Complex<f64> = rule.composite(g.t0, t, 200, |tp| s.eval(0, tp) * (-p.gamma * (t - tp)).exp());
            worst = worst.max((exact - rk.beta1[k]).norm() / scale);
        }
        assert!(worst < 1e-8, "{worst:e}");
    }

    #[test]
    fn zero_source_gives_zero_amplitudes() {
        let (p, m, g, _) = setup(0.25, FRAC_PI_4);
        let s = SourceTerm::zero(g, IncidentWavepacket::for_params(&p));
        let t = integrate_markovian(&s, &m, &p, &g).unwrap();
        assert!(t.beta1.iter().chain(&t.beta2).all(|b| *b == Complex::new(0.0, 0.0)));
    }

    #[test]
    fn rk4_matches_mode_oracle() {
        for (r, x) in [(4.0, FRAC_PI_4), (0.25, FRAC_PI_4), (1.0, FRAC_PI_2)] {
            let (p, m, g, s) = setup(r, x);
            let a = integrate_markovian(&s, &m, &p, &g).unwrap();
            let b = oracle_modes(&s, &m, &p, &g).unwrap();
            let d = a.relative_distance(&b);
            assert!(d < 1e-8, "Γ/Δ={r}, k0l={x}: {d:e}");
        }
    }

    #[test]
    fn symmetric_drive_leaves_antisymmetric_mode_dark() {
        let (p, m, g, s) = setup(1.0, 0.0);
        let t = oracle_modes(&s, &m, &p, &g).unwrap();
        assert!(t.beta1.iter().zip(&t.beta2).all(|(a, b)| a == b));
    }

    #[test]
    fn step_size_precondition() {
        let (p, m, g, s) = setup(1.0, 0.5);
        let coarse = g.with_step(max_step(&p, &m) * 3.0).unwrap();
        let s2 =
            build_source(&IncidentWavepacket::for_params(&p), &p, &coarse, SourceMethod::GaussianClosedForm).unwrap();
        assert!(matches!(integrate_markovian(&s2, &m, &p, &coarse), Err(Error::Config(_))));
        assert!(integrate_markovian(&s, &m, &p, &g).is_ok());
    }

    #[test]
    fn nan_source_reports_time() {
        let (p, m, g, mut s) = setup(1.0, 0.5);
        s.half[0][2 * 10 + 1] = Complex::new(f64::NAN, 0.0);
        match integrate_markovian(&s, &m, &p, &g) {
            Err(Error::Numerical { time }) => assert_eq!(time, g.t(11)),
            other => panic!("expected numerical error, got {other:?}"),
        }
    }

    #[test]
    fn amplitudes_return_to_ground_state() {
        for (r, x) in [(4.0, FRAC_PI_4), (0.02, FRAC_PI_4), (0.25, 0.0)] {
            let (p, m, g, s) = setup(r, x);
            let t = integrate_markovian(&s, &m, &p, &g).unwrap();
            for b in [&t.beta1, &t.beta2] {
                let peak = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
                assert!(b.last().unwrap().norm() <= 1e-3 * peak);
            }
            assert!(t.max_excitation() <= 1.0);
        }
    }
}
