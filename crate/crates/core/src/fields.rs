//! Incident, transmitted and reflected envelopes, pulse areas, spectra,
//! the field/amplitude consistency residuals and a frequency-domain
//! transfer-function oracle.
//!
//! In photon-flux units the radiated field constant is `κ = √Γ`:
//!
//! ```text
//! A_trans(τ) = A_inc(τ) − i√Γ Σⱼ e^{−ik₀zⱼ} βⱼ(τ)
//! A_refl(τ)  =          − i√Γ Σⱼ e^{+ik₀zⱼ} βⱼ(τ)
//! ```
//!
//! and the same constant `G₀ = √Γ` turns the amplitude equations into
//! `iβ̇_left = G₀(e^{ik₀z}A_inc + e^{−ik₀z}A_refl)`, `iβ̇_right = G₀ e^{ik₀z}A_trans`.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingResult;
use crate::dynamics::{AmplitudeTrajectory, IncidentWavepacket, TimeGrid};
use crate::error::{Error, Result};
use crate::params::SimParams;
use crate::scalar::{cis, Real};

/// Envelopes must fall below this fraction of their peak at both grid ends.
pub const DECAY_FRACTION: f64 = 1e-3;
pub const DEFAULT_ZERO_PAD: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Incident,
    Transmitted,
    Reflected,
}

impl FieldKind {
    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::Incident => "incident",
            FieldKind::Transmitted => "transmitted",
            FieldKind::Reflected => "reflected",
        }
    }
}

/// Field constants in photon-flux units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prefactors<T> {
    /// Radiated-field constant `κ`.
    pub kappa: T,
    /// Atom–field constant `G₀`.
    pub g0: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldEnvelope<T> {
    pub kind: FieldKind,
    /// Retarded-time grid `τ = t ∓ z/c`.
    pub grid: TimeGrid<T>,
    pub samples: Vec<Complex<T>>,
    /// Trapezoid integral of the samples.
    pub pulse_area: Complex<T>,
    pub prefactors: Prefactors<T>,
    /// Spectral width `Δ`, the unit of the spectrum's detuning axis.
    pub delta: T,
}

impl<T: Real> FieldEnvelope<T> {
    fn new(kind: FieldKind, grid: TimeGrid<T>, samples: Vec<Complex<T>>, prefactors: Prefactors<T>, delta: T) -> Self {
        let pulse_area = trapezoid(&grid, &samples);
        Self { kind, grid, samples, pulse_area, prefactors, delta }
    }

    pub fn peak(&self) -> T {
        self.samples.iter().map(|a| a.norm()).fold(T::zero(), T::max)
    }

    /// `true` when both ends are below [`DECAY_FRACTION`] of the peak.
    pub fn decays(&self) -> bool {
        let limit = T::lit(DECAY_FRACTION) * self.peak();
        let first = self.samples.first().map_or(T::zero(), |a| a.norm());
        let last = self.samples.last().map_or(T::zero(), |a| a.norm());
        first <= limit && last <= limit
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fields<T> {
    pub incident: FieldEnvelope<T>,
    pub transmitted: FieldEnvelope<T>,
    pub reflected: FieldEnvelope<T>,
}

impl<T: Real> Fields<T> {
    pub fn all(&self) -> [&FieldEnvelope<T>; 3] {
        [&self.incident, &self.transmitted, &self.reflected]
    }
}

/// `∫ f dτ` by the trapezoid rule.
pub fn trapezoid<T: Real>(grid: &TimeGrid<T>, samples: &[Complex<T>]) -> Complex<T> {
    let n = samples.len();
    if n < 2 {
        return Complex::new(T::zero(), T::zero());
    }
    let inner: Complex<T> = samples[1..n - 1].iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
    (inner + (samples[0] + samples[n - 1]) * T::lit(0.5)) * grid.dt
}

/// Reconstructs the three envelopes on the trajectory grid.
pub fn reconstruct_fields<T: Real>(
    traj: &AmplitudeTrajectory<T>,
    wavepacket: &IncidentWavepacket<T>,
    params: &SimParams<T>,
) -> Result<Fields<T>> {
    params.validate()?;
    let grid = traj.grid;
    if traj.beta1.len() != grid.n || traj.beta2.len() != grid.n {
        return Err(Error::Config("trajectory length does not match its grid".into()));
    }
    if wavepacket.delta != params.delta {
        return Err(Error::Config("wavepacket and parameters disagree on Δ".into()));
    }
    let kappa = params.gamma.sqrt();
    let prefactors = Prefactors { kappa, g0: kappa };
    let incident: Vec<Complex<T>> =
        (0..grid.n).map(|k| Complex::new(wavepacket.envelope(grid.t(k)), T::zero())).collect();
    let (transmitted, reflected) = if kappa == T::zero() {
        (incident.clone(), vec![Complex::new(T::zero(), T::zero()); grid.n])
    } else {
        let minus_i_kappa = Complex::new(T::zero(), -kappa);
        let (f1, f2) = (cis(-params.k0z1), cis(-params.k0z2));
        let (r1, r2) = (cis(params.k0z1), cis(params.k0z2));
        let mut trans = Vec::with_capacity(grid.n);
        let mut refl = Vec::with_capacity(grid.n);
        for ((&inc, &b1), &b2) in incident.iter().zip(&traj.beta1).zip(&traj.beta2) {
            trans.push(inc + minus_i_kappa * (f1 * b1 + f2 * b2));
            refl.push(minus_i_kappa * (r1 * b1 + r2 * b2));
        }
        (trans, refl)
    };
    let d = params.delta;
    Ok(Fields {
        incident: FieldEnvelope::new(FieldKind::Incident, grid, incident, prefactors, d),
        transmitted: FieldEnvelope::new(FieldKind::Transmitted, grid, transmitted, prefactors, d),
        reflected: FieldEnvelope::new(FieldKind::Reflected, grid, reflected, prefactors, d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseAreas<T> {
    pub incident: Complex<T>,
    pub transmitted: Complex<T>,
    pub reflected: Complex<T>,
}

impl<T: Real> PulseAreas<T> {
    /// `|S_trans| / |S_inc|`.
    pub fn transmitted_ratio(&self) -> T {
        self.transmitted.norm() / self.incident.norm()
    }

    /// `|S_refl + S_inc| / |S_inc|`.
    pub fn reflected_defect(&self) -> T {
        (self.reflected + self.incident).norm() / self.incident.norm()
    }
}

/// Pulse areas of the three envelopes. Fails when an envelope has not
/// decayed at the grid ends.
pub fn pulse_areas<T: Real>(fields: &Fields<T>) -> Result<PulseAreas<T>> {
    for env in fields.all() {
        if !env.decays() {
            return Err(Error::Truncation(format!(
                "{} envelope has not decayed below {DECAY_FRACTION} of its peak at the grid ends",
                env.kind.name()
            )));
        }
    }
    Ok(PulseAreas {
        incident: fields.incident.pulse_area,
        transmitted: fields.transmitted.pulse_area,
        reflected: fields.reflected.pulse_area,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    /// Detuning `ω − ω₀` in units of `Δ`, ascending.
    pub detuning: Vec<T>,
    /// `Ã(ω) = ∫ A(τ) e^{i(ω−ω₀)τ} dτ`.
    pub amplitude: Vec<Complex<T>>,
    /// `|Ã(ω)|²`.
    pub intensity: Vec<T>,
    /// Absolute frequency step.
    pub d_omega: T,
}

impl<T: Real> Spectrum<T> {
    /// Index of zero detuning.
    pub fn center(&self) -> usize {
        self.detuning.len() / 2
    }

    /// `(1/2π) Σ|Ã|² dω`.
    pub fn energy(&self) -> T {
        self.intensity.iter().fold(T::zero(), |a, &b| a + b) * self.d_omega / T::TAU()
    }
}

/// `Σ|A|² dτ`.
pub fn envelope_energy<T: Real>(env: &FieldEnvelope<T>) -> T {
    env.samples.iter().fold(T::zero(), |a, b| a + b.norm_sqr()) * env.grid.dt
}

/// Zero-padded DFT of an envelope, frequency axis as detuning.
pub fn spectrum<T: Real>(env: &FieldEnvelope<T>, zero_pad_factor: usize) -> Result<Spectrum<T>> {
    if zero_pad_factor < 1 {
        return Err(Error::Config("zero-pad factor must be ≥ 1".into()));
    }
    let grid = env.grid;
    let len = grid.n * zero_pad_factor;
    let mut buf = env.samples.clone();
    buf.resize(len, Complex::new(T::zero(), T::zero()));
    // Inverse transform carries e^{+2πimk/N}, matching e^{iντ}.
    FftPlanner::<T>::new().plan_fft_inverse(len).process(&mut buf);
    let d_omega = T::TAU() / (T::from_usize_lossy(len) * grid.dt);
    let half = len / 2;
    let mut detuning = Vec::with_capacity(len);
    let mut amplitude = Vec::with_capacity(len);
    for i in 0..len {
        // i = 0 ↦ m = −N/2 ... i = N−1 ↦ m = N − 1 − N/2
        let m = i as i64 - half as i64;
        let idx = m.rem_euclid(len as i64) as usize;
        let nu = d_omega * T::lit(m as f64);
        detuning.push(nu / env.delta);
        amplitude.push(buf[idx] * cis(nu * grid.t0) * grid.dt);
    }
    let intensity = amplitude.iter().map(|a| a.norm_sqr()).collect();
    Ok(Spectrum { detuning, amplitude, intensity, d_omega })
}

/// Shape of the transmission dip `Ĩ_inc − Ĩ_trans`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipMetrics {
    /// `Ĩ_trans(ω₀) / Ĩ_inc(ω₀)`.
    pub resonance_ratio: f64,
    /// `Ĩ_inc(ω₀) − Ĩ_trans(ω₀)`.
    pub depth: f64,
    /// Full width at half depth, in units of `Δ`.
    pub width: f64,
}

pub fn dip_metrics<T: Real>(incident: &Spectrum<T>, transmitted: &Spectrum<T>) -> Result<DipMetrics> {
    if incident.detuning != transmitted.detuning {
        return Err(Error::Config("spectra are on different frequency grids".into()));
    }
    let c = incident.center();
    let profile: Vec<f64> =
        incident.intensity.iter().zip(&transmitted.intensity).map(|(a, b)| (*a - *b).as_f64()).collect();
    let depth = profile[c];
    let inc0 = incident.intensity[c].as_f64();
    let resonance_ratio = if inc0 > 0.0 { transmitted.intensity[c].as_f64() / inc0 } else { f64::NAN };
    if !(depth > 0.0) {
        return Ok(DipMetrics { resonance_ratio, depth, width: 0.0 });
    }
    let x: Vec<f64> = incident.detuning.iter().map(|d| d.as_f64()).collect();
    let level = depth / 2.0;
    let crossing = |step: isize| -> f64 {
        let mut i = c as isize;
        loop {
            let j = i + step;
            if j < 0 || j as usize >= profile.len() {
                return x[i as usize];
            }
            let (pi, pj) = (profile[i as usize], profile[j as usize]);
            if pj < level {
                let frac = (pi - level) / (pi - pj);
                return x[i as usize] + frac * (x[j as usize] - x[i as usize]);
            }
            i = j;
        }
    };
    Ok(DipMetrics { resonance_ratio, depth, width: crossing(1) - crossing(-1) })
}

/// `max|A_trans| / max|A_inc|`.
pub fn peak_ratio<T: Real>(fields: &Fields<T>) -> T {
    fields.transmitted.peak() / fields.incident.peak()
}

/// Normalised residuals of the field form of the amplitude equations,
/// `sup|iβ̇ − G₀·(driving field)| / sup|β̇|` for the left and right atom,
/// with `β̇` from centred differences.
pub fn consistency_eq15<T: Real>(
    traj: &AmplitudeTrajectory<T>,
    fields: &Fields<T>,
    params: &SimParams<T>,
) -> Result<(T, T)> {
    let grid = traj.grid;
    if fields.incident.grid != grid {
        return Err(Error::Config("fields and trajectory grids differ".into()));
    }
    let g0 = fields.incident.prefactors.g0;
    let i = Complex::new(T::zero(), T::one());
    let inv_2h = T::one() / (grid.dt * T::lit(2.0));
    let (inc, tr, rf) = (&fields.incident.samples, &fields.transmitted.samples, &fields.reflected.samples);
    // The atom nearer the source sees incident plus reflected light, the
    // far one sees only transmitted light.
    let first_is_left = params.z1 <= params.z2;
    let residual = |beta: &[Complex<T>], phase: T, left: bool| -> T {
        let (mut worst, mut scale) = (T::zero(), T::zero());
        for k in 1..grid.n - 1 {
            let dot = (beta[k + 1] - beta[k - 1]) * inv_2h;
            let drive = if left { cis(phase) * inc[k] + cis(-phase) * rf[k] } else { cis(phase) * tr[k] };
            worst = worst.max((i * dot - drive * g0).norm());
            scale = scale.max(dot.norm());
        }
        if scale == T::zero() {
            T::zero()
        } else {
            worst / scale
        }
    };
    Ok((residual(&traj.beta1, params.k0z1, first_is_left), residual(&traj.beta2, params.k0z2, !first_is_left)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transfer<T> {
    /// Angular detuning `ω − ω₀` (absolute units).
    pub detuning: Vec<T>,
    pub t: Vec<Complex<T>>,
    pub r: Vec<Complex<T>>,
}

impl<T: Real> Transfer<T> {
    /// `max | |t|² + |r|² − 1 |`, a flux-conservation diagnostic.
    pub fn flux_defect(&self) -> T {
        self.t.iter().zip(&self.r).map(|(t, r)| (t.norm_sqr() + r.norm_sqr() - T::one()).abs()).fold(T::zero(), T::max)
    }
}

/// Transmission and reflection amplitudes from the frequency-domain
/// solution of the amplitude equations, per unit incident amplitude.
pub fn transfer_oracle<T: Real>(
    params: &SimParams<T>,
    coupling: &CouplingResult<T>,
    detuning: &[T],
) -> Result<Transfer<T>> {
    params.validate()?;
    let g = params.gamma;
    let m = coupling.m_total;
    let minus_i_sqrt_g = Complex::new(T::zero(), -g.sqrt());
    let (p1, p2) = (cis(params.k0z1), cis(params.k0z2));
    let drive_u = minus_i_sqrt_g * (p1 + p2);
    let drive_v = minus_i_sqrt_g * (p1 - p2);
    let zero = Complex::new(T::zero(), T::zero());
    let solve = |drive: Complex<T>, den: Complex<T>, nu: T| -> Result<Complex<T>> {
        if drive == zero {
            Ok(zero)
        } else if den == zero {
            Err(Error::Numerical { time: nu.as_f64() })
        } else {
            Ok(drive / den)
        }
    };
    let mut t = Vec::with_capacity(detuning.len());
    let mut r = Vec::with_capacity(detuning.len());
    for &nu in detuning {
        let i_nu = Complex::new(T::zero(), nu);
        let u = solve(drive_u, Complex::new(g, T::zero()) + m - i_nu, nu)?;
        let v = solve(drive_v, Complex::new(g, T::zero()) - m - i_nu, nu)?;
        let half = T::lit(0.5);
        let (b1, b2) = ((u + v) * half, (u - v) * half);
        t.push(Complex::new(T::one(), T::zero()) + minus_i_sqrt_g * (p1.conj() * b1 + p2.conj() * b2));
        r.push(minus_i_sqrt_g * (p1 * b1 + p2 * b2));
    }
    Ok(Transfer { detuning: detuning.to_vec(), t, r })
}

/// Transmitted and reflected envelopes on `grid` obtained by inverse
/// transforming `Ã_inc(ν)·t(ν)` and `Ã_inc(ν)·r(ν)`, in that order.
pub fn transfer_time_domain<T: Real>(
    params: &SimParams<T>,
    coupling: &CouplingResult<T>,
    wavepacket: &IncidentWavepacket<T>,
    grid: &TimeGrid<T>,
) -> Result<[Vec<Complex<T>>; 2]> {
    let len = (4 * grid.n).next_power_of_two();
    let d_omega = T::TAU() / (T::from_usize_lossy(len) * grid.dt);
    let half = len / 2;
    let nus: Vec<T> = (0..len)
        .map(|i| {
            let m = if i < half { i as i64 } else { i as i64 - len as i64 };
            d_omega * T::lit(m as f64)
        })
        .collect();
    let tr = transfer_oracle(params, coupling, &nus)?;
    let scale = T::one() / (T::from_usize_lossy(len) * grid.dt);
    let fft = FftPlanner::<T>::new().plan_fft_forward(len);
    let back = |h: &[Complex<T>]| -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = nus
            .iter()
            .zip(h)
            .map(|(&nu, &h)| h * wavepacket.envelope_spectrum(nu) * cis(-nu * grid.t0) * scale)
            .collect();
        fft.process(&mut buf);
        buf.truncate(grid.n);
        buf
    };
    Ok([back(&tr.t), back(&tr.r)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::coupling_full;
    use crate::dynamics::{build_source, integrate_markovian, SourceMethod};
    use std::f64::consts::FRAC_PI_4;

    struct Run {
        p: SimParams<f64>,
        m: CouplingResult<f64>,
        traj: AmplitudeTrajectory<f64>,
        fields: Fields<f64>,
        wp: IncidentWavepacket<f64>,
    }

    fn run(gamma_over_delta: f64, k0l: f64, span: f64) -> Run {
        let p = SimParams::from_ratios(gamma_over_delta, k0l, 1e4).unwrap();
        let m = coupling_full(&p).unwrap();
        let g = TimeGrid::default_for(&p, &m, span).unwrap();
        let wp = IncidentWavepacket::for_params(&p);
        let s = build_source(&wp, &p, &g, SourceMethod::GaussianClosedForm).unwrap();
        let traj = integrate_markovian(&s, &m, &p, &g).unwrap();
        let fields = reconstruct_fields(&traj, &wp, &p).unwrap();
        Run { p, m, traj, fields, wp }
    }

    #[test]
    fn no_scatterer_transmits_everything() {
        let r = run(0.0, 1.0, 1.0);
        assert_eq!(r.fields.transmitted.samples, r.fields.incident.samples);
        assert!(r.fields.reflected.samples.iter().all(|a| a.norm() == 0.0));
        let a = pulse_areas(&r.fields).unwrap();
        assert_eq!(a.transmitted, a.incident);
        assert_eq!(a.reflected.norm(), 0.0);
        let (r1, r2) = consistency_eq15(&r.traj, &r.fields, &r.p).unwrap();
        assert_eq!((r1, r2), (0.0, 0.0));
    }

    #[test]
    fn strong_coupling_reflects() {
        let r = run(4.0, FRAC_PI_4, 1.0);
        assert!(peak_ratio(&r.fields) < 0.3);
        let a = pulse_areas(&r.fields).unwrap();
        assert!(a.transmitted_ratio() <= 1e-3);
        assert!(a.reflected_defect() <= 1e-3);
    }

    #[test]
    fn reflected_follows_incident_for_large_coupling() {
        let r = run(50.0, FRAC_PI_4, 1.0);
        let peak = r.fields.incident.peak();
        let worst = r
            .fields
            .reflected
            .samples
            .iter()
            .zip(&r.fields.incident.samples)
            .map(|(a, b)| (*a + *b).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 0.1 * peak, "{worst} vs {peak}");
    }

    #[test]
    fn parseval_and_area_equals_resonant_component() {
        let r = run(0.25, FRAC_PI_4, 1.0);
        for env in r.fields.all() {
            let s = spectrum(env, 4).unwrap();
            let e = envelope_energy(env);
            assert!((s.energy() - e).abs() <= 1e-6 * e);
        }
        let inc = spectrum(&r.fields.incident, 4).unwrap();
        let tr = spectrum(&r.fields.transmitted, 4).unwrap();
        let c = tr.center();
        assert_eq!(tr.detuning[c], 0.0);
        let diff = (r.fields.transmitted.pulse_area - tr.amplitude[c]).norm();
        assert!(diff <= 1e-6 * inc.amplitude[c].norm());
    }

    #[test]
    fn incident_spectrum_is_gaussian_with_width_delta() {
        let r = run(1.0, 0.5, 1.0);
        let s = spectrum(&r.fields.incident, 8).unwrap();
        let c = s.center();
        for (i, &d) in s.detuning.iter().enumerate().step_by(97) {
            if d.abs() < 3.0 {
                let expect = s.intensity[c] * (-2.0 * d * d).exp();
                assert!((s.intensity[i] - expect).abs() < 1e-5 * s.intensity[c]);
            }
        }
        // e⁻² point of the intensity sits at |detuning| = Δ.
        let k = s.detuning.iter().position(|&d| d >= 1.0).unwrap();
        let (x0, x1) = (s.detuning[k - 1], s.detuning[k]);
        let (y0, y1) = (s.intensity[k - 1], s.intensity[k]);
        let at_one = y0 + (y1 - y0) * (1.0 - x0) / (x1 - x0);
        assert!((at_one / s.intensity[c] - (-2.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn residuals_small_and_second_order() {
        let r = run(0.25, FRAC_PI_4, 1.0);
        let (a1, a2) = consistency_eq15(&r.traj, &r.fields, &r.p).unwrap();
        assert!(a1 <= 1e-3 && a2 <= 1e-3, "{a1:e} {a2:e}");
        let fine = r.traj.grid.refined(2).unwrap();
        let s = build_source(&r.wp, &r.p, &fine, SourceMethod::GaussianClosedForm).unwrap();
        let traj = integrate_markovian(&s, &r.m, &r.p, &fine).unwrap();
        let f = reconstruct_fields(&traj, &r.wp, &r.p).unwrap();
        let (b1, b2) = consistency_eq15(&traj, &f, &r.p).unwrap();
        assert!((a1 / b1 - 4.0).abs() < 0.4 && (a2 / b2 - 4.0).abs() < 0.4, "{} {}", a1 / b1, a2 / b2);
    }

    #[test]
    fn swapped_atoms_keep_residuals_small() {
        let r = run(1.0, FRAC_PI_4, 1.0);
        let p = r.p.swapped();
        let g = r.traj.grid;
        let s = build_source(&r.wp, &p, &g, SourceMethod::GaussianClosedForm).unwrap();
        let traj = integrate_markovian(&s, &r.m, &p, &g).unwrap();
        assert_eq!(traj.beta1, r.traj.beta2);
        assert_eq!(traj.beta2, r.traj.beta1);
    }

    #[test]
    fn transfer_zero_at_resonance_and_conserves_flux() {
        for ratio in [0.02, 0.25, 4.0] {
            let r = run(ratio, FRAC_PI_4, 1.0);
            let nus: Vec<f64> = (-80..=80).map(|i| i as f64 * 0.1 * r.p.delta).collect();
            let tr = transfer_oracle(&r.p, &r.m, &nus).unwrap();
            assert!(tr.t[80].norm() < 1e-12);
            assert!(tr.flux_defect() < 1e-12);
        }
        let free = run(0.0, 1.0, 1.0);
        let tr = transfer_oracle(&free.p, &free.m, &[0.0, 1.0]).unwrap();
        assert_eq!(tr.t[0], Complex::new(1.0, 0.0));
    }

    #[test]
    fn transfer_matches_time_domain() {
        let r = run(4.0, FRAC_PI_4, 1.0);
        let [t, rf] = transfer_time_domain(&r.p, &r.m, &r.wp, &r.traj.grid).unwrap();
        let peak = r.fields.incident.peak();
        let dt = t.iter().zip(&r.fields.transmitted.samples).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max);
        let dr = rf.iter().zip(&r.fields.reflected.samples).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max);
        assert!(dt <= 1e-4 * peak && dr <= 1e-4 * peak, "{dt:e} {dr:e}");
    }

    #[test]
    fn truncated_envelope_is_reported() {
        let r = run(1.0, FRAC_PI_4, 1.0);
        let mut f = r.fields.clone();
        let n = f.transmitted.samples.len();
        f.transmitted.samples[n - 1] = Complex::new(1.0, 0.0);
        assert!(matches!(pulse_areas(&f), Err(Error::Truncation(_))));
    }
}
