//! Named oracle and invariant checks behind `wqed validate` and the
//! acceptance harness.
//!
//! Every check compares one measured number with a fixed tolerance. A group
//! that errors out yields a single failing check carrying the message.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

use num_complex::Complex;
use serde::Serialize;

use crate::coupling::{
    self, coupling_full, coupling_rwa_cutoff, coupling_rwa_negfreq, CouplingModel, CouplingResult, OracleTarget,
    PrincipalValueOracle,
};
use crate::dynamics::{build_source, integrate_markovian, oracle_modes, IncidentWavepacket, SourceMethod, TimeGrid};
use crate::error::{Error, Result};
use crate::farfield::{eval_f, eval_f_plus, i2_ratio, i3_bound, DetectorSpec};
use crate::fields::{consistency_eq15, pulse_areas, reconstruct_fields, transfer_oracle, transfer_time_domain};
use crate::params::SimParams;
use crate::quadrature::GaussLegendre;
use crate::scalar::sup_norm;
use crate::specfun::{ci_value, si_value};
use crate::sweep::{simulate_with_coupling, CellSpec, SweepSpec};

/// Group names in execution order.
pub const GROUPS: [&str; 13] = [
    "specfun",
    "coupling-identity",
    "coupling-oracle",
    "rwa-divergence",
    "negfreq",
    "mode-oracle",
    "rk4-order",
    "pulse-area",
    "pulse-area-span",
    "resonance",
    "residuals",
    "transfer",
    "farfield",
];

/// Ratios `Γ/Δ` of the three reference cells.
pub const REFERENCE_RATIOS: [f64; 3] = [0.02, 0.25, 4.0];
pub const PULSE_AREA_SEPARATIONS: [f64; 3] = [0.0, FRAC_PI_4, FRAC_PI_2];
pub const ORACLE_SPOTS: [f64; 7] = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3, 1.0, 2.0, 5.0, 20.0];
const OMEGA0: f64 = 1e4;

/// Deliberate faults for exercising the suite itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Runs the dynamics with `−M` in place of `M`.
    FlipCouplingSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cmp {
    /// Passes when `value ≤ tolerance`.
    Le,
    /// Passes when `value ≥ tolerance`.
    Ge,
    /// Passes when `value < tolerance`.
    Lt,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub group: &'static str,
    pub name: String,
    pub value: f64,
    pub cmp: Cmp,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    pub fn new(group: &'static str, name: impl Into<String>, value: f64, cmp: Cmp, tolerance: f64) -> Self {
        let passed = match cmp {
            Cmp::Le => value <= tolerance,
            Cmp::Ge => value >= tolerance,
            Cmp::Lt => value < tolerance,
        };
        Self { group, name: name.into(), value, cmp, tolerance, passed, error: None }
    }

    fn errored(group: &'static str, err: &Error) -> Self {
        Self {
            group,
            name: group.to_string(),
            value: f64::NAN,
            cmp: Cmp::Le,
            tolerance: f64::NAN,
            passed: false,
            error: Some(err.to_string()),
        }
    }

    /// One line: `PASS name value <= tolerance`.
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => format!("{tag} {}: {e}", self.name),
            None => {
                let op = match self.cmp {
                    Cmp::Le => "<=",
                    Cmp::Ge => ">=",
                    Cmp::Lt => "<",
                };
                format!("{tag} {} {:.3e} {op} {:.3e}", self.name, self.value, self.tolerance)
            }
        }
    }
}

/// Runs one group by name.
pub fn run_group(group: &str, fault: Fault) -> Result<Vec<Check>> {
    let g = GROUPS
        .iter()
        .copied()
        .find(|&g| g == group)
        .ok_or_else(|| Error::Config(format!("unknown check '{group}'; known: {}", GROUPS.join(", "))))?;
    let out = match g {
        "specfun" => specfun_checks(),
        "coupling-identity" => coupling_identity(),
        "coupling-oracle" => coupling_oracle_checks(),
        "rwa-divergence" => rwa_divergence(),
        "negfreq" => negfreq(),
        "mode-oracle" => mode_oracle(),
        "rk4-order" => rk4_order(),
        "pulse-area" => pulse_area(1.0, 1e-3, fault),
        "pulse-area-span" => pulse_area(2.0, 1e-5, fault),
        "resonance" => resonance(),
        "residuals" => residuals(),
        "transfer" => transfer(),
        "farfield" => farfield(),
        _ => unreachable!(),
    };
    Ok(out.unwrap_or_else(|e| vec![Check::errored(g, &e)]))
}

/// Runs the selected groups (all when `only` is empty).
pub fn run(only: &[String], fault: Fault) -> Result<Vec<Check>> {
    for name in only {
        if !GROUPS.contains(&name.as_str()) {
            return Err(Error::Config(format!("unknown check '{name}'; known: {}", GROUPS.join(", "))));
        }
    }
    let mut out = Vec::new();
    for g in GROUPS {
        if only.is_empty() || only.iter().any(|o| o == g) {
            out.extend(run_group(g, fault)?);
        }
    }
    Ok(out)
}

fn params(gamma_over_delta: f64, k0l: f64) -> Result<SimParams<f64>> {
    SimParams::from_ratios(gamma_over_delta, k0l, OMEGA0)
}

/// `∫₀ˣ sin t / t dt` and `γ + ln x + ∫₀ˣ (cos t − 1)/t dt` by Gauss–Legendre
/// on panels of at most a quarter period.
pub fn si_ci_quadrature(x: f64) -> (f64, f64) {
    let rule = GaussLegendre::<f64>::new(16);
    let panels = ((x / FRAC_PI_2).ceil() as usize).max(1);
    let si = rule.composite(0.0, x, panels, |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t });
    let ci_rest = rule.composite(0.0, x, panels, |t: f64| {
        let s = (t / 2.0).sin();
        -2.0 * s * s / t
    });
    (si, 0.577_215_664_901_532_9 + x.ln() + ci_rest)
}

fn specfun_checks() -> Result<Vec<Check>> {
    const G: &str = "specfun";
    let (mut si_err, mut ci_err) = (0f64, 0f64);
    for k in 0..=120 {
        let x = 10f64.powf(-3.0 + 6.0 * k as f64 / 120.0);
        let (si_q, ci_q) = si_ci_quadrature(x);
        si_err = si_err.max((si_value(x)? - si_q).abs());
        ci_err = ci_err.max((ci_value(x)? - ci_q).abs());
    }
    let mut band = 0f64;
    for k in 0..=400 {
        let x = 30.0 + k as f64 * 0.7;
        let bound = 2.0 / (x * x);
        band = band.max((si_value(x)? - FRAC_PI_2 + x.cos() / x).abs() / bound);
        band = band.max((ci_value(x)? - x.sin() / x).abs() / bound);
    }
    let mut parity = 0f64;
    for x in [0.1f64, 1.0, 6.0, 7.5, 100.0] {
        parity = parity.max((si_value(-x)? + si_value(x)?).abs());
    }
    Ok(vec![
        Check::new(G, "specfun/si-vs-quadrature", si_err, Cmp::Le, 1e-10),
        Check::new(G, "specfun/ci-vs-quadrature", ci_err, Cmp::Le, 1e-10),
        Check::new(G, "specfun/asymptotic-band", band, Cmp::Le, 1.0),
        Check::new(G, "specfun/si-large", (si_value(1e6)? - FRAC_PI_2).abs(), Cmp::Le, 2e-6),
        Check::new(G, "specfun/ci-large", ci_value(1e6f64)?.abs(), Cmp::Le, 2e-6),
        Check::new(G, "specfun/si-odd", parity, Cmp::Le, 0.0),
        Check::new(G, "specfun/ci-zero-is-error", f64::from(u8::from(ci_value(0.0).is_ok())), Cmp::Le, 0.0),
    ])
}

fn coupling_identity() -> Result<Vec<Check>> {
    let mut worst = 0f64;
    for k in 0..100 {
        let x = 8.0 * PI * k as f64 / 99.0;
        let p = params(1.0, x)?;
        let m = coupling_full(&p)?.m_total;
        let expect = Complex::from_polar(p.gamma, x);
        worst = worst.max((m - expect).norm() / expect.norm());
    }
    Ok(vec![Check::new("coupling-identity", "coupling-identity/relative", worst, Cmp::Le, 1e-12)])
}

fn coupling_oracle_checks() -> Result<Vec<Check>> {
    let oracle = PrincipalValueOracle::<f64>::default();
    let mut worst = 0f64;
    for x in ORACLE_SPOTS {
        let p = params(1.0, x)?;
        let parts = coupling_full(&p)?.m_parts.expect("full coupling carries its parts");
        let pairs = [(OracleTarget::Pair12, parts[0] + parts[1]), (OracleTarget::Pair34, parts[2] + parts[3])];
        for (target, closed) in pairs {
            worst = worst.max((oracle.evaluate(&p, target)? - closed).norm() / p.gamma);
        }
    }
    Ok(vec![Check::new("coupling-oracle", "coupling-oracle/pair-sums", worst, Cmp::Le, 1e-6)])
}

/// Least-squares slope of `Im M` against `ln ε` over four decades, in units of `−Γ/π`.
pub fn rwa_divergence_slope(k0l: f64) -> Result<f64> {
    let p = params(1.0, k0l)?;
    let pts: Vec<(f64, f64)> = (0..=16)
        .map(|k| {
            let eps = 10f64.powf(-6.0 + 4.0 * k as f64 / 16.0) * p.omega0;
            Ok((eps.ln(), coupling_rwa_cutoff(&p, eps)?.m_total.im))
        })
        .collect::<Result<_>>()?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx / (-p.gamma / PI))
}

fn rwa_divergence() -> Result<Vec<Check>> {
    let mut worst = 0f64;
    for x in [FRAC_PI_4, 1.0, 2.0] {
        worst = worst.max((rwa_divergence_slope(x)? - 1.0).abs());
    }
    Ok(vec![Check::new("rwa-divergence", "rwa-divergence/slope-deviation", worst, Cmp::Le, 0.01)])
}

fn negfreq() -> Result<Vec<Check>> {
    let mut worst = 0f64;
    for k in 0..=256 {
        let x = 8.0 * PI * k as f64 / 256.0;
        let p = params(1.0, x)?;
        worst = worst.max((coupling_rwa_negfreq(&p)?.m_total - coupling_full(&p)?.m_total).norm() / p.gamma);
    }
    Ok(vec![Check::new("negfreq", "negfreq/deviation", worst, Cmp::Le, 1e-12)])
}

/// Parameter sets for the mode-oracle comparison: the three reference cells
/// at `k₀l = π/4` and two further separations.
pub const MODE_ORACLE_SETS: [(f64, f64); 5] =
    [(0.02, FRAC_PI_4), (0.25, FRAC_PI_4), (4.0, FRAC_PI_4), (1.0, 0.0), (0.5, 2.0)];

struct Setup {
    p: SimParams<f64>,
    m: CouplingResult<f64>,
    wp: IncidentWavepacket<f64>,
    grid: TimeGrid<f64>,
}

fn setup(gamma_over_delta: f64, k0l: f64) -> Result<Setup> {
    let p = params(gamma_over_delta, k0l)?;
    let m = coupling_full(&p)?;
    let grid = TimeGrid::default_for(&p, &m, 1.0)?;
    let wp = IncidentWavepacket::for_params(&p);
    Ok(Setup { p, m, wp, grid })
}

/// `sup|β_RK4 − β_oracle| / sup|β_oracle|` on `grid`.
fn rk4_vs_modes(s: &Setup, grid: &TimeGrid<f64>) -> Result<f64> {
    let src = build_source(&s.wp, &s.p, grid, SourceMethod::GaussianClosedForm)?;
    let rk = integrate_markovian(&src, &s.m, &s.p, grid)?;
    let ex = oracle_modes(&src, &s.m, &s.p, grid)?;
    Ok(rk.relative_distance(&ex))
}

fn mode_oracle() -> Result<Vec<Check>> {
    MODE_ORACLE_SETS
        .iter()
        .map(|&(r, x)| {
            let s = setup(r, x)?;
            let err = rk4_vs_modes(&s, &s.grid)?;
            Ok(Check::new("mode-oracle", format!("mode-oracle/G/D={r},k0l={x:.4}"), err, Cmp::Le, 1e-8))
        })
        .collect()
}

/// Observed order from the oracle error at the largest admissible step and at half of it.
pub fn rk4_observed_order(gamma_over_delta: f64, k0l: f64) -> Result<f64> {
    let s = setup(gamma_over_delta, k0l)?;
    let coarse = s.grid.with_step(s.grid.dt * 2.0)?;
    let e1 = rk4_vs_modes(&s, &coarse)?;
    let e2 = rk4_vs_modes(&s, &coarse.with_step(coarse.dt / 2.0)?)?;
    Ok((e1 / e2).log2())
}

fn rk4_order() -> Result<Vec<Check>> {
    [(0.25, FRAC_PI_4), (4.0, FRAC_PI_4)]
        .iter()
        .map(|&(r, x)| {
            let order = rk4_observed_order(r, x)?;
            Ok(Check::new("rk4-order", format!("rk4-order/G/D={r},k0l={x:.4}"), order, Cmp::Ge, 3.8))
        })
        .collect()
}

fn pulse_area(span: f64, tol: f64, fault: Fault) -> Result<Vec<Check>> {
    let group = if span == 1.0 { "pulse-area" } else { "pulse-area-span" };
    let mut out = Vec::new();
    for r in REFERENCE_RATIOS {
        for x in PULSE_AREA_SEPARATIONS {
            let label = format!("{group}/G/D={r},k0l={x:.4}");
            let mut cell = CellSpec::new(r, x);
            cell.grid.span = span;
            let run = cell.params().and_then(|p| {
                let mut m = coupling::evaluate(&p, &CouplingModel::Full)?;
                if fault == Fault::FlipCouplingSign {
                    m = CouplingResult::custom(-m.m_total);
                }
                let sim = simulate_with_coupling(&cell, m)?;
                pulse_areas(&sim.fields)
            });
            match run {
                Ok(a) => {
                    out.push(Check::new(group, format!("{label}/trans"), a.transmitted_ratio(), Cmp::Le, tol));
                    out.push(Check::new(group, format!("{label}/refl"), a.reflected_defect(), Cmp::Le, tol));
                }
                Err(e) => {
                    let mut c = Check::errored(group, &e);
                    c.name = label;
                    out.push(c);
                }
            }
        }
    }
    Ok(out)
}

fn resonance() -> Result<Vec<Check>> {
    const G: &str = "resonance";
    let mut spec = SweepSpec::new(REFERENCE_RATIOS.to_vec(), vec![FRAC_PI_4]);
    spec.max_rows = 0;
    let manifest = crate::sweep::run_sweep(&spec)?;
    let mut out = Vec::new();
    let mut widths = Vec::new();
    for c in &manifest.cells {
        if let Some(e) = &c.error {
            return Err(Error::Config(format!("cell Γ/Δ = {}: {e}", c.gamma_over_delta)));
        }
        let dip = c.dip.ok_or_else(|| Error::Config("missing dip metrics".into()))?;
        out.push(Check::new(
            G,
            format!("resonance/G/D={}/ratio", c.gamma_over_delta),
            dip.resonance_ratio,
            Cmp::Le,
            1e-4,
        ));
        widths.push(dip.width);
    }
    let increasing = widths.windows(2).filter(|w| w[1] < w[0]).count();
    // Ratios are listed in ascending order, so widths must increase.
    out.push(Check::new(G, "resonance/width-order-violations", increasing as f64, Cmp::Le, 0.0));
    let peak = manifest.cells[2].peak_ratio.unwrap_or(f64::NAN);
    out.push(Check::new(G, "resonance/G/D=4/peak-ratio", peak, Cmp::Lt, 0.3));
    Ok(out)
}

/// Residuals on the default grid and on a grid with half the step.
pub fn residual_pair(gamma_over_delta: f64, k0l: f64) -> Result<(f64, f64)> {
    let s = setup(gamma_over_delta, k0l)?;
    let worst = |grid: &TimeGrid<f64>| -> Result<f64> {
        let src = build_source(&s.wp, &s.p, grid, SourceMethod::GaussianClosedForm)?;
        let traj = integrate_markovian(&src, &s.m, &s.p, grid)?;
        let f = reconstruct_fields(&traj, &s.wp, &s.p)?;
        let (a, b) = consistency_eq15(&traj, &f, &s.p)?;
        Ok(a.max(b))
    };
    Ok((worst(&s.grid)?, worst(&s.grid.refined(2)?)?))
}

fn residuals() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for r in REFERENCE_RATIOS {
        let (coarse, fine) = residual_pair(r, FRAC_PI_4)?;
        out.push(Check::new("residuals", format!("residuals/G/D={r}"), coarse, Cmp::Le, 1e-3));
        let ratio = coarse / fine;
        out.push(Check::new(
            "residuals",
            format!("residuals/G/D={r}/refinement-gain-dev"),
            (ratio - 4.0).abs(),
            Cmp::Le,
            0.5,
        ));
    }
    Ok(out)
}

fn transfer() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for r in REFERENCE_RATIOS {
        let s = setup(r, FRAC_PI_4)?;
        let src = build_source(&s.wp, &s.p, &s.grid, SourceMethod::GaussianClosedForm)?;
        let traj = integrate_markovian(&src, &s.m, &s.p, &s.grid)?;
        let f = reconstruct_fields(&traj, &s.wp, &s.p)?;
        let [trans, _] = transfer_time_domain(&s.p, &s.m, &s.wp, &s.grid)?;
        let diff: Vec<Complex<f64>> = trans.iter().zip(&f.transmitted.samples).map(|(a, b)| a - b).collect();
        let rel = sup_norm(&diff) / f.incident.peak();
        out.push(Check::new("transfer", format!("transfer/G/D={r}/time-vs-frequency"), rel, Cmp::Le, 1e-4));
        let t0 = transfer_oracle(&s.p, &s.m, &[0.0])?.t[0].norm();
        out.push(Check::new("transfer", format!("transfer/G/D={r}/t-at-resonance"), t0, Cmp::Le, 1e-6));
    }
    Ok(out)
}

/// `℘`-free band integral of `cos(ωa)/(ω(ω₀+ω))` by panels of a quarter period.
fn band_quadrature(omega1: f64, omega2: f64, omega0: f64, a: f64) -> (f64, Complex<f64>) {
    let rule = GaussLegendre::<f64>::new(16);
    let panels = (((omega2 - omega1) * a / FRAC_PI_2).ceil() as usize).max(4);
    let re = rule.composite(omega1, omega2, panels, |w: f64| (w * a).cos() / (w * (omega0 + w)));
    let z = rule.composite(omega1, omega2, panels, |w: f64| Complex::from_polar(1.0, w * a) / (w * (omega0 + w)));
    (re, z)
}

fn farfield() -> Result<Vec<Check>> {
    const G: &str = "farfield";
    let s = setup(1.0, FRAC_PI_4)?;
    let src = build_source(&s.wp, &s.p, &s.grid, SourceMethod::GaussianClosedForm)?;
    let traj = integrate_markovian(&src, &s.m, &s.p, &s.grid)?;
    let f = reconstruct_fields(&traj, &s.wp, &s.p)?;
    let delta0 = 100.0 * s.p.delta.max(s.p.gamma);
    // Place the detector so that ω₁|z − z_near|/c = 10³.
    let omega1 = s.p.omega0 - delta0 / 2.0;
    let z = s.p.z1.max(s.p.z2) + 1e3 * s.p.c / omega1;
    let det = DetectorSpec::centered(s.p.omega0, delta0, z, 1e-3 * s.p.omega0)?;
    let i2 = i2_ratio(&traj, &f, &det, &s.p)?;
    let i3 = i3_bound(&s.p, &det)?;

    let mut dev = 0f64;
    for (w1, w2, a) in [(40.0, 50.0, 0.3), (150.0, 200.0, 0.05), (9950.0, 10050.0, 0.1)] {
        let (re, z) = band_quadrature(w1, w2, s.p.omega0, a);
        let closed = eval_f(w2, s.p.omega0, a)? - eval_f(w1, s.p.omega0, a)?;
        let closed_plus = eval_f_plus(w2, s.p.omega0, a)? - eval_f_plus(w1, s.p.omega0, a)?;
        let scale = z.norm().max(1e-300);
        dev = dev.max(((closed - re) / scale).abs()).max((closed_plus - z).norm() / scale);
    }
    Ok(vec![
        Check::new(G, "farfield/i2-over-i1", i2, Cmp::Le, 1e-4),
        Check::new(G, "farfield/i3-bound", i3, Cmp::Le, 1e-2),
        Check::new(G, "farfield/eval-f-vs-quadrature", dev, Cmp::Le, 1e-6),
    ])
}
