mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use wqed::params::{markov_guard_with, Status};
use wqed::sweep::{compare_couplings, coupling_table_csv, run_cell, run_sweep, CellOutcome};
use wqed::validation::{self, Fault};
use wqed::{output, Error};

use config::{ModelName, Overrides, RunConfig, SweepFile};

const EXIT_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_GUARD: u8 = 3;

#[derive(Parser)]
#[command(
    name = "wqed",
    version,
    about = "Single-photon scattering by two atoms in a waveguide",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the inter-atomic coupling M under several models.
    Coupling(CouplingArgs),
    /// Run one scattering simulation and write its outputs.
    Simulate(SimulateArgs),
    /// Run the oracle and invariant checks.
    Validate(ValidateArgs),
    /// Run every cell of a sweep file.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CouplingArgs {
    /// Separations as `start:stop:count`, both ends included.
    #[arg(long, value_parser = parse_range, default_value = "0:6.283185307179586:64")]
    k0l_range: Range,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "full")]
    models: Vec<ModelName>,
    /// Infrared cutoff for rwa-cutoff, in units of Γ.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = wqed::sweep::DEFAULT_OMEGA0_OVER_GAMMA)]
    omega0_over_gamma: f64,
    /// CSV output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long, requires = "out")]
    plots: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma_over_delta: Option<f64>,
    #[arg(long)]
    k0l: Option<f64>,
    #[arg(long)]
    omega0_over_gamma: Option<f64>,
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    grid_dt: Option<f64>,
    #[arg(long)]
    grid_span: Option<f64>,
    #[arg(long)]
    zero_pad: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write gnuplot scripts next to the CSVs.
    #[arg(long)]
    plots: bool,
    /// Run even when the Markov validity guard fails.
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    CouplingSign,
}

#[derive(Args)]
struct ValidateArgs {
    /// Run only the named check groups.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep file.
    spec: PathBuf,
    /// Output directory; overrides the one in the sweep file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Clone)]
struct Range(Vec<f64>);

fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err("expected start:stop:count".into());
    };
    let a: f64 = a.trim().parse().map_err(|e| format!("start: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("stop: {e}"))?;
    let n: usize = n.trim().parse().map_err(|e| format!("count: {e}"))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err("need finite bounds and count ≥ 1".into());
    }
    if n == 1 {
        return Ok(Range(vec![a]));
    }
    Ok(Range((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()))
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    version: &'static str,
    config: &'a C,
    cells: &'a [CellOutcome],
}

struct Failure(u8, String);

impl Failure {
    fn usage(msg: impl std::fmt::Display) -> Self {
        Failure(EXIT_USAGE, msg.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::Domain { .. } => EXIT_USAGE,
            _ => EXIT_CHECK,
        };
        Failure(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Coupling(a) => cmd_coupling(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn cmd_coupling(a: CouplingArgs) -> Result<u8, Failure> {
    let models = a.models.iter().map(|m| m.with_epsilon(a.epsilon)).collect::<wqed::Result<Vec<_>>>()?;
    if !(a.omega0_over_gamma > 0.0) {
        return Err(Failure::usage("--omega0-over-gamma must be > 0"));
    }
    let rows = compare_couplings(1.0, a.omega0_over_gamma, &a.k0l_range.0, &models)?;
    let csv = coupling_table_csv(&rows)?;
    match &a.out {
        Some(path) => {
            output::write_file(path, &csv)?;
            if a.plots {
                let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
                output::write_file(&path.with_extension("gp"), &output::coupling_gnuplot(&name))?;
            }
        }
        None => print!("{csv}"),
    }
    Ok(0)
}

fn read_config(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn guard_failures(cells: &[wqed::sweep::CellSpec<f64>]) -> Result<Vec<String>, Failure> {
    let mut out = Vec::new();
    for c in cells {
        let report = markov_guard_with(&c.params()?, c.warn_ratio, c.fail_ratio);
        for r in report.checks.iter().filter(|r| r.status == Status::Fail) {
            out.push(format!(
                "Γ/Δ = {}, k0l = {}: {} = {:.3e} exceeds {}",
                c.gamma_over_delta, c.k0l, r.name, r.value, c.fail_ratio
            ));
        }
    }
    Ok(out)
}

fn cmd_simulate(a: SimulateArgs) -> Result<u8, Failure> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::parse(&read_config(p)?).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        gamma_over_delta: a.gamma_over_delta,
        k0l: a.k0l,
        omega0_over_gamma: a.omega0_over_gamma,
        model: a.model,
        epsilon: a.epsilon,
        grid_dt: a.grid_dt,
        grid_span: a.grid_span,
        zero_pad: a.zero_pad,
        out: a.out.clone(),
        plots: a.plots,
    });
    let cell = cfg.cell()?;
    let guard = guard_failures(std::slice::from_ref(&cell))?;
    if !guard.is_empty() && !a.force {
        for g in &guard {
            eprintln!("validity guard: {g}");
        }
        return Err(Failure(EXIT_GUARD, "Markov validity guard failed (use --force to run anyway)".into()));
    }
    let dir = &cfg.output.dir;
    let outcome = run_cell(0, &cell, Some(dir), cfg.output.max_rows, cfg.output.plots);
    let cells = [outcome];
    write_manifest(dir, &cfg, &cells)?;
    print_summary(&cells[0]);
    Ok(if cells[0].passed() { 0 } else { EXIT_CHECK })
}

fn write_manifest<C: Serialize>(dir: &Path, config: &C, cells: &[CellOutcome]) -> Result<(), Failure> {
    let m = Manifest { version: env!("CARGO_PKG_VERSION"), config, cells };
    let text = toml::to_string(&m).map_err(|e| Failure(EXIT_CHECK, format!("manifest: {e}")))?;
    output::write_file(&dir.join("manifest.toml"), &text)?;
    Ok(())
}

fn print_summary(c: &CellOutcome) {
    println!(
        "cell {}: model {}, Γ/Δ = {}, k0l = {}, ω0/Γ = {}",
        c.index, c.model, c.gamma_over_delta, c.k0l, c.omega0_over_gamma
    );
    println!("  M = {:.12e} {:+.12e}i{}", c.m[0], c.m[1], if c.diverged { " (diverged)" } else { "" });
    if c.grid_points > 0 {
        println!("  grid: {} points, dt = {:.6e}, t in [{:.6e}, {:.6e}]", c.grid_points, c.grid_dt, c.t_start, c.t_end);
    }
    if let Some(a) = &c.pulse_areas {
        println!(
            "  pulse areas: |S_trans|/|S_inc| = {:.3e}, |S_refl + S_inc|/|S_inc| = {:.3e}",
            a.transmitted_ratio, a.reflected_defect
        );
    }
    if let Some(d) = &c.dip {
        println!(
            "  dip: I_trans/I_inc at resonance = {:.3e}, depth = {:.6e}, width = {:.6e} Δ",
            d.resonance_ratio, d.depth, d.width
        );
    }
    if let Some(p) = c.peak_ratio {
        println!("  peak |A_trans|/|A_inc| = {p:.6e}");
    }
    if let Some([r1, r2]) = c.residuals {
        println!("  field-form residuals: atom 1 {r1:.3e}, atom 2 {r2:.3e}");
    }
    for v in &c.validity {
        println!("  markov {}: {:.3e} {:?}", v.name, v.value, v.status);
    }
    for k in &c.checks {
        println!(
            "  {} {}: {:.3e} (tolerance {:.1e})",
            if k.passed { "PASS" } else { "FAIL" },
            k.name,
            k.value,
            k.tolerance
        );
    }
    if let Some(e) = &c.error {
        println!("  ERROR {e}");
    }
}

fn cmd_validate(a: ValidateArgs) -> Result<u8, Failure> {
    let fault = match a.inject_fault {
        Some(FaultArg::CouplingSign) => Fault::FlipCouplingSign,
        None => Fault::None,
    };
    let only: Vec<String> = a.only.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    let checks = validation::run(&only, fault).map_err(|e| match e {
        Error::Config(_) => Failure::usage(e),
        other => other.into(),
    })?;
    for c in &checks {
        println!("{}", c.line());
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    println!("{passed}/{} checks passed", checks.len());
    Ok(if passed == checks.len() { 0 } else { EXIT_CHECK })
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("WQED_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::usage(format!("WQED_THREADS must be a positive integer, got '{v}'")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Failure(EXIT_CHECK, e.to_string()))
}

fn cmd_sweep(a: SweepArgs) -> Result<u8, Failure> {
    let text = read_config(&a.spec)?;
    let file = SweepFile::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", a.spec.display())))?;
    let spec = file.to_spec(a.out.as_deref())?;
    let guard = guard_failures(&spec.cells())?;
    if !guard.is_empty() && !a.force {
        for g in &guard {
            eprintln!("validity guard: {g}");
        }
        return Err(Failure(EXIT_GUARD, "Markov validity guard failed (use --force to run anyway)".into()));
    }
    let pool = thread_pool()?;
    let manifest = pool.install(|| run_sweep(&spec))?;
    let dir = spec.out_dir.clone().unwrap_or_default();
    write_manifest(&dir, &file, &manifest.cells)?;
    for c in &manifest.cells {
        print_summary(c);
    }
    let passed = manifest.cells.iter().filter(|c| c.passed()).count();
    println!("{passed}/{} cells passed", manifest.cells.len());
    Ok(if manifest.passed() { 0 } else { EXIT_CHECK })
}
