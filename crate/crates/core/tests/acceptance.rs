//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use wqed::validation::{run_group, Check, Fault};

struct Criterion {
    id: u8,
    title: &'static str,
    groups: &'static [&'static str],
    /// Wall-time limit, where one is stated.
    limit: Option<Duration>,
}

const CRITERIA: [Criterion; 10] = [
    Criterion {
        id: 1,
        title: "coupling identity and quadrature oracle",
        groups: &["coupling-identity", "coupling-oracle"],
        limit: Some(Duration::from_secs(10)),
    },
    Criterion { id: 2, title: "RWA divergence law", groups: &["rwa-divergence"], limit: Some(Duration::from_secs(1)) },
    Criterion { id: 3, title: "negative-frequency RWA equivalence", groups: &["negfreq"], limit: None },
    Criterion {
        id: 4,
        title: "RK4 vs mode oracle and convergence order",
        groups: &["mode-oracle", "rk4-order"],
        limit: Some(Duration::from_secs(30)),
    },
    Criterion {
        id: 5,
        title: "pulse-area theorem, default and doubled span",
        groups: &["pulse-area", "pulse-area-span"],
        limit: Some(Duration::from_secs(60)),
    },
    Criterion { id: 6, title: "resonance reflection", groups: &["resonance"], limit: None },
    Criterion { id: 7, title: "field-form residuals", groups: &["residuals"], limit: None },
    Criterion { id: 8, title: "transfer-function oracle", groups: &["transfer"], limit: None },
    Criterion { id: 9, title: "far-field suppression", groups: &["farfield"], limit: None },
    Criterion { id: 10, title: "special functions", groups: &["specfun"], limit: None },
];

const SUITE_LIMIT: Duration = Duration::from_secs(120);

fn main() -> ExitCode {
    let mut all_ok = true;
    let mut total = Duration::ZERO;
    for c in &CRITERIA {
        let start = Instant::now();
        let checks: Vec<Check> =
            c.groups.iter().flat_map(|g| run_group(g, Fault::None).expect("known group")).collect();
        let elapsed = start.elapsed();
        total += elapsed;
        let in_time = c.limit.is_none_or(|l| elapsed < l);
        let ok = !checks.is_empty() && checks.iter().all(|k| k.passed) && in_time;
        all_ok &= ok;
        let limit = c.limit.map_or(String::new(), |l| format!(", limit {}s", l.as_secs()));
        println!(
            "{} criterion {:>2}: {} ({} checks, {:.2}s{limit})",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            checks.len(),
            elapsed.as_secs_f64()
        );
        for k in checks.iter().filter(|k| !k.passed) {
            println!("    {}", k.line());
        }
        if !in_time {
            println!("    runtime {:.2}s exceeds the limit", elapsed.as_secs_f64());
        }
    }
    let suite_ok = total < SUITE_LIMIT;
    all_ok &= suite_ok;
    println!(
        "{} full suite runtime {:.2}s < {}s",
        if suite_ok { "PASS" } else { "FAIL" },
        total.as_secs_f64(),
        SUITE_LIMIT.as_secs()
    );
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
