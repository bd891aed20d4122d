//! CSV and gnuplot writers.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`), one header
//! line, `\n` line endings. Nothing time-dependent ends up in a data file,
//! so identical runs give byte-identical output.

use std::fs;
use std::path::{Path, PathBuf};

use csv::{Terminator, WriterBuilder};

use crate::dynamics::AmplitudeTrajectory;
use crate::error::{Error, IoError, Result};
use crate::fields::{FieldEnvelope, Spectrum};
use crate::scalar::Real;

/// Default cap on rows per time-series file; longer series are strided.
pub const DEFAULT_MAX_ROWS: usize = 20_000;
/// Spectra are written for `|detuning| ≤` this many `Δ`.
pub const SPECTRUM_WINDOW: f64 = 8.0;

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(IoError(e.to_string()))
}

/// Serializes a header and rows of cells to CSV text.
pub fn csv_string<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(io)?;
    String::from_utf8(bytes).map_err(io)
}

fn stride(n: usize, max_rows: usize) -> usize {
    n.div_ceil(max_rows.max(1)).max(1)
}

/// `t, re_b1, im_b1, re_b2, im_b2`.
pub fn trajectory_csv<T: Real>(traj: &AmplitudeTrajectory<T>, max_rows: usize) -> Result<String> {
    let step = stride(traj.grid.n, max_rows);
    let rows = (0..traj.grid.n).step_by(step).map(|k| {
        let (b1, b2) = (traj.beta1[k], traj.beta2[k]);
        [traj.grid.t(k), b1.re, b1.im, b2.re, b2.im].map(|v| fmt_num(v.as_f64()))
    });
    csv_string(&["t", "re_b1", "im_b1", "re_b2", "im_b2"], rows)
}

/// `tau, re, im, abs`.
pub fn envelope_csv<T: Real>(env: &FieldEnvelope<T>, max_rows: usize) -> Result<String> {
    let step = stride(env.grid.n, max_rows);
    let rows = (0..env.grid.n).step_by(step).map(|k| {
        let a = env.samples[k];
        [env.grid.t(k), a.re, a.im, a.norm()].map(|v| fmt_num(v.as_f64()))
    });
    csv_string(&["tau", "re", "im", "abs"], rows)
}

/// `detuning, intensity` over `|detuning| ≤ SPECTRUM_WINDOW`.
pub fn spectrum_csv<T: Real>(spec: &Spectrum<T>, max_rows: usize) -> Result<String> {
    let inside: Vec<usize> =
        (0..spec.detuning.len()).filter(|&i| spec.detuning[i].as_f64().abs() <= SPECTRUM_WINDOW).collect();
    // Stride outward from the centre so zero detuning is always a row.
    let step = stride(inside.len(), max_rows);
    let c = spec.center();
    let rows = inside
        .into_iter()
        .filter(|&i| i.abs_diff(c) % step == 0)
        .map(|i| [spec.detuning[i], spec.intensity[i]].map(|v| fmt_num(v.as_f64())));
    csv_string(&["detuning", "intensity"], rows)
}

pub fn write_file(path: &Path, contents: &str) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, contents)?;
    Ok(path.to_path_buf())
}

/// Gnuplot script plotting the envelopes, spectra and populations of one run.
pub fn gnuplot_script(title: &str) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set terminal pngcairo size 1000,700\n");
    s.push_str(&format!("set title '{}'\n", title.replace('\'', "")));
    s.push_str("\nset output 'envelopes.png'\nset xlabel 'retarded time'\nset ylabel 'amplitude'\n");
    s.push_str("plot 'incident.csv' using 1:2 with lines title 'Re A_inc', \\\n");
    s.push_str("     'transmitted.csv' using 1:2 with lines title 'Re A_trans', \\\n");
    s.push_str("     'transmitted.csv' using 1:3 with lines title 'Im A_trans', \\\n");
    s.push_str("     'reflected.csv' using 1:2 with lines title 'Re A_refl'\n");
    s.push_str("\nset output 'spectra.png'\nset xlabel 'detuning / Delta'\nset ylabel 'intensity'\n");
    s.push_str("plot 'spectrum_incident.csv' using 1:2 with lines title 'incident', \\\n");
    s.push_str("     'spectrum_transmitted.csv' using 1:2 with lines title 'transmitted', \\\n");
    s.push_str("     'spectrum_reflected.csv' using 1:2 with lines title 'reflected'\n");
    s.push_str("\nset output 'populations.png'\nset xlabel 't'\nset ylabel 'population'\n");
    s.push_str("plot 'trajectory.csv' using 1:($2**2+$3**2) with lines title '|b1|^2', \\\n");
    s.push_str("     'trajectory.csv' using 1:($4**2+$5**2) with lines title '|b2|^2'\n");
    s
}

/// Gnuplot script for a coupling table written to `file`.
pub fn coupling_gnuplot(file: &str) -> String {
    format!(
        "set datafile separator ','\nset terminal pngcairo size 1000,700\nset output 'coupling.png'\n\
         set xlabel 'k0 l'\nset ylabel 'M / Gamma'\n\
         plot '{file}' using 1:3 every ::1 with points title 'Re M', \\\n     '{file}' using 1:4 every ::1 with points title 'Im M'\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_significant_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-2.0), "-2.0000000000000000e0");
        let back: f64 = fmt_num(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn csv_uses_unix_newlines_and_one_header() {
        let s = csv_string(&["a", "b"], vec![vec!["1".to_string(), "x,y".to_string()]]).unwrap();
        assert_eq!(s, "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn stride_caps_rows() {
        assert_eq!(stride(10, 20), 1);
        assert_eq!(stride(100, 20), 5);
        assert_eq!(stride(101, 20), 6);
    }
}
