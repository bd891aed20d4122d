//! Sine and cosine integrals on the real line.
//!
//! Two regimes:
//! * `|x| ≤ 6`: the convergent power series
//!   `Si(x) = Σ (−1)ᵏ x²ᵏ⁺¹ / ((2k+1)(2k+1)!)` and
//!   `Ci(x) = γ + ln x + Σ_{k≥1} (−1)ᵏ x²ᵏ / (2k (2k)!)`.
//! * `|x| > 6`: the auxiliary functions `f`, `g` obtained from the continued
//!   fraction of `E₁(ix) = −Ci(x) + i(Si(x) − π/2)`, evaluated with the
//!   modified Lentz recurrence. The convergents of that fraction are the
//!   rational approximations of `f` and `g`.
//!
//! Both regimes reach a few ulps of `f64`; `abs_error_bound` is a static,
//! conservative bound per regime rather than a per-call estimate.

use num_complex::Complex;

use crate::error::{domain, Result};
use crate::scalar::Real;

const SERIES_LIMIT: f64 = 6.0;
const MAX_ITER: usize = 10_000;

/// Value plus a conservative absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunResult<T> {
    pub value: T,
    pub abs_error_bound: T,
}

impl<T: Real> SpecFunResult<T> {
    fn new(value: T, abs_error_bound: T) -> Self {
        Self { value, abs_error_bound }
    }
}

fn series_bound<T: Real>(log_term: T) -> T {
    T::lit(256.0) * T::epsilon() + T::lit(4.0) * T::epsilon() * log_term.abs()
}

fn fraction_bound<T: Real>() -> T {
    T::lit(64.0) * T::epsilon()
}

/// Sine integral `Si(x) = ∫₀ˣ sin t / t dt`.
pub fn si<T: Real>(x: T) -> Result<SpecFunResult<T>> {
    if !x.is_finite() {
        return Err(domain("si", format!("non-finite argument {x}")));
    }
    let ax = x.abs();
    let r = if ax == T::zero() {
        SpecFunResult::new(T::zero(), T::zero())
    } else if ax <= T::lit(SERIES_LIMIT) {
        SpecFunResult::new(si_series(ax), series_bound(T::zero()))
    } else {
        let (_, s) = cisi_fraction(ax);
        SpecFunResult::new(s, fraction_bound())
    };
    Ok(if x < T::zero() { SpecFunResult::new(-r.value, r.abs_error_bound) } else { r })
}

/// Cosine integral `Ci(x) = −∫ₓ^∞ cos t / t dt` for `x > 0`.
///
/// `Ci` diverges logarithmically at the origin; `x ≤ 0` is reported as a
/// domain error. Callers needing the even extension pass `|x|`.
pub fn ci<T: Real>(x: T) -> Result<SpecFunResult<T>> {
    if !x.is_finite() {
        return Err(domain("ci", format!("non-finite argument {x}")));
    }
    if x <= T::zero() {
        return Err(domain("ci", format!("argument {x} ≤ 0 (Ci diverges at the origin)")));
    }
    if x <= T::lit(SERIES_LIMIT) {
        let lx = x.ln();
        Ok(SpecFunResult::new(ci_series(x, lx), series_bound(lx)))
    } else {
        let (c, _) = cisi_fraction(x);
        Ok(SpecFunResult::new(c, fraction_bound()))
    }
}

/// `Si` without the error bound; convenience for closed forms.
pub fn si_value<T: Real>(x: T) -> Result<T> {
    si(x).map(|r| r.value)
}

pub fn ci_value<T: Real>(x: T) -> Result<T> {
    ci(x).map(|r| r.value)
}

/// Even extension `Ci(|x|)`, still an error at zero.
pub fn ci_even<T: Real>(x: T) -> Result<T> {
    ci_value(x.abs())
}

fn si_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    let mut term = x; // (−1)ᵏ x²ᵏ⁺¹ / (2k+1)!
    let mut sum = x;
    let mut k = 0usize;
    loop {
        k += 1;
        let n = T::from_usize_lossy(2 * k);
        term = -term * x2 / (n * (n + T::one()));
        let contrib = term / (n + T::one());
        sum = sum + contrib;
        if contrib.abs() <= T::epsilon() * sum.abs() * T::lit(0.25) || k > MAX_ITER {
            break;
        }
    }
    sum
}

fn ci_series<T: Real>(x: T, ln_x: T) -> T {
    let x2 = x * x;
    let mut term = T::one(); // (−1)ᵏ x²ᵏ / (2k)!
    let mut sum = T::zero();
    let mut k = 0usize;
    let scale = T::euler_gamma() + ln_x;
    loop {
        k += 1;
        let n = T::from_usize_lossy(2 * k);
        term = -term * x2 / ((n - T::one()) * n);
        let contrib = term / n;
        sum = sum + contrib;
        let reference = (scale + sum).abs().max(T::epsilon());
        if contrib.abs() <= T::epsilon() * reference * T::lit(0.25) || k > MAX_ITER {
            break;
        }
    }
    scale + sum
}

/// Returns `(Ci(x), Si(x))` for `x > 6` via the continued fraction of
/// `e^{ix} E₁(ix)`.
fn cisi_fraction<T: Real>(x: T) -> (T, T) {
    let tiny = T::min_positive_value().sqrt();
    let two = T::lit(2.0);
    let mut b = Complex::new(T::one(), x);
    let mut c = Complex::new(T::one() / tiny, T::zero());
    let mut d = Complex::new(T::one(), T::zero()) / b;
    let mut h = d;
    for i in 2..MAX_ITER {
        let im1 = T::from_usize_lossy(i - 1);
        let a = -(im1 * im1);
        b = b + Complex::new(two, T::zero());
        d = Complex::new(T::one(), T::zero()) / (d * a + b);
        c = b + Complex::new(a, T::zero()) / c;
        let del = c * d;
        h = h * del;
        if (del.re - T::one()).abs() + del.im.abs() < T::epsilon() {
            break;
        }
    }
    // h = e^{ix} E₁(ix) = g(x) − i f(x) in terms of the auxiliary functions.
    let e1 = Complex::new(x.cos(), -x.sin()) * h;
    (-e1.re, T::FRAC_PI_2() + e1.im)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Simpson on [a, b]; independent of the series/fraction code.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                left + right + delta / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
            }
        }
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    fn sinc(t: f64) -> f64 {
        if t == 0.0 {
            1.0
        } else {
            t.sin() / t
        }
    }

    #[test]
    fn si_at_zero_is_zero() {
        let r = si(0.0f64).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn si_two_matches_simpson() {
        let oracle = adaptive_simpson(&sinc, 0.0, 2.0, 1e-14);
        let r = si(2.0f64).unwrap();
        assert!((r.value - oracle).abs() < 1e-10, "{} vs {}", r.value, oracle);
    }

    #[test]
    fn large_argument_limits() {
        assert!((si(1e6f64).unwrap().value - std::f64::consts::FRAC_PI_2).abs() < 2e-6);
        assert!(ci(1e6f64).unwrap().value.abs() < 2e-6);
    }

    #[test]
    fn ci_one_matches_series_oracle() {
        // γ + ln x + Σ (−x²)ᵏ / (2k (2k)!) written out with explicit factorials.
        let x = 1.0f64;
        let mut s = 0.577_215_664_901_532_9 + x.ln();
        let mut fact = 1.0f64;
        for k in 1..20u32 {
            fact *= ((2 * k - 1) * (2 * k)) as f64;
            s += (-x * x).powi(k as i32) / (2.0 * k as f64 * fact);
        }
        assert!((ci(1.0f64).unwrap().value - s).abs() < 1e-10);
    }

    #[test]
    fn ci_small_argument_is_logarithmic() {
        let x = 1e-8f64;
        let expect = 0.577_215_664_901_532_9 + x.ln();
        assert!((ci(x).unwrap().value - expect).abs() < 1e-14);
    }

    #[test]
    fn ci_rejects_nonpositive_and_nonfinite() {
        assert!(ci(0.0f64).is_err());
        assert!(ci(-1.0f64).is_err());
        assert!(ci(f64::NAN).is_err());
        assert!(si(f64::INFINITY).is_err());
    }

    #[test]
    fn regimes_join_continuously() {
        let below = SERIES_LIMIT;
        let above = f64::from_bits(SERIES_LIMIT.to_bits() + 1);
        let (cb, ca) = (ci(below).unwrap().value, ci(above).unwrap().value);
        let (sb, sa) = (si(below).unwrap().value, si(above).unwrap().value);
        assert!((cb - ca).abs() < 1e-13);
        assert!((sb - sa).abs() < 1e-13);
    }

    #[test]
    fn error_bounds_are_small_on_the_working_range() {
        for &x in &[1e-12, 1e-3, 1.0, 5.9, 6.1, 100.0, 1e6] {
            assert!(si(x).unwrap().abs_error_bound <= 1e-12);
            assert!(ci(x).unwrap().abs_error_bound <= 1e-12);
        }
    }

    #[test]
    fn f32_instantiation_is_close() {
        let s = si(2.0f32).unwrap().value as f64;
        let c = ci(10.0f32).unwrap().value as f64;
        assert!((s - si(2.0f64).unwrap().value).abs() < 1e-5);
        assert!((c - ci(10.0f64).unwrap().value).abs() < 1e-5);
    }
}
