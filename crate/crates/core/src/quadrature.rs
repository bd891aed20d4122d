//! Gauss–Legendre rules, composite panels and a bisection-adaptive driver.
//!
//! Used by the principal-value oracle, the spectral source integral and the
//! far-field diagnostics. Nodes are computed in `f64` by Newton iteration on
//! the Legendre recurrence and cast to the working scalar.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Real;

/// Values that can be integrated: reals and complex numbers.
pub trait Integrand<T: Real>: Copy + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self> {
    fn magnitude(&self) -> T;
}

impl<T: Real> Integrand<T> for T {
    fn magnitude(&self) -> T {
        self.abs()
    }
}

impl<T: Real> Integrand<T> for Complex<T> {
    fn magnitude(&self) -> T {
        self.norm()
    }
}

/// `n`-point Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre order must be positive");
        let (x, w) = legendre_nodes_f64(n);
        Self { nodes: x.into_iter().map(T::lit).collect(), weights: w.into_iter().map(T::lit).collect() }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Single-panel rule on `[a, b]`.
    pub fn integrate<V, F>(&self, a: T, b: T, mut f: F) -> V
    where
        V: Integrand<T>,
        F: FnMut(T) -> V,
    {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let mut acc = V::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * w;
        }
        acc * half
    }

    /// Composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite<V, F>(&self, a: T, b: T, panels: usize, mut f: F) -> V
    where
        V: Integrand<T>,
        F: FnMut(T) -> V,
    {
        let panels = panels.max(1);
        let h = (b - a) / T::from_usize_lossy(panels);
        let mut acc = V::zero();
        for k in 0..panels {
            let lo = a + h * T::from_usize_lossy(k);
            let hi = if k + 1 == panels { b } else { lo + h };
            acc = acc + self.integrate(lo, hi, &mut f);
        }
        acc
    }

    /// Bisection-adaptive rule: a panel is accepted when the rule on the panel
    /// and on its two halves agree to `abs_tol` (scaled to the panel share).
    pub fn adaptive<V, F>(&self, a: T, b: T, abs_tol: T, max_depth: u32, mut f: F) -> V
    where
        V: Integrand<T>,
        F: FnMut(T) -> V,
    {
        let whole = self.integrate(a, b, &mut f);
        self.adaptive_rec(a, b, whole, abs_tol, max_depth, &mut f)
    }

    fn adaptive_rec<V, F>(&self, a: T, b: T, whole: V, tol: T, depth: u32, f: &mut F) -> V
    where
        V: Integrand<T>,
        F: FnMut(T) -> V,
    {
        let mid = (a + b) * T::lit(0.5);
        let left = self.integrate(a, mid, &mut *f);
        let right = self.integrate(mid, b, &mut *f);
        let both = left + right;
        if depth == 0 || (both - whole).magnitude() <= tol {
            both
        } else {
            let half_tol = tol * T::lit(0.5);
            self.adaptive_rec(a, mid, left, half_tol, depth - 1, f)
                + self.adaptive_rec(mid, b, right, half_tol, depth - 1, f)
        }
    }
}

/// Golub–Welsch would need an eigen-solver; Newton on `P_n` with the
/// Tricomi initial guess converges in a handful of iterations.
fn legendre_nodes_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        for n in [1, 2, 5, 8, 12, 16, 24] {
            let g = GaussLegendre::<f64>::new(n);
            let s: f64 = g.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}");
            for i in 0..n {
                assert!((g.nodes()[i] + g.nodes()[n - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let g = GaussLegendre::<f64>::new(6);
        // ∫₀² x¹¹ dx = 2¹² / 12
        let v: f64 = g.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 4096.0 / 12.0).abs() < 1e-10);
    }

    #[test]
    fn composite_handles_oscillation() {
        let g = GaussLegendre::<f64>::new(10);
        let v: Complex<f64> = g.composite(0.0, 10.0, 40, |x| Complex::new(0.0, 7.0 * x).exp());
        let exact = (Complex::new(0.0, 70.0).exp() - 1.0) / Complex::new(0.0, 7.0);
        assert!((v - exact).norm() < 1e-13);
    }

    #[test]
    fn adaptive_resolves_a_peak() {
        let g = GaussLegendre::<f64>::new(8);
        let v: f64 = g.adaptive(-1.0, 1.0, 1e-13, 40, |x| 1.0 / (1e-4 + x * x));
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() / exact < 1e-11);
    }
}
