//! Adaptive Gauss-Legendre quadrature.

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigh;
use std::sync::OnceLock;

const ORDER: usize = 16;

/// Nodes and weights on `[-1, 1]` from the Jacobi matrix (Golub-Welsch).
pub fn gauss_legendre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let off: Vec<f64> = (1..order).map(|k| k as f64 / ((4 * k * k - 1) as f64).sqrt()).collect();
    let (x, v) = tridiagonal_eigh(&vec![0.0; order], &off)?;
    let w = (0..order).map(|k| 2.0 * v[[0, k]] * v[[0, k]]).collect();
    Ok((x, w))
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER).expect("Gauss-Legendre nodes"))
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    x.iter().zip(w).map(|(&x, &w)| w * f(c + h * x)).sum::<f64>() * h
}

/// `int_a^b f` to absolute-or-relative tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let whole = fixed(&f, a, b);
    recurse(&f, a, b, whole, tol, 0)
}

fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> Result<f64> {
    let m = (a + b) / 2.0;
    let (l, r) = (fixed(f, a, m), fixed(f, m, b));
    let sum = l + r;
    if (sum - whole).abs() <= tol * sum.abs().max(1.0) {
        return Ok(sum);
    }
    if depth >= 48 || !sum.is_finite() {
        return Err(Error::Quadrature);
    }
    Ok(recurse(f, a, m, l, tol / 2.0, depth + 1)? + recurse(f, m, b, r, tol / 2.0, depth + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let (x, w) = gauss_legendre(5).unwrap();
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((int - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn peaked_integrand() {
        let v = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12).unwrap();
        let exact = 2.0 * (1.0 / 1e-2f64).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
    }
}
