//! Least-squares power-law fits.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `y ~ C x^alpha` fitted on log-log axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit<T> {
    pub alpha: T,
    pub intercept: T,
    /// Standard error of `alpha`.
    pub stderr: T,
    /// 95% confidence half-width of `alpha`.
    pub ci95: T,
    pub points: usize,
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, stderr(b))`.
pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Result<(T, T, T)> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::DegenerateFit(format!("{n} points")));
    }
    let nf = T::from_usize(n).unwrap();
    let mx = x.iter().fold(T::zero(), |a, &b| a + b) / nf;
    let my = y.iter().fold(T::zero(), |a, &b| a + b) / nf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxx = sxx + (a - mx) * (a - mx);
        sxy = sxy + (a - mx) * (b - my);
    }
    if sxx <= T::epsilon() {
        return Err(Error::DegenerateFit("zero spread in abscissa".into()));
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let stderr = if n > 2 {
        let rss = x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| {
            let r = b - icpt - slope * a;
            acc + r * r
        });
        (rss / (nf - T::lit(2.0)) / sxx).sqrt()
    } else {
        T::zero()
    };
    Ok((slope, icpt, stderr))
}

/// Fits `|y| ~ x^alpha`; needs at least four positive points.
pub fn power_law_fit<T: Real>(x: &[T], y: &[T]) -> Result<PowerLawFit<T>> {
    if x.len() < 4 {
        return Err(Error::DegenerateFit(format!("{} points, need at least 4", x.len())));
    }
    if x.iter().chain(y).any(|&v| !(v > T::zero())) {
        return Err(Error::DegenerateFit("non-positive value on log axis".into()));
    }
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let (alpha, intercept, stderr) = linear_fit(&lx, &ly)?;
    let ci95 = stderr * T::lit(student_t95(x.len() - 2));
    Ok(PowerLawFit { alpha, intercept, stderr, ci95, points: x.len() })
}

fn student_t95(dof: usize) -> f64 {
    const TABLE: [f64; 10] = [12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228];
    match dof {
        0 => f64::INFINITY,
        1..=10 => TABLE[dof - 1],
        11..=30 => 2.228 - (dof as f64 - 10.0) * (2.228 - 2.042) / 20.0,
        _ => 1.96,
    }
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::DegenerateFit("need at least 3 paired points".into()));
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = T::from_usize(x.len()).unwrap();
    let mean = (n + T::one()) / T::lit(2.0);
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in rx.iter().zip(&ry) {
        sxy = sxy + (a - mean) * (b - mean);
        sxx = sxx + (a - mean) * (a - mean);
        syy = syy + (b - mean) * (b - mean);
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::DegenerateFit("constant ranks".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn ranks<T: Real>(v: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut r = vec![T::zero(); v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut k = i;
        while k + 1 < idx.len() && v[idx[k + 1]] == v[idx[i]] {
            k += 1;
        }
        let avg = T::from_usize(i + k + 2).unwrap() / T::lit(2.0);
        for &p in &idx[i..=k] {
            r[p] = avg;
        }
        i = k + 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x: Vec<f64> = (1..10).map(|k| k as f64 * 10.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(0.25)).collect();
        let f = power_law_fit(&x, &y).unwrap();
        assert!((f.alpha - 0.25).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.stderr < 1e-10);
    }

    #[test]
    fn f32_fit() {
        let x: Vec<f32> = (1..8).map(|k| k as f32).collect();
        let y: Vec<f32> = x.iter().map(|v| v * v).collect();
        assert!((power_law_fit(&x, &y).unwrap().alpha - 2.0).abs() < 1e-4);
    }

    #[test]
    fn too_few_points() {
        assert!(power_law_fit(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn spearman_monotone_and_ties() {
        let x = [1.0f64, 2.0, 3.0, 4.0];
        assert!((spearman(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        let r = spearman(&[1.0f64, 1.0, 2.0, 2.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(r > 0.8 && r < 1.0);
    }
}
