//! Periodic orbits of the integrable chain (`b_x = 0`) from winding numbers.

use super::params::KickParams;
use crate::scalar::Real;

/// Torus of periodic orbits labelled by its winding numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrableOrbit<T> {
    pub winding: Vec<i64>,
    pub momenta: Vec<T>,
    /// `4 T J sum_n p_n p_{n+1}` reduced to `[0, 2 pi)`.
    pub action: T,
    /// Dimension of the circulant kernel (extra flat directions).
    pub kernel_dim: usize,
}

/// Solves `4TJ (p_{n-1} + p_{n+1}) = 2 pi m_n - 2 b_z T` for every admissible winding vector.
pub fn integrable_enumeration<T: Real>(p: &KickParams<T>, n: usize, t: usize) -> Vec<IntegrableOrbit<T>> {
    let tt = T::from_usize(t).unwrap();
    let two = T::lit(2.0);
    let tau = T::TAU();
    let reach = T::lit(8.0) * tt * p.coupling.abs();
    let shift = two * p.bz * tt;
    let lo = ((shift - reach) / tau).ceil().to_i64().unwrap();
    let hi = ((shift + reach) / tau).floor().to_i64().unwrap();
    if hi < lo || n == 0 {
        return Vec::new();
    }
    let solver = Circulant::new(n, T::lit(4.0) * tt * p.coupling);
    let span = (hi - lo + 1) as usize;
    let mut out = Vec::new();
    let mut digits = vec![0usize; n];
    let total = span.checked_pow(n as u32).unwrap_or(usize::MAX);
    for _ in 0..total {
        let m: Vec<i64> = digits.iter().map(|&d| lo + d as i64).collect();
        let rhs: Vec<T> = m.iter().map(|&k| tau * T::from_i64(k).unwrap() - shift).collect();
        if let Some(pm) = solver.solve_admissible(&rhs) {
            let s: T = (0..n).fold(T::zero(), |acc, i| acc + pm[i] * pm[(i + 1) % n]);
            let action = (T::lit(4.0) * tt * p.coupling * s).modulo(tau);
            out.push(IntegrableOrbit { winding: m, momenta: pm, action, kernel_dim: solver.kernel.len() });
        }
        super::quantum::increment(&mut digits, span);
    }
    out
}

/// `c (S + S^-1)` on a ring of `n` sites, diagonalised by Fourier modes.
struct Circulant<T> {
    n: usize,
    c: T,
    kernel: Vec<Vec<T>>,
    singular_modes: Vec<usize>,
}

impl<T: Real> Circulant<T> {
    fn new(n: usize, c: T) -> Self {
        let mut kernel = Vec::new();
        let mut singular_modes = Vec::new();
        for k in 0..n {
            if Self::eigen(n, c, k).abs() < T::lit(1e-9) * (c.abs() + T::one()) {
                singular_modes.push(k);
                if 2 * k <= n {
                    let w = T::TAU() * T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
                    let cv: Vec<T> = (0..n).map(|i| (w * T::from_usize(i).unwrap()).cos()).collect();
                    kernel.push(cv);
                    if 2 * k != n && k != 0 {
                        kernel.push((0..n).map(|i| (w * T::from_usize(i).unwrap()).sin()).collect());
                    }
                }
            }
        }
        for v in kernel.iter_mut() {
            let l = v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
            v.iter_mut().for_each(|x| *x = *x / l);
        }
        Self { n, c, kernel, singular_modes }
    }

    fn eigen(n: usize, c: T, k: usize) -> T {
        let w = T::TAU() * T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
        T::lit(2.0) * c * w.cos()
    }

    fn apply(&self, p: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n).map(|i| self.c * (p[(i + n - 1) % n] + p[(i + 1) % n])).collect()
    }

    /// Least-norm solution, or `None` when `rhs` has a component in the kernel.
    fn least_norm(&self, rhs: &[T]) -> Option<Vec<T>> {
        let n = self.n;
        let nf = T::from_usize(n).unwrap();
        let mut p = vec![T::zero(); n];
        for k in 0..n {
            if self.singular_modes.contains(&k) {
                continue;
            }
            let lam = Self::eigen(n, self.c, k);
            let w = T::TAU() * T::from_usize(k).unwrap() / nf;
            for (i, pi) in p.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (l, &r) in rhs.iter().enumerate() {
                    let d = T::from_isize(i as isize - l as isize).unwrap();
                    acc = acc + r * (w * d).cos();
                }
                *pi = *pi + acc / (lam * nf);
            }
        }
        let back = self.apply(&p);
        let err = back.iter().zip(rhs).fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()));
        let scale = rhs.iter().fold(T::one(), |a, &x| a.max(x.abs()));
        if err > T::lit(1e-9).max(T::epsilon().sqrt() * T::lit(10.0)) * scale {
            return None;
        }
        Some(p)
    }

    /// An admissible (`|p_n| <= 1`) solution, scanning the kernel when present.
    fn solve_admissible(&self, rhs: &[T]) -> Option<Vec<T>> {
        let p0 = self.least_norm(rhs)?;
        let ok = |p: &[T]| p.iter().all(|x| x.abs() <= T::one());
        if ok(&p0) {
            return Some(p0);
        }
        if self.kernel.is_empty() {
            return None;
        }
        let steps = 100i32;
        let h = T::lit(2.0) * T::from_usize(self.n).unwrap().sqrt() / T::from_i32(steps).unwrap();
        let dims = self.kernel.len().min(2);
        let mut best: Option<(T, Vec<T>)> = None;
        let range = -steps..=steps;
        let second: Vec<i32> = if dims == 2 { range.clone().collect() } else { vec![0] };
        for a in range {
            for &b in &second {
                let mut p = p0.clone();
                let (ca, cb) = (h * T::from_i32(a).unwrap(), h * T::from_i32(b).unwrap());
                for i in 0..self.n {
                    p[i] = p[i] + ca * self.kernel[0][i];
                    if dims == 2 {
                        p[i] = p[i] + cb * self.kernel[1][i];
                    }
                }
                if ok(&p) {
                    let nrm = p.iter().fold(T::zero(), |acc, &x| acc + x * x);
                    if best.as_ref().map(|(bn, _)| nrm < *bn).unwrap_or(true) {
                        best = Some((nrm, p));
                    }
                }
            }
        }
        best.map(|(_, p)| p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_orbits_for_strong_weak_field() {
        // b_z > 4J and 4J + b_z < pi/T
        let p = KickParams::new(0.1f64, 0.0, 0.5);
        assert!(integrable_enumeration(&p, 3, 1).is_empty());
    }

    #[test]
    fn uniform_winding_gives_uniform_momenta() {
        let p = KickParams::new(0.7f64, 0.0, 0.9);
        for (n, t) in [(1, 1), (3, 2), (5, 1)] {
            let orbits = integrable_enumeration(&p, n, t);
            for o in orbits.iter().filter(|o| o.winding.iter().all(|&m| m == o.winding[0])) {
                let m = o.winding[0] as f64;
                let expect = (std::f64::consts::TAU * m - 2.0 * 0.9 * t as f64) / (8.0 * t as f64 * 0.7);
                assert!(o.momenta.iter().all(|&x| (x - expect).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn solutions_close_the_windings() {
        let p = KickParams::new(0.7f64, 0.0, 0.9);
        for n in 2..=6 {
            for o in integrable_enumeration(&p, n, 2) {
                for i in 0..n {
                    let dq = 8.0 * 0.7 * (o.momenta[(i + n - 1) % n] + o.momenta[(i + 1) % n]) + 4.0 * 0.9;
                    assert!((dq - std::f64::consts::TAU * o.winding[i] as f64).abs() < 1e-9);
                }
                assert!(o.momenta.iter().all(|x| x.abs() <= 1.0));
            }
        }
    }

    #[test]
    fn exponential_growth_in_chain_length() {
        let p = KickParams::new(0.7f64, 0.0, 0.9);
        let counts: Vec<usize> = (1..=7).map(|n| integrable_enumeration(&p, n, 3).len()).collect();
        for k in [0, 2, 4] {
            assert!(counts[k + 2] >= 3 * counts[k], "{counts:?}");
        }
    }

    #[test]
    fn four_site_ring_has_flat_directions() {
        let p = KickParams::new(0.7f64, 0.0, 0.9);
        let o = integrable_enumeration(&p, 4, 1);
        assert!(!o.is_empty());
        assert!(o.iter().all(|x| x.kernel_dim == 2));
    }

    #[test]
    fn single_precision() {
        let p = KickParams::new(0.7f32, 0.0, 0.9);
        let o64 = integrable_enumeration(&KickParams::new(0.7f64, 0.0, 0.9), 3, 1);
        let o32 = integrable_enumeration(&p, 3, 1);
        assert_eq!(o32.len(), o64.len());
    }
}
