//! Period-two orbit manifolds of the kicked chain.

use super::classical::{kick_rotation, mat_mul, rot_z, ClassicalState, Vec3};
use super::params::KickParams;
use crate::error::{Error, Result};
use crate::scalar::Real;
use rand::Rng;

/// Number of distinct manifold conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldRegime {
    None,
    Single,
    Multiple,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldFamily<T> {
    /// Roots of `b_z sin(2 J chi) = b cot(b) cos(2 J chi)` in `[-2, 2]`, ascending.
    pub chi_solutions: Vec<T>,
    pub regime: ManifoldRegime,
    /// `2 J chi^2` for the first root (per site, summed over both kicks).
    pub s_man: Option<T>,
}

/// `b_z sin(2 J chi) - b cot(b) cos(2 J chi)`; zero exactly when the step is a pi rotation.
pub fn manifold_condition<T: Real>(p: &KickParams<T>, chi: T) -> T {
    let b = p.b();
    let two_j_chi = T::lit(2.0) * p.coupling * chi;
    let bcotb = if b == T::zero() { T::one() } else { b / b.tan() };
    p.bz * two_j_chi.sin() - bcotb * two_j_chi.cos()
}

pub fn manifold_solutions<T: Real>(p: &KickParams<T>) -> Result<ManifoldFamily<T>> {
    if p.coupling == T::zero() {
        return Err(Error::InvalidParameter("J = 0 makes the manifold condition degenerate".into()));
    }
    let (lo, hi) = (T::lit(-2.0), T::lit(2.0));
    let samples = 4000;
    let h = (hi - lo) / T::from_usize(samples).unwrap();
    let f = |x: T| manifold_condition(p, x);
    let mut roots: Vec<T> = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0);
    for k in 1..=samples {
        let x1 = lo + h * T::from_usize(k).unwrap();
        let f1 = f(x1);
        if f0 == T::zero() {
            roots.push(x0);
        } else if f0 * f1 < T::zero() {
            roots.push(bisect(&f, x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == T::zero() {
        roots.push(x0);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < T::lit(1e-9));
    let regime = match roots.len() {
        0 => ManifoldRegime::None,
        1 => ManifoldRegime::Single,
        _ => ManifoldRegime::Multiple,
    };
    let s_man = roots.first().map(|&c| T::lit(2.0) * p.coupling * c * c);
    Ok(ManifoldFamily { chi_solutions: roots, regime, s_man })
}

fn bisect<T: Real, F: Fn(T) -> T>(f: &F, mut a: T, mut b: T) -> T {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = (a + b) / T::lit(2.0);
        if (b - a).abs() <= T::epsilon() * T::lit(4.0) * m.abs().max(T::one()) {
            return m;
        }
        let fm = f(m);
        if fm == T::zero() {
            return m;
        }
        if fa * fm < T::zero() {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    (a + b) / T::lit(2.0)
}

/// `J sum_i sum_t chi_i^(t) chi_{i+1}^(t)` for an `N x 2` assignment `chi[i][t]`.
pub fn manifold_action<T: Real>(coupling: T, chi: &[[T; 2]]) -> T {
    let n = chi.len();
    let mut s = T::zero();
    for i in 0..n {
        for t in 0..2 {
            s = s + chi[i][t] * chi[(i + 1) % n][t];
        }
    }
    coupling * s
}

fn dot3<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Random point on the four-dimensional period-two manifold of the `N = 4` chain with uniform `chi`.
pub fn sample_manifold_point<T: Real, R: Rng>(p: &KickParams<T>, chi: T, rng: &mut R) -> Result<ClassicalState<T>> {
    let rb = kick_rotation(p);
    let rzeta = mat_mul(&rot_z(T::lit(4.0) * p.coupling * chi), &rb);
    let c1 = rb[2];
    let c2 = mat_mul(&rb, &rzeta)[2];
    // A = alpha c1 + beta c2 + s d with c1.A = c2.A = chi
    let g11 = dot3(&c1, &c1);
    let g12 = dot3(&c1, &c2);
    let g22 = dot3(&c2, &c2);
    let det = g11 * g22 - g12 * g12;
    if det.abs() < T::lit(1e-12) {
        return Err(Error::Incompatible("manifold constraints are degenerate".into()));
    }
    let alpha = chi * (g22 - g12) / det;
    let beta = chi * (g11 - g12) / det;
    let a0: Vec3<T> = std::array::from_fn(|k| alpha * c1[k] + beta * c2[k]);
    let d = super::classical::cross(&c1, &c2);
    let dn = super::classical::norm(&d);
    let d: Vec3<T> = std::array::from_fn(|k| d[k] / dn);
    let room = T::lit(4.0) - dot3(&a0, &a0);
    if room <= T::zero() {
        return Err(Error::Incompatible("no unit vectors satisfy the manifold constraints".into()));
    }
    let mut pair = || -> (Vec3<T>, Vec3<T>) {
        let s = T::lit(rng.random_range(-1.0..1.0)) * room.sqrt();
        let a: Vec3<T> = std::array::from_fn(|k| a0[k] + s * d[k]);
        let half: Vec3<T> = std::array::from_fn(|k| a[k] / T::lit(2.0));
        let wlen = (T::one() - dot3(&half, &half)).max(T::zero()).sqrt();
        let an = super::classical::norm(&a);
        let u = if an > T::zero() { std::array::from_fn(|k| a[k] / an) } else { [T::zero(), T::zero(), T::one()] };
        let (e1, e2) = perpendicular_basis(&u);
        let psi = T::lit(rng.random_range(0.0..std::f64::consts::TAU));
        let w: Vec3<T> = std::array::from_fn(|k| wlen * (psi.cos() * e1[k] + psi.sin() * e2[k]));
        (std::array::from_fn(|k| half[k] + w[k]), std::array::from_fn(|k| half[k] - w[k]))
    };
    let (n1, n3) = pair();
    let (n2, n4) = pair();
    Ok(ClassicalState::new(vec![n1, n2, n3, n4]))
}

fn perpendicular_basis<T: Real>(u: &Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    let helper = if u[0].abs() < T::lit(0.6) { [T::one(), T::zero(), T::zero()] } else { [T::zero(), T::one(), T::zero()] };
    let c = super::classical::cross(u, &helper);
    let l = super::classical::norm(&c);
    let e1 = [c[0] / l, c[1] / l, c[2] / l];
    (e1, super::classical::cross(u, &e1))
}
