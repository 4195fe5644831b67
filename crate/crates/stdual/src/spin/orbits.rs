//! Periodic orbits of the classical chain: Newton search, stability and action.

use super::classical::{cross, dot, kick_rotation, mat_vec, norm, random_unit, step_jacobian, torsion_field, ClassicalState, Vec3};
use super::params::{KickParams, SpinChainParams};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::quadrature;
use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

type State = ClassicalState<f64>;

/// Orthonormal tangent basis `(e1, e2)` with `e1 x e2 = n`.
pub fn tangent_frame(n: &Vec3<f64>) -> (Vec3<f64>, Vec3<f64>) {
    let helper = if n[0].abs() < 0.6 { [1.0, 0.0, 0.0] } else if n[1].abs() < 0.6 { [0.0, 1.0, 0.0] } else { [0.0, 0.0, 1.0] };
    let c = cross(&helper, n);
    let l = norm(&c);
    let e1 = [c[0] / l, c[1] / l, c[2] / l];
    (e1, cross(n, &e1))
}

fn frame_matrix(x: &State) -> DMatrix<f64> {
    let n = x.n();
    let mut e = DMatrix::zeros(3 * n, 2 * n);
    for (m, v) in x.vectors.iter().enumerate() {
        let (e1, e2) = tangent_frame(v);
        for a in 0..3 {
            e[(3 * m + a, 2 * m)] = e1[a];
            e[(3 * m + a, 2 * m + 1)] = e2[a];
        }
    }
    e
}

/// `Phi^T(x)` and its ambient Jacobian.
pub fn propagate(x: &State, p: &KickParams<f64>, t: usize) -> (State, DMatrix<f64>) {
    let dim = 3 * x.n();
    let mut jac = DMatrix::identity(dim, dim);
    let mut s = x.clone();
    for _ in 0..t {
        let (next, j) = step_jacobian(&s, p);
        jac = DMatrix::from_row_slice(dim, dim, &j) * jac;
        s = next;
    }
    (s, jac)
}

/// Rotates every vector along its tangent displacement.
fn retract(x: &State, delta: &DVector<f64>) -> State {
    let vectors = x
        .vectors
        .iter()
        .enumerate()
        .map(|(m, v)| {
            let (e1, e2) = tangent_frame(v);
            let d: Vec3<f64> = std::array::from_fn(|a| delta[2 * m] * e1[a] + delta[2 * m + 1] * e2[a]);
            let angle = norm(&d);
            if angle < 1e-300 {
                return *v;
            }
            let axis = cross(v, &d);
            let l = norm(&axis);
            let axis = [axis[0] / l, axis[1] / l, axis[2] / l];
            mat_vec(&super::classical::rotation(&axis, angle), v)
        })
        .collect();
    ClassicalState { vectors }
}

fn pinv_solve(j: &DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
    let svd = j.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cut = (smax * 1e-10).max(1e-14);
    svd.solve(r, cut).unwrap_or_else(|_| DVector::zeros(r.len()))
}

/// Newton outcome for one seed.
#[derive(Debug, Clone)]
pub enum NewtonOutcome {
    Converged { state: State, residual: f64 },
    /// The seed is already fixed and `DF` vanishes: every point is periodic.
    Trivial,
    Failed,
}

/// Damped Newton iteration for `Phi^T(x) = x` on the product of spheres.
pub fn newton_periodic(seed: &State, p: &KickParams<f64>, t: usize, max_iter: usize) -> NewtonOutcome {
    let mut x = seed.clone();
    let n = x.n();
    for iter in 0..max_iter {
        let (y, dphi) = propagate(&x, p, t);
        let dist = y.distance(&x);
        let e = frame_matrix(&x);
        let m = e.transpose() * &dphi * &e;
        if iter == 0 && dist < 1e-13 && (&m - DMatrix::<f64>::identity(2 * n, 2 * n)).abs().max() < 1e-10 {
            return NewtonOutcome::Trivial;
        }
        if dist < 1e-13 {
            return NewtonOutcome::Converged { state: x, residual: dist };
        }
        let mut r = DVector::zeros(2 * n);
        let mut jm = m;
        for (k, (xv, yv)) in x.vectors.iter().zip(&y.vectors).enumerate() {
            let (e1, e2) = tangent_frame(xv);
            r[2 * k] = dot(&e1, yv);
            r[2 * k + 1] = dot(&e2, yv);
            let c = dot(xv, yv);
            jm[(2 * k, 2 * k)] -= c;
            jm[(2 * k + 1, 2 * k + 1)] -= c;
        }
        let mut step = -pinv_solve(&jm, &r);
        let cap = 0.5;
        let big = step.amax();
        if big > cap {
            step *= cap / big;
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = retract(&x, &(&step * lambda));
            let (yc, _) = propagate(&cand, p, t);
            if yc.distance(&cand) < dist {
                x = cand;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            if dist < 1e-11 {
                return NewtonOutcome::Converged { state: x, residual: dist };
            }
            return NewtonOutcome::Failed;
        }
    }
    let (y, _) = propagate(&x, p, t);
    let dist = y.distance(&x);
    if dist < 1e-12 {
        NewtonOutcome::Converged { state: x, residual: dist }
    } else {
        NewtonOutcome::Failed
    }
}

/// A periodic orbit of period `t` with its stability data.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    /// `t` consecutive states, `points[0]` being the starting point.
    pub points: Vec<State>,
    pub t: usize,
    pub t_p: usize,
    pub n_p: usize,
    pub r_t: usize,
    pub r_n: usize,
    /// Action reduced to `[0, 2 pi)`.
    pub action: f64,
    pub monodromy: DMatrix<f64>,
    pub monodromy_eigenvalues: Vec<C64>,
    pub det_m_minus_1: f64,
    pub residual: f64,
}

/// Stability type of the monodromy spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    Hyperbolic,
    Elliptic,
    Mixed,
    NearMarginal,
}

impl PeriodicOrbit {
    pub fn n(&self) -> usize {
        self.points[0].n()
    }

    /// Orbits related by a site shift share the action and stability.
    pub fn family_size(&self) -> usize {
        self.n_p
    }

    pub fn classify(&self) -> StabilityClass {
        let logs: Vec<f64> = self.monodromy_eigenvalues.iter().map(|z| z.norm().ln().abs()).collect();
        if logs.iter().any(|&l| l < 0.05) && logs.iter().any(|&l| l >= 0.05) {
            if self.monodromy_eigenvalues.iter().any(|z| (z - 1.0).norm() < 0.05) {
                return StabilityClass::NearMarginal;
            }
            return StabilityClass::Mixed;
        }
        if logs.iter().all(|&l| l >= 0.05) {
            StabilityClass::Hyperbolic
        } else if self.monodromy_eigenvalues.iter().any(|z| (z - 1.0).norm() < 0.05) {
            StabilityClass::NearMarginal
        } else {
            StabilityClass::Elliptic
        }
    }

    /// Distance of the closest monodromy eigenvalue to one.
    pub fn marginal_distance(&self) -> f64 {
        self.monodromy_eigenvalues.iter().map(|z| (z - 1.0).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// `D = T_p e^(-i pi kappa / 2) / sqrt|det(M - 1)|`; the phase is dropped without `kappa`.
pub fn stability_prefactor(orbit: &PeriodicOrbit, maslov: Option<i32>) -> Result<C64> {
    let distance = orbit.marginal_distance();
    if distance < 1e-6 {
        return Err(Error::NearBifurcation { distance });
    }
    let modulus = orbit.t_p as f64 / orbit.det_m_minus_1.abs().sqrt();
    let phase = maslov.map(|k| -std::f64::consts::FRAC_PI_2 * k as f64).unwrap_or(0.0);
    Ok(C64::from_polar(modulus, phase))
}

/// `int p dq` along the kick arc of `n`, from the rotation about `axis` by `angle`.
fn kick_arc(n: &Vec3<f64>, axis: &Vec3<f64>, angle: f64) -> Result<f64> {
    if angle == 0.0 {
        return Ok(0.0);
    }
    let f = |s: f64| {
        let v = mat_vec(&super::classical::rotation(axis, s), n);
        let rho2 = v[0] * v[0] + v[1] * v[1];
        v[2] * (axis[2] - v[2] * (axis[0] * v[0] + axis[1] * v[1]) / rho2)
    };
    quadrature::integrate(f, 0.0, angle, 1e-10)
}

/// Action of a trajectory segment of `t` steps starting at `x`, not reduced.
pub fn trajectory_action(x: &State, p: &KickParams<f64>, t: usize) -> Result<f64> {
    let b = p.b();
    let rb = kick_rotation(p);
    let axis = if b > 0.0 { [p.bx / b, 0.0, p.bz / b] } else { [0.0, 0.0, 1.0] };
    let mut s = x.clone();
    let mut total = 0.0;
    for _ in 0..t {
        for v in &s.vectors {
            total += kick_arc(v, &axis, 2.0 * b)? - 2.0 * (p.bx * v[0] + p.bz * v[2]);
        }
        let kicked: Vec<Vec3<f64>> = s.vectors.iter().map(|v| mat_vec(&rb, v)).collect();
        let n = kicked.len();
        total += 4.0 * p.coupling * (0..n).map(|i| kicked[i][2] * kicked[(i + 1) % n][2]).sum::<f64>();
        let chi = torsion_field(&kicked);
        let vectors = kicked.iter().zip(&chi).map(|(v, &c)| mat_vec(&super::classical::rot_z(4.0 * p.coupling * c), v)).collect();
        s = ClassicalState { vectors };
    }
    Ok(total)
}

/// Action of a periodic orbit reduced to `[0, 2 pi)`.
pub fn orbit_action(orbit: &PeriodicOrbit, p: &KickParams<f64>) -> Result<f64> {
    if orbit.residual > 1e-8 {
        return Err(Error::InvalidParameter(format!("orbit residual {:.2e} too large", orbit.residual)));
    }
    Ok(trajectory_action(&orbit.points[0], p, orbit.t)?.rem_euclid(TAU))
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Smallest cyclic site shift mapping the orbit onto itself, up to a time shift.
fn spatial_period(points: &[State], tol: f64) -> usize {
    let n = points[0].n();
    let t = points.len();
    for nu in divisors(n) {
        if nu == n {
            return n;
        }
        let shifted = points[0].shifted(nu);
        if (0..t).any(|tau| shifted.distance(&points[tau]) < tol) {
            return nu;
        }
    }
    n
}

/// Builds the orbit record from a converged starting point.
pub fn orbit_from_point(x: &State, p: &KickParams<f64>, t: usize) -> Result<PeriodicOrbit> {
    let mut points = vec![x.clone()];
    for _ in 1..t {
        let next = super::classical::classical_step(points.last().unwrap(), p);
        points.push(next);
    }
    let (y, dphi) = propagate(x, p, t);
    let residual = y.distance(x);
    let t_p = divisors(t)
        .into_iter()
        .find(|&d| d == t || points[d].distance(x) < 1e-8)
        .unwrap_or(t);
    let n_p = spatial_period(&points, 1e-8);
    let e = frame_matrix(x);
    let monodromy = e.transpose() * dphi * e;
    let dim = monodromy.nrows();
    let det_m_minus_1 = (&monodromy - DMatrix::<f64>::identity(dim, dim)).determinant();
    let cm = Array2::from_shape_fn((dim, dim), |(i, j)| C64::new(monodromy[(i, j)], 0.0));
    let monodromy_eigenvalues = linalg::eig(&cm, false)?.values;
    let action = trajectory_action(x, p, t)?.rem_euclid(TAU);
    Ok(PeriodicOrbit {
        points,
        t,
        t_p,
        n_p,
        r_t: t / t_p,
        r_n: x.n() / n_p,
        action,
        monodromy,
        monodromy_eigenvalues,
        det_m_minus_1,
        residual,
    })
}

/// Result of a multistart orbit search.
#[derive(Debug, Clone)]
pub struct OrbitSearch {
    pub orbits: Vec<PeriodicOrbit>,
    /// Every seed was a fixed point with vanishing `DF`.
    pub trivial_manifold: bool,
    pub seeds: usize,
    pub converged: usize,
}

/// Sphere distance between orbits modulo cyclic time and site shifts.
pub fn orbit_distance(a: &PeriodicOrbit, b: &PeriodicOrbit) -> f64 {
    let mut best = f64::INFINITY;
    let n = a.n();
    for sigma in 0..n {
        for tau in 0..a.t {
            let d = a.points[0].shifted(sigma).distance(&b.points[tau]);
            best = best.min(d);
        }
    }
    best
}

fn same_action(a: f64, b: f64, tol: f64) -> bool {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d) < tol
}

/// Multistart Newton search for period-`t` orbits.
pub fn find_periodic_orbits(params: &SpinChainParams, t: usize, n_seeds: usize, dedupe_tol: f64, seed: u64) -> Result<OrbitSearch> {
    let p = params.kick::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();
    let mut trivial = 0;
    let mut converged = 0;
    for _ in 0..n_seeds {
        let x0 = ClassicalState { vectors: (0..params.n).map(|_| random_unit(&mut rng)).collect() };
        match newton_periodic(&x0, &p, t, 200) {
            NewtonOutcome::Trivial => trivial += 1,
            NewtonOutcome::Failed => {}
            NewtonOutcome::Converged { state, .. } => {
                converged += 1;
                let orbit = orbit_from_point(&state, &p, t)?;
                let dup = orbits
                    .iter()
                    .any(|o| orbit_distance(o, &orbit) < dedupe_tol && same_action(o.action, orbit.action, 1e-8));
                if !dup {
                    orbits.push(orbit);
                }
            }
        }
    }
    orbits.sort_by(|a, b| a.action.partial_cmp(&b.action).unwrap());
    Ok(OrbitSearch { orbits, trivial_manifold: n_seeds > 0 && trivial == n_seeds, seeds: n_seeds, converged })
}

/// `b_z` in `[lo, hi]` where the orbit continued from `seed` becomes marginal, `det(M - 1) = 0`.
pub fn marginal_bz(params: &SpinChainParams, t: usize, seed: &State, lo: f64, hi: f64) -> Result<(f64, PeriodicOrbit)> {
    let mut last = seed.clone();
    let at = |bz: f64, last: &mut State| -> Result<PeriodicOrbit> {
        let p = SpinChainParams { bz, ..*params }.kick::<f64>();
        match newton_periodic(last, &p, t, 100) {
            NewtonOutcome::Converged { state, .. } => {
                *last = state.clone();
                orbit_from_point(&state, &p, t)
            }
            _ => Err(Error::Incompatible(format!("continuation lost the orbit at b_z = {bz}"))),
        }
    };
    let (mut a, mut b) = (lo, hi);
    let fa = at(a, &mut last)?.det_m_minus_1;
    let fb = at(b, &mut last)?.det_m_minus_1;
    if fa * fb > 0.0 {
        return Err(Error::Incompatible(format!("det(M - 1) keeps its sign on [{lo}, {hi}]")));
    }
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let fm = at(m, &mut last)?.det_m_minus_1;
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    let bz = 0.5 * (a + b);
    Ok((bz, at(bz, &mut last)?))
}
