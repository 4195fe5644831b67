//! Coupled cat-map chain on the `2N`-torus and its two-dimensional symbolic dynamics.

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::scalar::Real;
use num_complex::Complex;
use rand::Rng;
use rustfft::{FftNum, FftPlanner};
use serde::{Deserialize, Serialize};

/// `V(q) = eps sum_k (c_k / k^2) cos(2 pi k q + phi_k)`, `k = 1..=len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential<T> {
    pub eps: T,
    pub coeffs: Vec<T>,
    pub phases: Vec<T>,
}

impl<T: Real> Potential<T> {
    pub fn zero() -> Self {
        Self { eps: T::zero(), coeffs: Vec::new(), phases: Vec::new() }
    }

    /// Unit coefficients and uniformly random phases for `harmonics` terms.
    pub fn random<R: Rng>(eps: T, harmonics: usize, rng: &mut R) -> Self {
        let phases = (0..harmonics).map(|_| T::lit(rng.random::<f64>()) * T::TAU()).collect();
        Self { eps, coeffs: vec![T::one(); harmonics], phases }
    }

    pub fn is_zero(&self) -> bool {
        self.eps == T::zero() || self.coeffs.iter().all(|c| *c == T::zero())
    }

    fn terms(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        self.coeffs.iter().zip(&self.phases).enumerate().map(|(i, (&c, &phi))| (T::from_usize(i + 1).unwrap(), c, phi))
    }

    pub fn value(&self, q: T) -> T {
        self.terms().fold(T::zero(), |acc, (k, c, phi)| acc + c / (k * k) * (T::TAU() * k * q + phi).cos()) * self.eps
    }

    pub fn derivative(&self, q: T) -> T {
        -self.terms().fold(T::zero(), |acc, (k, c, phi)| acc + c / k * T::TAU() * (T::TAU() * k * q + phi).sin()) * self.eps
    }
}

/// Integer map parameters `a, b, d`, ring length `N`, period `T` and on-site potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatMapParams<T> {
    pub a: i64,
    pub b: i64,
    pub d: i64,
    pub n: usize,
    pub t: usize,
    pub potential: Potential<T>,
}

impl<T: Real> CatMapParams<T> {
    pub fn new(a: i64, b: i64, d: i64, n: usize, t: usize) -> Result<Self> {
        let p = Self { a, b, d, n, t, potential: Potential::zero() };
        p.validate()?;
        Ok(p)
    }

    /// `a, b` with `a + b = nu`, `d = -1`.
    pub fn space_time_dual(nu: i64, n: usize, t: usize) -> Result<Self> {
        Self::new(2, nu - 2, -1, n, t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.t == 0 {
            return Err(Error::InvalidParameter("N and T must be >= 1".into()));
        }
        if self.potential.coeffs.len() != self.potential.phases.len() {
            return Err(Error::InvalidParameter("potential coefficients and phases differ in length".into()));
        }
        Ok(())
    }

    pub fn nu(&self) -> i64 {
        self.a + self.b
    }

    /// `|a + b| > 2|d| + 2`.
    pub fn hyperbolicity_condition(&self) -> bool {
        self.nu().abs() > 2 * self.d.abs() + 2
    }

    pub fn is_space_time_dual(&self) -> bool {
        self.d == -1 && self.nu() > 4
    }
}

/// Phase-space point `(q_n, p_n)`, `n = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CatState<T> {
    pub q: Vec<T>,
    pub p: Vec<T>,
}

/// Integers subtracted to fold the image back into `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Windings {
    pub mq: Vec<i64>,
    pub mp: Vec<i64>,
}

/// Point of the `1/den` lattice, `q_n = q[n] / den`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeState {
    pub q: Vec<i64>,
    pub p: Vec<i64>,
    pub den: i64,
}

impl LatticeState {
    pub fn to_state<T: Real>(&self) -> CatState<T> {
        let d = T::from_i64(self.den).unwrap();
        let f = |v: &Vec<i64>| v.iter().map(|&x| T::from_i64(x).unwrap() / d).collect();
        CatState { q: f(&self.q), p: f(&self.p) }
    }
}

/// Exact `V = 0` step on the `1/den` lattice.
pub fn catmap_step_lattice(z: &LatticeState, a: i64, b: i64, d: i64) -> LatticeState {
    let n = z.q.len();
    let mut out = LatticeState { q: vec![0; n], p: vec![0; n], den: z.den };
    for i in 0..n {
        let nb = z.q[(i + 1) % n] + z.q[(i + n - 1) % n];
        out.q[i] = (z.p[i] + a * z.q[i] + d * nb).rem_euclid(z.den);
        out.p[i] = (b * z.p[i] + (a * b - 1) * z.q[i] + d * b * nb).rem_euclid(z.den);
    }
    out
}

fn fold<T: Real>(x: T) -> (T, i64) {
    let m = x.floor();
    let mut r = x - m;
    let mut mi = m.to_i64().unwrap();
    if r >= T::one() {
        r = r - T::one();
        mi += 1;
    }
    (r, mi)
}

/// One step `Z -> Phi(Z)` with its windings.
pub fn catmap_step<T: Real>(z: &CatState<T>, params: &CatMapParams<T>) -> (CatState<T>, Windings) {
    let n = z.q.len();
    let a = T::from_i64(params.a).unwrap();
    let b = T::from_i64(params.b).unwrap();
    let d = T::from_i64(params.d).unwrap();
    let mut out = CatState { q: vec![T::zero(); n], p: vec![T::zero(); n] };
    let mut w = Windings { mq: vec![0; n], mp: vec![0; n] };
    for i in 0..n {
        let nb = z.q[(i + 1) % n] + z.q[(i + n - 1) % n];
        let f = params.potential.derivative(z.q[i]);
        let q1 = z.p[i] + a * z.q[i] + d * nb - f;
        let p1 = b * z.p[i] + (a * b - T::one()) * z.q[i] + d * b * nb - b * f;
        (out.q[i], w.mq[i]) = fold(q1);
        (out.p[i], w.mp[i]) = fold(p1);
    }
    (out, w)
}

/// `2N x 2N` integer matrix acting on `(q_0, p_0, ..., q_{N-1}, p_{N-1})`.
pub fn matrix_m(a: i64, b: i64, d: i64, n: usize) -> Vec<Vec<i64>> {
    let blk_a = [[a, 1], [a * b - 1, b]];
    let blk_b = [[d, 0], [d * b, 0]];
    let mut m = vec![vec![0i64; 2 * n]; 2 * n];
    for i in 0..n {
        for r in 0..2 {
            for c in 0..2 {
                m[2 * i + r][2 * i + c] += blk_a[r][c];
                m[2 * i + r][2 * ((i + 1) % n) + c] += blk_b[r][c];
                m[2 * i + r][2 * ((i + n - 1) % n) + c] += blk_b[r][c];
            }
        }
    }
    m
}

/// Stability matrix with its spectrum from the Fourier-mode reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMatrix {
    pub m: Vec<Vec<i64>>,
    /// Two eigenvalues per mode `k = 0..N`, larger modulus first.
    pub eigenvalues: Vec<C64>,
    pub hyperbolic: bool,
}

impl StabilityMatrix {
    /// `ln` of the largest eigenvalue modulus.
    pub fn lyapunov(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm().ln()).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Mode `k` reduces to `A + 2 cos(2 pi k/N) B` with unit determinant and trace `nu + 2 d cos`.
pub fn build_m<T: Real>(params: &CatMapParams<T>) -> StabilityMatrix {
    let n = params.n;
    let mut eigenvalues = Vec::with_capacity(2 * n);
    let mut hyperbolic = true;
    for k in 0..n {
        let tr = params.nu() as f64 + 2.0 * params.d as f64 * (std::f64::consts::TAU * k as f64 / n as f64).cos();
        let disc = C64::new(tr * tr - 4.0, 0.0).sqrt();
        let (l1, l2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
        if tr.abs() <= 2.0 + 1e-12 {
            hyperbolic = false;
        }
        if l1.norm() >= l2.norm() {
            eigenvalues.extend([l1, l2]);
        } else {
            eigenvalues.extend([l2, l1]);
        }
    }
    StabilityMatrix { m: matrix_m(params.a, params.b, params.d, n), eigenvalues, hyperbolic }
}

/// `N x T` integer array on a torus, row-major in time: `m[t * N + n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolArray {
    pub n: usize,
    pub t: usize,
    pub m: Vec<i64>,
}

impl SymbolArray {
    pub fn zeros(n: usize, t: usize) -> Self {
        Self { n, t, m: vec![0; n * t] }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> i64>(n: usize, t: usize, mut f: F) -> Self {
        let mut m = Vec::with_capacity(n * t);
        for tt in 0..t {
            for nn in 0..n {
                m.push(f(nn, tt));
            }
        }
        Self { n, t, m }
    }

    #[inline]
    pub fn idx(&self, n: usize, t: usize) -> usize {
        (t % self.t) * self.n + (n % self.n)
    }

    pub fn get(&self, n: usize, t: usize) -> i64 {
        self.m[self.idx(n, t)]
    }

    pub fn set(&mut self, n: usize, t: usize, v: i64) {
        let i = self.idx(n, t);
        self.m[i] = v;
    }

    /// Exchanges the roles of `n` and `t`.
    pub fn transposed(&self) -> Self {
        Self::from_fn(self.t, self.n, |n, t| self.get(t, n))
    }

    /// `-3 <= m <= nu - 1` everywhere.
    pub fn within_bounds(&self, nu: i64) -> bool {
        self.m.iter().all(|&x| (-3..=nu - 1).contains(&x))
    }

    /// Uniform symbols from the restricted alphabet `[0, nu - 4]`.
    pub fn random_restricted<R: Rng>(n: usize, t: usize, nu: i64, rng: &mut R) -> Self {
        Self::from_fn(n, t, |_, _| rng.random_range(0..=nu - 4))
    }

    /// Header `N T nu`, then one line per time step.
    pub fn to_text(&self, nu: i64) -> String {
        let mut s = format!("{} {} {}\n", self.n, self.t, nu);
        for t in 0..self.t {
            let row: Vec<String> = (0..self.n).map(|n| self.get(n, t).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses [`SymbolArray::to_text`]; returns the array and `nu`.
    pub fn from_text(text: &str) -> Result<(Self, i64)> {
        let bad = |msg: &str| Error::InvalidParameter(format!("symbol grid: {msg}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<i64> = lines
            .next()
            .ok_or_else(|| bad("empty"))?
            .split_whitespace()
            .map(|x| x.parse::<i64>().map_err(|_| bad("header")))
            .collect::<Result<_>>()?;
        if header.len() != 3 || header[0] < 1 || header[1] < 1 {
            return Err(bad("header must be `N T nu`"));
        }
        let (n, t) = (header[0] as usize, header[1] as usize);
        let mut m = Vec::with_capacity(n * t);
        for line in lines {
            let row: Vec<i64> = line.split_whitespace().map(|x| x.parse::<i64>().map_err(|_| bad("entry"))).collect::<Result<_>>()?;
            if row.len() != n {
                return Err(bad("row length differs from N"));
            }
            m.extend(row);
        }
        if m.len() != n * t {
            return Err(bad("row count differs from T"));
        }
        Ok((Self { n, t, m }, header[2]))
    }
}

/// Periodic orbit on the `N x T` torus.
#[derive(Debug, Clone, PartialEq)]
pub struct CatOrbit<T> {
    /// `q[t * N + n]`.
    pub q: Vec<T>,
    pub p: Vec<T>,
    pub m: SymbolArray,
    /// Reduced to `[0, 1)`.
    pub action: T,
    pub admissible: bool,
    /// `max |(-Delta + nu - 4) q - m|`.
    pub residual: T,
}

impl<T: Real> CatOrbit<T> {
    pub fn q_at(&self, n: usize, t: usize) -> T {
        self.q[self.m.idx(n, t)]
    }

    pub fn p_at(&self, n: usize, t: usize) -> T {
        self.p[self.m.idx(n, t)]
    }

    /// Phase-space point at time `t`.
    pub fn state(&self, t: usize) -> CatState<T> {
        CatState { q: (0..self.m.n).map(|n| self.q_at(n, t)).collect(), p: (0..self.m.n).map(|n| self.p_at(n, t)).collect() }
    }
}

/// `(-Delta + nu - 4) q` on the torus.
pub fn helmholtz<T: Real>(q: &[T], n: usize, t: usize, nu: i64) -> Vec<T> {
    let nu = T::from_i64(nu).unwrap();
    let at = |a: usize, b: usize| q[(b % t) * n + (a % n)];
    let mut out = Vec::with_capacity(n * t);
    for tt in 0..t {
        for nn in 0..n {
            let nb = at(nn + 1, tt) + at(nn + n - 1, tt) + at(nn, tt + 1) + at(nn, tt + t - 1);
            out.push(nu * at(nn, tt) - nb);
        }
    }
    out
}

fn fft2<T: Real + FftNum>(data: &mut [Complex<T>], n: usize, t: usize, inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let (fr, fc) = if inverse {
        (planner.plan_fft_inverse(n), planner.plan_fft_inverse(t))
    } else {
        (planner.plan_fft_forward(n), planner.plan_fft_forward(t))
    };
    for row in data.chunks_mut(n) {
        fr.process(row);
    }
    let mut col = vec![Complex::new(T::zero(), T::zero()); t];
    for nn in 0..n {
        for tt in 0..t {
            col[tt] = data[tt * n + nn];
        }
        fc.process(&mut col);
        for tt in 0..t {
            data[tt * n + nn] = col[tt];
        }
    }
}

/// `q = G * m` with `G` the torus Green's function of `-Delta + nu - 4`.
pub fn solve_helmholtz<T: Real + FftNum>(m: &[T], n: usize, t: usize, nu: i64) -> Result<Vec<T>> {
    if nu <= 4 {
        return Err(Error::InvalidParameter(format!("-Delta + nu - 4 is singular for nu = {nu}")));
    }
    let mut data: Vec<Complex<T>> = m.iter().map(|&x| Complex::new(x, T::zero())).collect();
    fft2(&mut data, n, t, false);
    let nuf = T::from_i64(nu).unwrap();
    let two = T::lit(2.0);
    for tt in 0..t {
        let ct = (T::TAU() * T::from_usize(tt).unwrap() / T::from_usize(t).unwrap()).cos();
        for nn in 0..n {
            let cn = (T::TAU() * T::from_usize(nn).unwrap() / T::from_usize(n).unwrap()).cos();
            let sym = nuf - two * cn - two * ct;
            data[tt * n + nn] = data[tt * n + nn] / sym;
        }
    }
    fft2(&mut data, n, t, true);
    let scale = T::from_usize(n * t).unwrap();
    Ok(data.iter().map(|z| z.re / scale).collect())
}

/// Orbit encoded by `m` for `d = -1` and `V = 0`.
///
/// Coordinates within `1e-10` of the cell boundary are read as `0`, so `q = 1` is not admissible.
pub fn orbit_from_symbols<T: Real + FftNum>(m: &SymbolArray, params: &CatMapParams<T>) -> Result<CatOrbit<T>> {
    if params.d != -1 {
        return Err(Error::Incompatible("symbolic reconstruction needs d = -1".into()));
    }
    if !params.potential.is_zero() {
        return Err(Error::Incompatible("symbolic reconstruction needs V = 0".into()));
    }
    let (n, t, nu) = (m.n, m.t, params.nu());
    let mf: Vec<T> = m.m.iter().map(|&x| T::from_i64(x).unwrap()).collect();
    let mut q = solve_helmholtz(&mf, n, t, nu)?;
    let tol = T::lit(1e-10);
    for x in q.iter_mut() {
        if *x < T::zero() && *x > -tol {
            *x = T::zero();
        }
    }
    let residual = helmholtz(&q, n, t, nu).iter().zip(&mf).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
    let admissible = q.iter().all(|&x| x >= T::zero() && x < T::one() - tol);
    let a = T::from_i64(params.a).unwrap();
    let d = T::from_i64(params.d).unwrap();
    let mut p = vec![T::zero(); n * t];
    for tt in 0..t {
        for nn in 0..n {
            let at = |a: usize, b: usize| q[(b % t) * n + (a % n)];
            let raw = at(nn, tt + 1) - a * at(nn, tt) - d * (at(nn + 1, tt) + at(nn + n - 1, tt));
            p[tt * n + nn] = fold(raw).0;
        }
    }
    let action = catmap_action(&q, m, params);
    Ok(CatOrbit { q, p, m: m.clone(), action, admissible, residual })
}

/// `sum [ (a q^2 - 2 q q' + b q'^2)/2 - q q_{n+1} - V(q) - m q ]` over the torus, reduced to `[0, 1)`.
///
/// The `- m q` term is the winding correction from folding the lattice sum into the unit cell.
pub fn catmap_action<T: Real>(q: &[T], m: &SymbolArray, params: &CatMapParams<T>) -> T {
    catmap_action_unreduced(q, m, params).modulo(T::one())
}

pub fn catmap_action_unreduced<T: Real>(q: &[T], m: &SymbolArray, params: &CatMapParams<T>) -> T {
    let (n, t) = (m.n, m.t);
    let a = T::from_i64(params.a).unwrap();
    let b = T::from_i64(params.b).unwrap();
    let half = T::lit(0.5);
    let at = |x: usize, y: usize| q[(y % t) * n + (x % n)];
    let mut s = T::zero();
    for tt in 0..t {
        for nn in 0..n {
            let (x, xt, xn) = (at(nn, tt), at(nn, tt + 1), at(nn + 1, tt));
            s = s + half * (a * x * x - T::lit(2.0) * x * xt + b * xt * xt) - x * xn - params.potential.value(x)
                - T::from_i64(m.get(nn, tt)).unwrap() * x;
        }
    }
    s
}

pub fn orbit_action_catmap<T: Real>(orbit: &CatOrbit<T>, params: &CatMapParams<T>) -> T {
    catmap_action(&orbit.q, &orbit.m, params)
}

/// Rectangular interior block with its top-left corner at `(n0, t0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub n0: usize,
    pub t0: usize,
    pub width_n: usize,
    pub width_t: usize,
}

impl Region {
    /// Cells of the interior grown by `w` on every side, in scan order.
    pub fn cells(&self, w: usize, n: usize, t: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for dt in 0..self.width_t + 2 * w {
            for dn in 0..self.width_n + 2 * w {
                out.push(((self.n0 + n + dn - w) % n, (self.t0 + t + dt - w) % t));
            }
        }
        out
    }

    fn interior(&self, n: usize, t: usize) -> Vec<(usize, usize)> {
        self.cells(0, n, t)
    }
}

/// Partner orbits related by exchanging two encounter interiors.
#[derive(Debug, Clone)]
pub struct PartnerPair<T> {
    pub gamma: CatOrbit<T>,
    pub gamma_bar: CatOrbit<T>,
    /// `S_gamma - S_gamma_bar` reduced to `[-1/2, 1/2)`.
    pub delta_s: T,
    /// Largest torus distance between matched points anywhere; interiors grown by half the annulus are
    /// matched across the swap, all other points with themselves.
    pub shadowing: T,
    /// Largest torus distance between matched points inside the encounter blocks.
    pub encounter_shadowing: T,
}

fn torus_gap<T: Real>(x: T, y: T) -> T {
    let d = (x - y).modulo(T::one());
    d.min(T::one() - d)
}

/// Swaps the interiors of `ra` and `rb`, whose annuli of width `w` must carry the same symbols.
pub fn partner_from_swap<T: Real + FftNum>(m: &SymbolArray, ra: Region, rb: Region, w: usize, params: &CatMapParams<T>) -> Result<PartnerPair<T>> {
    if (ra.width_n, ra.width_t) != (rb.width_n, rb.width_t) {
        return Err(Error::InvalidParameter("regions are not congruent".into()));
    }
    let (n, t) = (m.n, m.t);
    if ra.width_n + 2 * w > n || ra.width_t + 2 * w > t {
        return Err(Error::InvalidParameter("encounter block larger than the torus".into()));
    }
    let ca = ra.cells(w, n, t);
    let cb = rb.cells(w, n, t);
    let set_a: std::collections::HashSet<_> = ca.iter().copied().collect();
    if (ra != rb) && cb.iter().any(|c| set_a.contains(c)) {
        return Err(Error::InvalidParameter("encounter blocks overlap".into()));
    }
    if ca.iter().zip(&cb).any(|(x, y)| m.get(x.0, x.1) != m.get(y.0, y.1) && !in_interior(x, &ra, n, t)) {
        return Err(Error::InvalidParameter("encounter annuli differ".into()));
    }
    let ia = ra.interior(n, t);
    let ib = rb.interior(n, t);
    let mut mbar = m.clone();
    for (x, y) in ia.iter().zip(&ib) {
        mbar.set(x.0, x.1, m.get(y.0, y.1));
        mbar.set(y.0, y.1, m.get(x.0, x.1));
    }
    let gamma = orbit_from_symbols(m, params)?;
    let gamma_bar = orbit_from_symbols(&mbar, params)?;
    let mut partner = (0..n * t).collect::<Vec<usize>>();
    for (x, y) in ra.cells(w / 2, n, t).iter().zip(&rb.cells(w / 2, n, t)) {
        partner[m.idx(x.0, x.1)] = m.idx(y.0, y.1);
        partner[m.idx(y.0, y.1)] = m.idx(x.0, x.1);
    }
    let gap = |i: usize| {
        let j = partner[i];
        torus_gap(gamma_bar.q[i], gamma.q[j]).max(torus_gap(gamma_bar.p[i], gamma.p[j]))
    };
    let shadowing = (0..n * t).map(gap).fold(T::zero(), T::max);
    let encounter_shadowing = ca.iter().chain(&cb).map(|c| gap(m.idx(c.0, c.1))).fold(T::zero(), T::max);
    let half = T::lit(0.5);
    let delta_s = (gamma.action - gamma_bar.action + half).modulo(T::one()) - half;
    Ok(PartnerPair { gamma, gamma_bar, delta_s, shadowing, encounter_shadowing })
}

fn in_interior(c: &(usize, usize), r: &Region, n: usize, t: usize) -> bool {
    let dn = (c.0 + n - r.n0) % n;
    let dt = (c.1 + t - r.t0) % t;
    dn < r.width_n && dt < r.width_t
}

/// Random encounter on an `size x size` torus: block `A` at the origin, block `B` diagonally opposite.
///
/// Returns the symbol array and the two interiors; the annulus of `B` copies that of `A`.
pub fn random_encounter<R: Rng>(size: usize, interior: usize, w: usize, nu: i64, rng: &mut R) -> Result<(SymbolArray, Region, Region)> {
    let block = interior + 2 * w;
    if 2 * block > size {
        return Err(Error::InvalidParameter(format!("two blocks of {block} do not fit on {size}")));
    }
    let mut m = SymbolArray::random_restricted(size, size, nu, rng);
    let ra = Region { n0: w, t0: w, width_n: interior, width_t: interior };
    let off = size / 2;
    let rb = Region { n0: off + w, t0: off + w, width_n: interior, width_t: interior };
    for (x, y) in ra.cells(w, size, size).iter().zip(rb.cells(w, size, size)) {
        if !in_interior(x, &ra, size, size) {
            m.set(y.0, y.1, m.get(x.0, x.1));
        }
    }
    Ok((m, ra, rb))
}
