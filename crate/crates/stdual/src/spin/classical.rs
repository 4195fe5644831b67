//! Classical kicked top and kicked spin chain as rotations of unit vectors.

use super::params::KickParams;
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

#[inline]
pub fn dot<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub fn norm<T: Real>(a: &Vec3<T>) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub fn mat_vec<T: Real>(m: &Mat3<T>, v: &Vec3<T>) -> Vec3<T> {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

pub fn mat_mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn transpose<T: Real>(a: &Mat3<T>) -> Mat3<T> {
    let mut out = *a;
    for (i, row) in a.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            out[j][i] = x;
        }
    }
    out
}

/// Right-handed rotation by `angle` about the unit vector `axis`.
pub fn rotation<T: Real>(axis: &Vec3<T>, angle: T) -> Mat3<T> {
    let (s, c) = angle.sin_cos();
    let k = T::one() - c;
    let [x, y, z] = *axis;
    [
        [c + x * x * k, x * y * k - z * s, x * z * k + y * s],
        [y * x * k + z * s, c + y * y * k, y * z * k - x * s],
        [z * x * k - y * s, z * y * k + x * s, c + z * z * k],
    ]
}

pub fn rot_z<T: Real>(angle: T) -> Mat3<T> {
    let (s, c) = angle.sin_cos();
    let (o, l) = (T::zero(), T::one());
    [[c, -s, o], [s, c, o], [o, o, l]]
}

pub fn rot_x<T: Real>(angle: T) -> Mat3<T> {
    let (s, c) = angle.sin_cos();
    let (o, l) = (T::zero(), T::one());
    [[l, o, o], [o, c, -s], [o, s, c]]
}

/// Field rotation `R_b(2b)`.
pub fn kick_rotation<T: Real>(p: &KickParams<T>) -> Mat3<T> {
    let b = p.b();
    if b == T::zero() {
        return rot_z(T::zero());
    }
    rotation(&[p.bx / b, T::zero(), p.bz / b], T::lit(2.0) * b)
}

/// Planar rotation whose `(cos, sin)` pair is the representable one closest to the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarRotation<T> {
    pub c: T,
    pub s: T,
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `c^2 + s^2 - 1` evaluated without cancellation.
fn circle_defect(c: f64, s: f64) -> f64 {
    let (ch, cl) = two_prod(c, c);
    let (sh, sl) = two_prod(s, s);
    let (u, ue) = two_sum(ch, sh);
    (u - 1.0) + (ue + cl + sl)
}

impl<T: Real> PlanarRotation<T> {
    pub fn new(angle: T) -> Self {
        let (s0, c0) = angle.sin_cos();
        let nudge = |x: T, k: i32| x + x * T::epsilon() * T::lit(0.5 * k as f64);
        let mut best = (s0, c0, circle_defect(c0.as_f64(), s0.as_f64()).abs());
        for kc in -3..=3 {
            for ks in -3..=3 {
                let (c, s) = (nudge(c0, kc), nudge(s0, ks));
                let d = circle_defect(c.as_f64(), s.as_f64()).abs();
                if d < best.2 {
                    best = (s, c, d);
                }
            }
        }
        Self { c: best.1, s: best.0 }
    }

    #[inline]
    pub fn apply(&self, x: T, y: T) -> (T, T) {
        (self.c * x - self.s * y, self.s * x + self.c * y)
    }
}

/// `R_b(2b)` as `R_z(alpha) R_x(beta) R_z(gamma)` planar factors.
#[derive(Debug, Clone, Copy)]
pub struct KickFactors<T> {
    pub alpha: PlanarRotation<T>,
    pub beta: PlanarRotation<T>,
    pub gamma: PlanarRotation<T>,
}

impl<T: Real> KickFactors<T> {
    pub fn new(p: &KickParams<T>) -> Self {
        let e = euler_decompose(p.bx, p.bz);
        Self { alpha: PlanarRotation::new(e.alpha), beta: PlanarRotation::new(e.beta), gamma: PlanarRotation::new(e.gamma) }
    }

    pub fn apply(&self, v: &Vec3<T>) -> Vec3<T> {
        let (x, y) = self.gamma.apply(v[0], v[1]);
        let (y, z) = self.beta.apply(y, v[2]);
        let (x, y) = self.alpha.apply(x, y);
        [x, y, z]
    }
}

/// `N` unit vectors on the Bloch sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalState<T> {
    pub vectors: Vec<Vec3<T>>,
}

impl<T: Real> ClassicalState<T> {
    pub fn new(vectors: Vec<Vec3<T>>) -> Self {
        Self { vectors }
    }

    /// `n = (sqrt(1-p^2) cos q, sqrt(1-p^2) sin q, p)`.
    pub fn from_canonical(q: &[T], p: &[T]) -> Self {
        let vectors = q
            .iter()
            .zip(p)
            .map(|(&q, &p)| {
                let r = (T::one() - p * p).max(T::zero()).sqrt();
                [r * q.cos(), r * q.sin(), p]
            })
            .collect();
        Self { vectors }
    }

    /// `(q, p)` with `q` in `(-pi, pi]`.
    pub fn canonical(&self) -> (Vec<T>, Vec<T>) {
        self.vectors.iter().map(|v| (v[1].atan2(v[0]), v[2])).unzip()
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn max_norm_defect(&self) -> T {
        self.vectors.iter().map(|v| (norm(v) - T::one()).abs()).fold(T::zero(), T::max)
    }

    /// Sites shifted so that site `k` becomes site `k - shift`.
    pub fn shifted(&self, shift: usize) -> Self {
        let mut v = self.vectors.clone();
        if !v.is_empty() {
            let s = shift % v.len();
            v.rotate_left(s);
        }
        Self { vectors: v }
    }

    /// Uniformly random unit vectors.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        Self { vectors: (0..n).map(|_| random_unit(rng)).collect() }
    }

    /// Largest Euclidean distance between corresponding vectors.
    pub fn distance(&self, other: &Self) -> T {
        self.vectors
            .iter()
            .zip(&other.vectors)
            .map(|(a, b)| norm(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]]))
            .fold(T::zero(), T::max)
    }
}

pub fn random_unit<T: Real, R: Rng>(rng: &mut R) -> Vec3<T> {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    [T::lit(r * phi.cos()), T::lit(r * phi.sin()), T::lit(z)]
}

/// `chi_m = n^z_{m-1} + n^z_{m+1}` on a ring.
pub fn torsion_field<T: Real>(v: &[Vec3<T>]) -> Vec<T> {
    let n = v.len();
    (0..n).map(|m| v[(m + n - 1) % n][2] + v[(m + 1) % n][2]).collect()
}

/// One period: kick every spin, then rotate about `z` by `4 J chi_m` of the kicked configuration.
pub fn classical_step<T: Real>(state: &ClassicalState<T>, p: &KickParams<T>) -> ClassicalState<T> {
    step_with_factors(state, p, &KickFactors::new(p))
}

pub(crate) fn step_with_factors<T: Real>(state: &ClassicalState<T>, p: &KickParams<T>, kick: &KickFactors<T>) -> ClassicalState<T> {
    let kicked: Vec<Vec3<T>> = state.vectors.iter().map(|v| kick.apply(v)).collect();
    let chi = torsion_field(&kicked);
    let four_j = T::lit(4.0) * p.coupling;
    let vectors = kicked
        .iter()
        .zip(&chi)
        .map(|(v, &c)| {
            let (x, y) = PlanarRotation::new(four_j * c).apply(v[0], v[1]);
            [x, y, v[2]]
        })
        .collect();
    ClassicalState { vectors }
}

pub fn evolve<T: Real>(state: &ClassicalState<T>, p: &KickParams<T>, steps: usize) -> ClassicalState<T> {
    let kick = KickFactors::new(p);
    let mut s = state.clone();
    for _ in 0..steps {
        s = step_with_factors(&s, p, &kick);
    }
    s
}

/// Jacobian of one step in ambient coordinates, `3N x 3N` row-major.
pub fn step_jacobian<T: Real>(state: &ClassicalState<T>, p: &KickParams<T>) -> (ClassicalState<T>, Vec<T>) {
    let n = state.n();
    let rb = kick_rotation(p);
    let kicked: Vec<Vec3<T>> = state.vectors.iter().map(|v| mat_vec(&rb, v)).collect();
    let chi = torsion_field(&kicked);
    let four_j = T::lit(4.0) * p.coupling;
    let mut jac = vec![T::zero(); 9 * n * n];
    let mut out = Vec::with_capacity(n);
    let dim = 3 * n;
    for m in 0..n {
        let rz = rot_z(four_j * chi[m]);
        let v = mat_vec(&rz, &kicked[m]);
        out.push(v);
        let direct = mat_mul(&rz, &rb);
        for a in 0..3 {
            for b in 0..3 {
                jac[(3 * m + a) * dim + 3 * m + b] = jac[(3 * m + a) * dim + 3 * m + b] + direct[a][b];
            }
        }
        // d(R_z(alpha) k)/d alpha = e_z x v
        let dv = [-v[1] * four_j, v[0] * four_j, T::zero()];
        for nb in [(m + n - 1) % n, (m + 1) % n] {
            for a in 0..3 {
                for b in 0..3 {
                    let idx = (3 * m + a) * dim + 3 * nb + b;
                    jac[idx] = jac[idx] + dv[a] * rb[2][b];
                }
            }
        }
    }
    (ClassicalState { vectors: out }, jac)
}

/// Euler angles with `R_b(2b) = R_z(alpha) R_x(beta) R_z(gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

pub fn euler_decompose<T: Real>(bx: T, bz: T) -> EulerAngles<T> {
    let p = KickParams::new(T::zero(), bx, bz);
    if p.b() == T::zero() {
        return EulerAngles { alpha: T::zero(), beta: T::zero(), gamma: T::zero() };
    }
    let r = kick_rotation(&p);
    let sb = (r[0][2] * r[0][2] + r[1][2] * r[1][2]).sqrt();
    let beta = sb.atan2(r[2][2]);
    if sb <= T::epsilon() * T::lit(16.0) {
        let total = r[1][0].atan2(r[0][0]);
        let half = total / T::lit(2.0);
        return EulerAngles { alpha: half, beta, gamma: half };
    }
    EulerAngles { alpha: r[0][2].atan2(-r[1][2]), beta, gamma: r[2][0].atan2(r[2][1]) }
}

pub fn euler_matrix<T: Real>(e: &EulerAngles<T>) -> Mat3<T> {
    mat_mul(&mat_mul(&rot_z(e.alpha), &rot_x(e.beta)), &rot_z(e.gamma))
}

/// Which part of each stroboscopic sample to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortraitFilter {
    /// Every sample as `(q, p)`.
    All,
    /// `(n^x, n^y)` of samples with `n^z > 0`.
    UpperHemisphere,
}

/// Stroboscopic samples of site `site` for random initial conditions, one trajectory per entry.
pub fn phase_portrait<T: Real>(
    p: &KickParams<T>,
    n_sites: usize,
    site: usize,
    n_initial: usize,
    n_steps: usize,
    filter: PortraitFilter,
    seed: u64,
) -> Vec<Vec<(T, T)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kick = KickFactors::new(p);
    (0..n_initial)
        .map(|_| {
            let mut s = ClassicalState::random(n_sites, &mut rng);
            let mut pts = Vec::with_capacity(n_steps + 1);
            for k in 0..=n_steps {
                if k > 0 {
                    s = step_with_factors(&s, p, &kick);
                }
                let v = s.vectors[site % n_sites];
                match filter {
                    PortraitFilter::All => pts.push((v[1].atan2(v[0]), v[2])),
                    PortraitFilter::UpperHemisphere if v[2] > T::zero() => pts.push((v[0], v[1])),
                    PortraitFilter::UpperHemisphere => {}
                }
            }
            pts
        })
        .collect()
}
