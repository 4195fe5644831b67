//! Spin operators and the Floquet operator of the kicked spin chain.

use super::params::SpinChainParams;
use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMat, C64};
use ndarray::Array2;

/// Default bound on dense matrix dimensions.
pub const DEFAULT_DENSE_CAP: usize = 16384;

/// `Sx, Sy, Sz` in the `Sz` eigenbasis ordered `m = -j..=j`.
#[derive(Debug, Clone)]
pub struct SpinMatrices {
    pub sx: CMat,
    pub sy: CMat,
    pub sz: CMat,
}

/// Magnetic quantum numbers `-j, ..., j`.
pub fn magnetic_numbers(two_j: u32) -> Vec<f64> {
    let j = two_j as f64 / 2.0;
    (0..=two_j).map(|k| k as f64 - j).collect()
}

fn ladder_elements(two_j: u32) -> Vec<f64> {
    let j = two_j as f64 / 2.0;
    magnetic_numbers(two_j)[..two_j as usize]
        .iter()
        .map(|&m| (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt())
        .collect()
}

pub fn spin_matrices(two_j: u32) -> Result<SpinMatrices> {
    if two_j < 1 {
        return Err(Error::InvalidParameter("two_j must be >= 1".into()));
    }
    let d = (two_j as usize).checked_add(1).ok_or(Error::DimensionOverflow)?;
    let mut sx = CMat::zeros((d, d));
    let mut sy = CMat::zeros((d, d));
    let mut sz = CMat::zeros((d, d));
    for (k, m) in magnetic_numbers(two_j).into_iter().enumerate() {
        sz[[k, k]] = C64::new(m, 0.0);
    }
    for (k, c) in ladder_elements(two_j).into_iter().enumerate() {
        // <m+1|S+|m> = c
        sx[[k + 1, k]] = C64::new(c / 2.0, 0.0);
        sx[[k, k + 1]] = C64::new(c / 2.0, 0.0);
        sy[[k + 1, k]] = C64::new(0.0, -c / 2.0);
        sy[[k, k + 1]] = C64::new(0.0, c / 2.0);
    }
    Ok(SpinMatrices { sx, sy, sz })
}

/// Eigen-decomposition of the real symmetric kick generator `bx Sx + bz Sz`.
pub fn kick_generator_eigh(two_j: u32, bx: f64, bz: f64) -> Result<(Vec<f64>, Array2<f64>)> {
    let diag: Vec<f64> = magnetic_numbers(two_j).iter().map(|m| bz * m).collect();
    let off: Vec<f64> = ladder_elements(two_j).iter().map(|c| bx * c / 2.0).collect();
    linalg::tridiagonal_eigh(&diag, &off)
}

/// Single-site kick `exp(-2i b.S)` (complex symmetric since `b_y = 0`).
pub fn single_site_kick(two_j: u32, bx: f64, bz: f64) -> Result<CMat> {
    let (w, v) = kick_generator_eigh(two_j, bx, bz)?;
    let d = w.len();
    let mut vc = v.clone();
    let mut vs = v.clone();
    for k in 0..d {
        let (s, c) = (2.0 * w[k]).sin_cos();
        vc.column_mut(k).mapv_inplace(|x| x * c);
        vs.column_mut(k).mapv_inplace(|x| x * s);
    }
    let re = vc.dot(&v.t());
    let im = vs.dot(&v.t());
    Ok(Array2::from_shape_fn((d, d), |(a, b)| C64::new(re[[a, b]], -im[[a, b]])))
}

/// Diagonal of the single-site kick in the `m` basis.
pub fn kick_diagonal(two_j: u32, bx: f64, bz: f64) -> Result<Vec<C64>> {
    let (w, v) = kick_generator_eigh(two_j, bx, bz)?;
    let phases: Vec<C64> = w.iter().map(|&x| cis(-2.0 * x)).collect();
    Ok(v.rows().into_iter().map(|row| row.iter().zip(&phases).map(|(&x, &z)| z * (x * x)).sum()).collect())
}

/// Ising phase constant `c = 4J/(j+1/2)`; bonds carry `exp(-i c m m')`.
pub fn ising_constant(params: &SpinChainParams) -> f64 {
    4.0 * params.coupling / params.kappa()
}

/// Diagonal of `U_I` in the site-major product basis.
pub fn ising_diagonal(params: &SpinChainParams) -> Result<Vec<C64>> {
    let d = params.site_dim();
    let dim = params.hilbert_dim()?;
    let m = magnetic_numbers(params.two_j);
    let c = ising_constant(params);
    let n = params.n;
    let mut digits = vec![0usize; n];
    let mut out = Vec::with_capacity(dim);
    for _ in 0..dim {
        let e: f64 = (0..n).map(|k| m[digits[k]] * m[digits[(k + 1) % n]]).sum();
        out.push(cis(-c * e));
        increment(&mut digits, d);
    }
    Ok(out)
}

/// Odometer increment with the first digit most significant.
pub(crate) fn increment(digits: &mut [usize], base: usize) {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < base {
            return;
        }
        digits[k] = 0;
    }
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMat::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let x = a[[i, j]];
            out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc])
                .assign(&b.mapv(|y| x * y));
        }
    }
    out
}

/// Floquet operator `U = U_I U_K` of dimension `(2j+1)^N`.
pub fn build_floquet(params: &SpinChainParams, cap: usize) -> Result<CMat> {
    params.validate()?;
    let dim = params.hilbert_dim()?;
    if dim > cap {
        return Err(Error::CapExceeded { dim, cap });
    }
    let u = single_site_kick(params.two_j, params.bx, params.bz)?;
    let defect = linalg::unitarity_defect(&u);
    if defect > 1e-10 {
        return Err(Error::NotUnitary { defect });
    }
    let mut uk = u.clone();
    for _ in 1..params.n {
        uk = kron(&uk, &u);
    }
    let diag = ising_diagonal(params)?;
    for (mut row, p) in uk.rows_mut().into_iter().zip(diag) {
        row.mapv_inplace(|z| z * p);
    }
    Ok(uk)
}

/// `Tr(U^T)`.
pub fn trace_power(u: &CMat, t: usize) -> C64 {
    linalg::trace_power(u, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig, unitarity_defect};
    use ndarray_linalg::{Eigh, UPLO};

    fn reference_params(two_j: u32, n: usize) -> SpinChainParams {
        SpinChainParams::new(two_j, n, 0.7, 0.9, 0.9, 1, 10).unwrap()
    }

    fn expm_hermitian(h: &CMat, scale: C64) -> CMat {
        let (w, v) = h.eigh(UPLO::Upper).unwrap();
        let d = CMat::from_diag(&w.mapv(|x| (scale * x).exp()));
        v.dot(&d).dot(&v.t().mapv(|z| z.conj()))
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let s = spin_matrices(1).unwrap();
        assert_eq!(s.sz[[0, 0]], C64::new(-0.5, 0.0));
        assert_eq!(s.sz[[1, 1]], C64::new(0.5, 0.0));
        assert_eq!(s.sx[[0, 1]], C64::new(0.5, 0.0));
        assert_eq!(s.sx[[1, 0]], C64::new(0.5, 0.0));
    }

    #[test]
    fn casimir() {
        for two_j in 1..8 {
            let s = spin_matrices(two_j).unwrap();
            let j = two_j as f64 / 2.0;
            let c = s.sx.dot(&s.sx) + s.sy.dot(&s.sy) + s.sz.dot(&s.sz);
            let d = c - linalg::identity(two_j as usize + 1).mapv(|z| z * j * (j + 1.0));
            assert!(d.iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn commutator() {
        let s = spin_matrices(4).unwrap();
        let comm = s.sx.dot(&s.sy) - s.sy.dot(&s.sx) - s.sz.mapv(|z| z * linalg::I);
        assert!(comm.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn spin_half_kick_matches_closed_form() {
        let (b, phi) = (1.3_f64, 0.4_f64);
        let u = single_site_kick(1, b * phi.sin(), b * phi.cos()).unwrap();
        let (c, s) = (b.cos(), b.sin());
        let expect = [
            [C64::new(c, s * phi.cos()), C64::new(0.0, -s * phi.sin())],
            [C64::new(0.0, -s * phi.sin()), C64::new(c, -s * phi.cos())],
        ];
        for a in 0..2 {
            for k in 0..2 {
                assert!((u[[a, k]] - expect[a][k]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn kick_matches_dense_exponential() {
        for two_j in 1..7 {
            let s = spin_matrices(two_j).unwrap();
            let h = &s.sx * C64::new(0.9, 0.0) + &s.sz * C64::new(0.4, 0.0);
            let expect = expm_hermitian(&h, C64::new(0.0, -2.0));
            let u = single_site_kick(two_j, 0.9, 0.4).unwrap();
            assert!((u - expect).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn trivial_parameters_give_identity() {
        let p = SpinChainParams::new(2, 3, 0.0, 0.0, 0.0, 1, 1).unwrap();
        let u = build_floquet(&p, DEFAULT_DENSE_CAP).unwrap();
        assert!((u - linalg::identity(27)).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn two_site_spin_half_by_hand() {
        let p = reference_params(1, 2);
        let u = build_floquet(&p, DEFAULT_DENSE_CAP).unwrap();
        let (b, phi) = (p.b(), p.phi());
        let el = |a: usize, k: usize| -> C64 {
            let (c, s) = (b.cos(), b.sin());
            match (a, k) {
                (0, 0) => C64::new(c, s * phi.cos()),
                (1, 1) => C64::new(c, -s * phi.cos()),
                _ => C64::new(0.0, -s * phi.sin()),
            }
        };
        let m = [-0.5, 0.5];
        for r in 0..4 {
            for c in 0..4 {
                let (r1, r2, c1, c2) = (r / 2, r % 2, c / 2, c % 2);
                let phase = cis(-4.0 * 0.7 * 2.0 * m[r1] * m[r2]);
                let expect = phase * el(r1, c1) * el(r2, c2);
                assert!((u[[r, c]] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn unitary_and_translation_invariant() {
        for (two_j, n) in [(1, 5), (2, 4), (3, 3)] {
            let p = reference_params(two_j, n);
            let u = build_floquet(&p, DEFAULT_DENSE_CAP).unwrap();
            assert!(unitarity_defect(&u) < 1e-10);
            let d = p.site_dim();
            let dim = u.nrows();
            let shift = |r: usize| (r % d) * dim / d + r / d;
            for r in 0..dim {
                for c in 0..dim {
                    assert!((u[[shift(r), shift(c)]] - u[[r, c]]).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn traces_match_eigenvalues() {
        let p = SpinChainParams::from_polar(1, 3, 0.7, 0.9 * 2f64.sqrt(), std::f64::consts::FRAC_PI_4, 2, 1).unwrap();
        let u = build_floquet(&p, DEFAULT_DENSE_CAP).unwrap();
        let ev = eig(&u, false).unwrap().values;
        for t in 1..5 {
            let expect: C64 = ev.iter().map(|l| l.powi(t as i32)).sum();
            assert!((trace_power(&u, t) - expect).norm() < 1e-8 * 8.0);
        }
    }

    #[test]
    fn single_site_reduces_to_kicked_top() {
        for two_j in [1, 2, 5, 10] {
            let p = reference_params(two_j, 1);
            let u = build_floquet(&p, DEFAULT_DENSE_CAP).unwrap();
            let s = spin_matrices(two_j).unwrap();
            let kappa = p.kappa();
            let hi = s.sz.dot(&s.sz).mapv(|z| z * 4.0 * p.coupling / (kappa * kappa));
            let hk = (&s.sx * C64::new(p.bx, 0.0) + &s.sz * C64::new(p.bz, 0.0)).mapv(|z| z * 2.0 / kappa);
            let ui = expm_hermitian(&hi, C64::new(0.0, -kappa));
            let uk = expm_hermitian(&hk, C64::new(0.0, -kappa));
            let top = ui.dot(&uk);
            assert!((u - top).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let p = reference_params(1, 15);
        assert!(matches!(build_floquet(&p, 1 << 14), Err(Error::CapExceeded { .. })));
    }
}
