//! Dense complex linear algebra on top of BLAS/LAPACK.

use crate::error::{Error, Result};
use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::os::raw::{c_char, c_int};

pub type C64 = Complex64;
/// Dense complex matrix, row-major.
pub type CMat = Array2<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn cis(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

pub fn identity(n: usize) -> CMat {
    CMat::eye(n)
}

pub fn trace(m: &CMat) -> C64 {
    m.diag().iter().sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMat, b: &CMat) -> C64 {
    let bt = b.t();
    a.iter().zip(bt.iter()).map(|(x, y)| x * y).sum()
}

/// `max |M^† M - 1|`.
pub fn unitarity_defect(m: &CMat) -> f64 {
    let g = m.t().mapv(|z| z.conj()).dot(m);
    g.indexed_iter()
        .map(|((i, j), z)| if i == j { (z - 1.0).norm() } else { z.norm() })
        .fold(0.0, f64::max)
}

/// `Tr(M^p)` by binary powering; the last product is never formed.
pub fn trace_power(m: &CMat, p: usize) -> C64 {
    let n = m.nrows();
    match p {
        0 => C64::new(n as f64, 0.0),
        1 => trace(m),
        _ => {
            let lo = p / 2;
            let hi = p - lo;
            let a = matrix_power(m, lo);
            let b = if hi == lo { a.clone() } else { a.dot(m) };
            trace_of_product(&a, &b)
        }
    }
}

pub fn matrix_power(m: &CMat, p: usize) -> CMat {
    let mut result: Option<CMat> = None;
    let mut base = m.clone();
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r.dot(&base),
            });
        }
        e >>= 1;
        if e > 0 {
            base = base.dot(&base);
        }
    }
    result.unwrap_or_else(|| identity(m.nrows()))
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix (LAPACK `dstedc`).
///
/// Returns ascending eigenvalues and the orthogonal matrix whose columns are the eigenvectors.
pub fn tridiagonal_eigh(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = diag.len();
    if n == 0 || offdiag.len() + 1 != n {
        return Err(Error::InvalidParameter("tridiagonal shape".into()));
    }
    let ni = n as c_int;
    let mut w = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    let mut info: c_int = 0;
    let mut wq = 0.0;
    let mut iwq: c_int = 0;
    unsafe {
        lapack_sys::dstedc_(
            b"I".as_ptr() as *const c_char,
            &ni,
            w.as_mut_ptr(),
            e.as_mut_ptr(),
            z.as_mut_ptr(),
            &ni,
            &mut wq,
            &-1,
            &mut iwq,
            &-1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(format!("dstedc workspace query info={info}")));
    }
    let lwork = (wq as usize).max(1);
    let liwork = (iwq as usize).max(1);
    let mut work = vec![0.0; lwork];
    let mut iwork = vec![0 as c_int; liwork];
    unsafe {
        lapack_sys::dstedc_(
            b"I".as_ptr() as *const c_char,
            &ni,
            w.as_mut_ptr(),
            e.as_mut_ptr(),
            z.as_mut_ptr(),
            &ni,
            work.as_mut_ptr(),
            &(lwork as c_int),
            iwork.as_mut_ptr(),
            &(liwork as c_int),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(format!("dstedc info={info}")));
    }
    // column-major storage: z[row + col * n]
    let v = Array2::from_shape_vec((n, n), z).unwrap().reversed_axes();
    Ok((w, v.as_standard_layout().to_owned()))
}

/// Full eigen-decomposition of a general complex matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Eigenvalues sorted by descending modulus.
    pub values: Vec<C64>,
    /// Right eigenvectors as columns, unit norm, same order as `values`.
    pub vectors: Option<CMat>,
    /// `max_k |M v_k - lambda_k v_k|`, present when vectors were computed.
    pub max_residual: Option<f64>,
}

/// General complex eigensolver (LAPACK `zgeev`, which balances internally).
pub fn eig(m: &CMat, vectors: bool) -> Result<Eigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidParameter("eig of non-square matrix".into()));
    }
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: None, max_residual: None });
    }
    let ni = n as c_int;
    // column-major copy
    let mut a: Vec<C64> = m.t().iter().copied().collect();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut vr = vec![C64::new(0.0, 0.0); if vectors { n * n } else { 1 }];
    let mut vl = [C64::new(0.0, 0.0)];
    let mut rwork = vec![0.0; 2 * n];
    let mut info: c_int = 0;
    let jobvr = if vectors { b"V" } else { b"N" };
    let ldvr = if vectors { ni } else { 1 };
    let mut query = [C64::new(0.0, 0.0)];
    let mut lwork: c_int = -1;
    unsafe {
        lapack_sys::zgeev_(
            b"N".as_ptr() as *const c_char,
            jobvr.as_ptr() as *const c_char,
            &ni,
            a.as_mut_ptr() as *mut _,
            &ni,
            w.as_mut_ptr() as *mut _,
            vl.as_mut_ptr() as *mut _,
            &1,
            vr.as_mut_ptr() as *mut _,
            &ldvr,
            query.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    lwork = query[0].re as c_int;
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    unsafe {
        lapack_sys::zgeev_(
            b"N".as_ptr() as *const c_char,
            jobvr.as_ptr() as *const c_char,
            &ni,
            a.as_mut_ptr() as *mut _,
            &ni,
            w.as_mut_ptr() as *mut _,
            vl.as_mut_ptr() as *mut _,
            &1,
            vr.as_mut_ptr() as *mut _,
            &ldvr,
            work.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(format!("zgeev info={info}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[j].norm().partial_cmp(&w[i].norm()).unwrap());
    let values: Vec<C64> = order.iter().map(|&i| w[i]).collect();
    if !vectors {
        return Ok(Eigen { values, vectors: None, max_residual: None });
    }
    let mut v = CMat::zeros((n, n));
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            v[[row, col]] = vr[row + k * n];
        }
    }
    let mv = m.dot(&v);
    let mut worst: f64 = 0.0;
    for (col, lam) in values.iter().enumerate() {
        let r = (&mv.column(col) - &v.column(col).mapv(|z| z * lam))
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
    }
    Ok(Eigen { values, vectors: Some(v), max_residual: Some(worst) })
}

/// Complex Schur form `H = Q S Q^H` with the `keep` eigenvalues of largest modulus moved to the
/// leading block. Matrices are row-major on input and output.
fn sorted_schur(h: &CMat, keep: usize) -> Result<(CMat, CMat)> {
    let n = h.nrows();
    let ni = n as c_int;
    let mut a: Vec<C64> = h.t().iter().copied().collect();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut vs = vec![C64::new(0.0, 0.0); n * n];
    let mut sdim: c_int = 0;
    let lwork = (4 * n).max(1) as c_int;
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    let mut rwork = vec![0.0; n];
    let mut bwork = vec![0 as c_int; n];
    let mut info: c_int = 0;
    unsafe {
        lapack_sys::zgees_(
            b"V".as_ptr() as *const c_char,
            b"N".as_ptr() as *const c_char,
            None,
            &ni,
            a.as_mut_ptr() as *mut _,
            &ni,
            &mut sdim,
            w.as_mut_ptr() as *mut _,
            vs.as_mut_ptr() as *mut _,
            &ni,
            work.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(format!("zgees info={info}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[j].norm().partial_cmp(&w[i].norm()).unwrap());
    let mut select = vec![0 as c_int; n];
    for &i in order.iter().take(keep) {
        select[i] = 1;
    }
    let mut m_out: c_int = 0;
    let mut sdummy = 0.0;
    let mut sep = 0.0;
    let lwork2 = (n * n).max(1) as c_int;
    let mut work2 = vec![C64::new(0.0, 0.0); lwork2 as usize];
    unsafe {
        lapack_sys::ztrsen_(
            b"N".as_ptr() as *const c_char,
            b"V".as_ptr() as *const c_char,
            select.as_ptr(),
            &ni,
            a.as_mut_ptr() as *mut _,
            &ni,
            vs.as_mut_ptr() as *mut _,
            &ni,
            w.as_mut_ptr() as *mut _,
            &mut m_out,
            &mut sdummy,
            &mut sep,
            work2.as_mut_ptr() as *mut _,
            &lwork2,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(format!("ztrsen info={info}")));
    }
    let s = Array2::from_shape_vec((n, n), a).unwrap().reversed_axes().as_standard_layout().to_owned();
    let q = Array2::from_shape_vec((n, n), vs).unwrap().reversed_axes().as_standard_layout().to_owned();
    Ok((s, q))
}

/// Eigenvectors of an upper triangular matrix by back substitution (columns, unnormalized).
fn triangular_eigenvectors(s: ArrayView2<C64>) -> CMat {
    let n = s.nrows();
    let mut y = CMat::zeros((n, n));
    let scale = s.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    for i in 0..n {
        y[[i, i]] = C64::new(1.0, 0.0);
        for r in (0..i).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for c in r + 1..=i {
                acc += s[[r, c]] * y[[c, i]];
            }
            let mut den = s[[r, r]] - s[[i, i]];
            if den.norm() < 1e-14 * scale {
                den = C64::new(1e-14 * scale, 0.0);
            }
            y[[r, i]] = -acc / den;
        }
    }
    y
}

/// Options for [`largest_eigenpairs`].
#[derive(Debug, Clone)]
pub struct KrylovOptions {
    pub subspace: usize,
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { subspace: 40, tol: 1e-10, max_restarts: 400, seed: 7 }
    }
}

/// Ritz pairs returned by [`largest_eigenpairs`].
#[derive(Debug, Clone)]
pub struct RitzPairs {
    pub values: Vec<C64>,
    pub vectors: Vec<Array1<C64>>,
    pub residuals: Vec<f64>,
    pub matvecs: usize,
}

fn norm(v: ArrayView1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// The `nev` eigenvalues of largest modulus of a matrix-free operator (Krylov-Schur).
pub fn largest_eigenpairs<F>(dim: usize, nev: usize, mut op: F, opts: &KrylovOptions) -> Result<RitzPairs>
where
    F: FnMut(ArrayView1<C64>) -> Array1<C64>,
{
    if nev == 0 || nev >= dim {
        return Err(Error::InvalidParameter(format!("nev={nev} for dim={dim}")));
    }
    let m = opts.subspace.max(2 * nev + 8).min(dim);
    if m <= nev + 1 {
        return Err(Error::InvalidParameter("subspace too small".into()));
    }
    let keep = (nev + (m - nev) / 2).min(m - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_vec = |rng: &mut ChaCha8Rng| {
        Array1::from_shape_fn(dim, |_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    };
    let mut v = CMat::zeros((m + 1, dim));
    let mut h = CMat::zeros((m + 1, m));
    let v0 = random_vec(&mut rng);
    let n0 = norm(v0.view());
    v.row_mut(0).assign(&v0.mapv(|z| z / n0));
    let mut k = 0usize;
    let mut matvecs = 0usize;
    for _restart in 0..opts.max_restarts {
        for j in k..m {
            let mut w = op(v.row(j));
            matvecs += 1;
            let basis = v.slice(s![0..=j, ..]);
            let mut coeff = Array1::<C64>::zeros(j + 1);
            for _pass in 0..2 {
                let c = basis.mapv(|z| z.conj()).dot(&w);
                w = &w - &basis.t().dot(&c);
                coeff = coeff + c;
            }
            let mut beta = norm(w.view());
            let scale = coeff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(beta);
            if beta < 1e-13 * scale.max(1e-300) {
                // invariant subspace: continue with a fresh orthogonal direction
                let mut r = random_vec(&mut rng);
                for _pass in 0..2 {
                    let c = basis.mapv(|z| z.conj()).dot(&r);
                    r = &r - &basis.t().dot(&c);
                }
                let nr = norm(r.view());
                w = r.mapv(|z| z / nr);
                beta = 0.0;
                v.row_mut(j + 1).assign(&w);
            } else {
                v.row_mut(j + 1).assign(&w.mapv(|z| z / beta));
            }
            h.slice_mut(s![0..=j, j]).assign(&coeff);
            h[[j + 1, j]] = C64::new(beta, 0.0);
        }
        let hm = h.slice(s![0..m, 0..m]).to_owned();
        let (sm, q) = sorted_schur(&hm, keep)?;
        let beta = h[[m, m - 1]];
        let b: Array1<C64> = q.row(m - 1).mapv(|z| z * beta);
        let lam_max = (0..m).map(|i| sm[[i, i]].norm()).fold(0.0, f64::max).max(1e-300);
        // eigenvalues of the leading block, largest first
        let mut lead: Vec<usize> = (0..keep).collect();
        lead.sort_by(|&a, &c| sm[[c, c]].norm().partial_cmp(&sm[[a, a]].norm()).unwrap());
        let block = sm.slice(s![0..keep, 0..keep]);
        let y = triangular_eigenvectors(block);
        let residual_of = |i: usize| -> f64 {
            let yi = y.column(i);
            let ny = norm(yi);
            (b.slice(s![0..keep]).dot(&yi)).norm() / ny
        };
        let wanted: Vec<usize> = lead.iter().copied().take(nev).collect();
        let converged = wanted.iter().all(|&i| residual_of(i) < opts.tol * lam_max);
        if converged {
            let basis = v.slice(s![0..m, ..]);
            let qk = q.slice(s![.., 0..keep]);
            let mut values = Vec::with_capacity(nev);
            let mut vectors = Vec::with_capacity(nev);
            let mut residuals = Vec::with_capacity(nev);
            for &i in &wanted {
                let coeffs = qk.dot(&y.column(i));
                let x = basis.t().dot(&coeffs);
                let nx = norm(x.view());
                values.push(sm[[i, i]]);
                residuals.push(residual_of(i));
                vectors.push(x.mapv(|z| z / nx));
            }
            return Ok(RitzPairs { values, vectors, residuals, matvecs });
        }
        // truncate to the kept Schur block
        let basis = v.slice(s![0..m, ..]).to_owned();
        let new_basis = q.slice(s![.., 0..keep]).t().dot(&basis);
        let last = v.row(m).to_owned();
        v.fill(C64::new(0.0, 0.0));
        v.slice_mut(s![0..keep, ..]).assign(&new_basis);
        v.row_mut(keep).assign(&last);
        h.fill(C64::new(0.0, 0.0));
        h.slice_mut(s![0..keep, 0..keep]).assign(&sm.slice(s![0..keep, 0..keep]));
        h.slice_mut(s![keep, 0..keep]).assign(&b.slice(s![0..keep]));
        k = keep;
    }
    Err(Error::Eigensolver("Krylov-Schur did not converge".into()))
}

/// Inverse participation ratio `sum |v_i|^4 / (sum |v_i|^2)^2`.
pub fn ipr(v: ArrayView1<C64>) -> f64 {
    let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let n4: f64 = v.iter().map(|z| z.norm_sqr().powi(2)).sum();
    n4 / (n2 * n2)
}

/// Columns of `m` as owned vectors.
pub fn columns(m: &CMat) -> Vec<Array1<C64>> {
    m.axis_iter(Axis(1)).map(|c| c.to_owned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMat::from_shape_fn((n, n), |_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn blas_products_match_plain_loops() {
        assert_eq!(blas_self_check(256), 0.0);
    }

    #[test]
    fn trace_power_matches_eigenvalues() {
        let m = random_matrix(12, 1);
        let e = eig(&m, true).unwrap();
        assert!(e.max_residual.unwrap() < 1e-10);
        for p in 1..6 {
            let direct = trace_power(&m, p);
            let spec: C64 = e.values.iter().map(|l| l.powu(p as u32)).sum();
            assert!((direct - spec).norm() < 1e-9 * direct.norm().max(1.0), "p={p}");
        }
    }

    #[test]
    fn tridiagonal_reconstructs() {
        let d = [1.0, -0.5, 2.0, 0.3];
        let e = [0.7, 0.2, -1.1];
        let (w, v) = tridiagonal_eigh(&d, &e).unwrap();
        let mut t = Array2::<f64>::zeros((4, 4));
        for i in 0..4 {
            t[[i, i]] = d[i];
        }
        for i in 0..3 {
            t[[i, i + 1]] = e[i];
            t[[i + 1, i]] = e[i];
        }
        let rec = v.dot(&Array2::from_diag(&Array1::from(w))).dot(&v.t());
        assert!((&rec - &t).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn krylov_schur_finds_dominant_eigenvalues() {
        let n = 300;
        let m = random_matrix(n, 3);
        let full = eig(&m, false).unwrap();
        let ritz = largest_eigenpairs(n, 4, |x| m.dot(&x), &KrylovOptions::default()).unwrap();
        let mut got = ritz.values.clone();
        got.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
        for (a, b) in got.iter().zip(full.values.iter()) {
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
        for (lam, x) in ritz.values.iter().zip(ritz.vectors.iter()) {
            let r = &m.dot(x) - &x.mapv(|z| z * lam);
            assert!(norm(r.view()) < 1e-7);
        }
    }
}

/// Compares a BLAS product of order `n` against a plain triple loop; returns the largest deviation.
pub fn blas_self_check(n: usize) -> f64 {
    let x = Array2::<f64>::from_shape_fn((n, n), |(a, b)| ((a * 7 + b * 3) % 11) as f64 - 5.0);
    let y = x.dot(&x);
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let g: f64 = (0..n).map(|k| x[[a, k]] * x[[k, b]]).sum();
            worst = worst.max((g - y[[a, b]]).abs());
        }
    }
    worst
}
