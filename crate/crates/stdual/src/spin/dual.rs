//! Spatial transfer operator `W` with `Tr W^N = Tr U^T`.

use super::contract::{bond_matrix, floquet_trace, rung_weights};
use super::params::SpinChainParams;
use super::quantum::{build_floquet, increment, magnetic_numbers, single_site_kick, ising_constant};
use crate::error::{Error, Result};
use crate::fit::{power_law_fit, PowerLawFit};
use crate::linalg::{self, cis, eig, largest_eigenpairs, Eigen, KrylovOptions, CMat, C64};
use ndarray::{Array1, Array2, ArrayView1};
use rustfft::FftPlanner;
use std::f64::consts::{FRAC_PI_2, TAU};

/// Dense transfer operator acting on `T`-tuples of single-site states.
#[derive(Debug, Clone)]
pub struct DualOperator {
    pub matrix: CMat,
    pub t: usize,
    pub params: SpinChainParams,
    /// Sorted by descending modulus.
    pub eigenvalues: Option<Vec<C64>>,
    pub eigenvectors: Option<CMat>,
    pub max_residual: Option<f64>,
}

impl DualOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `Tr W^N` by matrix powers.
    pub fn trace_power(&self, n: usize) -> C64 {
        linalg::trace_power(&self.matrix, n)
    }

    /// Fills in the spectrum (and eigenvectors when requested).
    pub fn with_spectrum(mut self, vectors: bool) -> Result<Self> {
        let e = dual_spectrum(&self.matrix, vectors)?;
        self.eigenvalues = Some(e.values);
        self.eigenvectors = e.vectors;
        self.max_residual = e.max_residual;
        Ok(self)
    }
}

/// `W[s, s'] = prod_t exp(-i c m(s_t) m(s'_t)) * prod_t u(s_t, s_{t+1})`.
pub fn transfer_matrix(params: &SpinChainParams, cap: usize) -> Result<CMat> {
    transfer_matrix_shifted(params, params.t, 0, cap)
}

/// Same as [`transfer_matrix`] with the time labels rotated by `shift`.
pub fn transfer_matrix_shifted(params: &SpinChainParams, t: usize, shift: usize, cap: usize) -> Result<CMat> {
    if t == 0 {
        return Err(Error::InvalidParameter("T must be >= 1".into()));
    }
    let d = params.site_dim();
    let dim = super::params::checked_pow(d, t)?;
    if dim > cap {
        return Err(Error::CapExceeded { dim, cap });
    }
    let u = single_site_kick(params.two_j, params.bx, params.bz)?;
    let m = magnetic_numbers(params.two_j);
    let c = ising_constant(params);
    let tuples: Vec<Vec<usize>> = {
        let mut out = Vec::with_capacity(dim);
        let mut digits = vec![0usize; t];
        for _ in 0..dim {
            let mut rotated = digits.clone();
            rotated.rotate_left(shift % t);
            out.push(rotated);
            increment(&mut digits, d);
        }
        out
    };
    let local: Vec<C64> = tuples
        .iter()
        .map(|s| (0..t).map(|k| u[[s[k], s[(k + 1) % t]]]).product())
        .collect();
    let mag: Vec<Vec<f64>> = tuples.iter().map(|s| s.iter().map(|&k| m[k]).collect()).collect();
    Ok(Array2::from_shape_fn((dim, dim), |(r, q)| {
        let e: f64 = mag[r].iter().zip(&mag[q]).map(|(a, b)| a * b).sum();
        local[r] * cis(-c * e)
    }))
}

pub fn transfer_operator(params: &SpinChainParams, t: usize, cap: usize) -> Result<DualOperator> {
    let p = params.with_t(t);
    Ok(DualOperator {
        matrix: transfer_matrix(&p, cap)?,
        t,
        params: p,
        eigenvalues: None,
        eigenvectors: None,
        max_residual: None,
    })
}

/// Relative mismatch between the two sides of the duality relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityReport {
    pub trace_u: C64,
    pub trace_w: C64,
    pub relative_error: f64,
    /// `false` when `U` was too large and `W` was checked against its own spectrum.
    pub against_floquet: bool,
}

/// `|Tr U^T - Tr W^N| / max(|Tr U^T|, eps)`.
pub fn duality_check(params: &SpinChainParams, n: usize, t: usize, cap: usize) -> Result<DualityReport> {
    let p = params.with_n(n).with_t(t);
    let w = transfer_matrix(&p, cap)?;
    let trace_w = linalg::trace_power(&w, n);
    let (reference, against_floquet) = match build_floquet(&p, cap) {
        Ok(u) => (linalg::trace_power(&u, t), true),
        Err(Error::CapExceeded { .. }) | Err(Error::DimensionOverflow) => {
            let ev = eig(&w, false)?.values;
            (ev.iter().map(|l| l.powi(n as i32)).sum(), false)
        }
        Err(e) => return Err(e),
    };
    Ok(DualityReport {
        trace_u: reference,
        trace_w,
        relative_error: (reference - trace_w).norm() / reference.norm().max(f64::EPSILON),
        against_floquet,
    })
}

/// Full spectrum of a dense dual operator, sorted by descending modulus.
pub fn dual_spectrum(w: &CMat, vectors: bool) -> Result<Eigen> {
    let e = eig(w, vectors)?;
    if let Some(r) = e.max_residual {
        let scale = e.values.first().map(|z| z.norm()).unwrap_or(1.0).max(1.0);
        if r > 1e-7 * scale {
            return Err(Error::Eigensolver(format!("eigenpair residual {r:.3e}")));
        }
    }
    Ok(e)
}

/// Applies `W` to a vector without forming it; `T = 2` only.
fn apply_t2(f: &CMat, e: &CMat, v: ArrayView1<C64>) -> Array1<C64> {
    let d = f.nrows();
    let x = v.to_shape((d, d)).unwrap();
    let y = e.dot(&x).dot(e) * f;
    y.into_shape_with_order(d * d).unwrap()
}

/// The `nev` largest-modulus eigenpairs of `W` for `params.t`.
pub fn largest_dual_eigenpairs(params: &SpinChainParams, nev: usize, cap: usize) -> Result<(Vec<C64>, Vec<Array1<C64>>)> {
    let dim = params.dual_dim()?;
    if params.t == 2 && dim > 400 {
        let f = rung_weights(params)?;
        let e = bond_matrix(params);
        let opts = KrylovOptions { subspace: (4 * nev + 24).max(40), ..Default::default() };
        let r = largest_eigenpairs(dim, nev, |v| apply_t2(&f, &e, v), &opts)?;
        return Ok((r.values, r.vectors));
    }
    let w = transfer_matrix(params, cap)?;
    let e = dual_spectrum(&w, true)?;
    let vecs = linalg::columns(e.vectors.as_ref().unwrap());
    let k = nev.min(e.values.len());
    Ok((e.values[..k].to_vec(), vecs[..k].to_vec()))
}

/// One row of [`largest_eigenvalue_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub j: usize,
    pub abs_max: f64,
    /// `arg` of the four largest eigenvalues, in descending-modulus order.
    pub phases: Vec<f64>,
    /// `arg(lambda) - (j+1/2) S - pi l/2` for the nearest rung `l`.
    pub residuals: Vec<f64>,
    pub rungs: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct EigenvalueScan {
    pub rows: Vec<ScanRow>,
    pub alpha0: PowerLawFit<f64>,
    pub reference_action: f64,
}

/// Largest dual eigenvalues for each `j`, with the algebraic growth exponent of `|lambda_max|`.
///
/// `reference_action` is the per-site action `S` used for the phase residuals.
pub fn largest_eigenvalue_scan(params: &SpinChainParams, t: usize, j_list: &[usize], reference_action: f64, cap: usize) -> Result<EigenvalueScan> {
    if j_list.len() < 4 {
        return Err(Error::DegenerateFit(format!("{} j values, need at least 4", j_list.len())));
    }
    let mut rows = Vec::with_capacity(j_list.len());
    for &j in j_list {
        let p = params.with_two_j(2 * j as u32).with_t(t);
        let (vals, _) = largest_dual_eigenpairs(&p, 4, cap)?;
        let kappa = p.kappa();
        let phases: Vec<f64> = vals.iter().map(|z| z.arg()).collect();
        let (rungs, residuals) = phase_residuals(&phases, kappa * reference_action).into_iter().unzip();
        rows.push(ScanRow { j, abs_max: vals[0].norm(), residuals, rungs, phases });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.j as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.abs_max).collect();
    let alpha0 = power_law_fit(&x, &y)?;
    Ok(EigenvalueScan { rows, alpha0, reference_action })
}

/// Nearest rung `l` of the ladder `base + pi l / 2` and the residual to it, per phase.
pub fn phase_residuals(phases: &[f64], base: f64) -> Vec<(usize, f64)> {
    phases
        .iter()
        .map(|&p| {
            let off = (p - base).rem_euclid(TAU);
            let l = (off / FRAC_PI_2).round();
            ((l as usize) % 4, off - l * FRAC_PI_2)
        })
        .collect()
}

/// Inverse participation ratios of an eigenvector of a `T`-site dual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Localization {
    pub ipr_coordinate: f64,
    pub ipr_momentum: f64,
    /// `1 / dim`, the value for a uniform vector.
    pub uniform: f64,
}

/// IPR in the product basis and after a unitary DFT on every tuple slot.
pub fn eigenvector_localization(v: ArrayView1<C64>, site_dim: usize, t: usize) -> Localization {
    let dim = v.len();
    let mut data: Vec<C64> = v.to_vec();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(site_dim);
    let norm = 1.0 / (site_dim as f64).sqrt();
    let mut buf = vec![C64::new(0.0, 0.0); site_dim];
    for axis in 0..t {
        let stride = site_dim.pow((t - 1 - axis) as u32);
        for base in 0..dim {
            if (base / stride) % site_dim != 0 {
                continue;
            }
            for (k, b) in buf.iter_mut().enumerate() {
                *b = data[base + k * stride];
            }
            fft.process(&mut buf);
            for (k, b) in buf.iter().enumerate() {
                data[base + k * stride] = b * norm;
            }
        }
    }
    Localization {
        ipr_coordinate: linalg::ipr(v),
        ipr_momentum: linalg::ipr(Array1::from(data).view()),
        uniform: 1.0 / dim as f64,
    }
}

/// `Tr U^T` evaluated through the cheapest available contraction.
pub fn dual_trace(params: &SpinChainParams, cap: usize) -> Result<C64> {
    floquet_trace(params, cap)
}
