//! Quantised coupled cat maps, their dual transfer operator and the spectral form factor.

use super::classical::{build_m, CatMapParams, Potential};
use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMat, C64};
use crate::spin::quantum::kron;
use ndarray::Array2;
use ndarray_linalg::QR;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Largest dense dimension built by default.
pub const DEFAULT_CAT_CAP: usize = 4096;

/// Quantum coupled cat map on `N` sites with `L` levels per site (`hbar = 1/(2 pi L)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatQuantumParams {
    pub l: usize,
    pub a: i64,
    pub b: i64,
    pub n: usize,
    pub t: usize,
    pub potential: Potential<f64>,
    /// Dyson index of the reference ensemble.
    pub beta: u8,
}

impl CatQuantumParams {
    pub fn new(l: usize, a: i64, b: i64, n: usize, t: usize) -> Result<Self> {
        let p = Self { l, a, b, n, t, potential: Potential::zero(), beta: 1 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::InvalidParameter("L must be >= 2".into()));
        }
        if self.n == 0 || self.t == 0 {
            return Err(Error::InvalidParameter("N and T must be >= 1".into()));
        }
        if self.beta != 1 && self.beta != 2 {
            return Err(Error::InvalidParameter(format!("beta = {} not in {{1, 2}}", self.beta)));
        }
        Ok(())
    }

    pub fn nu(&self) -> i64 {
        self.a + self.b
    }

    pub fn with_potential(mut self, v: Potential<f64>) -> Self {
        self.potential = v;
        self
    }

    /// Classical chain with `d = -1`.
    pub fn classical(&self) -> CatMapParams<f64> {
        CatMapParams { a: self.a, b: self.b, d: -1, n: self.n, t: self.t, potential: self.potential.clone() }
    }

    /// `L^sites`, checked against `cap`.
    pub fn dim(&self, sites: usize, cap: usize) -> Result<usize> {
        let d = (0..sites).try_fold(1usize, |acc, _| acc.checked_mul(self.l)).ok_or(Error::DimensionOverflow)?;
        if d > cap {
            return Err(Error::CapExceeded { dim: d, cap });
        }
        Ok(d)
    }

    /// Number of integer steps for which `W_T` is cheaper than `U_N`.
    pub fn tau(&self) -> f64 {
        (self.n * self.t) as f64 / (self.l as f64).powi(self.n as i32)
    }

    /// Heisenberg time of the dual operator relative to `N`.
    pub fn tau_dual(&self) -> f64 {
        (self.n * self.t) as f64 / (self.l as f64).powi(self.t as i32)
    }
}

/// `f_1(m, k) = -(2 pi / L)(k m + L^2 V(m / L))`.
pub fn f1(l: usize, v: &Potential<f64>, m: usize, k: usize) -> f64 {
    let lf = l as f64;
    -TAU / lf * ((k * m) as f64 + lf * lf * v.value(m as f64 / lf))
}

/// `f_2(m, k) = (pi / L)(-2 k m + a m^2 + b k^2) + pi / 4`.
pub fn f2(l: usize, a: i64, b: i64, m: usize, k: usize) -> f64 {
    let (m, k) = (m as f64, k as f64);
    PI / l as f64 * (-2.0 * k * m + a as f64 * m * m + b as f64 * k * k) + PI / 4.0
}

/// `L x L` kernel `L^{-1/2} exp(i f(m, k))`, `m, k = 0..L`.
pub fn kernel<F: Fn(usize, usize) -> f64>(l: usize, f: F) -> CMat {
    let norm = (l as f64).sqrt().recip();
    Array2::from_shape_fn((l, l), |(m, k)| cis(f(m, k)) * norm)
}

/// Single-site propagator `<m|u_K|k> = L^{-1/2} exp(i f_2(m, k))`.
pub fn build_u_kick(l: usize, a: i64, b: i64) -> Result<CMat> {
    if l < 2 {
        return Err(Error::InvalidParameter("L must be >= 2".into()));
    }
    let u = kernel(l, |m, k| f2(l, a, b, m, k));
    let defect = linalg::unitarity_defect(&u);
    if defect > 1e-10 {
        return Err(Error::NotUnitary { defect });
    }
    Ok(u)
}

/// Diagonal `exp(i sum_n f(eta_n, eta_{n+1}))` on a ring of `sites`, first site most significant.
pub fn ring_diagonal<F: Fn(usize, usize) -> f64>(l: usize, sites: usize, f: F) -> Vec<C64> {
    let dim = l.pow(sites as u32);
    let mut digits = vec![0usize; sites];
    let mut out = Vec::with_capacity(dim);
    for _ in 0..dim {
        let phase: f64 = (0..sites).map(|s| f(digits[s], digits[(s + 1) % sites])).sum();
        out.push(cis(phase));
        crate::spin::quantum::increment(&mut digits, l);
    }
    out
}

/// Interaction diagonal `U_I[f_1]` on `N` sites.
pub fn build_u_int(params: &CatQuantumParams, cap: usize) -> Result<Vec<C64>> {
    params.validate()?;
    params.dim(params.n, cap)?;
    Ok(ring_diagonal(params.l, params.n, |m, k| f1(params.l, &params.potential, m, k)))
}

fn diag_times(diag: &[C64], kick: &CMat, sites: usize) -> CMat {
    let mut uk = kick.clone();
    for _ in 1..sites {
        uk = kron(&uk, kick);
    }
    for (mut row, p) in uk.rows_mut().into_iter().zip(diag) {
        row.mapv_inplace(|z| z * p);
    }
    uk
}

/// `U_N = U_I[f_1] U_K[f_2]` of dimension `L^N`.
pub fn build_u_cat(params: &CatQuantumParams, cap: usize) -> Result<CMat> {
    chain_operator(params, params.n, cap)
}

/// `U_I[f_1] U_K[f_2]` on a ring of `sites`.
pub fn chain_operator(params: &CatQuantumParams, sites: usize, cap: usize) -> Result<CMat> {
    params.validate()?;
    params.dim(sites, cap)?;
    let diag = ring_diagonal(params.l, sites, |m, k| f1(params.l, &params.potential, m, k));
    Ok(diag_times(&diag, &build_u_kick(params.l, params.a, params.b)?, sites))
}

/// Dual operator `W_T = U_I[f_2] U_K[f_1]` of dimension `L^T`.
pub fn build_w_cat(params: &CatQuantumParams, cap: usize) -> Result<CMat> {
    params.validate()?;
    params.dim(params.t, cap)?;
    let l = params.l;
    let diag = ring_diagonal(l, params.t, |m, k| f2(l, params.a, params.b, m, k));
    let w = kernel(l, |m, k| f1(l, &params.potential, m, k));
    Ok(diag_times(&diag, &w, params.t))
}

/// `Lambda = diag exp(i pi b / L sum_t sigma_t^2)` with `W_T = Lambda U_T Lambda^dagger`.
pub fn build_lambda(params: &CatQuantumParams, cap: usize) -> Result<Vec<C64>> {
    params.dim(params.t, cap)?;
    let l = params.l;
    let c = PI * params.b as f64 / l as f64;
    Ok(ring_diagonal(l, params.t, |m, _| c * (m * m) as f64))
}

/// Trace identities between `U_N`, `W_T` and the length-`T` chain `U_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatDualityReport {
    pub tr_u: C64,
    pub tr_w: C64,
    pub tr_u_swapped: C64,
    /// `|Tr U_N^T - Tr W_T^N| / max(|Tr U_N^T|, 1)`.
    pub error_dual: f64,
    /// `|Tr U_N^T - Tr U_T^N| / max(|Tr U_N^T|, 1)`.
    pub error_swapped: f64,
    /// `max |W_T - Lambda U_T Lambda^dagger|`.
    pub conjugation_defect: f64,
    pub w_unitarity_defect: f64,
}

pub fn duality_check_cat(params: &CatQuantumParams, cap: usize) -> Result<CatDualityReport> {
    let u = build_u_cat(params, cap)?;
    let w = build_w_cat(params, cap)?;
    let ut = chain_operator(params, params.t, cap)?;
    let lam = build_lambda(params, cap)?;
    let tr_u = linalg::trace_power(&u, params.t);
    let tr_w = linalg::trace_power(&w, params.n);
    let tr_u_swapped = linalg::trace_power(&ut, params.n);
    let scale = tr_u.norm().max(1.0);
    let conj = Array2::from_shape_fn(ut.dim(), |(i, j)| lam[i] * ut[[i, j]] * lam[j].conj());
    let conjugation_defect = (&w - &conj).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(CatDualityReport {
        tr_u,
        tr_w,
        tr_u_swapped,
        error_dual: (tr_u - tr_w).norm() / scale,
        error_swapped: (tr_u - tr_u_swapped).norm() / scale,
        conjugation_defect,
        w_unitarity_defect: linalg::unitarity_defect(&w),
    })
}

/// `Tr U_N^T` through whichever of `U_N`, `W_T` is smaller.
pub fn cat_trace(params: &CatQuantumParams, cap: usize) -> Result<C64> {
    if params.t < params.n {
        Ok(linalg::trace_power(&build_w_cat(params, cap)?, params.n))
    } else {
        Ok(linalg::trace_power(&build_u_cat(params, cap)?, params.t))
    }
}

/// Momentum-resolved traces `Tr(P_k U_N^T)`, `k = 0..N`; they sum to `Tr U_N^T`.
pub fn sector_traces(params: &CatQuantumParams, cap: usize) -> Result<Vec<C64>> {
    let u = build_u_cat(params, cap)?;
    let ut = linalg::matrix_power(&u, params.t);
    let (l, n) = (params.l, params.n);
    let dim = ut.nrows();
    let shift = |idx: usize, s: usize| {
        let mut digits: Vec<usize> = (0..n).map(|k| (idx / l.pow((n - 1 - k) as u32)) % l).collect();
        digits.rotate_left(s % n);
        digits.iter().fold(0, |acc, &x| acc * l + x)
    };
    let shifted: Vec<C64> = (0..n).map(|s| (0..dim).map(|i| ut[[shift(i, s), i]]).sum()).collect();
    Ok((0..n)
        .map(|k| {
            shifted
                .iter()
                .enumerate()
                .map(|(s, z)| z * cis(-TAU * (k * s) as f64 / n as f64))
                .sum::<C64>()
                / n as f64
        })
        .collect())
}

/// Parameter regime of a form-factor point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `N` below the Ehrenfest number: few-particle universality.
    Universal,
    /// `NT < L^T`: small-`tau` linear growth of the dual ensemble.
    Linear,
    /// `NT >= L^T`: saturated dual ensemble, `K ~ L^{T-N}`.
    Exponential,
}

/// Ehrenfest number `ln(2 pi L) / Lambda` with `Lambda` the largest stability exponent.
pub fn ehrenfest_number(params: &CatQuantumParams) -> f64 {
    let lyap = build_m(&params.classical()).lyapunov();
    (TAU * params.l as f64).ln() / lyap
}

pub fn regime(params: &CatQuantumParams) -> Regime {
    if (params.n as f64) <= ehrenfest_number(params) {
        Regime::Universal
    } else if params.tau_dual() < 1.0 {
        Regime::Linear
    } else {
        Regime::Exponential
    }
}

/// Ensemble average of `|Tr U_N^T|^2 / (2 L^N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormFactorEstimate {
    pub k: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub tau: f64,
    pub tau_dual: f64,
    pub regime: Regime,
    /// Normalisation `s L^N` with `s = 2` unless disabled.
    pub norm: f64,
    pub seed: u64,
    pub traces: Vec<C64>,
    pub warnings: Vec<String>,
}

impl FormFactorEstimate {
    /// Mean and standard error of `|tr|^2 / norm`; the error is zero when all samples agree.
    pub fn moments(traces: &[C64], norm: f64) -> Result<(f64, f64)> {
        let n = traces.len();
        if n == 0 {
            return Err(Error::InvalidParameter("no samples".into()));
        }
        let vals: Vec<f64> = traces.iter().map(|z| z.norm_sqr() / norm).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 && vals.iter().any(|v| *v != vals[0]) {
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Ok((mean, stderr))
    }
}

/// Options for [`form_factor_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormFactorOptions {
    pub n_samples: usize,
    pub seed: u64,
    /// Amplitude of the random potential.
    pub eps: f64,
    pub harmonics: usize,
    /// Divides by `2 L^N` when set, by `L^N` otherwise.
    pub symmetry_factor: bool,
    pub cap: usize,
    /// Standard error above which a warning is recorded.
    pub tolerance: Option<f64>,
}

impl Default for FormFactorOptions {
    fn default() -> Self {
        Self { n_samples: 200, seed: 0, eps: 0.1, harmonics: 3, symmetry_factor: true, cap: DEFAULT_CAT_CAP, tolerance: None }
    }
}

/// Form factor over the random-potential ensemble with `params.potential.eps` as amplitude.
pub fn form_factor(params: &CatQuantumParams, n_samples: usize, seed: u64) -> Result<FormFactorEstimate> {
    let eps = if params.potential.is_zero() { FormFactorOptions::default().eps } else { params.potential.eps };
    form_factor_with(params, &FormFactorOptions { n_samples, seed, eps, ..Default::default() })
}

/// Sample `s` draws its potential from stream `s` of the seeded generator.
pub fn form_factor_with(params: &CatQuantumParams, opts: &FormFactorOptions) -> Result<FormFactorEstimate> {
    params.validate()?;
    if opts.n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    let traces = (0..opts.n_samples)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(s as u64);
            let p = params.clone().with_potential(Potential::random(opts.eps, opts.harmonics, &mut rng));
            cat_trace(&p, opts.cap)
        })
        .collect::<Result<Vec<_>>>()?;
    let ln = (params.l as f64).powi(params.n as i32);
    let norm = if opts.symmetry_factor { 2.0 * ln } else { ln };
    let (k, stderr) = FormFactorEstimate::moments(&traces, norm)?;
    let mut warnings = Vec::new();
    if let Some(tol) = opts.tolerance {
        if stderr > tol {
            warnings.push(format!("stderr {stderr:.3e} above tolerance {tol:.3e} with {} samples", opts.n_samples));
        }
    }
    Ok(FormFactorEstimate {
        k,
        stderr,
        n_samples: opts.n_samples,
        tau: params.tau(),
        tau_dual: params.tau_dual(),
        regime: regime(params),
        norm,
        seed: opts.seed,
        traces,
        warnings,
    })
}

/// Small-`tau` random-matrix form factor: `2 tau - tau ln(1 + 2 tau)` for `beta = 1`, `tau` for `beta = 2`.
pub fn k_rmt(tau: f64, beta: u8) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!("tau = {tau} outside [0, 1]")));
    }
    match beta {
        1 => Ok(2.0 * tau - tau * (1.0 + 2.0 * tau).ln()),
        2 => Ok(tau),
        _ => Err(Error::InvalidParameter(format!("beta = {beta} not in {{1, 2}}"))),
    }
}

/// [`k_rmt`] continued to `tau > 1`.
pub fn k_rmt_full(tau: f64, beta: u8) -> Result<f64> {
    if tau <= 1.0 {
        return k_rmt(tau, beta);
    }
    match beta {
        1 => Ok(2.0 - tau * ((2.0 * tau + 1.0) / (2.0 * tau - 1.0)).ln()),
        2 => Ok(1.0),
        _ => Err(Error::InvalidParameter(format!("beta = {beta} not in {{1, 2}}"))),
    }
}

/// `L^{T-N} K_RMT(NT / L^T)`.
pub fn dual_prediction(l: usize, n: usize, t: usize, beta: u8) -> Result<f64> {
    let lf = l as f64;
    let tau = (n * t) as f64 / lf.powi(t as i32);
    Ok(lf.powi(t as i32 - n as i32) * k_rmt_full(tau, beta)?)
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn haar_unitary<R: Rng>(dim: usize, rng: &mut R) -> Result<CMat> {
    let normal = rand_distr::StandardNormal;
    let g = Array2::from_shape_fn((dim, dim), |_| C64::new(rng.sample::<f64, _>(normal), rng.sample::<f64, _>(normal)));
    let (q, r) = g.qr().map_err(|e| Error::Eigensolver(e.to_string()))?;
    let mut q = q;
    for (j, mut col) in q.columns_mut().into_iter().enumerate() {
        let d = r[[j, j]];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        col.mapv_inplace(|z| z * ph);
    }
    Ok(q)
}

/// `<|Tr U^t|^2> / dim` over Haar unitaries; equals `min(t, dim) / dim`.
pub fn haar_form_factor(dim: usize, t: usize, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let traces = (0..n_samples)
        .map(|_| haar_unitary(dim, &mut rng).map(|u| linalg::trace_power(&u, t)))
        .collect::<Result<Vec<_>>>()?;
    FormFactorEstimate::moments(&traces, dim as f64)
}
