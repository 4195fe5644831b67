//! Closed-form dual of the spin-1/2 kicked Ising chain.
//!
//! The single-site kick is written as `u(s, s') = e^eta exp(-i K s s' - i h (s + s')/2)`
//! with `s = +-1`, turning `Tr U^T` into a two-dimensional Ising partition function
//! with couplings `J` (space) and `K` (time). Exchanging the roles of the two directions
//! gives a kicked chain of `T` spins with coupling `K` and complex field `(b~, phi~)`.

use super::params::SpinChainParams;
use super::quantum::{increment, single_site_kick};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, I};
use ndarray::Array2;

/// Complex parameters of the dual spin-1/2 chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualParamsHalfSpin {
    pub k: C64,
    pub eta: C64,
    pub h: C64,
    pub b_tilde: C64,
    pub phi_tilde: C64,
    /// Per-site-per-kick weight ratio `e^(eta - eta~)`.
    pub g: C64,
    pub eta_tilde: C64,
    /// Sign chosen for `lambda = +-sqrt((1 - x~^2)/(1 - x^2))`.
    pub lambda: C64,
    /// Which of the four roots `e^(-iK)` was taken (`0..4`, multiplying by `i^k`).
    pub k_branch: u8,
    /// Dual kick matrix elements `(u~_{++}, u~_{+-}, u~_{--})`.
    pub kick: [C64; 3],
}

/// Dual parameters for `two_j = 1`.
pub fn dual_params_half_spin(params: &SpinChainParams) -> Result<DualParamsHalfSpin> {
    if params.two_j != 1 {
        return Err(Error::InvalidParameter("closed-form dual needs two_j = 1".into()));
    }
    let u = single_site_kick(1, params.bx, params.bz)?;
    // index 0 is m = -1/2, index 1 is m = +1/2
    let (upp, umm, upm) = (u[[1, 1]], u[[0, 0]], u[[1, 0]]);
    let x = params.b().sin() * params.phi().sin();
    if x.abs() < 1e-12 {
        return Err(Error::BranchSingularity("x = sin b sin phi vanishes".into()));
    }
    let e4 = upp * umm / (upm * upm);
    if e4.norm() < 1e-12 {
        return Err(Error::BranchSingularity("exp(-4iK) = 0 at x = 1".into()));
    }
    // K = i log(e4) / 4, principal root then shifted into Re K in [0, pi/2)
    let k0 = I * e4.ln() / 4.0;
    let shift = (k0.re / std::f64::consts::FRAC_PI_2).floor();
    let k = k0 - shift * std::f64::consts::FRAC_PI_2;
    let k_branch = shift.rem_euclid(4.0) as u8;
    let emik = (-I * k).exp();
    let e_eta = upm * emik;
    let e_mih = upp / (emik * e_eta);
    let eta = e_eta.ln();
    let h = I * e_mih.ln();

    let coupling = params.coupling;
    let denom = C64::new(1.0, 0.0) - (-4.0 * I * coupling).exp();
    if denom.norm() < 1e-12 {
        return Err(Error::BranchSingularity("J is a multiple of pi/2".into()));
    }
    let xt2 = 1.0 / denom;
    let xt = xt2.sqrt();
    let mut lambda = ((1.0 - xt2) / (1.0 - x * x)).sqrt();
    let ut_pm = -I * xt;
    let e_eta_t = ut_pm * (-I * coupling).exp();
    let want_pp = ut_pm * (-2.0 * I * coupling).exp() * e_mih;
    if (lambda * upp - want_pp).norm() > (-lambda * upp - want_pp).norm() {
        lambda = -lambda;
    }
    let ut_pp = lambda * upp;
    let ut_mm = lambda * umm;
    let cos_bt = lambda * params.b().cos();
    let b_tilde = cos_bt.acos();
    let sin_bt = b_tilde.sin();
    let a = lambda * params.b().sin() * params.phi().cos();
    let phi_tilde = if sin_bt.norm() < 1e-14 {
        C64::new(0.0, 0.0)
    } else {
        -I * ((a + I * xt) / sin_bt).ln()
    };
    let eta_tilde = e_eta_t.ln();
    Ok(DualParamsHalfSpin {
        k,
        eta,
        h,
        b_tilde,
        phi_tilde,
        g: (eta - eta_tilde).exp(),
        eta_tilde,
        lambda,
        k_branch,
        kick: [ut_pp, ut_pm, ut_mm],
    })
}

/// `W = g^T U_I(K) U_K(b~, phi~)` on `T` spins, in the same basis order as the numerical dual.
pub fn analytic_dual(params: &SpinChainParams, t: usize) -> Result<CMat> {
    let dp = dual_params_half_spin(params)?;
    let dim = super::params::checked_pow(2, t)?;
    let [pp, pm, mm] = dp.kick;
    let ut = [[mm, pm], [pm, pp]];
    let sigma = [-1.0, 1.0];
    let mut digits = vec![0usize; t];
    let mut states = Vec::with_capacity(dim);
    for _ in 0..dim {
        states.push(digits.clone());
        increment(&mut digits, 2);
    }
    let gt = dp.g.powi(t as i32);
    let diag: Vec<C64> = states
        .iter()
        .map(|s| {
            let e: f64 = (0..t).map(|k| sigma[s[k]] * sigma[s[(k + 1) % t]]).sum();
            gt * (-I * dp.k * e).exp()
        })
        .collect();
    Ok(Array2::from_shape_fn((dim, dim), |(r, c)| {
        let kick: C64 = (0..t).map(|k| ut[states[r][k]][states[c][k]]).product();
        diag[r] * kick
    }))
}
