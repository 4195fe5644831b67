//! `Tr U^T` through the spatial transfer operator without forming `U`.
//!
//! For `T = 2` and short rings the site sums are eliminated one at a time,
//! which costs `O(d^4)` instead of the `O(d^6)` of dense `W` products.

use super::params::SpinChainParams;
use super::quantum::{ising_constant, kick_diagonal, magnetic_numbers, single_site_kick, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMat, C64};
use ndarray::{Array2, Axis};

/// Which contraction produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMethod {
    SingleSite,
    Ladder,
    DenseDual,
    DenseFloquet,
}

/// Bond matrix `E(m, m') = exp(-i c m m')`.
pub fn bond_matrix(params: &SpinChainParams) -> CMat {
    let m = magnetic_numbers(params.two_j);
    let c = ising_constant(params);
    Array2::from_shape_fn((m.len(), m.len()), |(a, b)| cis(-c * m[a] * m[b]))
}

/// `Tr U^T` for `params.n` sites and `params.t` kicks.
pub fn floquet_trace(params: &SpinChainParams, cap: usize) -> Result<C64> {
    floquet_trace_with_method(params, cap).map(|(z, _)| z)
}

pub fn floquet_trace_with_method(params: &SpinChainParams, cap: usize) -> Result<(C64, TraceMethod)> {
    params.validate()?;
    let (n, t) = (params.n, params.t);
    let e = bond_matrix(params);
    if t == 1 {
        let ud = kick_diagonal(params.two_j, params.bx, params.bz)?;
        if n == 1 {
            return Ok((ud.iter().enumerate().map(|(a, z)| z * e[[a, a]]).sum(), TraceMethod::SingleSite));
        }
        let d = ud.len();
        let w = Array2::from_shape_fn((d, d), |(a, b)| ud[a] * e[[a, b]]);
        return Ok((linalg::trace_power(&w, n), TraceMethod::SingleSite));
    }
    let u = single_site_kick(params.two_j, params.bx, params.bz)?;
    if t == 2 && n <= 4 {
        let f = u.mapv(|z| z * z);
        let z = match n {
            1 => ladder1(&f, &e),
            2 => ladder2(&f, &e),
            3 => ladder3(&f, &e),
            _ => ladder4(&f, &e),
        };
        return Ok((z, TraceMethod::Ladder));
    }
    let dual_dim = params.dual_dim();
    if let Ok(dd) = dual_dim {
        if dd <= cap {
            let w = super::dual::transfer_matrix(params, cap)?;
            return Ok((linalg::trace_power(&w, n), TraceMethod::DenseDual));
        }
    }
    let dim = params.hilbert_dim();
    if let Ok(dn) = dim {
        if dn <= cap {
            let u = super::quantum::build_floquet(params, cap)?;
            return Ok((linalg::trace_power(&u, t), TraceMethod::DenseFloquet));
        }
    }
    Err(Error::CapExceeded { dim: dual_dim.unwrap_or(usize::MAX).min(dim.unwrap_or(usize::MAX)), cap })
}

/// Traces for every `j = 1..=j_max` (`two_j = 2j`).
pub fn trace_series(params: &SpinChainParams, j_values: &[usize]) -> Result<Vec<C64>> {
    j_values
        .iter()
        .map(|&j| floquet_trace(&params.with_two_j(2 * j as u32), DEFAULT_DENSE_CAP))
        .collect()
}

fn ladder1(f: &CMat, e: &CMat) -> C64 {
    let d = f.nrows();
    let mut z = C64::new(0.0, 0.0);
    for a in 0..d {
        for b in 0..d {
            z += f[[a, b]] * e[[a, a]] * e[[b, b]];
        }
    }
    z
}

fn ladder2(f: &CMat, e: &CMat) -> C64 {
    let e2 = e.mapv(|z| z * z);
    let inner = e2.dot(f).dot(&e2);
    f.iter().zip(inner.iter()).map(|(x, y)| x * y).sum()
}

fn scale_columns(m: &CMat, s: ndarray::ArrayView1<C64>) -> CMat {
    let mut out = m.clone();
    for (mut col, &x) in out.axis_iter_mut(Axis(1)).zip(s.iter()) {
        col.mapv_inplace(|z| z * x);
    }
    out
}

// Triangular prism: rings a1a2a3, b1b2b3 with rungs f(a_k, b_k).
fn ladder3(f: &CMat, e: &CMat) -> C64 {
    let d = f.nrows();
    let mut z = C64::new(0.0, 0.0);
    for x2 in 0..d {
        // G[x3, y1] = sum_a E(x2,a) E(a,x3) f(a,y1)
        let g = scale_columns(e, e.row(x2)).dot(f);
        // H[y1, y3] = sum_b E(y1,b) f(x2,b) E(b,y3), then times E(y1,y3)
        let h = scale_columns(e, f.row(x2)).dot(e) * e;
        let p = g.dot(&h);
        for x3 in 0..d {
            let ex = e[[x2, x3]];
            let row: C64 = f.row(x3).iter().zip(p.row(x3).iter()).map(|(a, b)| a * b).sum();
            z += ex * row;
        }
    }
    z
}

// Cube: Z = sum G(x2,x4,y1) G(x2,x4,y3) H(x2,y1,y3) H(x4,y1,y3).
fn ladder4(f: &CMat, e: &CMat) -> C64 {
    let d = f.nrows();
    // gs[y][x][x'] = [E diag(f(:,y)) E](x,x')
    let mut gs = Vec::with_capacity(d);
    for y in 0..d {
        let gy = scale_columns(e, f.column(y)).dot(e);
        gs.push(gy.into_raw_vec_and_offset().0);
    }
    // hs[x] = E diag(f(x,:)) E, transposed into hv[(y1*d+y3)*d + x]
    let mut hv = vec![C64::new(0.0, 0.0); d * d * d];
    for x in 0..d {
        let hx = scale_columns(e, f.row(x)).dot(e);
        for ((y1, y3), &v) in hx.indexed_iter() {
            hv[(y1 * d + y3) * d + x] = v;
        }
    }
    let mut z = C64::new(0.0, 0.0);
    for y1 in 0..d {
        for y3 in y1..d {
            let h = &hv[(y1 * d + y3) * d..(y1 * d + y3 + 1) * d];
            let (g1, g3) = (&gs[y1], &gs[y3]);
            let mut acc = C64::new(0.0, 0.0);
            for x2 in 0..d {
                let r1 = &g1[x2 * d..(x2 + 1) * d];
                let r3 = &g3[x2 * d..(x2 + 1) * d];
                let mut row = r1[x2] * r3[x2] * h[x2] * 0.5;
                for x4 in x2 + 1..d {
                    row += r1[x4] * r3[x4] * h[x4];
                }
                acc += h[x2] * row;
            }
            let w = if y1 == y3 { 2.0 } else { 4.0 };
            z += acc * w;
        }
    }
    z
}

/// Rung weights `f(a, b) = u(a, b) u(b, a)` of the `T = 2` ladder.
pub fn rung_weights(params: &SpinChainParams) -> Result<CMat> {
    let u = single_site_kick(params.two_j, params.bx, params.bz)?;
    Ok(Array2::from_shape_fn(u.dim(), |(a, b)| u[[a, b]] * u[[b, a]]))
}
