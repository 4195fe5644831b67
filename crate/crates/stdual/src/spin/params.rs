use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Physical and numerical parameters of the kicked spin chain.
///
/// `two_j` stores twice the spin quantum number so half-integer spins stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinChainParams {
    pub two_j: u32,
    pub n: usize,
    /// Ising coupling `J`.
    pub coupling: f64,
    pub bx: f64,
    pub bz: f64,
    pub t: usize,
    pub j_cut: usize,
}

impl SpinChainParams {
    pub fn new(two_j: u32, n: usize, coupling: f64, bx: f64, bz: f64, t: usize, j_cut: usize) -> Result<Self> {
        let p = Self { two_j, n, coupling, bx, bz, t, j_cut };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.two_j < 1 {
            return Err(Error::InvalidParameter("two_j must be >= 1".into()));
        }
        if self.n < 1 || self.t < 1 {
            return Err(Error::InvalidParameter("N and T must be >= 1".into()));
        }
        if !(self.coupling.is_finite() && self.bx.is_finite() && self.bz.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coupling or field".into()));
        }
        Ok(())
    }

    /// Spin quantum number `j`.
    pub fn spin(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Semiclassical parameter `j + 1/2`.
    pub fn kappa(&self) -> f64 {
        self.spin() + 0.5
    }

    pub fn site_dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// `|b|`.
    pub fn b(&self) -> f64 {
        self.bx.hypot(self.bz)
    }

    /// Field angle with `tan(phi) = bx / bz`.
    pub fn phi(&self) -> f64 {
        self.bx.atan2(self.bz)
    }

    /// `(2j+1)^N`, checked.
    pub fn hilbert_dim(&self) -> Result<usize> {
        checked_pow(self.site_dim(), self.n)
    }

    /// `(2j+1)^T`, checked.
    pub fn dual_dim(&self) -> Result<usize> {
        checked_pow(self.site_dim(), self.t)
    }

    pub fn with_two_j(mut self, two_j: u32) -> Self {
        self.two_j = two_j;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = t;
        self
    }

    /// Builds parameters from the polar field description `(b, phi)`.
    pub fn from_polar(two_j: u32, n: usize, coupling: f64, b: f64, phi: f64, t: usize, j_cut: usize) -> Result<Self> {
        Self::new(two_j, n, coupling, b * phi.sin(), b * phi.cos(), t, j_cut)
    }

    /// Classical parameters in scalar type `T`.
    pub fn kick<T: Real>(&self) -> KickParams<T> {
        KickParams { coupling: T::lit(self.coupling), bx: T::lit(self.bx), bz: T::lit(self.bz) }
    }
}

/// Classical kick/coupling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickParams<T> {
    pub coupling: T,
    pub bx: T,
    pub bz: T,
}

impl<T: Real> KickParams<T> {
    pub fn new(coupling: T, bx: T, bz: T) -> Self {
        Self { coupling, bx, bz }
    }

    pub fn b(&self) -> T {
        self.bx.hypot(self.bz)
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base).ok_or(Error::DimensionOverflow)?;
    }
    Ok(acc)
}
