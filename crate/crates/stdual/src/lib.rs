//! Space-time duality, action spectra and form factors for kicked spin chains
//! and coupled cat maps.

extern crate ndarray_linalg;

pub mod cat;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod spectrum;
pub mod spin;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
pub use scalar::Real;
pub use spin::params::{KickParams, SpinChainParams};

/// Double-precision instances of the generic types.
pub type KickParamsF64 = spin::params::KickParams<f64>;
pub type ClassicalStateF64 = spin::classical::ClassicalState<f64>;
pub type IntegrableOrbitF64 = spin::integrable::IntegrableOrbit<f64>;
pub type ManifoldFamilyF64 = spin::manifold::ManifoldFamily<f64>;
pub type CatMapParamsF64 = cat::classical::CatMapParams<f64>;
pub type CatStateF64 = cat::classical::CatState<f64>;
pub type CatOrbitF64 = cat::classical::CatOrbit<f64>;
pub type PartnerPairF64 = cat::classical::PartnerPair<f64>;
pub type PotentialF64 = cat::classical::Potential<f64>;
pub type PowerLawFitF64 = fit::PowerLawFit<f64>;
