//! Kicked spin chain: quantum, dual and classical descriptions.

pub mod classical;
pub mod contract;
pub mod dual;
pub mod halfspin;
pub mod integrable;
pub mod manifold;
pub mod orbits;
pub mod params;
pub mod quantum;
