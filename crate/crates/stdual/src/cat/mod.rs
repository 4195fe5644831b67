//! Coupled cat maps: classical chain, symbolic dynamics and quantisation.

pub mod classical;
pub mod quantum;
