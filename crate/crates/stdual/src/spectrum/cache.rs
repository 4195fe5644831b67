//! Write-once store of `Tr U^T` keyed by the full parameter set.

use crate::error::Result;
use crate::linalg::C64;
use crate::spin::contract::floquet_trace;
use crate::SpinChainParams;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Exact identity of a trace: spin, chain length, period and bit patterns of the couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TraceKey {
    pub two_j: u32,
    pub n: usize,
    pub t: usize,
    pub coupling: u64,
    pub bx: u64,
    pub bz: u64,
}

impl TraceKey {
    pub fn new(params: &SpinChainParams) -> Self {
        Self {
            two_j: params.two_j,
            n: params.n,
            t: params.t,
            coupling: params.coupling.to_bits(),
            bx: params.bx.to_bits(),
            bz: params.bz.to_bits(),
        }
    }
}

/// Serializable entry of a [`TraceCache`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub key: TraceKey,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TraceCache {
    map: BTreeMap<TraceKey, C64>,
    cap: Option<usize>,
    computed: usize,
}

impl TraceCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Dense dimension cap used for traces that need a dense operator.
    pub fn with_cap(cap: usize) -> Self {
        Self { cap: Some(cap), ..Self::default() }
    }

    pub fn cap(&self) -> usize {
        self.cap.unwrap_or(crate::spin::quantum::DEFAULT_DENSE_CAP)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Number of traces evaluated rather than looked up.
    pub fn computed(&self) -> usize {
        self.computed
    }

    pub fn get(&self, params: &SpinChainParams) -> Option<C64> {
        self.map.get(&TraceKey::new(params)).copied()
    }

    /// Keeps the first value stored under a key.
    pub fn insert(&mut self, params: &SpinChainParams, value: C64) -> C64 {
        *self.map.entry(TraceKey::new(params)).or_insert(value)
    }

    pub fn trace(&mut self, params: &SpinChainParams) -> Result<C64> {
        if let Some(z) = self.get(params) {
            return Ok(z);
        }
        let z = floquet_trace(params, self.cap())?;
        self.computed += 1;
        Ok(self.insert(params, z))
    }

    /// Traces for `j = j_values[k]` at `two_j = 2j`.
    pub fn series(&mut self, params: &SpinChainParams, j_values: &[usize]) -> Result<Vec<C64>> {
        j_values.iter().map(|&j| self.trace(&params.with_two_j(2 * j as u32))).collect()
    }

    pub fn entries(&self) -> Vec<TraceEntry> {
        self.map.iter().map(|(&key, z)| TraceEntry { key, re: z.re, im: z.im }).collect()
    }

    pub fn extend(&mut self, entries: &[TraceEntry]) {
        for e in entries {
            self.map.entry(e.key).or_insert(C64::new(e.re, e.im));
        }
    }
}
