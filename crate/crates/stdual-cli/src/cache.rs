//! On-disk trace cache shared between runs.

use crate::failure::Failure;
use std::path::PathBuf;
use stdual::spectrum::{TraceCache, TraceEntry};

pub const CACHE_ENV: &str = "STDUAL_CACHE_DIR";
const CACHE_FILE: &str = "spin-traces.json";

/// Cache loaded from `$STDUAL_CACHE_DIR`, or a transient one when the variable is unset.
pub struct PersistentCache {
    pub cache: TraceCache,
    file: Option<PathBuf>,
}

impl PersistentCache {
    pub fn open(cap: usize) -> Result<Self, Failure> {
        let mut cache = TraceCache::with_cap(cap);
        let file = std::env::var_os(CACHE_ENV).map(|d| PathBuf::from(d).join(CACHE_FILE));
        if let Some(f) = &file {
            if f.exists() {
                cache.extend(&read_entries(f)?);
            }
        }
        Ok(Self { cache, file })
    }

    /// Merges with entries written meanwhile by other runs, then replaces the file atomically.
    pub fn save(&self) -> Result<(), Failure> {
        let Some(f) = &self.file else {
            return Ok(());
        };
        if let Some(dir) = f.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut merged = TraceCache::new();
        if f.exists() {
            merged.extend(&read_entries(f)?);
        }
        merged.extend(&self.cache.entries());
        let tmp = f.with_extension(format!("json.{}", std::process::id()));
        std::fs::write(&tmp, serde_json::to_string(&merged.entries())?)?;
        std::fs::rename(&tmp, f)?;
        Ok(())
    }
}

fn read_entries(f: &PathBuf) -> Result<Vec<TraceEntry>, Failure> {
    let text = std::fs::read_to_string(f)?;
    serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("trace cache {}: {e}", f.display())))
}
