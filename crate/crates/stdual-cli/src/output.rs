//! Run directories: resolved config, metadata and CSV tables with JSON sidecars.

use crate::config::ExperimentConfig;
use crate::failure::Failure;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

pub const CONFIG_FILE: &str = "config.toml";
pub const META_FILE: &str = "meta.json";

pub struct RunDir {
    pub path: PathBuf,
    subcommand: String,
    config_hash: String,
    seeds: Vec<u64>,
    tables: Vec<String>,
    summary: serde_json::Map<String, Value>,
}

impl RunDir {
    pub fn create(path: &Path, subcommand: &str, config: &ExperimentConfig) -> Result<Self, Failure> {
        std::fs::create_dir_all(path)?;
        std::fs::write(path.join(CONFIG_FILE), config.to_toml())?;
        Ok(Self {
            path: path.to_path_buf(),
            subcommand: subcommand.to_string(),
            config_hash: config.hash(),
            seeds: Vec::new(),
            tables: Vec::new(),
            summary: serde_json::Map::new(),
        })
    }

    pub fn seed(&mut self, seed: u64) {
        if !self.seeds.contains(&seed) {
            self.seeds.push(seed);
        }
    }

    pub fn summary(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(value).expect("summary serializes"));
    }

    /// Writes `name.csv` and its sidecar `name.json`.
    pub fn table<R: AsRef<[String]>>(&mut self, name: &str, header: &[&str], rows: &[R], meta: Value) -> Result<(), Failure> {
        let mut w = csv::Writer::from_path(self.path.join(format!("{name}.csv")))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.as_ref())?;
        }
        w.flush()?;
        let sidecar = json!({ "table": format!("{name}.csv"), "columns": header, "rows": rows.len(), "meta": meta });
        std::fs::write(self.path.join(format!("{name}.json")), serde_json::to_string_pretty(&sidecar)? + "\n")?;
        self.tables.push(format!("{name}.csv"));
        Ok(())
    }

    pub fn finish(self) -> Result<PathBuf, Failure> {
        let meta = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand,
            "config_hash": self.config_hash,
            "seeds": self.seeds,
            "tables": self.tables,
            "summary": self.summary,
        });
        std::fs::write(self.path.join(META_FILE), serde_json::to_string_pretty(&meta)? + "\n")?;
        Ok(self.path)
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn row<const K: usize>(cells: [String; K]) -> Vec<String> {
    cells.to_vec()
}
