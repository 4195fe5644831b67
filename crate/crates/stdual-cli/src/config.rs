//! Experiment configuration, command-line overrides and the parameter hash.

use crate::failure::Failure;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use stdual::cat::classical::CatMapParams;
use stdual::cat::quantum::{CatQuantumParams, FormFactorOptions};
use stdual::SpinChainParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    SpinChain,
    KickedTop,
    CatMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinSection {
    pub two_j: u32,
    pub n: usize,
    /// Ising coupling `J`.
    pub coupling: f64,
    pub bx: f64,
    pub bz: f64,
    pub t: usize,
    pub j_cut: usize,
}

impl Default for SpinSection {
    fn default() -> Self {
        Self { two_j: 1, n: 4, coupling: 0.7, bx: 0.9, bz: 0.9, t: 2, j_cut: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatSection {
    /// Inverse Planck constant `L`.
    pub l: usize,
    pub a: i64,
    pub b: i64,
    pub d: i64,
    pub n: usize,
    pub t: usize,
    /// Potential strength for the form-factor ensemble.
    pub eps: f64,
    pub harmonics: usize,
    pub beta: u8,
    pub symmetry_factor: bool,
}

impl Default for CatSection {
    fn default() -> Self {
        Self { l: 2, a: 2, b: 3, d: -1, n: 4, t: 2, eps: 0.1, harmonics: 3, beta: 1, symmetry_factor: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub grid: usize,
    pub seed: u64,
    pub cap: usize,
    /// Ensemble size of the form factor.
    pub samples: usize,
    /// Random starts of the orbit search.
    pub starts: usize,
    pub dedupe: f64,
    pub j_min: usize,
    pub j_max: usize,
    pub j_step: usize,
    /// Action followed by `scaling-fit` and `phase-domination`; the top peak when absent.
    pub s_target: Option<f64>,
    /// Chain lengths swept by `scaling-fit` and `cat formfactor`; `[N]` when empty.
    pub n_values: Vec<usize>,
    /// Periods swept by `scaling-fit` and `cat formfactor`; `[T]` when empty.
    pub t_values: Vec<usize>,
    /// Adds a `b_x = 0` series to `scaling-fit`.
    pub integrable: bool,
    /// Field angles of `phase-portrait`; the configured field when empty.
    pub phi_values: Vec<f64>,
    pub portrait_starts: usize,
    pub portrait_steps: usize,
    pub nev: usize,
    pub torus: usize,
    pub encounter_interior: usize,
    pub encounter_width: usize,
    pub tolerance: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            grid: 4096,
            seed: 0,
            cap: 16384,
            samples: 200,
            starts: 200,
            dedupe: 1e-6,
            j_min: 100,
            j_max: 400,
            j_step: 20,
            s_target: None,
            n_values: Vec::new(),
            t_values: Vec::new(),
            integrable: false,
            phi_values: Vec::new(),
            portrait_starts: 300,
            portrait_steps: 200,
            nev: 4,
            torus: 25,
            encounter_interior: 2,
            encounter_width: 4,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    pub output_dir: PathBuf,
    pub spin: SpinSection,
    pub cat: CatSection,
    pub numerics: Numerics,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: Model::SpinChain,
            output_dir: PathBuf::from("runs"),
            spin: SpinSection::default(),
            cat: CatSection::default(),
            numerics: Numerics::default(),
        }
    }
}

/// Short names accepted by `--param.KEY=VALUE`.
const ALIASES: &[(&str, &str)] = &[
    ("J", "spin.coupling"),
    ("coupling", "spin.coupling"),
    ("bx", "spin.bx"),
    ("bz", "spin.bz"),
    ("two_j", "spin.two_j"),
    ("j_cut", "spin.j_cut"),
    ("L", "cat.l"),
    ("a", "cat.a"),
    ("b", "cat.b"),
    ("d", "cat.d"),
    ("eps", "cat.eps"),
    ("beta", "cat.beta"),
    ("harmonics", "cat.harmonics"),
    ("symmetry_factor", "cat.symmetry_factor"),
];

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::Validation(format!("config: {}", e.message())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies `key=value` overrides; `N` and `T` address the section of the active model.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<Self, Failure> {
        let mut doc: toml::Table = toml::from_str(&self.to_toml()).expect("config round-trips");
        let mut model = self.model;
        for (key, raw) in overrides {
            let path = self.resolve_key(key, model)?;
            let value = parse_value(raw);
            set_path(&mut doc, &path, value)?;
            if path == "model" {
                model = toml::Value::Table(doc.clone()).try_into::<ExperimentConfig>().map_err(field_error(key))?.model;
            }
        }
        toml::Value::Table(doc).try_into::<ExperimentConfig>().map_err(|e| Failure::Validation(format!("override: {}", e.message())))
    }

    fn resolve_key(&self, key: &str, model: Model) -> Result<String, Failure> {
        if key.contains('.') || key == "model" || key == "output_dir" {
            return Ok(key.to_string());
        }
        let section = if model == Model::CatMap { "cat" } else { "spin" };
        match key {
            "N" | "n" => return Ok(format!("{section}.n")),
            "T" | "t" => return Ok(format!("{section}.t")),
            _ => {}
        }
        if let Some((_, path)) = ALIASES.iter().find(|(k, _)| *k == key) {
            return Ok(path.to_string());
        }
        let numerics: toml::Table = toml::from_str(&toml::to_string(&self.numerics).unwrap()).unwrap();
        if numerics.contains_key(key) || key == "s_target" {
            return Ok(format!("numerics.{key}"));
        }
        Err(Failure::Validation(format!("unknown parameter `{key}`")))
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn spin_params(&self) -> Result<SpinChainParams, Failure> {
        let s = &self.spin;
        let n = if self.model == Model::KickedTop { 1 } else { s.n };
        SpinChainParams::new(s.two_j, n, s.coupling, s.bx, s.bz, s.t, s.j_cut).map_err(|e| Failure::Validation(format!("spin: {e}")))
    }

    pub fn cat_quantum(&self, n: usize, t: usize) -> Result<CatQuantumParams, Failure> {
        let c = &self.cat;
        let mut p = CatQuantumParams::new(c.l, c.a, c.b, n, t).map_err(|e| Failure::Validation(format!("cat: {e}")))?;
        p.beta = c.beta;
        p.validate().map_err(|e| Failure::Validation(format!("cat: {e}")))?;
        Ok(p)
    }

    pub fn cat_classical(&self, n: usize, t: usize) -> Result<CatMapParams<f64>, Failure> {
        let c = &self.cat;
        CatMapParams::new(c.a, c.b, c.d, n, t).map_err(|e| Failure::Validation(format!("cat: {e}")))
    }

    pub fn form_factor_options(&self) -> FormFactorOptions {
        FormFactorOptions {
            n_samples: self.numerics.samples,
            seed: self.numerics.seed,
            eps: self.cat.eps,
            harmonics: self.cat.harmonics,
            symmetry_factor: self.cat.symmetry_factor,
            cap: self.numerics.cap,
            tolerance: None,
        }
    }

    pub fn j_cut_list(&self) -> Result<Vec<usize>, Failure> {
        let n = &self.numerics;
        if n.j_min == 0 || n.j_step == 0 || n.j_max < n.j_min {
            return Err(Failure::Validation(format!("numerics.j_min/j_max/j_step: empty range {}..={} step {}", n.j_min, n.j_max, n.j_step)));
        }
        Ok((n.j_min..=n.j_max).step_by(n.j_step).collect())
    }
}

fn field_error(key: &str) -> impl Fn(toml::de::Error) -> Failure + '_ {
    move |e| Failure::Validation(format!("--param.{key}: {}", e.message()))
}

/// Integers, floats, booleans and arrays are recognised; anything else stays a string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(doc: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), Failure> {
    let parts: Vec<&str> = path.split('.').collect();
    let (last, sections) = parts.split_last().unwrap();
    let mut table = doc;
    for s in sections {
        table = match table.get_mut(*s) {
            Some(toml::Value::Table(t)) => t,
            _ => return Err(Failure::Validation(format!("unknown section `{s}` in `{path}`"))),
        };
    }
    let optional = path == "numerics.s_target";
    if !table.contains_key(*last) && !optional {
        return Err(Failure::Validation(format!("unknown parameter `{path}`")));
    }
    let value = match (table.get(*last), value) {
        (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
        (_, v) if optional => match v {
            toml::Value::Integer(i) => toml::Value::Float(i as f64),
            v => v,
        },
        (_, v) => v,
    };
    table.insert(last.to_string(), value);
    Ok(())
}
