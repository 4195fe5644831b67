//! `stdual`: experiments on kicked spin chains and coupled cat maps.

mod cache;
mod cat_cmd;
mod config;
mod failure;
mod figures;
mod output;
mod spin_cmd;

use clap::{Parser, Subcommand};
use config::{ExperimentConfig, Model};
use failure::Failure;
use output::RunDir;
use std::ffi::OsString;
use std::path::PathBuf;

const BLAS_ENV: &str = "OPENBLAS_CORETYPE";
const BLAS_RETRY_ENV: &str = "STDUAL_BLAS_RETRY";

#[derive(Parser, Debug)]
#[command(name = "stdual", version, about = "Space-time duality experiments for kicked spin chains and coupled cat maps")]
#[command(after_help = "Parameters can be overridden with --param.KEY=VALUE, e.g. --param.J=0.7 --param.N=4 --param.numerics.grid=2048.\n\
Traces are cached across runs in $STDUAL_CACHE_DIR when it is set.")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run directory; defaults to `<output_dir>/<subcommand>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `numerics.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stroboscopic portrait of site 0 on the upper hemisphere.
    PhasePortrait,
    /// Multistart Newton search for periodic orbits.
    FindOrbits,
    /// Period-two orbit manifolds and their actions.
    Manifolds,
    /// Quantum action spectrum with peaks and classical orbits.
    ActionSpectrum,
    /// Action spectrum rebuilt from classical orbits.
    SemiclassicalSpectrum,
    /// Full spectrum of the dual operator.
    DualSpectrum,
    /// Compares Tr U^T with Tr W^N.
    DualityCheck,
    /// Peak height against j_cut with power-law exponents.
    ScalingFit,
    /// Phase offset of the traces relative to the dominant action.
    PhaseDomination,
    /// Coupled cat-map experiments.
    #[command(subcommand)]
    Cat(CatCommand),
    /// Long-format (x, y, series) table of a reproduced figure.
    ExportFigureData { run_dir: PathBuf, figure_id: String },
    /// Prints the resolved configuration.
    ShowConfig,
}

#[derive(Subcommand, Debug)]
enum CatCommand {
    /// Orbit reconstructed from a symbol grid.
    Orbit {
        /// Symbol grid file (`N T nu` header, one row per time step); random when absent.
        #[arg(long)]
        symbols: Option<PathBuf>,
    },
    /// Partner orbits from a region swap on a square torus.
    Partners,
    /// Trace duality of the quantum cat chain.
    Duality,
    /// Ensemble-averaged spectral form factor.
    Formfactor,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::PhasePortrait => "phase-portrait",
            Command::FindOrbits => "find-orbits",
            Command::Manifolds => "manifolds",
            Command::ActionSpectrum => "action-spectrum",
            Command::SemiclassicalSpectrum => "semiclassical-spectrum",
            Command::DualSpectrum => "dual-spectrum",
            Command::DualityCheck => "duality-check",
            Command::ScalingFit => "scaling-fit",
            Command::PhaseDomination => "phase-domination",
            Command::Cat(CatCommand::Orbit { .. }) => "cat-orbit",
            Command::Cat(CatCommand::Partners) => "cat-partners",
            Command::Cat(CatCommand::Duality) => "cat-duality",
            Command::Cat(CatCommand::Formfactor) => "cat-formfactor",
            Command::ExportFigureData { .. } => "export-figure-data",
            Command::ShowConfig => "show-config",
        }
    }
}

/// Pulls `--param.KEY=VALUE` and `--param.KEY VALUE` out of the argument list.
fn split_overrides(args: Vec<OsString>) -> Result<(Vec<OsString>, Vec<(String, String)>), Failure> {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let Some(s) = a.to_str().and_then(|s| s.strip_prefix("--param.")) else {
            rest.push(a);
            continue;
        };
        let (key, value) = match s.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().and_then(|v| v.into_string().ok()).ok_or_else(|| Failure::Usage(format!("--param.{s} needs a value")))?;
                (s.to_string(), v)
            }
        };
        if key.is_empty() {
            return Err(Failure::Usage("empty --param key".into()));
        }
        overrides.push((key, value));
    }
    Ok((rest, overrides))
}

/// Re-executes once with a fixed OpenBLAS core type when the BLAS product disagrees with plain loops.
fn blas_guard() {
    let error = stdual::linalg::blas_self_check(256);
    if error < 1e-6 {
        return;
    }
    if std::env::var_os(BLAS_RETRY_ENV).is_some() {
        eprintln!("warning: BLAS self-check still fails after setting {BLAS_ENV} (deviation {error:.3e})");
        return;
    }
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        let exe = std::env::current_exe().expect("current executable");
        let err = std::process::Command::new(exe)
            .args(std::env::args_os().skip(1))
            .env(BLAS_ENV, std::env::var_os(BLAS_ENV).unwrap_or_else(|| "Haswell".into()))
            .env(BLAS_RETRY_ENV, "1")
            .exec();
        eprintln!("warning: BLAS self-check failed and re-exec failed: {err}");
    }
}

fn resolve(cli: &Cli, overrides: &[(String, String)]) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if matches!(cli.command, Command::Cat(_)) {
        cfg.model = Model::CatMap;
    }
    let mut cfg = cfg.with_overrides(overrides)?;
    if let Some(s) = cli.seed {
        cfg.numerics.seed = s;
    }
    Ok(cfg)
}

fn execute(cli: Cli, overrides: Vec<(String, String)>) -> Result<(), Failure> {
    if let Command::ExportFigureData { run_dir, figure_id } = &cli.command {
        let path = figures::export_figure_data(run_dir, figure_id)?;
        println!("wrote {}", path.display());
        return Ok(());
    }
    let cfg = resolve(&cli, &overrides)?;
    let name = cli.command.name();
    if let Command::ShowConfig = cli.command {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    if !matches!(cli.command, Command::Cat(_)) {
        spin_cmd::check_model(&cfg, &[Model::SpinChain, Model::KickedTop], name)?;
    }
    let dir = cli.out.clone().unwrap_or_else(|| cfg.output_dir.join(name));
    let mut run = RunDir::create(&dir, name, &cfg)?;
    let mut store = cache::PersistentCache::open(cfg.numerics.cap)?;
    let cache = &mut store.cache;
    let result = match &cli.command {
        Command::PhasePortrait => spin_cmd::phase_portrait_cmd(&cfg, &mut run),
        Command::FindOrbits => spin_cmd::find_orbits_cmd(&cfg, &mut run),
        Command::Manifolds => spin_cmd::manifolds_cmd(&cfg, &mut run),
        Command::ActionSpectrum => spin_cmd::action_spectrum_cmd(&cfg, &mut run, cache),
        Command::SemiclassicalSpectrum => spin_cmd::semiclassical_spectrum_cmd(&cfg, &mut run),
        Command::DualSpectrum => spin_cmd::dual_spectrum_cmd(&cfg, &mut run),
        Command::DualityCheck => spin_cmd::duality_check_cmd(&cfg, &mut run),
        Command::ScalingFit => spin_cmd::scaling_fit_cmd(&cfg, &mut run, cache),
        Command::PhaseDomination => spin_cmd::phase_domination_cmd(&cfg, &mut run, cache),
        Command::Cat(CatCommand::Orbit { symbols }) => cat_cmd::orbit_cmd(&cfg, &mut run, symbols.as_deref()),
        Command::Cat(CatCommand::Partners) => cat_cmd::partners_cmd(&cfg, &mut run),
        Command::Cat(CatCommand::Duality) => cat_cmd::duality_cmd(&cfg, &mut run),
        Command::Cat(CatCommand::Formfactor) => cat_cmd::formfactor_cmd(&cfg, &mut run),
        Command::ExportFigureData { .. } | Command::ShowConfig => unreachable!(),
    };
    run.summary("status", match &result {
        Ok(()) => "ok".to_string(),
        Err(f) => f.to_string(),
    });
    let path = run.finish()?;
    store.save()?;
    println!("wrote {}", path.display());
    result
}

fn main() {
    blas_guard();
    let (args, overrides) = match split_overrides(std::env::args_os().collect()) {
        Ok(x) => x,
        Err(f) => {
            eprintln!("{f}");
            std::process::exit(f.code());
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(f) = execute(cli, overrides) {
        eprintln!("{f}");
        std::process::exit(f.code());
    }
}
