//! Spin-chain and kicked-top subcommands.

use crate::config::{ExperimentConfig, Model};
use crate::failure::Failure;
use crate::output::{num, row, RunDir};
use serde_json::json;
use stdual::spectrum::{
    action_spectrum, assign_peaks, orbit_terms, peak_scaling_fit, phase_domination, semiclassical_spectrum, ActionSpectrum, TraceCache,
};
use stdual::spin::classical::{phase_portrait, PortraitFilter};
use stdual::spin::dual::{dual_spectrum, duality_check, transfer_matrix};
use stdual::spin::manifold::manifold_solutions;
use stdual::spin::orbits::{find_periodic_orbits, PeriodicOrbit};
use stdual::SpinChainParams;

pub fn phase_portrait_cmd(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<(), Failure> {
    let p = cfg.spin_params()?;
    let b = (p.bx * p.bx + p.bz * p.bz).sqrt();
    let phis = if cfg.numerics.phi_values.is_empty() { vec![p.bx.atan2(p.bz)] } else { cfg.numerics.phi_values.clone() };
    let n = &cfg.numerics;
    run.seed(n.seed);
    let mut rows = Vec::new();
    for &phi in &phis {
        let at = SpinChainParams::from_polar(p.two_j, p.n, p.coupling, b, phi, p.t, p.j_cut)?;
        let clouds = phase_portrait(&at.kick::<f64>(), p.n, 0, n.portrait_starts, n.portrait_steps, PortraitFilter::UpperHemisphere, n.seed);
        for (k, pts) in clouds.iter().enumerate() {
            for &(x, y) in pts {
                rows.push(row([num(phi), k.to_string(), num(x), num(y)]));
            }
        }
    }
    let meta = json!({ "b": b, "phi": phis, "coordinates": "n^x, n^y of site 0 with n^z > 0" });
    run.table("portrait", &["phi", "trajectory", "x", "y"], &rows, meta)?;
    run.summary("points", rows.len());
    Ok(())
}

fn orbit_rows(orbits: &[PeriodicOrbit]) -> Vec<Vec<String>> {
    let terms = orbit_terms(orbits);
    orbits
        .iter()
        .zip(&terms)
        .enumerate()
        .map(|(k, (o, g))| {
            row([
                k.to_string(),
                num(o.action),
                o.t_p.to_string(),
                o.n_p.to_string(),
                format!("{:?}", o.classify()).to_lowercase(),
                num(o.det_m_minus_1),
                num(o.marginal_distance()),
                num(g.amplitude),
                num(o.residual),
            ])
        })
        .collect()
}

const ORBIT_HEADER: [&str; 9] = ["index", "action", "t_p", "n_p", "stability", "det_m_minus_1", "marginal_distance", "amplitude", "residual"];

fn search(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<Vec<PeriodicOrbit>, Failure> {
    let p = cfg.spin_params()?;
    let n = &cfg.numerics;
    run.seed(n.seed);
    let s = find_periodic_orbits(&p, p.t, n.starts, n.dedupe, n.seed)?;
    run.summary("orbits", s.orbits.len());
    run.summary("converged_starts", s.converged);
    run.summary("trivial_manifold", s.trivial_manifold);
    Ok(s.orbits)
}

pub fn find_orbits_cmd(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<(), Failure> {
    let orbits = search(cfg, run)?;
    let meta = json!({ "starts": cfg.numerics.starts, "dedupe": cfg.numerics.dedupe });
    run.table("orbits", &ORBIT_HEADER, &orbit_rows(&orbits), meta)
}

pub fn manifolds_cmd(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<(), Failure> {
    let p = cfg.spin_params()?;
    let fam = manifold_solutions(&p.kick::<f64>())?;
    let rows: Vec<Vec<String>> = fam
        .chi_solutions
        .iter()
        .map(|&chi| {
            let s = 2.0 * p.coupling * chi * chi;
            row([num(chi), num(s), num((p.n as f64 * s).rem_euclid(std::f64::consts::TAU))])
        })
        .collect();
    run.summary("regime", format!("{:?}", fam.regime).to_lowercase());
    run.table("manifold", &["chi", "action_per_site", "action_chain"], &rows, json!({ "t": 2, "n": p.n }))
}

fn spectrum_rows(spec: &ActionSpectrum) -> Vec<Vec<String>> {
    spec.s_grid.iter().zip(&spec.rho).map(|(&s, z)| row([num(s), num(z.norm()), num(z.re), num(z.im)])).collect()
}

fn write_spectrum(run: &mut RunDir, name: &str, spec: &ActionSpectrum, orbits: Option<&[PeriodicOrbit]>) -> Result<(), Failure> {
    let meta = json!({ "j_cut": spec.j_cut, "grid": spec.s_grid.len(), "warnings": spec.warnings });
    run.table(name, &["s", "abs_rho", "re_rho", "im_rho"], &spectrum_rows(spec), meta)?;
    let set = spec.peaks();
    let mut kinds = vec!["peak".to_string(); set.peaks.len()];
    if let Some(orbits) = orbits {
        let actions: Vec<f64> = orbits.iter().map(|o| o.action).collect();
        let a = assign_peaks(&set, &actions, spec.j_cut);
        for (k, p) in set.peaks.iter().enumerate() {
            if a.matched.iter().flatten().any(|(m, _)| m == p) {
                kinds[k] = "orbit".into();
            } else if a.ghosts.contains(p) {
                kinds[k] = "ghost".into();
            } else if a.unmatched.contains(p) {
                kinds[k] = "unmatched".into();
            } else {
                kinds[k] = "sidelobe".into();
            }
        }
    }
    let rows: Vec<Vec<String>> = set.peaks.iter().zip(kinds).map(|(p, k)| row([num(p.s), num(p.height), num(p.width), k])).collect();
    run.table(&format!("{name}-peaks"), &["s", "height", "width", "kind"], &rows, json!({ "noise_floor": set.noise_floor }))
}

pub fn action_spectrum_cmd(cfg: &ExperimentConfig, run: &mut RunDir, cache: &mut TraceCache) -> Result<(), Failure> {
    let p = cfg.spin_params()?;
    let spec = action_spectrum(&p, p.t, p.n, p.j_cut, cfg.numerics.grid, cache)?;
    let orbits = if cfg.numerics.starts > 0 { Some(search(cfg, run)?) } else { None };
    write_spectrum(run, "spectrum", &spec, orbits.as_deref())?;
    if let Some(o) = &orbits {
        run.table("orbits", &ORBIT_HEADER, &orbit_rows(o), json!({ "starts": cfg.numerics.starts }))?;
    }
    Ok(())
}

pub fn semiclassical_spectrum_cmd(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<(), Failure> {
    let p = cfg.spin_params()?;
    let orbits = search(cfg, run)?;
    let spec = semiclassical_spectrum(&orbit_terms(&orbits), p.j_cut, cfg.numerics.grid)?;
    run.summary("warnings", &spec.warnings);
    write_spectrum(run, "semiclassical", &spec, Some(&orbits))?;
    run.table("orbits", &ORBIT_HEADER, &orbit_rows(&orbits), json!({ "starts": cfg.numerics.starts }))
}

pub fn dual_spectrum_cmd(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<(), Failure> {
    let p = cfg.spin_params()?;
    let w = transfer_matrix(&p, cfg.numerics.cap)?;
    let e = dual_spectrum(&w, false)?;
    let rows: Vec<Vec<String>> = e.values.iter().enumerate().map(|(k, z)| row([k.to_string(), num(z.re), num(z.im), num(z.norm()), num(z.arg())])).collect();
    run.summary("dim", w.nrows());
    run.table("dual-eigenvalues", &["index", "re", "im", "abs", "arg"], &rows, json!({ "two_j": p.two_j, "t": p.t }))
}

pub fn duality_check_cmd(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<(), Failure> {
    let p = cfg.spin_params()?;
    let r = duality_check(&p, p.n, p.t, cfg.numerics.cap)?;
    let rows = vec![row([num(r.trace_u.re), num(r.trace_u.im), num(r.trace_w.re), num(r.trace_w.im), num(r.relative_error), r.against_floquet.to_string()])];
    run.table("duality", &["tr_u_re", "tr_u_im", "tr_w_re", "tr_w_im", "relative_error", "against_floquet"], &rows, json!({ "n": p.n, "t": p.t, "two_j": p.two_j }))?;
    run.summary("relative_error", r.relative_error);
    println!("relative error {:.3e}", r.relative_error);
    gate(r.relative_error, cfg.numerics.tolerance, "spin-chain duality")
}

pub fn gate(error: f64, tolerance: f64, what: &str) -> Result<(), Failure> {
    if error < tolerance {
        Ok(())
    } else {
        Err(Failure::Gate(format!("{what}: relative error {error:.3e} above {tolerance:.1e}")))
    }
}

/// Highest peak of the spectrum at `j_cut` unless `numerics.s_target` is set.
fn target(cfg: &ExperimentConfig, p: &SpinChainParams, t: usize, n: usize, j_cut: usize, cache: &mut TraceCache) -> Result<f64, Failure> {
    if let Some(s) = cfg.numerics.s_target {
        return Ok(s);
    }
    let spec = action_spectrum(p, t, n, j_cut, cfg.numerics.grid, cache)?;
    spec.peaks().peaks.first().map(|pk| pk.s).ok_or_else(|| Failure::Validation("spectrum has no peak above the noise floor".into()))
}

pub fn scaling_fit_cmd(cfg: &ExperimentConfig, run: &mut RunDir, cache: &mut TraceCache) -> Result<(), Failure> {
    let p = cfg.spin_params()?;
    let cuts = cfg.j_cut_list()?;
    let j_max = *cuts.last().unwrap();
    let ns = if cfg.numerics.n_values.is_empty() { vec![p.n] } else { cfg.numerics.n_values.clone() };
    let ts = if cfg.numerics.t_values.is_empty() { vec![p.t] } else { cfg.numerics.t_values.clone() };
    let mut series: Vec<(String, SpinChainParams, usize)> = ts.iter().map(|&t| (format!("T={t}"), p, t)).collect();
    if cfg.numerics.integrable {
        series.push(("integrable".into(), SpinChainParams { bx: 0.0, ..p }, 1));
    }
    let (mut heights, mut fits) = (Vec::new(), Vec::new());
    for (name, q, t) in &series {
        for &n in &ns {
            let s = target(cfg, q, *t, n, j_max, cache)?;
            let sc = peak_scaling_fit(q, *t, n, s, &cuts, cache)?;
            for ((jc, pos), h) in sc.j_cuts.iter().zip(&sc.positions).zip(&sc.heights) {
                heights.push(row([name.clone(), n.to_string(), t.to_string(), jc.to_string(), num(*pos), num(*h)]));
            }
            fits.push(row([name.clone(), n.to_string(), t.to_string(), num(s), num(sc.fit.alpha), num(sc.fit.stderr), num(sc.fit.ci95)]));
        }
    }
    run.table("heights", &["series", "n", "t", "j_cut", "s", "height"], &heights, json!({ "j_cuts": cuts }))?;
    run.table("scaling", &["series", "n", "t", "s_target", "alpha", "stderr", "ci95"], &fits, json!({ "fit": "log |rho| = alpha log j_cut + c" }))
}

pub fn phase_domination_cmd(cfg: &ExperimentConfig, run: &mut RunDir, cache: &mut TraceCache) -> Result<(), Failure> {
    let p = cfg.spin_params()?;
    let js = cfg.j_cut_list()?;
    let s = target(cfg, &p, p.t, p.n, p.j_cut, cache)?;
    let d = phase_domination(&p, p.t, p.n, s, &js, cache)?;
    let rows: Vec<Vec<String>> = d.j.iter().zip(&d.delta).map(|(j, x)| row([j.to_string(), num(*x)])).collect();
    run.summary("s_max", s);
    run.summary("spread_per_site", d.spread_per_site());
    run.summary("skipped", &d.skipped);
    run.table("delta", &["j", "delta"], &rows, json!({ "s_max": s, "n": p.n }))
}

pub fn check_model(cfg: &ExperimentConfig, allowed: &[Model], sub: &str) -> Result<(), Failure> {
    if allowed.contains(&cfg.model) {
        Ok(())
    } else {
        Err(Failure::Validation(format!("model: `{sub}` does not apply to {:?}", cfg.model)))
    }
}
