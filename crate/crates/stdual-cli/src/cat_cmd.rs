//! Coupled cat-map subcommands.

use crate::config::ExperimentConfig;
use crate::failure::Failure;
use crate::output::{num, row, RunDir};
use crate::spin_cmd::gate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::Path;
use stdual::cat::classical::{orbit_from_symbols, partner_from_swap, random_encounter, CatOrbit, Potential, SymbolArray};
use stdual::cat::quantum::{dual_prediction, duality_check_cat, form_factor_with};

const ALPHABET: &str = "restricted [0, nu - 4], empirical stand-in for the admissible subset";

const ORBIT_HEADER: [&str; 5] = ["n", "t", "q", "p", "m"];

fn orbit_rows(o: &CatOrbit<f64>) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(o.q.len());
    for t in 0..o.m.t {
        for n in 0..o.m.n {
            rows.push(row([n.to_string(), t.to_string(), num(o.q_at(n, t)), num(o.p_at(n, t)), o.m.get(n, t).to_string()]));
        }
    }
    rows
}

fn write_orbit(run: &mut RunDir, name: &str, o: &CatOrbit<f64>, nu: i64) -> Result<(), Failure> {
    std::fs::write(run.path.join(format!("{name}-symbols.txt")), o.m.to_text(nu))?;
    let meta = json!({ "action": o.action, "admissible": o.admissible, "residual": o.residual, "nu": nu });
    run.table(name, &ORBIT_HEADER, &orbit_rows(o), meta)
}

pub fn orbit_cmd(cfg: &ExperimentConfig, run: &mut RunDir, symbols: Option<&Path>) -> Result<(), Failure> {
    let (m, nu) = match symbols {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("symbols {}: {e}", path.display())))?;
            SymbolArray::from_text(&text)?
        }
        None => {
            run.seed(cfg.numerics.seed);
            run.summary("alphabet", ALPHABET);
            let nu = cfg.cat.a + cfg.cat.b;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.numerics.seed);
            (SymbolArray::random_restricted(cfg.cat.n, cfg.cat.t, nu, &mut rng), nu)
        }
    };
    let p = cfg.cat_classical(m.n, m.t)?;
    if p.nu() != nu {
        return Err(Failure::Validation(format!("symbols: file is for nu = {nu}, config has a + b = {}", p.nu())));
    }
    let o = orbit_from_symbols(&m, &p)?;
    write_orbit(run, "orbit", &o, nu)?;
    run.summary("action", o.action);
    run.summary("admissible", o.admissible);
    run.summary("residual", o.residual);
    gate(o.residual, cfg.numerics.tolerance, "Newton equation residual")
}

pub fn partners_cmd(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<(), Failure> {
    let n = &cfg.numerics;
    let nu = cfg.cat.a + cfg.cat.b;
    run.seed(n.seed);
    run.summary("alphabet", ALPHABET);
    let mut rng = ChaCha8Rng::seed_from_u64(n.seed);
    let (m, ra, rb) = random_encounter(n.torus, n.encounter_interior, n.encounter_width, nu, &mut rng)?;
    let p = cfg.cat_classical(n.torus, n.torus)?;
    let pair = partner_from_swap(&m, ra, rb, n.encounter_width, &p)?;
    write_orbit(run, "gamma", &pair.gamma, nu)?;
    write_orbit(run, "gamma-bar", &pair.gamma_bar, nu)?;
    run.summary("delta_s", pair.delta_s);
    run.summary("shadowing", pair.shadowing);
    run.summary("encounter_shadowing", pair.encounter_shadowing);
    run.summary("regions", json!([[ra.n0, ra.t0], [rb.n0, rb.t0], [ra.width_n, ra.width_t]]));
    Ok(())
}

pub fn duality_cmd(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<(), Failure> {
    let mut p = cfg.cat_quantum(cfg.cat.n, cfg.cat.t)?;
    if cfg.cat.eps != 0.0 {
        run.seed(cfg.numerics.seed);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.numerics.seed);
        p = p.with_potential(Potential::random(cfg.cat.eps, cfg.cat.harmonics, &mut rng));
    }
    let r = duality_check_cat(&p, cfg.numerics.cap)?;
    let rows = vec![row([
        num(r.tr_u.re),
        num(r.tr_u.im),
        num(r.tr_w.re),
        num(r.tr_w.im),
        num(r.error_dual),
        num(r.error_swapped),
        num(r.conjugation_defect),
        num(r.w_unitarity_defect),
    ])];
    let header = ["tr_u_re", "tr_u_im", "tr_w_re", "tr_w_im", "error_dual", "error_swapped", "conjugation_defect", "w_unitarity_defect"];
    run.table("duality", &header, &rows, json!({ "potential": p.potential }))?;
    let worst = r.error_dual.max(r.error_swapped).max(r.w_unitarity_defect);
    run.summary("max_error", worst);
    println!("relative error {:.3e}", worst);
    gate(worst, cfg.numerics.tolerance, "cat-map duality")
}

pub fn formfactor_cmd(cfg: &ExperimentConfig, run: &mut RunDir) -> Result<(), Failure> {
    let ns = if cfg.numerics.n_values.is_empty() { vec![cfg.cat.n] } else { cfg.numerics.n_values.clone() };
    let ts = if cfg.numerics.t_values.is_empty() { vec![cfg.cat.t] } else { cfg.numerics.t_values.clone() };
    let opts = cfg.form_factor_options();
    run.seed(opts.seed);
    let (mut rows, mut samples) = (Vec::new(), Vec::new());
    let mut warnings = Vec::new();
    for &n in &ns {
        for &t in &ts {
            let p = cfg.cat_quantum(n, t)?;
            let f = form_factor_with(&p, &opts)?;
            let pred = dual_prediction(p.l, n, t, p.beta)?;
            rows.push(row([
                n.to_string(),
                t.to_string(),
                p.l.to_string(),
                num(f.tau),
                num(f.k),
                num(f.stderr),
                serde_json::to_value(f.regime)?.as_str().unwrap().to_string(),
                num(f.tau_dual),
                num(pred),
            ]));
            for (s, z) in f.traces.iter().enumerate() {
                samples.push(row([n.to_string(), t.to_string(), s.to_string(), f.seed.to_string(), s.to_string(), num(z.re), num(z.im)]));
            }
            warnings.extend(f.warnings);
        }
    }
    let meta = json!({
        "samples": opts.n_samples,
        "eps": opts.eps,
        "harmonics": opts.harmonics,
        "symmetry_factor": opts.symmetry_factor,
        "beta": cfg.cat.beta,
        "prediction": "L^(T-N) K_RMT(N T / L^T)",
    });
    run.table("formfactor", &["N", "T", "L", "tau", "K", "stderr", "regime", "tau_dual", "prediction"], &rows, meta)?;
    run.table("formfactor-samples", &["N", "T", "sample", "seed", "stream", "tr_re", "tr_im"], &samples, json!({ "rng": "ChaCha8, seed_from_u64(seed), stream = sample" }))?;
    run.summary("warnings", warnings);
    Ok(())
}
