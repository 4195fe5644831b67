use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stdual::cat::classical::{orbit_from_symbols, CatMapParams, Potential, SymbolArray};
use stdual::cat::quantum::*;
use stdual::linalg::{self, cis, C64};
use std::f64::consts::{PI, TAU};

fn random_v(seed: u64, eps: f64) -> Potential<f64> {
    Potential::random(eps, 3, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[test]
fn kick_is_unitary_with_unit_determinant() {
    for (l, a, b) in [(2, 2, 3), (3, 2, 4), (5, 2, 1), (7, 3, 3), (8, 1, 1)] {
        let u = build_u_kick(l, a, b).unwrap();
        assert!(linalg::unitarity_defect(&u) < 1e-10);
        let det: C64 = linalg::eig(&u, false).unwrap().values.iter().product();
        assert!((det.norm() - 1.0).abs() < 1e-8);
    }
    assert!(build_u_kick(1, 2, 3).is_err());
}

#[test]
fn kick_trace_is_a_gauss_sum() {
    let (l, a, b) = (5usize, 2i64, 1i64);
    let u = build_u_kick(l, a, b).unwrap();
    let mut direct = C64::new(0.0, 0.0);
    for m in 0..l {
        let mf = m as f64;
        let phase = PI / l as f64 * (-2.0 * mf * mf + (a + b) as f64 * mf * mf) + PI / 4.0;
        direct += cis(phase) / (l as f64).sqrt();
    }
    assert!((linalg::trace(&u) - direct).norm() < 1e-12);
}

#[test]
fn interaction_phases_match_direct_loop() {
    let v = random_v(3, 0.2);
    let p = CatQuantumParams::new(3, 2, 4, 3, 1).unwrap().with_potential(v.clone());
    let d = build_u_int(&p, 1000).unwrap();
    for e0 in 0..3 {
        for e1 in 0..3 {
            for e2 in 0..3 {
                let e = [e0, e1, e2];
                let mut phase = 0.0;
                for s in 0..3 {
                    let (m, k) = (e[s] as f64, e[(s + 1) % 3] as f64);
                    phase += -TAU / 3.0 * (k * m + 9.0 * v.value(m / 3.0));
                }
                let z = d[e0 * 9 + e1 * 3 + e2];
                assert!((z.norm() - 1.0).abs() < 1e-14);
                assert!((z - cis(phase)).norm() < 1e-12);
            }
        }
    }
    assert!(build_u_int(&CatQuantumParams::new(2, 2, 3, 12, 1).unwrap(), 1024).is_err());
}

#[test]
fn duality_without_potential() {
    let p = CatQuantumParams::new(2, 2, 3, 3, 2).unwrap();
    let r = duality_check_cat(&p, 1024).unwrap();
    assert!(r.error_dual < 1e-10, "{r:?}");
    assert!(r.error_swapped < 1e-10, "{r:?}");
    assert!(r.conjugation_defect < 1e-12);
    assert!(r.w_unitarity_defect < 1e-10);
}

#[test]
fn duality_with_random_potential() {
    for seed in 0..5 {
        let p = CatQuantumParams::new(3, 2, 4, 2, 2).unwrap().with_potential(random_v(seed, 0.3));
        let r = duality_check_cat(&p, 1024).unwrap();
        assert!(r.error_dual < 1e-10 && r.error_swapped < 1e-10, "{r:?}");
        assert!(r.conjugation_defect < 1e-12);
    }
}

#[test]
fn square_torus_sides_coincide() {
    let p = CatQuantumParams::new(3, 1, 5, 2, 2).unwrap().with_potential(random_v(9, 0.1));
    let r = duality_check_cat(&p, 1024).unwrap();
    assert_eq!(r.tr_u, r.tr_u_swapped);
    assert_eq!(r.error_swapped, 0.0);
}

#[test]
fn cheap_side_matches_expensive_side() {
    for (l, n, t) in [(2, 8, 2), (2, 2, 7), (3, 4, 2), (2, 5, 5)] {
        let p = CatQuantumParams::new(l, 2, 3, n, t).unwrap().with_potential(random_v(n as u64, 0.2));
        let cheap = cat_trace(&p, 4096).unwrap();
        let dense = linalg::trace_power(&build_u_cat(&p, 4096).unwrap(), t);
        assert!((cheap - dense).norm() < 1e-9 * dense.norm().max(1.0), "L={l} N={n} T={t}");
    }
}

#[test]
fn momentum_sectors_sum_to_trace() {
    for (l, n, t) in [(2, 4, 3), (3, 3, 2), (2, 5, 1)] {
        let p = CatQuantumParams::new(l, 2, 3, n, t).unwrap();
        let sectors = sector_traces(&p, 4096).unwrap();
        let total = linalg::trace_power(&build_u_cat(&p, 4096).unwrap(), t);
        assert_eq!(sectors.len(), n);
        assert!((sectors.iter().sum::<C64>() - total).norm() < 1e-9 * total.norm().max(1.0));
    }
}

fn det_helmholtz(n: usize, t: usize, nu: i64) -> f64 {
    let mut det = 1.0;
    for a in 0..n {
        for b in 0..t {
            det *= nu as f64 - 2.0 * (TAU * a as f64 / n as f64).cos() - 2.0 * (TAU * b as f64 / t as f64).cos();
        }
    }
    det
}

// Tr U_N^T = e^{i pi NT/2} det(K)^{-1/2} sum over periodic orbits of e^{2 pi i L S}, exact when L nu is even.
fn orbit_sum(l: usize, a: i64, b: i64, n: usize, t: usize) -> (C64, usize) {
    let nu = a + b;
    let cp = CatMapParams::<f64>::new(a, b, -1, n, t).unwrap();
    let cells = n * t;
    let base = (nu + 3) as usize;
    let mut sum = C64::new(0.0, 0.0);
    let mut count = 0;
    for code in 0..base.pow(cells as u32) {
        let mut c = code;
        let m = SymbolArray::from_fn(n, t, |_, _| {
            let v = (c % base) as i64 - 3;
            c /= base;
            v
        });
        let o = orbit_from_symbols(&m, &cp).unwrap();
        if o.admissible {
            count += 1;
            sum += cis(TAU * l as f64 * o.action);
        }
    }
    let det = det_helmholtz(n, t, nu);
    (sum * cis(PI * cells as f64 / 2.0) / det.sqrt(), count)
}

#[test]
fn action_reproduces_quantum_phases() {
    for (l, a, b, n, t) in [(2, 2, 3, 2, 2), (2, 2, 3, 1, 3), (3, 2, 4, 2, 2), (2, 1, 6, 3, 1), (3, 3, 3, 1, 2)] {
        let (sc, count) = orbit_sum(l, a, b, n, t);
        assert_eq!(count as f64, det_helmholtz(n, t, a + b).round(), "orbit count");
        let p = CatQuantumParams::new(l, a, b, n, t).unwrap();
        let q = linalg::trace_power(&build_u_cat(&p, 4096).unwrap(), t);
        assert!((q - sc).norm() < 1e-9, "L={l} a={a} b={b} N={n} T={t}: {q} vs {sc}");
    }
}

#[test]
fn degenerate_ensemble_has_no_spread() {
    let p = CatQuantumParams::new(2, 2, 3, 4, 2).unwrap();
    let opts = FormFactorOptions { n_samples: 5, eps: 0.0, ..Default::default() };
    let f = form_factor_with(&p, &opts).unwrap();
    let tr = linalg::trace_power(&build_u_cat(&p, 4096).unwrap(), 2);
    assert_eq!(f.stderr, 0.0);
    assert!((f.k - tr.norm_sqr() / (2.0 * 16.0)).abs() < 1e-12);
}

#[test]
fn stderr_scales_with_sample_count() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let noise: Vec<C64> = (0..40_000).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let (_, e1) = FormFactorEstimate::moments(&noise[..2500], 1.0).unwrap();
    let (_, e2) = FormFactorEstimate::moments(&noise[..40_000], 1.0).unwrap();
    assert!((e1 / e2 - 4.0).abs() < 0.4, "{}", e1 / e2);
}

#[test]
fn haar_ensemble_ramp() {
    let dim = 24;
    for t in [1usize, 3, 6] {
        let (k, err) = haar_form_factor(dim, t, 400, t as u64).unwrap();
        let want = t as f64 / dim as f64;
        assert!((k - want).abs() < 4.0 * err + 0.02, "t={t}: {k} vs {want}");
    }
}

#[test]
fn form_factor_is_reproducible_and_logged() {
    let p = CatQuantumParams::new(2, 2, 3, 6, 2).unwrap();
    let a = form_factor(&p, 20, 7).unwrap();
    let b = form_factor(&p, 20, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.traces.len(), 20);
    assert!(a.k >= 0.0);
    assert_eq!(a.regime, Regime::Exponential);
    let strict = FormFactorOptions { n_samples: 4, tolerance: Some(0.0), ..Default::default() };
    assert!(!form_factor_with(&p, &strict).unwrap().warnings.is_empty());
}

#[test]
fn rmt_form_factor_values() {
    assert_eq!(k_rmt(0.0, 1).unwrap(), 0.0);
    assert_eq!(k_rmt(0.3, 2).unwrap(), 0.3);
    for tau in [1e-3f64, 5e-3, 1e-2] {
        let series = 2.0 * tau - 2.0 * tau * tau + 2.0 * tau.powi(3);
        assert!((k_rmt(tau, 1).unwrap() - series).abs() < 3.0 * tau.powi(4));
    }
    assert!(k_rmt(-0.1, 1).is_err());
    assert!(k_rmt(0.5, 3).is_err());
    let pred = dual_prediction(2, 10, 2, 1).unwrap();
    assert!((pred - 2f64.powi(-8) * k_rmt_full(5.0, 1).unwrap()).abs() < 1e-15);
}

proptest! {
    #[test]
    fn dual_operator_is_unitary(l in 2usize..5, a in -3i64..6, b in -3i64..6, t in 1usize..4, seed in 0u64..100) {
        let p = CatQuantumParams::new(l, a, b, 2, t).unwrap().with_potential(random_v(seed, 0.2));
        let w = build_w_cat(&p, 4096).unwrap();
        prop_assert!(linalg::unitarity_defect(&w) < 1e-9);
    }

    #[test]
    fn trace_duality_holds(l in 2usize..4, a in -2i64..6, b in -2i64..6, n in 1usize..4, t in 1usize..4, seed in 0u64..100) {
        let p = CatQuantumParams::new(l, a, b, n, t).unwrap().with_potential(random_v(seed, 0.3));
        let r = duality_check_cat(&p, 4096).unwrap();
        prop_assert!(r.error_dual < 1e-9 && r.error_swapped < 1e-9);
        prop_assert!(r.conjugation_defect < 1e-10);
    }
}
