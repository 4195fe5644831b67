use stdual::spectrum::*;
use stdual::{SpinChainParams, C64};
use std::f64::consts::{PI, TAU};

fn pure_phase(s0: f64, j_cut: usize, amp: impl Fn(usize) -> f64) -> Vec<C64> {
    (1..=j_cut).map(|j| C64::from_polar(amp(j), (j as f64 + 0.5) * s0)).collect()
}

#[test]
fn pure_phase_gives_unit_dirichlet_peak() {
    for j_cut in [50, 200, 400] {
        let spec = ActionSpectrum::from_traces(pure_phase(2.0, j_cut, |_| 1.0), 4096, None).unwrap();
        let pk = spec.peak_near(2.0, PI / j_cut as f64);
        assert!((pk.s - 2.0).abs() < 1e-8);
        assert!((pk.height - 1.0).abs() < 1e-10);
        assert!((pk.width * j_cut as f64 / DIRICHLET_FWHM - 1.0).abs() < 0.01, "{}", pk.width * j_cut as f64);
    }
}

#[test]
fn linear_prefactor_gives_linear_height() {
    let traces = pure_phase(1.3, 400, |j| j as f64);
    let cuts: Vec<usize> = (100..=400).step_by(50).collect();
    let sc = scaling_from_traces(&traces, 1.3, &cuts).unwrap();
    assert!((sc.fit.alpha - 1.0).abs() < 0.01);
    for (&jc, h) in cuts.iter().zip(&sc.heights) {
        assert!((h - (jc as f64 + 1.0) / 2.0).abs() < 1e-8);
    }
}

#[test]
fn generic_fourier_sum_agrees_across_precisions() {
    let t64 = pure_phase(0.7, 30, |j| 1.0 / j as f64);
    let t32: Vec<num_complex::Complex<f32>> = t64.iter().map(|z| num_complex::Complex::new(z.re as f32, z.im as f32)).collect();
    let a = fourier_sum(&t64, 0.7);
    let b = fourier_sum(&t32, 0.7f32);
    assert!((a.re - b.re as f64).abs() < 1e-5 && (a.im - b.im as f64).abs() < 1e-5);
    assert_eq!(fourier_sum::<f64>(&[], 1.0), C64::new(0.0, 0.0));
}

#[test]
fn truncation_matches_direct_construction() {
    let traces = pure_phase(4.0, 120, |j| (j as f64).sqrt());
    let full = ActionSpectrum::from_traces(traces.clone(), 512, None).unwrap();
    let cut = full.truncated(60, 512).unwrap();
    let direct = ActionSpectrum::from_traces(traces[..60].to_vec(), 512, None).unwrap();
    assert_eq!(cut.rho, direct.rho);
    assert!(full.truncated(0, 512).is_err());
    assert!(full.truncated(121, 512).is_err());
    assert!(ActionSpectrum::from_traces(Vec::new(), 512, None).is_err());
}

#[test]
fn peaks_are_assigned_to_orbits_and_ghosts() {
    let j_cut = 200;
    let ghost = |j: usize| 20.0 * (-0.1 * j as f64).exp();
    let traces: Vec<C64> = pure_phase(1.0, j_cut, |_| 1.0)
        .iter()
        .zip(pure_phase(2.5, j_cut, |_| 0.8))
        .zip(pure_phase(5.0, j_cut, ghost))
        .map(|((a, b), c)| a + b + c)
        .collect();
    let spec = ActionSpectrum::from_traces(traces, 8192, None).unwrap();
    let set = spec.peaks();
    let a = assign_peaks(&set, &[1.0, 2.5], j_cut);
    for (m, s) in a.matched.iter().zip([1.0, 2.5]) {
        let (pk, d) = m.expect("matched");
        assert!(d < PI / j_cut as f64);
        assert!(peaks::circular_distance(pk.s, s) < 0.2 * PI / j_cut as f64);
    }
    assert_eq!(a.ghosts.len(), 1);
    assert!(peaks::circular_distance(a.ghosts[0].s, 5.0) < 0.01);
    assert!(a.ghosts[0].width > 2.0 * DIRICHLET_FWHM / j_cut as f64);
    let none = assign_peaks(&set, &[3.7], j_cut);
    assert!(none.matched[0].is_none());
}

#[test]
fn circular_distance_wraps() {
    assert!((peaks::circular_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
    assert!((peaks::circular_distance(3.0, 3.0 + 4.0 * PI)).abs() < 1e-12);
}

#[test]
fn delta_is_constant_for_a_single_phase() {
    let s_max = 0.56;
    let j: Vec<usize> = (20..=100).collect();
    let traces: Vec<C64> = j.iter().map(|&j| C64::from_polar(2.0, (j as f64 + 0.5) * s_max + 0.3)).collect();
    let d = delta_from_traces(&j, &traces, s_max, 4);
    assert!(d.delta.iter().all(|x| (x - 0.3).abs() < 1e-9));
    assert!(d.spread_per_site() < 1e-6);
    let mixed: Vec<C64> = j.iter().map(|&j| C64::from_polar(1.0, (j as f64 + 0.5) * 2.1) + C64::from_polar(1.0, (j as f64 + 0.5) * 0.4)).collect();
    assert!(delta_from_traces(&j, &mixed, s_max, 4).spread_per_site() > 0.1);
    let zeros = vec![C64::new(0.0, 0.0); j.len()];
    assert_eq!(delta_from_traces(&j, &zeros, s_max, 4).skipped.len(), j.len());
}

#[test]
fn semiclassical_traces_reproduce_orbit_terms() {
    let terms = [
        OrbitTerm { action: 1.2, amplitude: 0.5, marginal_distance: 1.0 },
        OrbitTerm { action: 4.0, amplitude: 0.3, marginal_distance: 0.01 },
    ];
    let tr = semiclassical_traces(&terms, 10);
    let want = C64::from_polar(0.5, 3.5 * 1.2) + C64::from_polar(0.3, 3.5 * 4.0);
    assert!((tr[2] - want).norm() < 1e-14);
    let spec = semiclassical_spectrum(&terms, 300, 2048).unwrap();
    assert_eq!(spec.warnings.len(), 1);
    assert!((spec.peak_near(1.2, PI / 300.0).height - 0.5).abs() < 1e-3);
}

#[test]
fn cache_hits_reproduce_stored_traces() {
    let p = SpinChainParams::new(1, 3, 0.7, 0.9, 0.9, 1, 10).unwrap();
    let mut cache = TraceCache::new();
    let first = cache.series(&p, &[1, 2, 3]).unwrap();
    assert_eq!(cache.computed(), 3);
    let again = cache.series(&p, &[3, 2, 1]).unwrap();
    assert_eq!(cache.computed(), 3);
    assert_eq!(again, vec![first[2], first[1], first[0]]);
    let mut replay = TraceCache::new();
    replay.extend(&cache.entries());
    assert_eq!(replay.series(&p, &[1, 2, 3]).unwrap(), first);
    assert_eq!(replay.computed(), 0);
    let other = SpinChainParams { bz: 0.9000000001, ..p };
    assert!(cache.get(&other.with_two_j(2)).is_none());
}

#[test]
fn top_quantum_peak_is_an_orbit_or_a_ghost() {
    let p = SpinChainParams::new(1, 1, 0.7, 0.9, 0.9, 1, 120).unwrap();
    let mut cache = TraceCache::new();
    let spec = action_spectrum(&p, 1, 1, 120, 2048, &mut cache).unwrap();
    let top = spec.peaks().peaks[0];
    assert!(top.height > 3.0 * spec.peaks().noise_floor);
    let orbits = stdual::spin::orbits::find_periodic_orbits(&p, 1, 60, 1e-6, 1).unwrap().orbits;
    let closest = orbits.iter().map(|o| peaks::circular_distance(o.action, top.s)).fold(f64::INFINITY, f64::min);
    assert!(closest < PI / 120.0 || top.width > 2.0 * DIRICHLET_FWHM / 120.0);
}
