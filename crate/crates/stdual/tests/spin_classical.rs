use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stdual::spin::classical::*;
use stdual::spin::manifold::{manifold_solutions, sample_manifold_point};
use stdual::spin::orbits::*;
use stdual::{KickParams, SpinChainParams};
use std::f64::consts::{FRAC_PI_4, TAU};

fn paper(n: usize) -> SpinChainParams {
    SpinChainParams::new(1, n, 0.7, 0.9, 0.9, 1, 200).unwrap()
}

fn random_state(n: usize, seed: u64) -> ClassicalState<f64> {
    ClassicalState::random(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[test]
fn trivial_parameters_are_identity() {
    let p = KickParams::new(0.0, 0.0, 0.0);
    let x = random_state(3, 1);
    assert!(classical_step(&x, &p).distance(&x) < 1e-15);
}

#[test]
fn integrable_step_shifts_angles() {
    let p = KickParams::new(0.7, 0.0, 0.9);
    let x = random_state(5, 2);
    let y = classical_step(&x, &p);
    let (q0, p0) = x.canonical();
    let (q1, p1) = y.canonical();
    for m in 0..5 {
        assert!((p1[m] - p0[m]).abs() < 1e-14);
        let dq = 4.0 * 0.7 * (p0[(m + 4) % 5] + p0[(m + 1) % 5]) + 2.0 * 0.9;
        let d = (q1[m] - q0[m] - dq).rem_euclid(TAU);
        assert!(d.min(TAU - d) < 1e-12);
    }
}

#[test]
fn norms_survive_many_steps() {
    let p = paper(3).kick::<f64>();
    let y = evolve(&random_state(3, 3), &p, 10_000);
    assert!(y.max_norm_defect() < 1e-12, "{:e}", y.max_norm_defect());
}

#[test]
fn four_site_scalar_products_conserved() {
    let p = KickParams::new(0.63, 1.1, 0.4);
    let x = random_state(4, 4);
    let d13 = dot(&x.vectors[0], &x.vectors[2]);
    let d24 = dot(&x.vectors[1], &x.vectors[3]);
    let y = evolve(&x, &p, 1000);
    assert!((dot(&y.vectors[0], &y.vectors[2]) - d13).abs() < 1e-10);
    assert!((dot(&y.vectors[1], &y.vectors[3]) - d24).abs() < 1e-10);
}

#[test]
fn jacobian_is_symplectic_in_canonical_coordinates() {
    let p = paper(3).kick::<f64>();
    let x = random_state(3, 5);
    let (y, jac) = step_jacobian(&x, &p);
    let n = 3;
    let dim = 3 * n;
    // dn/dq, dn/dp at x and dq'/dn, dp'/dn at y
    let mut a = vec![vec![0.0; 2 * n]; dim];
    for (m, v) in x.vectors.iter().enumerate() {
        let r = (1.0 - v[2] * v[2]).sqrt();
        a[3 * m][2 * m] = -v[1];
        a[3 * m + 1][2 * m] = v[0];
        a[3 * m][2 * m + 1] = -v[2] * v[0] / (r * r);
        a[3 * m + 1][2 * m + 1] = -v[2] * v[1] / (r * r);
        a[3 * m + 2][2 * m + 1] = 1.0;
    }
    let mut c = vec![vec![0.0; dim]; 2 * n];
    for (m, v) in y.vectors.iter().enumerate() {
        let rho2 = v[0] * v[0] + v[1] * v[1];
        c[2 * m][3 * m] = -v[1] / rho2;
        c[2 * m][3 * m + 1] = v[0] / rho2;
        c[2 * m + 1][3 * m + 2] = 1.0;
    }
    let mut jqp = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..2 * n {
        for k in 0..2 * n {
            let mut s = 0.0;
            for a1 in 0..dim {
                for b1 in 0..dim {
                    s += c[i][a1] * jac[a1 * dim + b1] * a[b1][k];
                }
            }
            jqp[i][k] = s;
        }
    }
    let omega = |i: usize, k: usize| -> f64 {
        if i / 2 != k / 2 {
            0.0
        } else if i % 2 == 0 && k % 2 == 1 {
            1.0
        } else if i % 2 == 1 && k % 2 == 0 {
            -1.0
        } else {
            0.0
        }
    };
    for i in 0..2 * n {
        for k in 0..2 * n {
            let mut s = 0.0;
            for a1 in 0..2 * n {
                for b1 in 0..2 * n {
                    s += jqp[a1][i] * omega(a1, b1) * jqp[b1][k];
                }
            }
            assert!((s - omega(i, k)).abs() < 1e-8, "{i} {k} {s}");
        }
    }
}

#[test]
fn euler_angles() {
    let e = euler_decompose(0.0f64, 0.7);
    assert!(e.beta.abs() < 1e-12);
    assert!((e.alpha + e.gamma - 1.4).abs() < 1e-12);

    let (bx, bz) = (0.9f64, 0.9f64);
    let e = euler_decompose(bx, bz);
    let r = kick_rotation(&KickParams::new(0.0, bx, bz));
    let m = euler_matrix(&e);
    for i in 0..3 {
        for k in 0..3 {
            assert!((r[i][k] - m[i][k]).abs() < 1e-12);
        }
    }
    let b = bx.hypot(bz);
    assert!((e.alpha - e.gamma).abs() < 1e-12);
    assert!((bz * (std::f64::consts::FRAC_PI_2 - e.alpha).tan() - b / b.tan()).abs() < 1e-12);
    assert!((e.beta.cos() - ((bz / b).powi(2) + (bx / b).powi(2) * (2.0 * b).cos())).abs() < 1e-12);

    let e = euler_decompose(1.1f64, 0.0);
    assert!((e.beta.cos() - 2.2f64.cos()).abs() < 1e-12);
    assert_eq!(euler_decompose(0.0f64, 0.0).beta, 0.0);
}

#[test]
fn euler_single_precision() {
    let e = euler_decompose(0.9f32, 0.9f32);
    let r = kick_rotation(&KickParams::new(0.0f32, 0.9, 0.9));
    let m = euler_matrix(&e);
    assert!((0..3).all(|i| (0..3).all(|k| (r[i][k] - m[i][k]).abs() < 1e-5)));
}

#[test]
fn portraits() {
    let b = 0.9 * 2f64.sqrt();
    let flat = SpinChainParams::from_polar(1, 1, 0.7, b, 0.0, 1, 1).unwrap().kick::<f64>();
    let pts = phase_portrait(&flat, 1, 0, 20, 200, PortraitFilter::All, 9);
    for orbit in &pts {
        let (lo, hi) = orbit.iter().fold((f64::MAX, f64::MIN), |(l, h), &(_, p)| (l.min(p), h.max(p)));
        assert!(hi - lo < 1e-10);
    }
    let mixed = SpinChainParams::from_polar(1, 1, 0.7, b, FRAC_PI_4, 1, 1).unwrap().kick::<f64>();
    let pts = phase_portrait(&mixed, 1, 0, 20, 200, PortraitFilter::All, 9);
    let spread = pts
        .iter()
        .map(|o| o.iter().fold((f64::MAX, f64::MIN), |(l, h), &(_, p)| (l.min(p), h.max(p))))
        .map(|(l, h)| h - l)
        .fold(0.0, f64::max);
    assert!(spread > 0.5);
    let none = phase_portrait(&mixed, 1, 0, 5, 0, PortraitFilter::All, 9);
    assert!(none.iter().all(|o| o.len() == 1));
    let upper = phase_portrait(&mixed, 1, 0, 5, 50, PortraitFilter::UpperHemisphere, 9);
    assert!(upper.iter().flatten().all(|&(x, y)| x * x + y * y <= 1.0 + 1e-12));
}

#[test]
fn kicked_top_has_two_fixed_points() {
    let s = find_periodic_orbits(&paper(1), 1, 200, 1e-6, 11).unwrap();
    assert_eq!(s.orbits.len(), 2, "{:?}", s.orbits.iter().map(|o| o.action).collect::<Vec<_>>());
    for o in &s.orbits {
        assert!(o.residual < 1e-10);
        let l = &o.monodromy_eigenvalues;
        assert!((l[0] * l[1] - 1.0).norm() < 1e-6);
    }
}

#[test]
fn trivial_dynamics_flagged() {
    let p = SpinChainParams::new(1, 2, 0.0, 0.0, 0.0, 1, 1).unwrap();
    let s = find_periodic_orbits(&p, 1, 10, 1e-6, 1).unwrap();
    assert!(s.trivial_manifold);
    assert!(s.orbits.is_empty());
}

#[test]
fn manifold_orbits_have_four_unit_multipliers() {
    let params = SpinChainParams::new(1, 4, 0.6, 0.9, 0.9, 2, 1).unwrap();
    let p = params.kick::<f64>();
    let chi = manifold_solutions(&p).unwrap().chi_solutions[0];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let x = sample_manifold_point(&p, chi, &mut rng).unwrap();
        let o = orbit_from_point(&x, &p, 2).unwrap();
        assert!(o.residual < 1e-10);
        let ones = o.monodromy_eigenvalues.iter().filter(|z| (*z - 1.0).norm() < 1e-6).count();
        assert!(ones >= 4, "{:?}", o.monodromy_eigenvalues);
        assert!(matches!(stability_prefactor(&o, None), Err(stdual::Error::NearBifurcation { .. })));
    }
}

#[test]
fn newton_converges_on_manifold_neighbourhood() {
    let params = SpinChainParams::new(1, 4, 0.6, 0.9, 0.9, 2, 1).unwrap();
    let s = find_periodic_orbits(&params, 2, 60, 1e-6, 2).unwrap();
    assert!(s.converged > 0);
    assert!(s.orbits.iter().all(|o| o.residual < 1e-10));
}

fn hyperbolic_orbit(n: usize, t: usize) -> PeriodicOrbit {
    let s = find_periodic_orbits(&paper(n), t, 100, 1e-6, 21).unwrap();
    s.orbits
        .into_iter()
        .find(|o| o.marginal_distance() > 1e-3 && o.t_p == t)
        .expect("a non-marginal orbit")
}

#[test]
fn prefactor_is_invariant_under_relabelling() {
    let o = hyperbolic_orbit(2, 2);
    let p = paper(2).kick::<f64>();
    let d = stability_prefactor(&o, None).unwrap();
    let shifted_time = orbit_from_point(&o.points[1], &p, 2).unwrap();
    let shifted_site = orbit_from_point(&o.points[0].shifted(1), &p, 2).unwrap();
    for other in [shifted_time, shifted_site] {
        assert!((stability_prefactor(&other, None).unwrap() - d).norm() < 1e-8 * d.norm());
        let da = (other.action - o.action).rem_euclid(TAU);
        assert!(da.min(TAU - da) < 1e-8);
        assert!((other.det_m_minus_1 - o.det_m_minus_1).abs() < 1e-8 * o.det_m_minus_1.abs());
    }
    let with_phase = stability_prefactor(&o, Some(1)).unwrap();
    assert!((with_phase.norm() - d.norm()).abs() < 1e-14);
}

#[test]
fn repetitions_scale_action_and_keep_primitive_period() {
    let p1 = paper(1).kick::<f64>();
    let prime = hyperbolic_orbit(1, 1);
    let rep = orbit_from_point(&prime.points[0], &p1, 3).unwrap();
    assert_eq!(rep.t_p, 1);
    assert_eq!(rep.r_t, 3);
    let m = &prime.monodromy;
    let cube = m * m * m;
    let da = (rep.action - 3.0 * prime.action).rem_euclid(TAU);
    assert!(da.min(TAU - da) < 1e-8);
    // the frame is the same, so M^3 is the three-step monodromy
    assert!((&rep.monodromy - cube).abs().max() < 1e-8);

    // spatial repetition of a uniform configuration
    let p2 = paper(2).kick::<f64>();
    let x2 = ClassicalState::new(vec![prime.points[0].vectors[0]; 2]);
    let o2 = orbit_from_point(&x2, &p2, 1).unwrap();
    assert!(o2.residual < 1e-10);
    assert_eq!(o2.n_p, 1);
    assert_eq!(o2.r_n, 2);
    let da = (o2.action - 2.0 * prime.action).rem_euclid(TAU);
    assert!(da.min(TAU - da) < 1e-8);
}

#[test]
fn zero_dynamics_has_zero_action() {
    let p = KickParams::new(0.0, 0.0, 0.0);
    assert!(trajectory_action(&random_state(3, 8), &p, 2).unwrap().abs() < 1e-15);
}
