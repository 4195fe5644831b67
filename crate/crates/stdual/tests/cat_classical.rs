use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stdual::cat::classical::*;

fn dual(nu: i64, n: usize, t: usize) -> CatMapParams<f64> {
    CatMapParams::space_time_dual(nu, n, t).unwrap()
}

fn lattice_state(n: usize, q: u32, seed: u64) -> CatState<f64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || (0..n).map(|_| rng.random_range(0..q) as f64 / q as f64).collect::<Vec<_>>();
    CatState { q: draw(), p: draw() }
}

fn direct_solve(m: &SymbolArray, nu: i64) -> Vec<f64> {
    let (n, t) = (m.n, m.t);
    let dim = n * t;
    let mut k = DMatrix::<f64>::zeros(dim, dim);
    for tt in 0..t {
        for nn in 0..n {
            let i = m.idx(nn, tt);
            k[(i, i)] += nu as f64;
            for j in [m.idx(nn + 1, tt), m.idx(nn + n - 1, tt), m.idx(nn, tt + 1), m.idx(nn, tt + t - 1)] {
                k[(i, j)] -= 1.0;
            }
        }
    }
    let rhs = DVector::from_iterator(dim, m.m.iter().map(|&x| x as f64));
    k.lu().solve(&rhs).unwrap().iter().copied().collect()
}

#[test]
fn origin_is_fixed() {
    let p = dual(5, 4, 1);
    let z = CatState { q: vec![0.0; 4], p: vec![0.0; 4] };
    let (z1, w) = catmap_step(&z, &p);
    assert_eq!(z1, z);
    assert!(w.mq.iter().chain(&w.mp).all(|&x| x == 0));
}

#[test]
fn single_cat_map_spectrum() {
    let p = CatMapParams::<f64>::new(2, 1, 0, 1, 1).unwrap();
    let s = build_m(&p);
    assert_eq!(s.m, vec![vec![2, 1], vec![1, 1]]);
    let r5 = 5f64.sqrt();
    assert!((s.eigenvalues[0].re - (3.0 + r5) / 2.0).abs() < 1e-12);
    assert!((s.eigenvalues[1].re - (3.0 - r5) / 2.0).abs() < 1e-12);
    assert!(s.hyperbolic);
}

fn mat_vec(m: &[Vec<i64>], z: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(z).map(|(&a, &b)| a as f64 * b).sum()).collect()
}

#[test]
fn step_matches_matrix_form() {
    for (a, b, d, n) in [(2, 3, -1, 5), (3, 4, 1, 3), (2, 2, -1, 2), (1, 5, 2, 1)] {
        let p = CatMapParams::<f64>::new(a, b, d, n, 1).unwrap();
        let m = matrix_m(a, b, d, n);
        let z = lattice_state(n, 1 << 20, 7);
        let flat: Vec<f64> = (0..n).flat_map(|i| [z.q[i], z.p[i]]).collect();
        let image = mat_vec(&m, &flat);
        let (z1, _) = catmap_step(&z, &p);
        for i in 0..n {
            assert!((image[2 * i].rem_euclid(1.0) - z1.q[i]).abs() < 1e-12);
            assert!((image[2 * i + 1].rem_euclid(1.0) - z1.p[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn hyperbolicity_condition_implies_hyperbolic() {
    for a in -6i64..=6 {
        for b in -6i64..=6 {
            for d in -2i64..=2 {
                for n in 1..6 {
                    let p = CatMapParams::<f64>::new(a, b, d, n, 1).unwrap();
                    if p.hyperbolicity_condition() {
                        assert!(build_m(&p).hyperbolic, "a={a} b={b} d={d} n={n}");
                    }
                }
            }
        }
    }
}

#[test]
fn uncoupled_chain_is_block_diagonal() {
    let p = CatMapParams::<f64>::new(3, 2, 0, 4, 1).unwrap();
    let s = build_m(&p);
    for i in 0..8 {
        for j in 0..8 {
            if i / 2 != j / 2 {
                assert_eq!(s.m[i][j], 0);
            }
        }
    }
    let single = build_m(&CatMapParams::<f64>::new(3, 2, 0, 1, 1).unwrap());
    for k in 0..4 {
        assert!((s.eigenvalues[2 * k] - single.eigenvalues[0]).norm() < 1e-12);
        assert!((s.eigenvalues[2 * k + 1] - single.eigenvalues[1]).norm() < 1e-12);
    }
}

#[test]
fn stability_matrix_is_symplectic() {
    for (a, b, d, n) in [(2, 3, -1, 5), (4, 3, 1, 4), (2, 11, -1, 3), (2, 3, -1, 2), (2, 3, -1, 1)] {
        let m = matrix_m(a, b, d, n);
        let dim = 2 * n;
        let omega = |i: usize, j: usize| -> i64 {
            if i / 2 != j / 2 {
                0
            } else if i % 2 == 0 && j % 2 == 1 {
                1
            } else if i % 2 == 1 && j % 2 == 0 {
                -1
            } else {
                0
            }
        };
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0i64;
                for k in 0..dim {
                    for l in 0..dim {
                        s += m[k][i] * omega(k, l) * m[l][j];
                    }
                }
                assert_eq!(s, omega(i, j), "a={a} b={b} d={d} n={n}");
            }
        }
    }
}

#[test]
fn zero_symbols_give_zero_orbit() {
    let p = dual(13, 6, 5);
    let o = orbit_from_symbols(&SymbolArray::zeros(6, 5), &p).unwrap();
    assert!(o.q.iter().chain(&o.p).all(|&x| x == 0.0));
    assert!(o.admissible);
    assert_eq!(o.action, 0.0);
}

#[test]
fn single_symbol_is_green_function() {
    let (n, t, nu) = (7, 7, 9);
    let mut m = SymbolArray::zeros(n, t);
    m.set(0, 0, 3);
    let o = orbit_from_symbols(&m, &dual(nu, n, t)).unwrap();
    let oracle = direct_solve(&m, nu);
    for (a, b) in o.q.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-12);
    }
    for nn in 0..n {
        for tt in 0..t {
            let x = o.q_at(nn, tt);
            assert!((x - o.q_at((n - nn) % n, tt)).abs() < 1e-12);
            assert!((x - o.q_at(nn, (t - tt) % t)).abs() < 1e-12);
            assert!((x - o.q_at(tt, nn)).abs() < 1e-12);
        }
    }
}

#[test]
fn large_torus_orbit_is_admissible() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = dual(13, 25, 25);
    let m = SymbolArray::random_restricted(25, 25, 13, &mut rng);
    assert!(m.within_bounds(13));
    let o = orbit_from_symbols(&m, &p).unwrap();
    assert!(o.admissible);
    assert!(o.residual < 1e-9);
    let oracle = direct_solve(&m, 13);
    assert!(o.q.iter().zip(&oracle).all(|(a, b)| (a - b).abs() < 1e-10));
}

#[test]
fn restricted_alphabet_is_admissible() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p = dual(13, 25, 25);
    let ok = (0..200)
        .filter(|_| orbit_from_symbols(&SymbolArray::random_restricted(25, 25, 13, &mut rng), &p).unwrap().admissible)
        .count();
    assert!(ok >= 198, "{ok}/200");
}

#[test]
fn inadmissible_orbit_is_flagged() {
    let mut m = SymbolArray::zeros(4, 4);
    m.set(1, 2, -3);
    let o = orbit_from_symbols(&m, &dual(7, 4, 4)).unwrap();
    assert!(!o.admissible);
    assert!(o.residual < 1e-12);
}

#[test]
fn singular_operator_rejected() {
    let p = CatMapParams::<f64>::new(2, 2, -1, 3, 3).unwrap();
    assert!(orbit_from_symbols(&SymbolArray::zeros(3, 3), &p).is_err());
    let p = CatMapParams::<f64>::new(2, 3, 1, 3, 3).unwrap();
    assert!(orbit_from_symbols(&SymbolArray::zeros(3, 3), &p).is_err());
}

fn torus_close(x: &CatState<f64>, y: &CatState<f64>, tol: f64) -> bool {
    x.q.iter().chain(&x.p).zip(y.q.iter().chain(&y.p)).all(|(a, b)| {
        let d = (a - b).abs();
        d.min(1.0 - d) < tol
    })
}

#[test]
fn orbit_columns_follow_the_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (nu, n, t) in [(7, 5, 6), (13, 8, 8), (6, 3, 9), (13, 25, 25)] {
        let p = dual(nu, n, t);
        let o = orbit_from_symbols(&SymbolArray::random_restricted(n, t, nu, &mut rng), &p).unwrap();
        for tt in 0..t {
            assert!(torus_close(&catmap_step(&o.state(tt), &p).0, &o.state(tt + 1), 1e-8), "nu={nu} t={tt}");
        }
    }
}

#[test]
fn orbit_iterates_under_the_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let p = dual(7, 5, 6);
    let o = orbit_from_symbols(&SymbolArray::random_restricted(5, 6, 7, &mut rng), &p).unwrap();
    let mut z = o.state(0);
    for tt in 1..=6 {
        z = catmap_step(&z, &p).0;
        assert!(torus_close(&z, &o.state(tt), 1e-8), "t={tt}");
    }
}

#[test]
fn action_is_stationary_on_orbits() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let p = dual(9, 6, 5);
    let o = orbit_from_symbols(&SymbolArray::random_restricted(6, 5, 9, &mut rng), &p).unwrap();
    let h = 1e-6;
    for i in 0..o.q.len() {
        let mut qp = o.q.clone();
        let mut qm = o.q.clone();
        qp[i] += h;
        qm[i] -= h;
        let g = (catmap_action_unreduced(&qp, &o.m, &p) - catmap_action_unreduced(&qm, &o.m, &p)) / (2.0 * h);
        assert!(g.abs() < 1e-6, "{g}");
    }
}

#[test]
fn transposed_symbols_share_the_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let p = dual(11, 9, 9);
    let m = SymbolArray::random_restricted(9, 9, 11, &mut rng);
    let a = orbit_from_symbols(&m, &p).unwrap();
    let b = orbit_from_symbols(&m.transposed(), &p).unwrap();
    assert!(b.admissible && b.residual < 1e-9);
    let d = (a.action - b.action).abs();
    assert!(d.min(1.0 - d) < 1e-9);
}

#[test]
fn identical_interiors_give_the_same_orbit() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let (m, ra, rb) = random_encounter(25, 2, 3, 13, &mut rng).unwrap();
    let mut m = m;
    for (x, y) in ra.cells(0, 25, 25).iter().zip(rb.cells(0, 25, 25)) {
        m.set(y.0, y.1, m.get(x.0, x.1));
    }
    let pair = partner_from_swap(&m, ra, rb, 3, &dual(13, 25, 25)).unwrap();
    assert_eq!(pair.gamma.m, pair.gamma_bar.m);
    assert_eq!(pair.delta_s, 0.0);
}

#[test]
fn partners_shadow_each_other() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let p = dual(13, 25, 25);
    for _ in 0..5 {
        let (m, ra, rb) = random_encounter(25, 2, 4, 13, &mut rng).unwrap();
        let pair = partner_from_swap(&m, ra, rb, 4, &p).unwrap();
        assert!(pair.gamma.admissible && pair.gamma_bar.admissible);
        assert!(pair.encounter_shadowing < 1.0 / 13.0, "{}", pair.encounter_shadowing);
        assert!(pair.shadowing < 1.0 / 13.0);
    }
}

#[test]
fn swap_preconditions_enforced() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let p = dual(13, 25, 25);
    let (m, ra, rb) = random_encounter(25, 2, 3, 13, &mut rng).unwrap();
    let wide = Region { width_n: 3, ..rb };
    assert!(partner_from_swap(&m, ra, wide, 3, &p).is_err());
    let mut bad = m.clone();
    let edge = rb.cells(3, 25, 25)[0];
    bad.set(edge.0, edge.1, (m.get(edge.0, edge.1) + 1) % 10);
    assert!(partner_from_swap(&bad, ra, rb, 3, &p).is_err());
}

#[test]
fn symbol_grid_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let m = SymbolArray::random_restricted(4, 3, 13, &mut rng);
    let text = m.to_text(13);
    assert!(text.starts_with("4 3 13\n"));
    assert_eq!(text.lines().count(), 4);
    assert_eq!(SymbolArray::from_text(&text).unwrap(), (m, 13));
    assert!(SymbolArray::from_text("2 2 5\n1 2\n3\n").is_err());
}

#[test]
fn potential_derivative_matches_finite_difference() {
    let v = Potential::random(0.3, 3, &mut ChaCha8Rng::seed_from_u64(20));
    for k in 0..20 {
        let q = k as f64 / 20.0;
        let fd = (v.value(q + 1e-6) - v.value(q - 1e-6)) / 2e-6;
        assert!((fd - v.derivative(q)).abs() < 1e-7);
    }
}

proptest! {
    #[test]
    fn step_preserves_rational_lattice(den in 1i64..=64, seed in 0u64..1000, nu in 5i64..14, n in 1usize..6) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || (0..n).map(|_| rng.random_range(0..den)).collect::<Vec<_>>();
        let mut z = LatticeState { q: draw(), p: draw(), den };
        let p = dual(nu, n, 1);
        for _ in 0..10 {
            let image = catmap_step(&z.to_state::<f64>(), &p).0;
            for x in image.q.iter().chain(&image.p) {
                let k = x * den as f64;
                prop_assert!((k - k.round()).abs() < 1e-9);
                prop_assert!((0.0..1.0).contains(x));
            }
            z = catmap_step_lattice(&z, p.a, p.b, p.d);
            prop_assert!(torus_close(&image, &z.to_state(), 1e-12));
        }
    }

    #[test]
    fn reconstruction_solves_newton_equation(seed in 0u64..1000, nu in 5i64..16, n in 1usize..12, t in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = SymbolArray::random_restricted(n, t, nu, &mut rng);
        let o = orbit_from_symbols(&m, &dual(nu, n, t)).unwrap();
        prop_assert!(o.residual < 1e-9);
        prop_assert!(o.q.iter().all(|x| (0.0..=1.0).contains(x)));
        prop_assert!(o.p.iter().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn admissible_orbits_respect_symbol_bounds(seed in 0u64..1000, nu in 5i64..10) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = SymbolArray::from_fn(4, 4, |_, _| rng.random_range(-5..nu + 2));
        let o = orbit_from_symbols(&m, &dual(nu, 4, 4)).unwrap();
        if o.admissible {
            prop_assert!(m.within_bounds(nu));
        }
    }
}
