mod common;

use common::*;
use fracnash::control::{ControlMode, ControlPair};
use fracnash::experiment::preset;
use fracnash::nash::{apply_operator_a, nash_cg, residual_gradient};
use fracnash::oracle::{
    assemble_dense_a, assemble_dense_a_with_cap, certify_spd, oracle_nash_solve, oracle_residual,
};
use fracnash::problem::{Source, Tracking};
use fracnash::{Error, ForwardSystem};
use rand::seq::SliceRandom;

#[test]
fn zero_data_gives_zero_rhs_and_solution() {
    let mut p = small_1d(
        0.6,
        0.5,
        8,
        4,
        Tracking::Parabolic,
        ControlMode::TimeDependent,
    );
    let n = p.ndof();
    p.source = Source::Constant(vec![0.0; n]);
    p.initial_state = vec![0.0; n];
    p.targets = [vec![0.0; n], vec![0.0; n]];
    let dense = assemble_dense_a(&system(p)).unwrap();
    assert_eq!(dense.rhs.amax(), 0.0);
    assert_eq!(oracle_nash_solve(&dense).unwrap().max_abs(), 0.0);
}

#[test]
fn diagonal_dominates_regularization() {
    for (name, p) in variants_1d(0.7, 0.5) {
        let sys = system(p);
        let dense = assemble_dense_a(&sys).unwrap();
        let sizes = dense.sizes;
        let flat_player: Vec<usize> = (0..dense.levels)
            .flat_map(|_| std::iter::repeat_n(0, sizes[0]))
            .chain((0..dense.levels).flat_map(|_| std::iter::repeat_n(1, sizes[1])))
            .collect();
        for (i, &j) in flat_player.iter().enumerate() {
            assert!(dense.matrix[(i, i)] >= dense.mu[j], "{name} entry {i}");
        }
    }
}

#[test]
fn dense_system_reproduces_gradient() {
    for (name, p) in variants_1d(0.8, 0.3) {
        let sys = system(p);
        let dense = assemble_dense_a(&sys).unwrap();
        let b = dense.b().unwrap();
        let mut r = rng(21);
        for _ in 0..5 {
            let u = random_controls(&mut r, &b);
            let mut expect = dense.apply(&u).unwrap();
            expect.axpy(-1.0, &b);
            let g = residual_gradient(&sys, &u).unwrap().gradient;
            let err = rel_err(&g.to_flat(), &expect.to_flat());
            assert!(err <= 1e-10, "{name}: {err:e}");
        }
    }
}

#[test]
fn assembly_does_not_depend_on_basis_order() {
    let sys = system(small_1d(
        0.6,
        0.6,
        7,
        3,
        Tracking::Parabolic,
        ControlMode::TimeDependent,
    ));
    let dense = assemble_dense_a(&sys).unwrap();
    let n = dense.dofs();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng(9));
    let w = &dense.weights;
    let mut rebuilt = nalgebra::DMatrix::zeros(n, n);
    for &k in &order {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let dir = ControlPair::from_flat(dense.levels, dense.sizes, &e).unwrap();
        let col = apply_operator_a(&sys, &dir).unwrap().to_flat();
        for i in 0..n {
            rebuilt[(i, k)] = w[i].sqrt() * col[i] / w[k].sqrt();
        }
    }
    assert_eq!(rebuilt, dense.matrix);
}

#[test]
fn oracle_solution_has_tiny_residual_and_satisfies_vi() {
    for (name, p) in variants_1d(0.5, 0.8) {
        let sys = system(p);
        let dense = assemble_dense_a(&sys).unwrap();
        let u = oracle_nash_solve(&dense).unwrap();
        assert!(oracle_residual(&dense, &u).unwrap() <= 1e-12, "{name}");

        let space = sys.problem().control_space();
        let mut g = dense.apply(&u).unwrap();
        g.axpy(-1.0, &dense.b().unwrap());
        let mut r = rng(2);
        for _ in 0..20 {
            let mut v = random_controls(&mut r, &u);
            v.axpy(-1.0, &u);
            let pairing = space.inner(&g, &v);
            assert!(pairing.abs() <= 1e-9, "{name}: {pairing:e}");
        }
    }
}

#[test]
fn presets_are_certified_spd() {
    // ex4 with 40 control entries, mu = 10
    let mut sc = preset("ex4").unwrap();
    sc.points = 80;
    let sys = ForwardSystem::new(sc.problem(0.6, 0.5).unwrap()).unwrap();
    let dense = assemble_dense_a(&sys).unwrap();
    assert_eq!(dense.dofs(), 40);
    let cert = certify_spd(&dense);
    assert!(cert.passed, "{cert:?}");
    assert!(cert.lambda_min >= 10.0 - 1e-8);

    // elliptic ex2 with 32 control entries, mu = 1e-4
    let mut sc = preset("ex2").unwrap();
    sc.points = 15;
    let sys = ForwardSystem::new(sc.problem(1.0, 0.8).unwrap()).unwrap();
    let dense = assemble_dense_a(&sys).unwrap();
    assert_eq!(dense.dofs(), 32);
    let cert = certify_spd(&dense);
    assert!(cert.passed, "{cert:?}");
    assert!(cert.lambda_min >= 1e-4 - 1e-8);
    assert!(cert.symmetry_defect <= 1e-10);
}

#[test]
fn oracle_agrees_with_cg_on_shrunk_example_four() {
    let mut sc = preset("ex4").unwrap();
    sc.points = 10;
    sc.steps = 4;
    for (g, s) in sc.sweep() {
        let sys = ForwardSystem::new(sc.problem(g, s).unwrap()).unwrap();
        let dense = assemble_dense_a(&sys).unwrap();
        let reference = oracle_nash_solve(&dense).unwrap();
        let sol = nash_cg(&sys, 1e-24, 200).unwrap();
        let err = rel_err(&sol.controls.to_flat(), &reference.to_flat());
        assert!(err <= 1e-8, "({g},{s}): {err:e}");
    }
}

#[test]
fn cap_is_enforced() {
    let sys = system(small_2d(
        0.8,
        0.7,
        7,
        20,
        Tracking::Parabolic,
        ControlMode::TimeDependent,
    ));
    let n = sys.problem().control_space().dofs();
    match assemble_dense_a_with_cap(&sys, n - 1) {
        Err(Error::CapExceeded { dofs, cap }) => {
            assert_eq!(dofs, n);
            assert_eq!(cap, n - 1);
        }
        other => panic!("expected cap error, got {other:?}"),
    }
}

#[test]
fn dump_is_plain_decimal_text() {
    let sys = system(small_1d(
        0.6,
        0.5,
        5,
        2,
        Tracking::Parabolic,
        ControlMode::TimeConstant,
    ));
    let dense = assemble_dense_a(&sys).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.txt");
    dense.dump(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let n = dense.dofs();
    assert_eq!(lines.next().unwrap(), format!("{n} {n}"));
    for i in 0..n {
        let row: Vec<f64> = lines
            .next()
            .unwrap()
            .split(' ')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(row.len(), n);
        for (k, v) in row.iter().enumerate() {
            assert_eq!(v.to_bits(), dense.matrix[(i, k)].to_bits());
        }
    }
    assert_eq!(lines.next().unwrap(), format!("{n} 1"));
    for i in 0..n {
        let v: f64 = lines.next().unwrap().parse().unwrap();
        assert_eq!(v.to_bits(), dense.rhs[i].to_bits());
    }
    assert!(lines.next().is_none());
}
