#![allow(dead_code)]

use fracnash::control::{ControlMode, ControlPair};
use fracnash::domain::{FractionalOrders, SpaceGrid, SpaceTimeField, Subdomain, TimeGrid};
use fracnash::problem::{InitialGuess, ProblemSpec, Source, Tracking};
use fracnash::ForwardSystem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_field(rng: &mut ChaCha8Rng, levels: usize, ndof: usize) -> SpaceTimeField {
    SpaceTimeField::from_values(levels, ndof, random_vec(rng, levels * ndof)).unwrap()
}

pub fn random_controls(rng: &mut ChaCha8Rng, like: &ControlPair) -> ControlPair {
    let flat = random_vec(rng, like.len());
    ControlPair::from_flat(like.levels(), like.sizes(), &flat).unwrap()
}

/// Small instance on `(0, 1)` with smooth data and overlapping supports.
pub fn small_1d(
    gamma: f64,
    s: f64,
    n: usize,
    m: usize,
    tracking: Tracking,
    mode: ControlMode,
) -> ProblemSpec {
    let space = SpaceGrid::new_1d(0.0, 1.0, n).unwrap();
    let f = space.sample(|p| 1.0 + p[0]);
    let w0 = space.sample(|p| (std::f64::consts::PI * p[0]).sin());
    let t1 = space.sample(|p| p[0]);
    let t2 = space.sample(|p| -1.0 + p[0] * p[0]);
    ProblemSpec {
        supports: [
            Subdomain::from_box(&space, &[(0.0, 0.6)]).unwrap(),
            Subdomain::from_box(&space, &[(0.4, 1.0)]).unwrap(),
        ],
        observation: Subdomain::from_box(&space, &[(0.2, 0.9)]).unwrap(),
        time: TimeGrid::new(0.8, m).unwrap(),
        orders: FractionalOrders::new(gamma, s).unwrap(),
        source: Source::Constant(f),
        initial_state: w0,
        targets: [t1, t2],
        mu: [0.05, 0.2],
        tracking,
        control_mode: mode,
        bounds: None,
        initial_guess: InitialGuess::Zero,
        space,
    }
}

/// Small instance on the unit square with the corner supports.
pub fn small_2d(
    gamma: f64,
    s: f64,
    n: usize,
    m: usize,
    tracking: Tracking,
    mode: ControlMode,
) -> ProblemSpec {
    let space = SpaceGrid::new_2d((0.0, 1.0, n), (0.0, 1.0, n)).unwrap();
    let f = space.sample(|p| 1.0 + p[0] * p[1]);
    let w0 = space.sample(|p| p[0] * (1.0 - p[1]));
    let t1 = vec![1.0; space.ndof()];
    let t2 = space.sample(|p| -p[1]);
    ProblemSpec {
        supports: [
            Subdomain::from_box(&space, &[(0.0, 0.5), (0.0, 0.5)]).unwrap(),
            Subdomain::from_box(&space, &[(0.5, 1.0), (0.0, 0.5)]).unwrap(),
        ],
        observation: Subdomain::from_box(&space, &[(0.25, 0.75), (0.25, 1.0)]).unwrap(),
        time: TimeGrid::new(1.0, m).unwrap(),
        orders: FractionalOrders::new(gamma, s).unwrap(),
        source: Source::Constant(f),
        initial_state: w0,
        targets: [t1, t2],
        mu: [0.1, 0.02],
        tracking,
        control_mode: mode,
        bounds: None,
        initial_guess: InitialGuess::Zero,
        space,
    }
}

pub fn system(p: ProblemSpec) -> ForwardSystem {
    ForwardSystem::new(p).unwrap()
}

/// The three structural variants of a small 1D instance.
pub fn variants_1d(gamma: f64, s: f64) -> Vec<(&'static str, ProblemSpec)> {
    vec![
        (
            "time-dependent",
            small_1d(
                gamma,
                s,
                7,
                5,
                Tracking::Parabolic,
                ControlMode::TimeDependent,
            ),
        ),
        (
            "time-constant",
            small_1d(
                gamma,
                s,
                9,
                6,
                Tracking::Parabolic,
                ControlMode::TimeConstant,
            ),
        ),
        (
            "elliptic",
            small_1d(
                gamma,
                s,
                10,
                1,
                Tracking::Elliptic,
                ControlMode::TimeConstant,
            ),
        ),
    ]
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// `J_j` at the given controls.
pub fn cost(sys: &ForwardSystem, u: &ControlPair, j: usize) -> f64 {
    let w = sys.solve_state(u).unwrap();
    sys.evaluate_costs(&w, u).unwrap().j[j]
}
