//! Reduced optimality operator and the Nash solvers.
//!
//! With `S` the control-to-state map and `chi_d` the observation mask, the
//! reduced gradient of player `j` is
//!
//! ```text
//! g_j(u) = mu_j u_j + B_j^* p_j,   p_j = adjoint of chi_d (w(u) - w_j)
//! ```
//!
//! taken with respect to the quadrature-weighted product `(., .)_H`. The
//! stacked gradient is affine, `g(u) = A u - b`, and the linear part `A` is
//! symmetric and coercive on `H`, so the equilibrium is the solution of
//! `A u = b` and conjugate gradients apply directly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::control::{ControlMode, ControlPair, ControlSpace};
use crate::domain::{restrict, SpaceTimeField};
use crate::error::{Error, Result};
use crate::problem::Tracking;
use crate::solver::{CostReport, ForwardSystem};

/// Gradient of both players' costs with the fields it was computed from.
#[derive(Debug, Clone)]
pub struct GradientEvaluation {
    pub gradient: ControlPair,
    pub state: SpaceTimeField,
    /// Adjoint states `p_1`, `p_2`.
    pub adjoints: [SpaceTimeField; 2],
}

/// Convergence record of an iterative Nash solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// Stopping quantity at exit: `||g^k||^2 / ||g^0||^2` for CG, the
    /// projected residual `||u - P(u - g)||_H` for projected gradient.
    pub relative_residual: f64,
    pub tolerance: f64,
    /// `||g^k||_H^2` per iteration, starting with `k = 0`.
    pub residual_history: Vec<f64>,
    /// CG step lengths `rho_k`.
    pub step_lengths: Vec<f64>,
    /// CG direction update factors `gamma_k`.
    pub direction_factors: Vec<f64>,
    /// `||g_j(u)||` per player, recomputed from scratch at the returned controls.
    pub player_residuals: [f64; 2],
    /// `||u - P(u - g)||_H` at the returned controls.
    pub vi_residual: f64,
}

/// Equilibrium controls with state, adjoints and costs.
#[derive(Debug, Clone)]
pub struct NashSolution {
    pub controls: ControlPair,
    pub state: SpaceTimeField,
    pub adjoints: [SpaceTimeField; 2],
    pub gradient: ControlPair,
    pub costs: CostReport,
    pub diagnostics: Diagnostics,
}

/// Misfit `q_n chi_d (w^n - target)` (or `chi_d w^n` without target), weighted
/// by the time quadrature so that the adjoint solve yields the exact gradient.
fn weighted_misfit(
    sys: &ForwardSystem,
    state: &SpaceTimeField,
    target: Option<&[f64]>,
) -> SpaceTimeField {
    let p = sys.problem();
    let mut z = SpaceTimeField::zeros(state.levels(), state.ndof());
    let parabolic = p.tracking == Tracking::Parabolic;
    for n in 0..state.levels() {
        let q = if parabolic { p.time.weight(n) } else { 1.0 };
        let w = state.level(n);
        let row = z.level_mut(n);
        for &i in p.observation.indices() {
            let t = target.map_or(0.0, |t| t[i]);
            row[i] = q * (w[i] - t);
        }
    }
    z
}

/// Adjoint state for a weighted misfit: the discrete transpose divided by the
/// time weights, so it approximates the continuous backward solution.
fn adjoint_state(sys: &ForwardSystem, weighted: &SpaceTimeField) -> Result<SpaceTimeField> {
    let mut p = sys.solve_adjoint(weighted)?;
    let problem = sys.problem();
    if problem.tracking == Tracking::Parabolic {
        for n in 1..p.levels() {
            let q = problem.time.weight(n);
            p.level_mut(n).iter_mut().for_each(|v| *v /= q);
        }
    }
    Ok(p)
}

/// `B_j^* p` in the shape of player `j`'s control: per time node for
/// time-dependent controls, trapezoid time average for time-constant ones.
fn reduce_adjoint(sys: &ForwardSystem, adjoint: &SpaceTimeField, j: usize) -> Result<Vec<f64>> {
    let p = sys.problem();
    let region = &p.supports[j];
    match (p.tracking, p.control_mode) {
        (Tracking::Elliptic, _) => restrict(adjoint.level(0), region),
        (Tracking::Parabolic, ControlMode::TimeDependent) => {
            let mut out = Vec::with_capacity(adjoint.levels() * region.len());
            for n in 0..adjoint.levels() {
                out.extend(restrict(adjoint.level(n), region)?);
            }
            Ok(out)
        }
        (Tracking::Parabolic, ControlMode::TimeConstant) => {
            let mut out = vec![0.0; region.len()];
            for n in 1..adjoint.levels() {
                let q = p.time.weight(n);
                for (o, v) in out.iter_mut().zip(restrict(adjoint.level(n), region)?) {
                    *o += q * v;
                }
            }
            let t = p.time.horizon();
            out.iter_mut().for_each(|v| *v /= t);
            Ok(out)
        }
    }
}

fn assemble_gradient(
    sys: &ForwardSystem,
    controls: &ControlPair,
    adjoints: [&SpaceTimeField; 2],
) -> Result<ControlPair> {
    let mu = sys.problem().mu;
    let mut g = controls.zeros_like();
    for j in 0..2 {
        let reduced = reduce_adjoint(sys, adjoints[j], j)?;
        for ((gi, ui), pi) in g
            .player_mut(j)
            .iter_mut()
            .zip(controls.player(j))
            .zip(reduced)
        {
            *gi = mu[j] * ui + pi;
        }
    }
    Ok(g)
}

/// Full reduced gradient `g(u) = A u - b` with state and adjoints.
pub fn residual_gradient(
    sys: &ForwardSystem,
    controls: &ControlPair,
) -> Result<GradientEvaluation> {
    let state = sys.solve_state(controls)?;
    let targets = &sys.problem().targets;
    let (p1, p2) = rayon::join(
        || adjoint_state(sys, &weighted_misfit(sys, &state, Some(&targets[0]))),
        || adjoint_state(sys, &weighted_misfit(sys, &state, Some(&targets[1]))),
    );
    let adjoints = [p1?, p2?];
    let gradient = assemble_gradient(sys, controls, [&adjoints[0], &adjoints[1]])?;
    Ok(GradientEvaluation {
        gradient,
        state,
        adjoints,
    })
}

/// Linear part `A` of the reduced gradient applied to a direction.
///
/// Both players track the same state, so a single adjoint solve serves both.
pub fn apply_operator_a(sys: &ForwardSystem, direction: &ControlPair) -> Result<ControlPair> {
    let response = sys.solve_state_homogeneous(direction)?;
    let adjoint = adjoint_state(sys, &weighted_misfit(sys, &response, None))?;
    assemble_gradient(sys, direction, [&adjoint, &adjoint])
}

/// `||u - P(u - g)||_H`, with `P` the projection onto the admissible box
/// (identity when unconstrained).
pub fn projected_residual(
    sys: &ForwardSystem,
    controls: &ControlPair,
    gradient: &ControlPair,
) -> f64 {
    let space = sys.problem().control_space();
    let mut trial = controls.clone();
    trial.axpy(-1.0, gradient);
    if let Some(bounds) = &sys.problem().bounds {
        bounds.clamp(&mut trial);
    }
    let mut diff = controls.clone();
    diff.axpy(-1.0, &trial);
    space.norm(&diff)
}

fn player_norms(space: &ControlSpace, g: &ControlPair) -> [f64; 2] {
    [
        space.player_norm(0, g.player(0)),
        space.player_norm(1, g.player(1)),
    ]
}

fn finish(
    sys: &ForwardSystem,
    controls: ControlPair,
    mut diagnostics: Diagnostics,
) -> Result<NashSolution> {
    let eval = residual_gradient(sys, &controls)?;
    let costs = sys.evaluate_costs(&eval.state, &controls)?;
    let space = sys.problem().control_space();
    diagnostics.player_residuals = player_norms(&space, &eval.gradient);
    diagnostics.vi_residual = projected_residual(sys, &controls, &eval.gradient);
    Ok(NashSolution {
        controls,
        state: eval.state,
        adjoints: eval.adjoints,
        gradient: eval.gradient,
        costs,
        diagnostics,
    })
}

fn empty_diagnostics(tolerance: f64) -> Diagnostics {
    Diagnostics {
        iterations: 0,
        converged: false,
        relative_residual: f64::NAN,
        tolerance,
        residual_history: Vec::new(),
        step_lengths: Vec::new(),
        direction_factors: Vec::new(),
        player_residuals: [0.0; 2],
        vi_residual: 0.0,
    }
}

/// State, adjoints and costs at fixed controls, without optimizing.
pub fn simulate(sys: &ForwardSystem, controls: ControlPair) -> Result<NashSolution> {
    sys.check_controls(&controls)?;
    let mut d = empty_diagnostics(0.0);
    d.converged = true;
    d.relative_residual = 0.0;
    finish(sys, controls, d)
}

/// Conjugate gradient iteration for the unconstrained equilibrium.
///
/// Stops when `||g^k||_H^2 / ||g^0||_H^2 <= tol` or after `max_iter`
/// iterations; the latter returns an unconverged solution rather than an error.
pub fn nash_cg(sys: &ForwardSystem, tol: f64, max_iter: usize) -> Result<NashSolution> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let problem = sys.problem();
    if problem.bounds.is_some() {
        return Err(Error::InvalidProblem(
            "conjugate gradients need unconstrained controls; use the projected gradient solver"
                .into(),
        ));
    }
    let space = problem.control_space();
    let mut u = problem.initial_controls();
    let mut g = residual_gradient(sys, &u)?.gradient;
    let g0 = space.inner(&g, &g);

    let mut d = empty_diagnostics(tol);
    d.residual_history.push(g0);
    if g0 == 0.0 {
        d.converged = true;
        d.relative_residual = 0.0;
        return finish(sys, u, d);
    }

    let mut h = g.clone();
    let mut gg = g0;
    loop {
        let relative = gg / g0;
        d.relative_residual = relative;
        if relative <= tol {
            d.converged = true;
            break;
        }
        if d.iterations >= max_iter {
            break;
        }
        let gbar = apply_operator_a(sys, &h)?;
        let curvature = space.inner(&gbar, &h);
        if !(curvature > 0.0) {
            return Err(Error::NotPositiveDefinite {
                iteration: d.iterations,
                curvature,
            });
        }
        let rho = gg / curvature;
        u.axpy(-rho, &h);
        g.axpy(-rho, &gbar);
        let gg_next = space.inner(&g, &g);
        let factor = gg_next / gg;
        h.xpby(&g, factor);
        gg = gg_next;
        d.iterations += 1;
        d.step_lengths.push(rho);
        d.direction_factors.push(factor);
        d.residual_history.push(gg);
    }
    finish(sys, u, d)
}

/// Alternating projected-gradient best response for box-constrained controls.
///
/// Each sweep updates player 1 then player 2 with
/// `u_j <- P_j(u_j - step g_j(u))`, recomputing the gradient in between, until
/// `||u - P(u - g(u))||_H <= tol`.
pub fn projected_gradient_solve(
    sys: &ForwardSystem,
    tol: f64,
    max_iter: usize,
    step: f64,
) -> Result<NashSolution> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let problem = sys.problem();
    let bounds = problem
        .bounds
        .as_ref()
        .ok_or_else(|| Error::InvalidProblem("projected gradient needs box bounds".into()))?;
    let space = problem.control_space();
    let mut u = problem.initial_controls();
    let mut d = empty_diagnostics(tol);
    let mut g = residual_gradient(sys, &u)?.gradient;
    loop {
        let residual = projected_residual(sys, &u, &g);
        d.residual_history.push(space.inner(&g, &g));
        d.relative_residual = residual;
        if residual <= tol {
            d.converged = true;
            break;
        }
        if d.iterations >= max_iter {
            break;
        }
        for j in 0..2 {
            if j == 1 {
                g = residual_gradient(sys, &u)?.gradient;
            }
            let gj = g.player(j).to_vec();
            let uj = u.player_mut(j);
            crate::domain::axpy(-step, &gj, uj);
            bounds.clamp_player(j, uj);
        }
        g = residual_gradient(sys, &u)?.gradient;
        d.iterations += 1;
    }
    finish(sys, u, d)
}

/// Power-iteration estimate of the largest eigenvalue of `A` on `H`, useful
/// for choosing a projected-gradient step below `1 / lambda_max`.
pub fn estimate_lambda_max(sys: &ForwardSystem, iterations: usize, seed: u64) -> Result<f64> {
    let space = sys.problem().control_space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = space.zeros();
    for j in 0..2 {
        for x in v.player_mut(j) {
            *x = StandardNormal.sample(&mut rng);
        }
    }
    let mut lambda = 0.0;
    for _ in 0..iterations.max(1) {
        let norm = space.norm(&v);
        if norm == 0.0 {
            return Ok(0.0);
        }
        v.scale(1.0 / norm);
        let av = apply_operator_a(sys, &v)?;
        lambda = space.inner(&av, &v);
        v = av;
    }
    Ok(lambda)
}

/// Settings for [`unilateral_check`].
#[derive(Debug, Clone)]
pub struct UnilateralOptions {
    pub trials: usize,
    /// A trial violates the equilibrium when `J_j` drops by more than `rel_tol * J_j`.
    pub rel_tol: f64,
    /// Standard deviation of the perturbation entries; `None` uses `max(1, max|u|)`.
    pub scale: Option<f64>,
    pub seed: u64,
}

impl Default for UnilateralOptions {
    fn default() -> Self {
        Self {
            trials: 100,
            rel_tol: 1e-8,
            scale: None,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnilateralReport {
    pub trials: usize,
    /// `J_j` at the candidate equilibrium.
    pub baseline: [f64; 2],
    /// Largest observed `J_j(u) - J_j(perturbed)`; negative when every trial increased the cost.
    pub worst_violation: [f64; 2],
    /// Trials whose decrease exceeded the tolerance.
    pub violations: [usize; 2],
}

impl UnilateralReport {
    pub fn passed(&self) -> bool {
        self.violations == [0, 0]
    }
}

/// Random one-player deviations from `solution.controls`; an equilibrium
/// admits no deviation that lowers the deviating player's own cost.
pub fn unilateral_check(
    sys: &ForwardSystem,
    solution: &NashSolution,
    options: &UnilateralOptions,
) -> Result<UnilateralReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let base = &solution.controls;
    let baseline_state = sys.solve_state(base)?;
    let baseline = sys.evaluate_costs(&baseline_state, base)?.j;
    let scale = options.scale.unwrap_or_else(|| base.max_abs().max(1.0));
    let mut worst = [f64::NEG_INFINITY; 2];
    let mut violations = [0; 2];
    for j in 0..2 {
        let tol = options.rel_tol * baseline[j].abs();
        for _ in 0..options.trials {
            let mut trial = base.clone();
            for v in trial.player_mut(j) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += scale * z;
            }
            if let Some(bounds) = &sys.problem().bounds {
                let mut uj = trial.player(j).to_vec();
                bounds.clamp_player(j, &mut uj);
                trial.player_mut(j).copy_from_slice(&uj);
            }
            let state = sys.solve_state(&trial)?;
            let cost = sys.evaluate_costs(&state, &trial)?.j[j];
            let drop = baseline[j] - cost;
            worst[j] = worst[j].max(drop);
            if drop > tol {
                violations[j] += 1;
            }
        }
    }
    Ok(UnilateralReport {
        trials: options.trials,
        baseline,
        worst_violation: worst,
        violations,
    })
}
