//! Sweeps over `(gamma, s)` and per-row metrics.

use std::time::Instant;

use rayon::prelude::*;

use crate::domain::{l2_norm_space, l2_norm_spacetime, SpaceTimeField, Subdomain};
use crate::error::{Error, Result};
use crate::nash::{nash_cg, simulate, NashSolution};
use crate::oracle::{assemble_dense_a_with_cap, certify_spd, oracle_nash_solve, SpdCertificate};
use crate::problem::{ProblemSpec, Tracking};
use crate::solver::ForwardSystem;

use super::config::ExperimentConfig;
use super::preset::{Metric, Scenario};

/// One line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub gamma: f64,
    /// As printed: `2s` when the scenario reports `2s`.
    pub s: f64,
    pub err_w1: f64,
    pub err_w2: f64,
    pub iters: usize,
    /// Final relative squared residual.
    pub tol: f64,
    pub seconds: f64,
}

/// Final state on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub dimension: usize,
    pub points: Vec<[f64; 2]>,
    pub values: Vec<f64>,
}

/// Everything produced for one `(gamma, s)` pair.
#[derive(Debug, Clone)]
pub struct RowOutcome {
    pub row: ResultRow,
    /// Actual fractional order used.
    pub order_s: f64,
    pub converged: bool,
    pub error: Option<String>,
    /// `||g_j||_H` at the returned controls.
    pub player_residuals: [f64; 2],
    /// `(t_n, ||w(t_n) - w_1||^2, ||w(t_n) - w_2||^2)` over `omega_d`.
    pub series: Vec<[f64; 3]>,
    pub snapshot: Option<Snapshot>,
}

impl RowOutcome {
    pub fn ok(&self) -> bool {
        self.converged && self.error.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub outcomes: Vec<RowOutcome>,
}

impl RunReport {
    pub fn rows(&self) -> Vec<ResultRow> {
        self.outcomes.iter().map(|o| o.row.clone()).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.outcomes.iter().all(RowOutcome::ok)
    }
}

/// Solves one instance, or in no-control mode simulates it at the initial
/// controls (zero unless the scenario starts from ones).
pub fn solve_instance(
    scenario: &Scenario,
    gamma: f64,
    s: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(ForwardSystem, NashSolution)> {
    let sys = ForwardSystem::new(scenario.problem(gamma, s)?)?;
    let solution = if scenario.no_control {
        let initial = sys.problem().initial_controls();
        simulate(&sys, initial)?
    } else {
        nash_cg(&sys, tol, max_iter)?
    };
    Ok((sys, solution))
}

/// `||w - w_j||` for both players in the scenario's convention.
pub fn error_metrics(problem: &ProblemSpec, metric: Metric, state: &SpaceTimeField) -> [f64; 2] {
    let full = Subdomain::full(&problem.space);
    let diff = |j: usize, level: &[f64]| -> Vec<f64> {
        level
            .iter()
            .zip(&problem.targets[j])
            .map(|(w, t)| w - t)
            .collect()
    };
    let mut out = [0.0; 2];
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = match metric {
            Metric::ObservationSpaceTimeSq => match problem.tracking {
                Tracking::Parabolic => {
                    let mut misfit = state.clone();
                    for n in 0..misfit.levels() {
                        let d = diff(j, state.level(n));
                        misfit.level_mut(n).copy_from_slice(&d);
                    }
                    l2_norm_spacetime(&misfit, &problem.observation, &problem.space, &problem.time)
                        .powi(2)
                }
                Tracking::Elliptic => {
                    l2_norm_space(&diff(j, state.last()), &problem.observation, &problem.space)
                        .powi(2)
                }
            },
            Metric::FinalL2 => l2_norm_space(&diff(j, state.last()), &full, &problem.space),
            Metric::FinalEuclidean => diff(j, state.last())
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt(),
        };
    }
    out
}

fn snapshot(problem: &ProblemSpec, state: &SpaceTimeField) -> Snapshot {
    Snapshot {
        dimension: problem.space.dimension(),
        points: (0..problem.ndof())
            .map(|i| problem.space.point(i))
            .collect(),
        values: state.last().to_vec(),
    }
}

/// Runs a single `(gamma, s)` pair; failures are recorded in the outcome.
pub fn run_row(config: &ExperimentConfig, gamma: f64, s: f64) -> RowOutcome {
    let sc = &config.scenario;
    let start = Instant::now();
    let mut row = ResultRow {
        gamma,
        s: sc.reported_s(s),
        err_w1: f64::NAN,
        err_w2: f64::NAN,
        iters: 0,
        tol: f64::NAN,
        seconds: 0.0,
    };
    match solve_instance(sc, gamma, s, config.tol, config.max_iter) {
        Ok((sys, sol)) => {
            let problem = sys.problem();
            let [e1, e2] = error_metrics(problem, sc.metric, &sol.state);
            row.err_w1 = e1;
            row.err_w2 = e2;
            row.iters = sol.diagnostics.iterations;
            row.tol = sol.diagnostics.relative_residual;
            row.seconds = start.elapsed().as_secs_f64();
            let series = match problem.tracking {
                Tracking::Parabolic => sol
                    .costs
                    .curves
                    .iter()
                    .enumerate()
                    .map(|(n, c)| [problem.time.node(n), c[0], c[1]])
                    .collect(),
                Tracking::Elliptic => vec![[0.0, sol.costs.curves[0][0], sol.costs.curves[0][1]]],
            };
            RowOutcome {
                row,
                order_s: s,
                converged: sol.diagnostics.converged,
                error: None,
                player_residuals: sol.diagnostics.player_residuals,
                series,
                snapshot: Some(snapshot(problem, &sol.state)),
            }
        }
        Err(e) => {
            row.seconds = start.elapsed().as_secs_f64();
            RowOutcome {
                row,
                order_s: s,
                converged: false,
                error: Some(e.to_string()),
                player_residuals: [f64::NAN; 2],
                series: Vec::new(),
                snapshot: None,
            }
        }
    }
}

fn in_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// One outcome per sweep pair, in sweep order. Rows run concurrently.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let pairs = config.scenario.sweep();
    let outcomes = in_pool(config.threads, || {
        pairs
            .par_iter()
            .map(|&(g, s)| run_row(config, g, s))
            .collect::<Vec<_>>()
    })?;
    Ok(RunReport {
        scenario: config.scenario.name.clone(),
        outcomes,
    })
}

/// Control degrees of freedom of a scenario's instances.
pub fn control_dofs(scenario: &Scenario) -> Result<usize> {
    let (g, s) = scenario.sweep()[0];
    Ok(scenario.problem(g, s)?.control_space().dofs())
}

/// Coarsens the grid (space first, then time) until the control space fits `cap`.
pub fn shrink_to_cap(scenario: &Scenario, cap: usize) -> Result<Scenario> {
    let mut sc = scenario.clone();
    loop {
        let dofs = control_dofs(&sc)?;
        if dofs <= cap {
            return Ok(sc);
        }
        if sc.points > 8 {
            sc.points = sc.points.div_ceil(2);
        } else if sc.steps > 2 {
            sc.steps = sc.steps.div_ceil(2);
        } else {
            return Err(Error::CapExceeded { dofs, cap });
        }
    }
}

/// Dense-oracle comparison for one shrunk instance.
#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub gamma: f64,
    pub s: f64,
    pub points: usize,
    pub steps: usize,
    pub dofs: usize,
    /// `||u_cg - u_oracle||_H / ||u_oracle||_H`.
    pub disagreement: f64,
    pub certificate: SpdCertificate,
}

/// Shrinks the scenario to `config.oracle_cap` control DOFs and compares CG
/// against the dense solve for every sweep pair.
pub fn oracle_check(config: &ExperimentConfig) -> Result<Vec<OracleCheck>> {
    let mut sc = shrink_to_cap(&config.scenario, config.oracle_cap)?;
    sc.no_control = false;
    let pairs = sc.sweep();
    in_pool(config.threads, || {
        pairs
            .par_iter()
            .map(|&(g, s)| {
                let sys = ForwardSystem::new(sc.problem(g, s)?)?;
                let system = assemble_dense_a_with_cap(&sys, config.oracle_cap)?;
                let certificate = certify_spd(&system);
                let reference = oracle_nash_solve(&system)?;
                let cg = nash_cg(&sys, 1e-24, 10 * system.dofs() + 50)?;
                let space = sys.problem().control_space();
                let mut diff = cg.controls.clone();
                diff.axpy(-1.0, &reference);
                let scale = space.norm(&reference);
                let disagreement = if scale > 0.0 {
                    space.norm(&diff) / scale
                } else {
                    space.norm(&diff)
                };
                Ok(OracleCheck {
                    gamma: g,
                    s,
                    points: sc.points,
                    steps: sc.steps,
                    dofs: system.dofs(),
                    disagreement,
                    certificate,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?
}
