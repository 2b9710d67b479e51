//! Forward and adjoint solvers for the state equation.
//!
//! The parabolic state is advanced with the implicit L1 scheme
//!
//! ```text
//! (beta b_0 I + A) w^n = f^n + B_1 u_1^n + B_2 u_2^n
//!                        + beta [ b_{n-1} w^0 + sum_{k=1}^{n-1} (b_{n-1-k} - b_{n-k}) w^k ]
//! ```
//!
//! Viewed as a map from the right-hand sides at `t_1..t_M` to the states at
//! `t_1..t_M`, the scheme is block lower-triangular Toeplitz in time with a
//! symmetric spatial block, so its transpose is the same recursion run on
//! time-reversed data. The adjoint solver uses exactly that, which makes it
//! the discrete transpose of the forward solver to machine precision.

use crate::control::{ControlMode, ControlPair};
use crate::domain::{extend_add, l2_norm_space_sq, SpaceTimeField};
use crate::error::{Error, Result};
use crate::fractional::L1Weights;
use crate::operator::{assemble_frac_laplacian, ShiftedSolver, SpatialOperator};
use crate::problem::{ProblemSpec, Tracking};

/// A problem together with its weights, operator and cached factorization.
#[derive(Debug, Clone)]
pub struct ForwardSystem {
    problem: ProblemSpec,
    weights: Option<L1Weights>,
    history: Vec<f64>,
    operator: SpatialOperator,
    solver: ShiftedSolver,
}

/// Cost values of both players.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    /// `J_1`, `J_2`.
    pub j: [f64; 2],
    /// Time-integrated `||(w - w_j) chi_d||^2`.
    pub tracking: [f64; 2],
    /// Time-integrated `||B_j u_j||^2`.
    pub energy: [f64; 2],
    /// `||(w(t_n) - w_j) chi_d||^2_{L^2}` per time node (one entry when stationary).
    pub curves: Vec<[f64; 2]>,
}

impl ForwardSystem {
    pub fn new(problem: ProblemSpec) -> Result<Self> {
        problem.validate()?;
        let operator = assemble_frac_laplacian(problem.orders.s, &problem.space)?;
        let (weights, sigma) = match problem.tracking {
            Tracking::Parabolic => {
                let w = L1Weights::new(
                    problem.orders.gamma,
                    problem.time.steps(),
                    problem.time.tau(),
                )?;
                let sigma = w.beta() * w.b()[0];
                (Some(w), sigma)
            }
            Tracking::Elliptic => (None, 0.0),
        };
        let solver = operator.shifted(sigma)?;
        let history = weights.as_ref().map(L1Weights::history).unwrap_or_default();
        Ok(Self {
            problem,
            weights,
            history,
            operator,
            solver,
        })
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn operator(&self) -> &SpatialOperator {
        &self.operator
    }

    pub fn weights(&self) -> Option<&L1Weights> {
        self.weights.as_ref()
    }

    /// Number of stored levels of a state trajectory (`M + 1`, or 1 when stationary).
    pub fn levels(&self) -> usize {
        match self.problem.tracking {
            Tracking::Parabolic => self.problem.time.levels(),
            Tracking::Elliptic => 1,
        }
    }

    fn is_parabolic(&self) -> bool {
        self.problem.tracking == Tracking::Parabolic
    }

    /// L1 march: `rhs.level(n)` for `n = 1..=M` drives the step to `t_n`
    /// (level 0 is ignored); `w^0 = initial`.
    pub fn march(&self, rhs: &SpaceTimeField, initial: &[f64]) -> Result<SpaceTimeField> {
        let weights = self
            .weights
            .as_ref()
            .ok_or_else(|| Error::InvalidProblem("time stepping on a stationary problem".into()))?;
        let ndof = self.problem.ndof();
        let levels = self.problem.time.levels();
        if rhs.ndof() != ndof || rhs.levels() != levels {
            return Err(Error::Dimension {
                context: "time-stepping right-hand side",
                expected: levels * ndof,
                got: rhs.levels() * rhs.ndof(),
            });
        }
        let beta = weights.beta();
        let b = weights.b();
        let mut w = SpaceTimeField::zeros(levels, ndof);
        w.level_mut(0).copy_from_slice(initial);
        let mut buf = vec![0.0; ndof];
        for n in 1..levels {
            let c0 = beta * b[n - 1];
            for ((x, r), w0) in buf.iter_mut().zip(rhs.level(n)).zip(initial) {
                *x = r + c0 * w0;
            }
            let values = w.values();
            for k in 1..n {
                let c = beta * self.history[n - k];
                if c != 0.0 {
                    crate::domain::axpy(c, &values[k * ndof..(k + 1) * ndof], &mut buf);
                }
            }
            self.solver.solve_in_place(&mut buf);
            w.level_mut(n).copy_from_slice(&buf);
        }
        if !w.is_finite() {
            return Err(Error::Numerical(
                "state trajectory became non-finite".into(),
            ));
        }
        Ok(w)
    }

    /// `f^n + B_1 u_1^n + B_2 u_2^n` (without the data term when `with_data` is false).
    fn control_rhs(&self, controls: &ControlPair, with_data: bool) -> Result<SpaceTimeField> {
        let p = &self.problem;
        let levels = self.levels();
        self.check_controls(controls)?;
        let mut rhs = SpaceTimeField::zeros(levels, p.ndof());
        for n in 0..levels {
            let row = rhs.level_mut(n);
            if with_data {
                row.copy_from_slice(p.source.at(n));
            }
            for j in 0..2 {
                extend_add(controls.at(j, n), &p.supports[j], row)?;
            }
        }
        Ok(rhs)
    }

    pub fn check_controls(&self, controls: &ControlPair) -> Result<()> {
        let levels = self.problem.control_levels();
        let sizes = self.problem.control_sizes();
        if controls.levels() != levels || controls.sizes() != sizes {
            return Err(Error::Dimension {
                context: "controls",
                expected: levels * (sizes[0] + sizes[1]),
                got: controls.len(),
            });
        }
        Ok(())
    }

    /// State trajectory for the given controls, with source and initial state.
    pub fn solve_state(&self, controls: &ControlPair) -> Result<SpaceTimeField> {
        self.state_with(controls, true)
    }

    /// State driven by the controls alone (zero source and initial state).
    pub fn solve_state_homogeneous(&self, controls: &ControlPair) -> Result<SpaceTimeField> {
        self.state_with(controls, false)
    }

    fn state_with(&self, controls: &ControlPair, with_data: bool) -> Result<SpaceTimeField> {
        let rhs = self.control_rhs(controls, with_data)?;
        if self.is_parabolic() {
            let zero;
            let initial = if with_data {
                &self.problem.initial_state
            } else {
                zero = vec![0.0; self.problem.ndof()];
                &zero
            };
            self.march(&rhs, initial)
        } else {
            let w = self.solve_elliptic(rhs.level(0))?;
            SpaceTimeField::from_values(1, w.len(), w)
        }
    }

    /// Transpose of the zero-data forward solve with respect to the unweighted
    /// space-time dot product.
    ///
    /// Levels `1..=M` of `residual` are used; level 0 of the result is zero.
    /// On a stationary problem this is `A^{-1} residual`.
    pub fn solve_adjoint(&self, residual: &SpaceTimeField) -> Result<SpaceTimeField> {
        if !self.is_parabolic() {
            let p = self.solve_elliptic(residual.level(0))?;
            return SpaceTimeField::from_values(1, p.len(), p);
        }
        let ndof = self.problem.ndof();
        let levels = self.problem.time.levels();
        let m = levels - 1;
        let mut reversed = SpaceTimeField::zeros(levels, ndof);
        for step in 1..=m {
            reversed
                .level_mut(step)
                .copy_from_slice(residual.level(m + 1 - step));
        }
        let y = self.march(&reversed, &vec![0.0; ndof])?;
        let mut p = SpaceTimeField::zeros(levels, ndof);
        for n in 1..=m {
            p.level_mut(n).copy_from_slice(y.level(m + 1 - n));
        }
        Ok(p)
    }

    /// Solves `A w = rhs` with the stationary operator.
    pub fn solve_elliptic(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.problem.ndof() {
            return Err(Error::Dimension {
                context: "elliptic right-hand side",
                expected: self.problem.ndof(),
                got: rhs.len(),
            });
        }
        let mut x = rhs.to_vec();
        if self.is_parabolic() {
            // the cached factorization is shifted; factor A itself
            self.operator.shifted(0.0)?.solve_in_place(&mut x);
        } else {
            self.solver.solve_in_place(&mut x);
        }
        Ok(x)
    }

    /// Cost functionals of both players at a state/control pair.
    pub fn evaluate_costs(
        &self,
        state: &SpaceTimeField,
        controls: &ControlPair,
    ) -> Result<CostReport> {
        let p = &self.problem;
        self.check_controls(controls)?;
        let cell = p.space.cell_volume();
        let levels = state.levels();
        let mut curves = Vec::with_capacity(levels);
        let mut misfit = vec![0.0; p.ndof()];
        for n in 0..levels {
            let mut pair = [0.0; 2];
            for (slot, target) in pair.iter_mut().zip(&p.targets) {
                for ((m, w), t) in misfit.iter_mut().zip(state.level(n)).zip(target) {
                    *m = w - t;
                }
                *slot = l2_norm_space_sq(&misfit, &p.observation, &p.space);
            }
            curves.push(pair);
        }
        let weight = |n: usize| {
            if self.is_parabolic() {
                p.time.weight(n)
            } else {
                1.0
            }
        };
        let mut tracking = [0.0; 2];
        let mut energy = [0.0; 2];
        for j in 0..2 {
            tracking[j] = curves
                .iter()
                .enumerate()
                .map(|(n, c)| weight(n) * c[j])
                .sum();
            energy[j] = if self.is_parabolic() {
                match p.control_mode {
                    ControlMode::TimeDependent => (0..levels)
                        .map(|n| weight(n) * sq_norm(controls.at(j, n)) * cell)
                        .sum(),
                    ControlMode::TimeConstant => {
                        p.time.horizon() * sq_norm(controls.player(j)) * cell
                    }
                }
            } else {
                sq_norm(controls.player(j)) * cell
            };
        }
        let j = [
            0.5 * (tracking[0] + p.mu[0] * energy[0]),
            0.5 * (tracking[1] + p.mu[1] * energy[1]),
        ];
        Ok(CostReport {
            j,
            tracking,
            energy,
            curves,
        })
    }
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}
