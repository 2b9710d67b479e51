//! Complete problem instances.

use crate::control::{BoxBounds, ControlMode, ControlPair, ControlSpace};
use crate::domain::{FractionalOrders, SpaceGrid, SpaceTimeField, Subdomain, TimeGrid};
use crate::error::{Error, Result};

/// Source term `f`.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// Same spatial field at every time node.
    Constant(Vec<f64>),
    /// One spatial field per time node.
    Trajectory(SpaceTimeField),
}

impl Source {
    pub fn at(&self, n: usize) -> &[f64] {
        match self {
            Source::Constant(f) => f,
            Source::Trajectory(field) => field.level(n),
        }
    }
}

/// Whether the state evolves in time or solves a stationary equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tracking {
    /// Fractional-in-time state, misfit tracked over `omega_d x (0, T)`.
    Parabolic,
    /// Stationary state `(-Delta)^s w = f + B_1 u_1 + B_2 u_2`.
    Elliptic,
}

/// Starting controls for the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialGuess {
    Zero,
    Ones,
}

/// Everything needed to pose the two-player game.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub space: SpaceGrid,
    pub time: TimeGrid,
    pub orders: FractionalOrders,
    pub source: Source,
    pub initial_state: Vec<f64>,
    /// Desired states `w_1`, `w_2`.
    pub targets: [Vec<f64>; 2],
    /// Regularization weights `mu_1`, `mu_2`.
    pub mu: [f64; 2],
    /// Control supports `omega_1`, `omega_2`.
    pub supports: [Subdomain; 2],
    /// Observation region `omega_d`.
    pub observation: Subdomain,
    pub tracking: Tracking,
    pub control_mode: ControlMode,
    pub bounds: Option<BoxBounds>,
    pub initial_guess: InitialGuess,
}

impl ProblemSpec {
    /// Checks every shape and sign invariant of the instance.
    pub fn validate(&self) -> Result<()> {
        let ndof = self.space.ndof();
        let field_len = |name: &'static str, len: usize| {
            if len == ndof {
                Ok(())
            } else {
                Err(Error::Dimension {
                    context: name,
                    expected: ndof,
                    got: len,
                })
            }
        };
        field_len("initial state", self.initial_state.len())?;
        field_len("target w1", self.targets[0].len())?;
        field_len("target w2", self.targets[1].len())?;
        match &self.source {
            Source::Constant(f) => field_len("source", f.len())?,
            Source::Trajectory(f) => {
                field_len("source", f.ndof())?;
                if f.levels() != self.time.levels() {
                    return Err(Error::Dimension {
                        context: "source levels",
                        expected: self.time.levels(),
                        got: f.levels(),
                    });
                }
            }
        }
        for (j, mu) in self.mu.iter().enumerate() {
            if !(*mu > 0.0) || !mu.is_finite() {
                return Err(Error::InvalidProblem(format!(
                    "mu_{} must be positive, got {mu}",
                    j + 1
                )));
            }
        }
        for (name, region) in [
            ("omega_1", &self.supports[0]),
            ("omega_2", &self.supports[1]),
            ("omega_d", &self.observation),
        ] {
            if region.is_empty() {
                return Err(Error::MalformedSubdomain(format!(
                    "{name} contains no grid points"
                )));
            }
            if region.ndof() != ndof {
                return Err(Error::MalformedSubdomain(format!(
                    "{name} built for a grid with {} points, problem has {ndof}",
                    region.ndof()
                )));
            }
        }
        if let Some(bounds) = &self.bounds {
            let space = self.control_space();
            if bounds.lower.levels() != space.levels() || bounds.lower.sizes() != space.sizes() {
                return Err(Error::InvalidProblem(
                    "bounds do not match the control shape".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn ndof(&self) -> usize {
        self.space.ndof()
    }

    /// Number of rows a control carries.
    pub fn control_levels(&self) -> usize {
        match (self.tracking, self.control_mode) {
            (Tracking::Parabolic, ControlMode::TimeDependent) => self.time.levels(),
            _ => 1,
        }
    }

    pub fn control_sizes(&self) -> [usize; 2] {
        [self.supports[0].len(), self.supports[1].len()]
    }

    /// The product space `H` with its quadrature weights.
    pub fn control_space(&self) -> ControlSpace {
        let cell = self.space.cell_volume();
        let weights = match (self.tracking, self.control_mode) {
            (Tracking::Elliptic, _) => vec![cell],
            (Tracking::Parabolic, ControlMode::TimeConstant) => vec![self.time.horizon() * cell],
            (Tracking::Parabolic, ControlMode::TimeDependent) => {
                self.time.weights().into_iter().map(|q| q * cell).collect()
            }
        };
        ControlSpace::new(self.control_sizes(), weights)
    }

    /// Starting controls according to [`InitialGuess`], projected onto the bounds if any.
    pub fn initial_controls(&self) -> ControlPair {
        let value = match self.initial_guess {
            InitialGuess::Zero => 0.0,
            InitialGuess::Ones => 1.0,
        };
        let mut u = ControlPair::filled(self.control_levels(), self.control_sizes(), value);
        if let Some(bounds) = &self.bounds {
            bounds.clamp(&mut u);
        }
        u
    }

    /// Same instance with different fractional orders.
    pub fn with_orders(&self, orders: FractionalOrders) -> Self {
        Self {
            orders,
            ..self.clone()
        }
    }
}
