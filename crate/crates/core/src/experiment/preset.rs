//! Declarative scenario descriptions and the four built-in presets.

use crate::control::ControlMode;
use crate::domain::{FractionalOrders, SpaceGrid, Subdomain, TimeGrid};
use crate::error::{Error, Result};
use crate::problem::{InitialGuess, ProblemSpec, Source, Tracking};

/// Error measure reported in result rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// `||w - w_j||^2` over `omega_d x (0, T)`.
    ObservationSpaceTimeSq,
    /// `||w(T) - w_j||_{L^2(Omega)}`, or the stationary state for elliptic runs.
    FinalL2,
    /// Plain Euclidean norm of the grid vector `w(T) - w_j`.
    FinalEuclidean,
}

impl Metric {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "observation-spacetime-sq" => Ok(Self::ObservationSpaceTimeSq),
            "final-l2" => Ok(Self::FinalL2),
            "final-euclidean" => Ok(Self::FinalEuclidean),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

/// Where a desired state takes its value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// Constant on the whole domain.
    Everywhere(f64),
    /// Constant on the player's own control support, zero elsewhere.
    OnSupport(f64),
}

/// Axis-aligned box, one `(lo, hi)` pair per dimension.
pub type Region = Vec<(f64, f64)>;

/// Everything needed to build a [`ProblemSpec`] for any `(gamma, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Domain box; its length is the spatial dimension.
    pub domain: Region,
    /// Interior points per axis.
    pub points: usize,
    pub horizon: f64,
    pub steps: usize,
    pub gammas: Vec<f64>,
    /// Spatial orders `s` (not `2s`).
    pub s_values: Vec<f64>,
    /// Report `2s` in the `s` column.
    pub report_2s: bool,
    pub source: f64,
    pub initial_state: f64,
    pub targets: [Target; 2],
    pub mu: [f64; 2],
    pub supports: [Region; 2],
    /// `None` observes the whole domain.
    pub observation: Option<Region>,
    pub tracking: Tracking,
    pub control_mode: ControlMode,
    pub initial_guess: InitialGuess,
    /// Skip optimization and simulate at the initial controls.
    pub no_control: bool,
    pub metric: Metric,
}

pub const PRESET_NAMES: [&str; 4] = ["ex1", "ex2", "ex3", "ex4"];

/// Built-in scenario by name.
pub fn preset(name: &str) -> Result<Scenario> {
    match name {
        "ex1" => Ok(ex1()),
        "ex2" => Ok(ex2()),
        "ex3" => Ok(ex3()),
        "ex4" => Ok(ex4()),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

fn unit_square_regions() -> ([Region; 2], Region) {
    (
        [
            vec![(0.0, 0.25), (0.0, 0.25)],
            vec![(0.75, 1.0), (0.0, 0.25)],
        ],
        vec![(0.25, 0.75), (0.25, 0.75)],
    )
}

fn ex1() -> Scenario {
    let (supports, observation) = unit_square_regions();
    Scenario {
        name: "ex1".into(),
        domain: vec![(0.0, 1.0), (0.0, 1.0)],
        points: 33,
        horizon: 1.5,
        steps: 150,
        gammas: vec![0.99],
        s_values: vec![1.0],
        report_2s: false,
        source: 1.0,
        initial_state: 0.0,
        targets: [Target::Everywhere(1.0), Target::Everywhere(-1.0)],
        mu: [1e-4, 1e-4],
        supports,
        observation: Some(observation),
        tracking: Tracking::Parabolic,
        control_mode: ControlMode::TimeDependent,
        initial_guess: InitialGuess::Zero,
        no_control: false,
        metric: Metric::ObservationSpaceTimeSq,
    }
}

fn ex2() -> Scenario {
    let (supports, observation) = unit_square_regions();
    let s_values = (0..20).map(|k| (195 - 5 * k) as f64 / 200.0).collect();
    Scenario {
        name: "ex2".into(),
        domain: vec![(0.0, 1.0), (0.0, 1.0)],
        points: 33,
        horizon: 1.0,
        steps: 1,
        gammas: vec![1.0],
        s_values,
        report_2s: true,
        source: 1.0,
        initial_state: 0.0,
        targets: [Target::Everywhere(1.0), Target::Everywhere(-1.0)],
        mu: [1e-4, 1e-4],
        supports,
        observation: Some(observation),
        tracking: Tracking::Elliptic,
        control_mode: ControlMode::TimeConstant,
        initial_guess: InitialGuess::Zero,
        no_control: false,
        metric: Metric::FinalL2,
    }
}

fn ex3() -> Scenario {
    Scenario {
        name: "ex3".into(),
        domain: vec![(-2.0, 2.0)],
        points: 40,
        horizon: 0.5,
        steps: 80,
        gammas: vec![0.6, 0.7, 0.8, 0.9],
        s_values: vec![0.25, 0.5, 0.75],
        report_2s: true,
        source: 1.0,
        initial_state: 0.0,
        targets: [Target::OnSupport(1.0), Target::OnSupport(1.0)],
        mu: [10.0, 10.0],
        supports: [vec![(-2.0, -1.0)], vec![(1.0, 2.0)]],
        observation: None,
        tracking: Tracking::Parabolic,
        control_mode: ControlMode::TimeConstant,
        initial_guess: InitialGuess::Ones,
        no_control: false,
        metric: Metric::FinalL2,
    }
}

fn ex4() -> Scenario {
    Scenario {
        name: "ex4".into(),
        targets: [Target::OnSupport(1.0), Target::OnSupport(-1.0)],
        report_2s: false,
        metric: Metric::FinalEuclidean,
        ..ex3()
    }
}

impl Scenario {
    pub fn dimension(&self) -> usize {
        self.domain.len()
    }

    /// Reads the third column of a table that lists `2s` as plain `s`.
    ///
    /// With `true`, a column value `c` means `s = c / 2` and rows report `2s`.
    pub fn with_s_column(mut self, column: &[f64], column_is_2s: bool) -> Self {
        if column_is_2s {
            self.s_values = column.iter().map(|c| c / 2.0).collect();
        } else {
            self.s_values = column.to_vec();
        }
        self.report_2s = column_is_2s;
        self
    }

    /// Every `(gamma, s)` pair, `gamma` outermost.
    pub fn sweep(&self) -> Vec<(f64, f64)> {
        self.gammas
            .iter()
            .flat_map(|&g| self.s_values.iter().map(move |&s| (g, s)))
            .collect()
    }

    /// Value printed in the `s` column.
    pub fn reported_s(&self, s: f64) -> f64 {
        if self.report_2s {
            2.0 * s
        } else {
            s
        }
    }

    pub fn grid(&self) -> Result<SpaceGrid> {
        match self.domain.as_slice() {
            [(a, b)] => SpaceGrid::new_1d(*a, *b, self.points),
            [(a, b), (c, d)] => SpaceGrid::new_2d((*a, *b, self.points), (*c, *d, self.points)),
            _ => Err(Error::Config(format!(
                "domain must have 1 or 2 axes, got {}",
                self.domain.len()
            ))),
        }
    }

    pub fn problem(&self, gamma: f64, s: f64) -> Result<ProblemSpec> {
        let space = self.grid()?;
        let time = TimeGrid::new(self.horizon, self.steps)?;
        let orders = FractionalOrders::new(gamma, s)?;
        let supports = [
            Subdomain::from_box(&space, &self.supports[0])?,
            Subdomain::from_box(&space, &self.supports[1])?,
        ];
        let observation = match &self.observation {
            Some(region) => Subdomain::from_box(&space, region)?,
            None => Subdomain::full(&space),
        };
        let n = space.ndof();
        let target = |j: usize| match self.targets[j] {
            Target::Everywhere(v) => vec![v; n],
            Target::OnSupport(v) => {
                let mask = supports[j].mask();
                (0..n).map(|i| if mask[i] { v } else { 0.0 }).collect()
            }
        };
        let targets = [target(0), target(1)];
        Ok(ProblemSpec {
            source: Source::Constant(vec![self.source; n]),
            initial_state: vec![self.initial_state; n],
            targets,
            mu: self.mu,
            supports,
            observation,
            tracking: self.tracking,
            control_mode: self.control_mode,
            bounds: None,
            initial_guess: self.initial_guess,
            space,
            time,
            orders,
        })
    }
}
