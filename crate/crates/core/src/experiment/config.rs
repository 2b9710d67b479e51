//! Flat `key = value` configuration with dotted keys.
//!
//! ```text
//! # comment
//! preset = ex3
//! orders.gamma = 0.6, 0.9
//! solver.tol = 1e-12
//! ```

use std::path::{Path, PathBuf};

use crate::control::ControlMode;
use crate::domain::Subdomain;
use crate::error::{Error, Result};
use crate::problem::{InitialGuess, Tracking};

use super::preset::{preset, Metric, Region, Scenario, Target};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;

/// A run request: a scenario plus solver and output settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub tol: f64,
    pub max_iter: usize,
    pub out_dir: PathBuf,
    /// Write `t,err1_sq,err2_sq` files per row.
    pub write_series: bool,
    /// Write final-state snapshots per row.
    pub write_snapshots: bool,
    pub oracle_check: bool,
    pub oracle_cap: usize,
    /// Worker threads for the sweep; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_preset(name: &str) -> Result<Self> {
        Ok(Self {
            scenario: preset(name)?,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            out_dir: PathBuf::from("results"),
            write_series: true,
            write_snapshots: true,
            oracle_check: false,
            oracle_cap: crate::oracle::DEFAULT_DOF_CAP,
            threads: None,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses a whole file. `preset` (default `ex3`) is applied first, the
    /// remaining keys override it in file order.
    pub fn parse(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        let base = entries
            .iter()
            .find(|(k, _)| k == "preset")
            .map(|(_, v)| v.as_str())
            .unwrap_or("ex3");
        let base = if base == "custom" { "ex3" } else { base };
        let mut config = Self::from_preset(base)?;
        for (key, value) in &entries {
            if key != "preset" {
                config.set(key, value)?;
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Applies one `key = value` override; call [`Self::validate`] once all are in.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let sc = &mut self.scenario;
        match key {
            "preset" => {
                let keep = self.clone();
                *self = Self::from_preset(value)?;
                self.tol = keep.tol;
                self.max_iter = keep.max_iter;
                self.out_dir = keep.out_dir;
            }
            "name" => sc.name = value.to_string(),
            "orders.gamma" => sc.gammas = parse_list(key, value)?,
            "orders.s" => sc.s_values = parse_list(key, value)?,
            "orders.s_column" => {
                let column = parse_list(key, value)?;
                let is_2s = sc.report_2s;
                *sc = sc.clone().with_s_column(&column, is_2s);
            }
            "orders.s_column_is_2s" => {
                let flag = parse_bool(key, value)?;
                let column: Vec<f64> = sc.s_values.iter().map(|&s| sc.reported_s(s)).collect();
                *sc = sc.clone().with_s_column(&column, flag);
            }
            "grid.n" => sc.points = parse_num(key, value)?,
            "grid.m" => sc.steps = parse_num(key, value)?,
            "grid.t" => sc.horizon = parse_num(key, value)?,
            "grid.domain" => sc.domain = parse_region(key, value)?,
            "cost.mu1" => sc.mu[0] = parse_num(key, value)?,
            "cost.mu2" => sc.mu[1] = parse_num(key, value)?,
            "data.source" => sc.source = parse_num(key, value)?,
            "data.initial" => sc.initial_state = parse_num(key, value)?,
            "data.target1" => sc.targets[0] = parse_target(key, value)?,
            "data.target2" => sc.targets[1] = parse_target(key, value)?,
            "region.omega1" => sc.supports[0] = parse_region(key, value)?,
            "region.omega2" => sc.supports[1] = parse_region(key, value)?,
            "region.omega_d" => {
                sc.observation = match value {
                    "full" => None,
                    _ => Some(parse_region(key, value)?),
                }
            }
            "model.tracking" => {
                sc.tracking = match value {
                    "parabolic" => Tracking::Parabolic,
                    "elliptic" => Tracking::Elliptic,
                    _ => return Err(bad(key, value)),
                }
            }
            "controls.mode" => {
                sc.control_mode = match value {
                    "time-dependent" => ControlMode::TimeDependent,
                    "time-constant" => ControlMode::TimeConstant,
                    _ => return Err(bad(key, value)),
                }
            }
            "controls.init" => {
                sc.initial_guess = match value {
                    "zero" => InitialGuess::Zero,
                    "ones" => InitialGuess::Ones,
                    _ => return Err(bad(key, value)),
                }
            }
            "controls.none" => sc.no_control = parse_bool(key, value)?,
            "report.metric" => sc.metric = Metric::parse(value)?,
            "report.2s" => sc.report_2s = parse_bool(key, value)?,
            "solver.tol" => self.tol = parse_num(key, value)?,
            "solver.max_iter" => self.max_iter = parse_num(key, value)?,
            "solver.threads" => self.threads = Some(parse_num(key, value)?),
            "output.dir" => self.out_dir = PathBuf::from(value),
            "output.series" => self.write_series = parse_bool(key, value)?,
            "output.snapshots" => self.write_snapshots = parse_bool(key, value)?,
            "oracle.check" => self.oracle_check = parse_bool(key, value)?,
            "oracle.cap" => self.oracle_cap = parse_num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Basic sanity of the settings; full checks happen when a problem is built.
    pub fn validate(&self) -> Result<()> {
        let sc = &self.scenario;
        if sc.gammas.is_empty() || sc.s_values.is_empty() {
            return Err(Error::Config("sweep lists must not be empty".into()));
        }
        if sc.points == 0 || sc.steps == 0 {
            return Err(Error::Config("grid sizes must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!(
                "solver.tol must be positive, got {}",
                self.tol
            )));
        }
        if sc.supports.iter().any(|r| r.len() != sc.domain.len())
            || sc
                .observation
                .as_ref()
                .is_some_and(|r| r.len() != sc.domain.len())
        {
            return Err(Error::Config(
                "regions must match the domain dimension".into(),
            ));
        }
        let grid = sc.grid()?;
        for region in sc.supports.iter().chain(sc.observation.as_ref()) {
            Subdomain::from_box(&grid, region).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }
}

fn parse_entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("invalid value `{value}` for `{key}`"))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| bad(key, value))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let list: Vec<f64> = value
        .split(',')
        .map(|v| parse_num(key, v))
        .collect::<Result<_>>()?;
    if list.is_empty() {
        return Err(bad(key, value));
    }
    Ok(list)
}

/// `lo:hi` per axis, axes separated by commas.
fn parse_region(key: &str, value: &str) -> Result<Region> {
    value
        .split(',')
        .map(|axis| {
            let (lo, hi) = axis.split_once(':').ok_or_else(|| bad(key, value))?;
            let lo: f64 = parse_num(key, lo)?;
            let hi: f64 = parse_num(key, hi)?;
            if lo > hi {
                return Err(bad(key, value));
            }
            Ok((lo, hi))
        })
        .collect()
}

/// `everywhere:<v>` or `support:<v>`.
fn parse_target(key: &str, value: &str) -> Result<Target> {
    let (kind, v) = value.split_once(':').ok_or_else(|| bad(key, value))?;
    let v = parse_num(key, v)?;
    match kind.trim() {
        "everywhere" => Ok(Target::Everywhere(v)),
        "support" => Ok(Target::OnSupport(v)),
        _ => Err(bad(key, value)),
    }
}
