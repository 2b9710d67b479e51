//! Nash equilibria for two-player linear-quadratic control of space-time
//! fractional diffusion.
//!
//! The state solves `D_t^gamma w + (-Delta)^s w = f + chi_1 u_1 + chi_2 u_2`
//! with a Caputo derivative of order `gamma` (L1 scheme) and a fractional
//! Laplacian of order `s` (fractional centered differences in 1D, spectral
//! power of the discrete Laplacian in 2D). Each player minimizes
//! `J_j = 1/2 ||(w - w_j) chi_d||^2 + mu_j/2 ||u_j||^2`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod fractional;
pub mod nash;
pub mod operator;
pub mod oracle;
pub mod problem;
pub mod solver;

pub use control::{BoxBounds, ControlMode, ControlPair, ControlSpace};
pub use domain::{FractionalOrders, SpaceGrid, SpaceTimeField, Subdomain, TimeGrid};
pub use error::{Error, Result};
pub use nash::{nash_cg, projected_gradient_solve, residual_gradient, NashSolution};
pub use problem::{InitialGuess, ProblemSpec, Source, Tracking};
pub use solver::{CostReport, ForwardSystem};
