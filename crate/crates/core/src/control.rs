//! Control pairs and the product control space `H`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    /// One value per time node and control point.
    TimeDependent,
    /// One value per control point, applied identically at every time node.
    TimeConstant,
}

/// Controls of both players. Each player's values are stored time-major with
/// `levels` rows of `sizes[j]` entries; time-constant and stationary
/// controls have a single row.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPair {
    levels: usize,
    sizes: [usize; 2],
    values: [Vec<f64>; 2],
}

impl ControlPair {
    pub fn zeros(levels: usize, sizes: [usize; 2]) -> Self {
        Self::filled(levels, sizes, 0.0)
    }

    pub fn filled(levels: usize, sizes: [usize; 2], value: f64) -> Self {
        Self {
            levels,
            sizes,
            values: [
                vec![value; levels * sizes[0]],
                vec![value; levels * sizes[1]],
            ],
        }
    }

    pub fn from_values(levels: usize, sizes: [usize; 2], values: [Vec<f64>; 2]) -> Result<Self> {
        for j in 0..2 {
            if values[j].len() != levels * sizes[j] {
                return Err(Error::Dimension {
                    context: "control values",
                    expected: levels * sizes[j],
                    got: values[j].len(),
                });
            }
        }
        Ok(Self {
            levels,
            sizes,
            values,
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.levels, self.sizes)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn sizes(&self) -> [usize; 2] {
        self.sizes
    }

    pub fn len(&self) -> usize {
        self.values[0].len() + self.values[1].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn player(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    pub fn player_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j]
    }

    /// Values of player `j` at time node `n`. Single-row controls return their
    /// only row for every `n`.
    pub fn at(&self, j: usize, n: usize) -> &[f64] {
        let row = if self.levels == 1 { 0 } else { n };
        &self.values[j][row * self.sizes[j]..(row + 1) * self.sizes[j]]
    }

    pub fn row_mut(&mut self, j: usize, row: usize) -> &mut [f64] {
        let size = self.sizes[j];
        &mut self.values[j][row * size..(row + 1) * size]
    }

    /// Both players' values concatenated (player 1 first).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = self.values[0].clone();
        out.extend_from_slice(&self.values[1]);
        out
    }

    pub fn from_flat(levels: usize, sizes: [usize; 2], flat: &[f64]) -> Result<Self> {
        let n1 = levels * sizes[0];
        if flat.len() != n1 + levels * sizes[1] {
            return Err(Error::Dimension {
                context: "flat control vector",
                expected: n1 + levels * sizes[1],
                got: flat.len(),
            });
        }
        Ok(Self {
            levels,
            sizes,
            values: [flat[..n1].to_vec(), flat[n1..].to_vec()],
        })
    }

    fn check_shape(&self, other: &Self) {
        assert!(
            self.levels == other.levels && self.sizes == other.sizes,
            "control shapes differ"
        );
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: f64, x: &Self) {
        self.check_shape(x);
        for j in 0..2 {
            crate::domain::axpy(alpha, &x.values[j], &mut self.values[j]);
        }
    }

    /// `self = x + beta * self`.
    pub fn xpby(&mut self, x: &Self, beta: f64) {
        self.check_shape(x);
        for j in 0..2 {
            for (s, v) in self.values[j].iter_mut().zip(&x.values[j]) {
                *s = v + beta * *s;
            }
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for j in 0..2 {
            self.values[j].iter_mut().for_each(|v| *v *= alpha);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }
}

/// Entrywise box `lower <= u <= upper` for both players.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds {
    pub lower: ControlPair,
    pub upper: ControlPair,
}

impl BoxBounds {
    pub fn new(lower: ControlPair, upper: ControlPair) -> Result<Self> {
        if lower.levels != upper.levels || lower.sizes != upper.sizes {
            return Err(Error::InvalidProblem("bound shapes differ".into()));
        }
        for j in 0..2 {
            if lower.values[j]
                .iter()
                .zip(&upper.values[j])
                .any(|(l, r)| !(l <= r))
            {
                return Err(Error::InvalidProblem(format!(
                    "lower bound exceeds upper bound for player {}",
                    j + 1
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Constant bounds `[lo, hi]` on every control entry.
    pub fn uniform(levels: usize, sizes: [usize; 2], lo: f64, hi: f64) -> Result<Self> {
        Self::new(
            ControlPair::filled(levels, sizes, lo),
            ControlPair::filled(levels, sizes, hi),
        )
    }

    pub fn contains(&self, u: &ControlPair) -> bool {
        (0..2).all(|j| {
            u.values[j]
                .iter()
                .zip(self.lower.values[j].iter().zip(&self.upper.values[j]))
                .all(|(v, (l, r))| l <= v && v <= r)
        })
    }

    /// Projection onto the box for player `j`.
    pub fn clamp_player(&self, j: usize, u: &mut [f64]) {
        for ((v, l), r) in u
            .iter_mut()
            .zip(&self.lower.values[j])
            .zip(&self.upper.values[j])
        {
            *v = v.clamp(*l, *r);
        }
    }

    pub fn clamp(&self, u: &mut ControlPair) {
        for j in 0..2 {
            self.clamp_player(j, &mut u.values[j]);
        }
    }
}

/// Quadrature-weighted inner product on the control space.
///
/// Every row of a control carries one weight: `q_n h^d` for time-dependent
/// controls (trapezoid in time), `T h^d` for time-constant controls and
/// `h^d` for stationary ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSpace {
    sizes: [usize; 2],
    row_weights: Vec<f64>,
}

impl ControlSpace {
    pub fn new(sizes: [usize; 2], row_weights: Vec<f64>) -> Self {
        Self { sizes, row_weights }
    }

    pub fn levels(&self) -> usize {
        self.row_weights.len()
    }

    pub fn sizes(&self) -> [usize; 2] {
        self.sizes
    }

    pub fn row_weights(&self) -> &[f64] {
        &self.row_weights
    }

    /// Total number of control degrees of freedom.
    pub fn dofs(&self) -> usize {
        self.levels() * (self.sizes[0] + self.sizes[1])
    }

    pub fn zeros(&self) -> ControlPair {
        ControlPair::zeros(self.levels(), self.sizes)
    }

    /// Weight of each entry of the flat vector from [`ControlPair::to_flat`].
    pub fn flat_weights(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dofs());
        for j in 0..2 {
            for &w in &self.row_weights {
                out.extend(std::iter::repeat_n(w, self.sizes[j]));
            }
        }
        out
    }

    /// `(u_j, v_j)` for a single player.
    pub fn player_inner(&self, j: usize, u: &[f64], v: &[f64]) -> f64 {
        let size = self.sizes[j];
        if size == 0 {
            return 0.0;
        }
        u.chunks(size)
            .zip(v.chunks(size))
            .zip(&self.row_weights)
            .map(|((a, b), w)| w * crate::domain::dot(a, b))
            .sum()
    }

    /// `(u, v)_H = (u_1, v_1) + (u_2, v_2)`.
    pub fn inner(&self, u: &ControlPair, v: &ControlPair) -> f64 {
        (0..2)
            .map(|j| self.player_inner(j, u.player(j), v.player(j)))
            .sum()
    }

    pub fn norm(&self, u: &ControlPair) -> f64 {
        self.inner(u, u).sqrt()
    }

    pub fn player_norm(&self, j: usize, u: &[f64]) -> f64 {
        self.player_inner(j, u, u).sqrt()
    }
}
