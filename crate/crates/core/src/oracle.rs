//! Dense assembly of the reduced system for small instances.
//!
//! The matrix is stored in `H`-orthonormal coordinates: with `w_i` the
//! quadrature weight of control entry `i`,
//! `M_ik = (A e_k, e_i)_H / sqrt(w_i w_k)`, so `M` is symmetric exactly when
//! `A` is self-adjoint on `H`, and shares its spectrum.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::control::ControlPair;
use crate::error::{Error, Result};
use crate::nash::{apply_operator_a, residual_gradient};
use crate::solver::ForwardSystem;

pub const DEFAULT_DOF_CAP: usize = 400;

#[derive(Debug, Clone)]
pub struct DenseReducedSystem {
    /// Symmetrized-coordinate matrix `W^{1/2} A W^{-1/2}`.
    pub matrix: DMatrix<f64>,
    /// `b` in the same coordinates, `W^{1/2} b`.
    pub rhs: DVector<f64>,
    /// Quadrature weight per control entry.
    pub weights: Vec<f64>,
    pub levels: usize,
    pub sizes: [usize; 2],
    pub mu: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpdCertificate {
    /// `max |M - M^T|`.
    pub symmetry_defect: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `min(mu_1, mu_2)`.
    pub coercivity_floor: f64,
    pub passed: bool,
}

impl DenseReducedSystem {
    pub fn dofs(&self) -> usize {
        self.weights.len()
    }

    /// Plain `A` applied to controls (no weight scaling).
    pub fn apply(&self, u: &ControlPair) -> Result<ControlPair> {
        let x = self.to_coordinates(u)?;
        let y = &self.matrix * x;
        self.to_controls(&y)
    }

    /// Plain `b` as controls.
    pub fn b(&self) -> Result<ControlPair> {
        self.to_controls(&self.rhs)
    }

    fn to_coordinates(&self, u: &ControlPair) -> Result<DVector<f64>> {
        let flat = u.to_flat();
        if flat.len() != self.dofs() {
            return Err(Error::Dimension {
                context: "oracle controls",
                expected: self.dofs(),
                got: flat.len(),
            });
        }
        Ok(DVector::from_iterator(
            flat.len(),
            flat.iter().zip(&self.weights).map(|(v, w)| v * w.sqrt()),
        ))
    }

    fn to_controls(&self, x: &DVector<f64>) -> Result<ControlPair> {
        let flat: Vec<f64> = x
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v / w.sqrt())
            .collect();
        ControlPair::from_flat(self.levels, self.sizes, &flat)
    }

    /// Writes `M` then `b`, one row per line, space separated, with a
    /// leading `rows cols` header for each block.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let n = self.dofs();
        writeln!(out, "{n} {n}")?;
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|k| self.matrix[(i, k)].to_string()).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        writeln!(out, "{n} 1")?;
        for i in 0..n {
            writeln!(out, "{}", self.rhs[i])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Column-by-column assembly of `A` and `b` with the default cap.
pub fn assemble_dense_a(sys: &ForwardSystem) -> Result<DenseReducedSystem> {
    assemble_dense_a_with_cap(sys, DEFAULT_DOF_CAP)
}

pub fn assemble_dense_a_with_cap(sys: &ForwardSystem, cap: usize) -> Result<DenseReducedSystem> {
    let problem = sys.problem();
    let space = problem.control_space();
    let n = space.dofs();
    if n > cap {
        return Err(Error::CapExceeded { dofs: n, cap });
    }
    let levels = space.levels();
    let sizes = space.sizes();
    let weights = space.flat_weights();
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();

    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            let dir = ControlPair::from_flat(levels, sizes, &e)?;
            Ok(apply_operator_a(sys, &dir)?.to_flat())
        })
        .collect::<Result<_>>()?;

    let mut matrix = DMatrix::zeros(n, n);
    for (k, col) in columns.iter().enumerate() {
        for i in 0..n {
            matrix[(i, k)] = sqrt_w[i] * col[i] / sqrt_w[k];
        }
    }

    let g0 = residual_gradient(sys, &space.zeros())?.gradient.to_flat();
    let rhs = DVector::from_iterator(n, g0.iter().zip(&sqrt_w).map(|(g, s)| -g * s));

    Ok(DenseReducedSystem {
        matrix,
        rhs,
        weights,
        levels,
        sizes,
        mu: problem.mu,
    })
}

/// Direct Cholesky solve of `A u = b`.
pub fn oracle_nash_solve(system: &DenseReducedSystem) -> Result<ControlPair> {
    let chol = system.matrix.clone().cholesky().ok_or_else(|| {
        let lambda = smallest_eigenvalue(&system.matrix);
        Error::NotPositiveDefinite {
            iteration: 0,
            curvature: lambda,
        }
    })?;
    let x = chol.solve(&system.rhs);
    system.to_controls(&x)
}

/// `||M x - b|| / ||b||` in the symmetric coordinates (`0` when `b = 0` and `x = 0`).
pub fn oracle_residual(system: &DenseReducedSystem, u: &ControlPair) -> Result<f64> {
    let x = system.to_coordinates(u)?;
    let r = &system.matrix * x - &system.rhs;
    let nb = system.rhs.norm();
    Ok(if nb == 0.0 { r.norm() } else { r.norm() / nb })
}

fn smallest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Symmetry defect and extreme eigenvalues of the assembled matrix.
pub fn certify_spd(system: &DenseReducedSystem) -> SpdCertificate {
    let m = &system.matrix;
    let symmetry_defect = (m - m.transpose()).amax();
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let lambda_min = eig.min();
    let lambda_max = eig.max();
    let coercivity_floor = system.mu[0].min(system.mu[1]);
    let passed = symmetry_defect <= 1e-10 && lambda_min >= coercivity_floor - 1e-8;
    SpdCertificate {
        symmetry_defect,
        lambda_min,
        lambda_max,
        coercivity_floor,
        passed,
    }
}
