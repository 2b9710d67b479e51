//! Discrete fractional Laplacians with homogeneous exterior condition.
//!
//! In 1D the operator is the symmetric Toeplitz matrix built from the
//! fractional centered difference weights, coupling every pair of interior
//! points. In 2D it is the spectral power of the 5-point Dirichlet Laplacian,
//! applied through its tensor-product sine eigenbasis.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::domain::{check_order, SpaceGrid};
use crate::error::{Error, Result};
use crate::fractional::fcd_weights;

/// Symmetric positive definite discretization of `(-Delta)^s`.
#[derive(Debug, Clone)]
pub enum SpatialOperator {
    Toeplitz(ToeplitzOperator),
    Spectral(SpectralOperator),
}

/// Symmetric Toeplitz matrix given by its first row.
#[derive(Debug, Clone)]
pub struct ToeplitzOperator {
    s: f64,
    first_row: Vec<f64>,
}

/// Tensor-product sine basis of the 2D 5-point Laplacian.
#[derive(Debug)]
pub struct SineBasis {
    nx: usize,
    ny: usize,
    /// Orthonormal, symmetric eigenvector matrices per axis.
    sx: DMatrix<f64>,
    sy: DMatrix<f64>,
    /// Eigenvalues `lambda_{k,l}` of the 5-point Laplacian, x index fastest.
    eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SpectralOperator {
    s: f64,
    basis: Arc<SineBasis>,
    /// `lambda^s` in basis order.
    symbol: Vec<f64>,
}

/// Factorization of `sigma I + A`, reused for every time step.
#[derive(Debug, Clone)]
pub enum ShiftedSolver {
    Dense(Cholesky<f64, Dyn>),
    Spectral {
        basis: Arc<SineBasis>,
        inverse_symbol: Vec<f64>,
    },
}

/// Toeplitz fractional-centered-difference operator on a 1D grid.
pub fn assemble_frac_laplacian_1d(s: f64, grid: &SpaceGrid) -> Result<SpatialOperator> {
    if grid.dimension() != 1 {
        return Err(Error::Domain("1D operator requested on a 2D grid".into()));
    }
    let n = grid.ndof();
    let h = grid.axis(0).spacing();
    let scale = h.powf(-2.0 * s);
    let first_row = fcd_weights(s, n - 1)?
        .into_iter()
        .map(|c| c * scale)
        .collect();
    Ok(SpatialOperator::Toeplitz(ToeplitzOperator { s, first_row }))
}

/// Spectral power of the 5-point Dirichlet Laplacian on a 2D grid.
pub fn assemble_frac_laplacian_2d(s: f64, grid: &SpaceGrid) -> Result<SpatialOperator> {
    check_order("s", s)?;
    if grid.dimension() != 2 {
        return Err(Error::Domain("2D operator requested on a 1D grid".into()));
    }
    let (ax, ay) = (grid.axis(0), grid.axis(1));
    let (sx, lx) = sine_modes(ax.points, ax.spacing());
    let (sy, ly) = sine_modes(ay.points, ay.spacing());
    let mut eigenvalues = Vec::with_capacity(ax.points * ay.points);
    for l in &ly {
        for k in &lx {
            eigenvalues.push(k + l);
        }
    }
    let symbol = eigenvalues.iter().map(|lam| lam.powf(s)).collect();
    Ok(SpatialOperator::Spectral(SpectralOperator {
        s,
        basis: Arc::new(SineBasis {
            nx: ax.points,
            ny: ay.points,
            sx,
            sy,
            eigenvalues,
        }),
        symbol,
    }))
}

/// Assembles the operator matching the grid dimension.
pub fn assemble_frac_laplacian(s: f64, grid: &SpaceGrid) -> Result<SpatialOperator> {
    match grid.dimension() {
        1 => assemble_frac_laplacian_1d(s, grid),
        _ => assemble_frac_laplacian_2d(s, grid),
    }
}

/// Eigenpairs of the 1D 3-point Dirichlet Laplacian `h^{-2} tridiag(-1, 2, -1)`.
fn sine_modes(n: usize, h: f64) -> (DMatrix<f64>, Vec<f64>) {
    let np1 = (n + 1) as f64;
    let norm = (2.0 / np1).sqrt();
    let vectors = DMatrix::from_fn(n, n, |i, k| {
        norm * (((i + 1) * (k + 1)) as f64 * PI / np1).sin()
    });
    let values = (1..=n)
        .map(|k| {
            let sn = (k as f64 * PI / (2.0 * np1)).sin();
            4.0 / (h * h) * sn * sn
        })
        .collect();
    (vectors, values)
}

impl SineBasis {
    /// `V diag(symbol) V^T v` for the tensor basis `V = S_x (x) S_y`.
    fn apply_symbol(&self, symbol: &[f64], v: &[f64], out: &mut [f64]) {
        let field = DMatrix::from_column_slice(self.nx, self.ny, v);
        let mut coeffs = &self.sx * field * &self.sy;
        for (c, m) in coeffs.iter_mut().zip(symbol) {
            *c *= m;
        }
        let back = &self.sx * coeffs * &self.sy;
        out.copy_from_slice(back.as_slice());
    }
}

impl SpatialOperator {
    pub fn order(&self) -> f64 {
        match self {
            SpatialOperator::Toeplitz(op) => op.s,
            SpatialOperator::Spectral(op) => op.s,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            SpatialOperator::Toeplitz(op) => op.first_row.len(),
            SpatialOperator::Spectral(op) => op.symbol.len(),
        }
    }

    /// First row of the Toeplitz matrix (1D only).
    pub fn first_row(&self) -> Option<&[f64]> {
        match self {
            SpatialOperator::Toeplitz(op) => Some(&op.first_row),
            SpatialOperator::Spectral(_) => None,
        }
    }

    /// Eigenvalues `lambda^s` of the spectral operator (2D only), x mode fastest.
    pub fn spectrum(&self) -> Option<&[f64]> {
        match self {
            SpatialOperator::Toeplitz(_) => None,
            SpatialOperator::Spectral(op) => Some(&op.symbol),
        }
    }

    /// Eigenvector `(k, l)` of the spectral operator (0-based mode numbers).
    pub fn eigenvector(&self, k: usize, l: usize) -> Option<Vec<f64>> {
        match self {
            SpatialOperator::Toeplitz(_) => None,
            SpatialOperator::Spectral(op) => {
                let b = &op.basis;
                let mut v = Vec::with_capacity(b.nx * b.ny);
                for j in 0..b.ny {
                    for i in 0..b.nx {
                        v.push(b.sx[(i, k)] * b.sy[(j, l)]);
                    }
                }
                Some(v)
            }
        }
    }

    /// `out = A v`.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        match self {
            SpatialOperator::Toeplitz(op) => {
                let r = &op.first_row;
                let n = r.len();
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, vj) in v.iter().enumerate() {
                        acc += r[i.abs_diff(j)] * vj;
                    }
                    out[i] = acc;
                }
                debug_assert_eq!(v.len(), n);
            }
            SpatialOperator::Spectral(op) => op.basis.apply_symbol(&op.symbol, v, out),
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        out
    }

    /// Dense matrix of the operator.
    pub fn dense(&self) -> DMatrix<f64> {
        match self {
            SpatialOperator::Toeplitz(op) => {
                let n = op.first_row.len();
                DMatrix::from_fn(n, n, |i, j| op.first_row[i.abs_diff(j)])
            }
            SpatialOperator::Spectral(_) => {
                let n = self.size();
                let mut m = DMatrix::zeros(n, n);
                let mut e = vec![0.0; n];
                let mut col = vec![0.0; n];
                for j in 0..n {
                    e[j] = 1.0;
                    self.apply_into(&e, &mut col);
                    m.column_mut(j).copy_from_slice(&col);
                    e[j] = 0.0;
                }
                m
            }
        }
    }

    /// Factorizes `sigma I + A` for `sigma >= 0`.
    pub fn shifted(&self, sigma: f64) -> Result<ShiftedSolver> {
        match self {
            SpatialOperator::Toeplitz(_) => {
                let mut m = self.dense();
                for i in 0..m.nrows() {
                    m[(i, i)] += sigma;
                }
                let diag_min = m.diagonal().min();
                Cholesky::new(m).map(ShiftedSolver::Dense).ok_or_else(|| {
                    Error::Numerical(format!(
                        "Cholesky of sigma*I + A failed (sigma = {sigma:e}, s = {}, min diagonal = {diag_min:e}); operator is not positive definite",
                        self.order()
                    ))
                })
            }
            SpatialOperator::Spectral(op) => {
                let mut inverse_symbol = Vec::with_capacity(op.symbol.len());
                for &lam in &op.symbol {
                    let d = sigma + lam;
                    if !(d > 0.0) {
                        return Err(Error::Numerical(format!(
                            "shifted spectral operator has non-positive eigenvalue {d:e} (sigma = {sigma:e}, s = {})",
                            op.s
                        )));
                    }
                    inverse_symbol.push(1.0 / d);
                }
                Ok(ShiftedSolver::Spectral {
                    basis: Arc::clone(&op.basis),
                    inverse_symbol,
                })
            }
        }
    }

    /// Eigenvalues of the 5-point Laplacian before raising to the power `s` (2D only).
    pub fn base_eigenvalues(&self) -> Option<&[f64]> {
        match self {
            SpatialOperator::Toeplitz(_) => None,
            SpatialOperator::Spectral(op) => Some(&op.basis.eigenvalues),
        }
    }
}

impl ShiftedSolver {
    /// Solves `(sigma I + A) x = rhs` in place.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        match self {
            ShiftedSolver::Dense(chol) => {
                let mut b = DVector::from_column_slice(rhs);
                chol.solve_mut(&mut b);
                rhs.copy_from_slice(b.as_slice());
            }
            ShiftedSolver::Spectral {
                basis,
                inverse_symbol,
            } => {
                let input = rhs.to_vec();
                basis.apply_symbol(inverse_symbol, &input, rhs);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn classical_limit_1d() {
        let grid = SpaceGrid::new_1d(0.0, 1.0, 3).unwrap();
        let op = assemble_frac_laplacian_1d(1.0, &grid).unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[32.0, -16.0, 0.0, -16.0, 32.0, -16.0, 0.0, -16.0, 32.0],
        );
        assert_eq!(op.dense(), expected);
    }

    #[test]
    fn row_sums_positive_1d() {
        let grid = SpaceGrid::new_1d(-1.0, 1.0, 16).unwrap();
        let a = assemble_frac_laplacian_1d(0.5, &grid).unwrap().dense();
        for i in 0..16 {
            assert!(a.row(i).sum() > 0.0);
        }
        assert_eq!(a.transpose(), a);
    }

    #[test]
    fn matvec_matches_dense_1d() {
        let grid = SpaceGrid::new_1d(0.0, 2.0, 12).unwrap();
        let op = assemble_frac_laplacian_1d(0.3, &grid).unwrap();
        let a = op.dense();
        let mut e1 = vec![0.0; 12];
        e1[0] = 1.0;
        let col = op.apply(&e1);
        assert!(max_abs_diff(&col, a.column(0).as_slice()) == 0.0);
    }

    #[test]
    fn spectral_unit_order_is_five_point() {
        let grid = SpaceGrid::new_2d((0.0, 1.0, 8), (0.0, 1.0, 8)).unwrap();
        let op = assemble_frac_laplacian_2d(1.0, &grid).unwrap();
        let h = grid.axis(0).spacing();
        let v: Vec<f64> = (0..64)
            .map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0)
            .collect();
        let got = op.apply(&v);
        let at = |i: isize, j: isize| -> f64 {
            if (0..8).contains(&i) && (0..8).contains(&j) {
                v[(i + 8 * j) as usize]
            } else {
                0.0
            }
        };
        for j in 0..8isize {
            for i in 0..8isize {
                let stencil =
                    (4.0 * at(i, j) - at(i - 1, j) - at(i + 1, j) - at(i, j - 1) - at(i, j + 1))
                        / (h * h);
                assert!(
                    (got[(i + 8 * j) as usize] - stencil).abs()
                        <= 1e-12 * stencil.abs().max(1.0) * 10.0
                );
            }
        }
    }

    #[test]
    fn spectral_eigen_relation_and_semigroup() {
        let grid = SpaceGrid::new_2d((0.0, 1.0, 6), (0.0, 2.0, 5)).unwrap();
        let half = assemble_frac_laplacian_2d(0.5, &grid).unwrap();
        let full = assemble_frac_laplacian_2d(1.0, &grid).unwrap();
        let phi = half.eigenvector(0, 0).unwrap();
        let lam = half.spectrum().unwrap()[0];
        let got = half.apply(&phi);
        let expected: Vec<f64> = phi.iter().map(|p| lam * p).collect();
        assert!(max_abs_diff(&got, &expected) < 1e-12);

        let v: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin()).collect();
        let twice = half.apply(&half.apply(&v));
        let once = full.apply(&v);
        let scale = once.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(max_abs_diff(&twice, &once) <= 1e-10 * scale);
    }

    #[test]
    fn shifted_solves_invert() {
        let g1 = SpaceGrid::new_1d(-2.0, 2.0, 20).unwrap();
        let g2 = SpaceGrid::new_2d((0.0, 1.0, 5), (0.0, 1.0, 7)).unwrap();
        for (grid, s) in [(g1, 0.4), (g2, 0.8)] {
            let op = assemble_frac_laplacian(s, &grid).unwrap();
            let solver = op.shifted(3.5).unwrap();
            let y: Vec<f64> = (0..grid.ndof()).map(|i| 1.0 + (i as f64).cos()).collect();
            let mut x = y.clone();
            solver.solve_in_place(&mut x);
            let mut back = op.apply(&x);
            back.iter_mut().zip(&x).for_each(|(b, xi)| *b += 3.5 * xi);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err = back
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(err <= 1e-10 * norm);
        }
    }
}
