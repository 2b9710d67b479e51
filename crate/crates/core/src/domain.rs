//! Grids, fields and subdomains.
//!
//! Space is a uniform tensor grid of interior points on a box; every value
//! outside the interior is identically zero. Time is a uniform grid on
//! `[0, T]`. Fields are stored time-major: row `n` is the spatial field at
//! `t_n`, and within a row the x index runs fastest.

use crate::error::{Error, Result};

/// One axis of a [`SpaceGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    /// Number of interior points.
    pub points: usize,
}

impl Axis {
    pub fn new(lower: f64, upper: f64, points: usize) -> Result<Self> {
        if !(upper > lower) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::Domain(format!(
                "axis bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        if points < 2 {
            return Err(Error::Domain(format!(
                "axis needs at least 2 interior points, got {points}"
            )));
        }
        Ok(Self {
            lower,
            upper,
            points,
        })
    }

    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / (self.points + 1) as f64
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    /// Coordinate of interior point `i` (0-based; the first interior point is `lower + h`).
    pub fn coordinate(&self, i: usize) -> f64 {
        self.lower + (i + 1) as f64 * self.spacing()
    }
}

/// Uniform interior grid on an axis-aligned box in one or two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    axes: Vec<Axis>,
}

impl SpaceGrid {
    pub fn new_1d(lower: f64, upper: f64, points: usize) -> Result<Self> {
        Ok(Self {
            axes: vec![Axis::new(lower, upper, points)?],
        })
    }

    pub fn new_2d(x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Self> {
        Ok(Self {
            axes: vec![Axis::new(x.0, x.1, x.2)?, Axis::new(y.0, y.1, y.2)?],
        })
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    /// Total number of interior degrees of freedom.
    pub fn ndof(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    /// Quadrature weight of one grid cell, `h_x` in 1D and `h_x h_y` in 2D.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Multi-index of a flat degree of freedom (x fastest).
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        match self.axes.as_slice() {
            [_] => [idx, 0],
            [ax, _] => [idx % ax.points, idx / ax.points],
            _ => unreachable!("grids are 1D or 2D"),
        }
    }

    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        i + j * self.axes[0].points
    }

    /// Coordinates of a flat degree of freedom; the second entry is 0 in 1D.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.multi_index(idx);
        match self.axes.as_slice() {
            [ax] => [ax.coordinate(i), 0.0],
            [ax, ay] => [ax.coordinate(i), ay.coordinate(j)],
            _ => unreachable!("grids are 1D or 2D"),
        }
    }

    /// Field with value `value(x)` at every interior point.
    pub fn sample(&self, value: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        (0..self.ndof()).map(|idx| value(self.point(idx))).collect()
    }
}

/// Uniform time grid `t_n = n T / M`, `n = 0..=M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Domain(format!(
                "final time must be positive, got {horizon}"
            )));
        }
        if steps == 0 {
            return Err(Error::Domain("time grid needs at least one step".into()));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of steps `M`; there are `M + 1` nodes.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn levels(&self) -> usize {
        self.steps + 1
    }

    pub fn tau(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn node(&self, n: usize) -> f64 {
        if n == self.steps {
            self.horizon
        } else {
            n as f64 * self.tau()
        }
    }

    /// Trapezoid weight of node `n`.
    pub fn weight(&self, n: usize) -> f64 {
        let tau = self.tau();
        if n == 0 || n == self.steps {
            0.5 * tau
        } else {
            tau
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.levels()).map(|n| self.weight(n)).collect()
    }
}

/// Caputo order `gamma` and fractional Laplacian order `s`, both in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrders {
    pub gamma: f64,
    pub s: f64,
}

impl FractionalOrders {
    pub fn new(gamma: f64, s: f64) -> Result<Self> {
        check_order("gamma", gamma)?;
        check_order("s", s)?;
        Ok(Self { gamma, s })
    }
}

pub(crate) fn check_order(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must lie in (0, 1], got {value}"
        )))
    }
}

/// Set of interior grid points forming a control or observation region.
#[derive(Debug, Clone, PartialEq)]
pub struct Subdomain {
    indices: Vec<usize>,
    mask: Vec<bool>,
    bounds: Option<Vec<(f64, f64)>>,
}

impl Subdomain {
    /// Grid points whose coordinates lie in the closed box `lo <= x <= hi`.
    ///
    /// A relative slack of `1e-9 h` absorbs rounding in the node coordinates,
    /// so a node sitting exactly on the box face is always included.
    pub fn from_box(grid: &SpaceGrid, bounds: &[(f64, f64)]) -> Result<Self> {
        if bounds.len() != grid.dimension() {
            return Err(Error::Dimension {
                context: "subdomain box",
                expected: grid.dimension(),
                got: bounds.len(),
            });
        }
        if bounds.iter().any(|(lo, hi)| !(lo <= hi)) {
            return Err(Error::MalformedSubdomain(format!(
                "inverted box {bounds:?}"
            )));
        }
        let inside = |idx: usize| {
            let p = grid.point(idx);
            bounds.iter().enumerate().all(|(k, &(lo, hi))| {
                let slack = 1e-9 * grid.axis(k).spacing();
                p[k] >= lo - slack && p[k] <= hi + slack
            })
        };
        let indices: Vec<usize> = (0..grid.ndof()).filter(|&i| inside(i)).collect();
        let mut region = Self::from_indices(grid.ndof(), indices)?;
        region.bounds = Some(bounds.to_vec());
        Ok(region)
    }

    /// The whole interior.
    pub fn full(grid: &SpaceGrid) -> Self {
        let n = grid.ndof();
        let bounds = grid.axes().iter().map(|a| (a.lower, a.upper)).collect();
        Self {
            indices: (0..n).collect(),
            mask: vec![true; n],
            bounds: Some(bounds),
        }
    }

    pub fn from_indices(ndof: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= ndof {
                return Err(Error::MalformedSubdomain(format!(
                    "index {last} outside grid with {ndof} points"
                )));
            }
        }
        let mut mask = vec![false; ndof];
        for &i in &indices {
            mask[i] = true;
        }
        Ok(Self {
            indices,
            mask,
            bounds: None,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask.get(idx).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of grid points the subdomain was built for.
    pub fn ndof(&self) -> usize {
        self.mask.len()
    }

    /// Defining box, if the subdomain came from one.
    pub fn bounds(&self) -> Option<&[(f64, f64)]> {
        self.bounds.as_deref()
    }
}

/// Values on the `(M+1) x Ndof` space-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    levels: usize,
    ndof: usize,
    values: Vec<f64>,
}

impl SpaceTimeField {
    pub fn zeros(levels: usize, ndof: usize) -> Self {
        Self {
            levels,
            ndof,
            values: vec![0.0; levels * ndof],
        }
    }

    pub fn from_values(levels: usize, ndof: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != levels * ndof {
            return Err(Error::Dimension {
                context: "space-time field",
                expected: levels * ndof,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "space-time field has non-finite entries".into(),
            ));
        }
        Ok(Self {
            levels,
            ndof,
            values,
        })
    }

    /// Same spatial field at every time level.
    pub fn broadcast(levels: usize, slice: &[f64]) -> Self {
        let mut values = Vec::with_capacity(levels * slice.len());
        for _ in 0..levels {
            values.extend_from_slice(slice);
        }
        Self {
            levels,
            ndof: slice.len(),
            values,
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.values[n * self.ndof..(n + 1) * self.ndof]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.values[n * self.ndof..(n + 1) * self.ndof]
    }

    pub fn last(&self) -> &[f64] {
        self.level(self.levels - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Unweighted space-time dot product.
    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.values, &other.values)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Entries of `field` on `region`, in region order (the adjoint of [`extend`]).
pub fn restrict(field: &[f64], region: &Subdomain) -> Result<Vec<f64>> {
    if field.len() != region.ndof() {
        return Err(Error::MalformedSubdomain(format!(
            "region built for {} points applied to a field with {}",
            region.ndof(),
            field.len()
        )));
    }
    Ok(region.indices().iter().map(|&i| field[i]).collect())
}

/// Zero extension of control values from `region` to the whole grid.
pub fn extend(u: &[f64], region: &Subdomain, ndof: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; ndof];
    extend_add(u, region, &mut out)?;
    Ok(out)
}

/// `out += extend(u, region)`.
pub fn extend_add(u: &[f64], region: &Subdomain, out: &mut [f64]) -> Result<()> {
    if u.len() != region.len() {
        return Err(Error::Dimension {
            context: "control extension",
            expected: region.len(),
            got: u.len(),
        });
    }
    if out.len() != region.ndof() {
        return Err(Error::Dimension {
            context: "control extension target",
            expected: region.ndof(),
            got: out.len(),
        });
    }
    for (&i, &v) in region.indices().iter().zip(u) {
        out[i] += v;
    }
    Ok(())
}

/// Squared rectangle-rule `L^2(region)` norm of a spatial field.
pub fn l2_norm_space_sq(field: &[f64], region: &Subdomain, grid: &SpaceGrid) -> f64 {
    region
        .indices()
        .iter()
        .map(|&i| field[i] * field[i])
        .sum::<f64>()
        * grid.cell_volume()
}

/// Rectangle-rule `L^2(region)` norm of a spatial field.
pub fn l2_norm_space(field: &[f64], region: &Subdomain, grid: &SpaceGrid) -> f64 {
    l2_norm_space_sq(field, region, grid).sqrt()
}

/// `L^2(region x (0,T))` norm: rectangle rule in space, trapezoid in time.
pub fn l2_norm_spacetime(
    field: &SpaceTimeField,
    region: &Subdomain,
    grid: &SpaceGrid,
    time: &TimeGrid,
) -> f64 {
    (0..field.levels())
        .map(|n| time.weight(n) * l2_norm_space_sq(field.level(n), region, grid))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
