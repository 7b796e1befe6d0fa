//! Uniform one-dimensional grids and piecewise-constant grid functions.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre5_mean;

/// Number of equal sub-intervals per cell used for cell averages.
pub const CELL_QUAD_PIECES: usize = 64;

/// How neighbors outside `0..n_cells` are supplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Wrap around: cell `-1` is cell `n - 1`.
    Periodic,
    /// Constant ghost extension: cell `-1` copies cell `0`, cell `n` copies `n - 1`.
    Extrapolate,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Periodic => f.write_str("periodic"),
            Boundary::Extrapolate => f.write_str("extrapolate"),
        }
    }
}

/// A uniform mesh of `n_cells` cells of width `dx` starting at `x_left`.
///
/// Cell `j` is `(x_left + j dx, x_left + (j + 1) dx]` with center
/// `x_left + (j + 1/2) dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_left: f64,
    dx: f64,
    n_cells: usize,
    boundary: Boundary,
}

impl Grid1D {
    pub fn new(x_left: f64, dx: f64, n_cells: usize, boundary: Boundary) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidGrid(format!("dx must be positive, got {dx}")));
        }
        if !x_left.is_finite() {
            return Err(Error::InvalidGrid(format!("x_left must be finite, got {x_left}")));
        }
        if n_cells < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 cells, got {n_cells}")));
        }
        Ok(Self { x_left, dx, n_cells, boundary })
    }

    /// Splits `[x_left, x_right]` into `n_cells` equal cells.
    pub fn on_interval(x_left: f64, x_right: f64, n_cells: usize, boundary: Boundary) -> Result<Self> {
        if !(x_right > x_left) {
            return Err(Error::InvalidGrid(format!("empty interval [{x_left}, {x_right}]")));
        }
        if n_cells == 0 {
            return Err(Error::InvalidGrid("need at least 3 cells, got 0".into()));
        }
        Self::new(x_left, (x_right - x_left) / n_cells as f64, n_cells, boundary)
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_left + self.n_cells as f64 * self.dx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn length(&self) -> f64 {
        self.n_cells as f64 * self.dx
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        self.x_left + (j as f64 + 0.5) * self.dx
    }

    /// Left and right faces of cell `j`.
    pub fn cell_bounds(&self, j: usize) -> (f64, f64) {
        let lo = self.x_left + j as f64 * self.dx;
        (lo, lo + self.dx)
    }

    /// The same domain with `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.x_left, self.dx / factor as f64, self.n_cells * factor, self.boundary)
    }
}

/// Cell values `u_j` on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid1D,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells {
            return Err(Error::InvalidGrid(format!("expected {} values, got {}", grid.n_cells, values.len())));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { grid, values })
    }

    /// Builds a grid function without the finiteness check. Callers guarantee
    /// the length matches.
    pub(crate) fn from_parts(grid: Grid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_cells);
        Self { grid, values }
    }

    pub fn constant(grid: Grid1D, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.n_cells])
    }

    /// Samples `f` at cell centers.
    pub fn from_centers<F: Fn(f64) -> f64>(grid: Grid1D, f: F) -> Result<Self> {
        let values = (0..grid.n_cells).map(|j| f(grid.cell_center(j))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dx(&self) -> f64 {
        self.grid.dx
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value of the right neighbor of cell `j` under the boundary policy.
    #[inline]
    pub fn right(&self, j: usize) -> f64 {
        right_neighbor(&self.values, j, self.grid.boundary)
    }

    /// Value of the left neighbor of cell `j` under the boundary policy.
    #[inline]
    pub fn left(&self, j: usize) -> f64 {
        left_neighbor(&self.values, j, self.grid.boundary)
    }

    /// Applies `f` to every value.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Forward difference quotient `D+ v_j = (v_{j+1} - v_j) / dx`.
    pub fn d_plus(&self) -> Self {
        let dx = self.grid.dx;
        let values = (0..self.len()).map(|j| (self.right(j) - self.values[j]) / dx).collect();
        Self::from_parts(self.grid, values)
    }

    /// Backward difference quotient `D- v_j = (v_j - v_{j-1}) / dx`.
    pub fn d_minus(&self) -> Self {
        let dx = self.grid.dx;
        let values = (0..self.len()).map(|j| (self.values[j] - self.left(j)) / dx).collect();
        Self::from_parts(self.grid, values)
    }

    /// Second difference `D- D+ v_j`, evaluated as `D-` of the `D+` profile.
    pub fn d_minus_d_plus(&self) -> Self {
        self.d_plus().d_minus()
    }

    /// `dx * sum |v_j|`.
    pub fn norm_l1(&self) -> f64 {
        self.grid.dx * self.values.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// `sum |v_{j+1} - v_j|` over interior faces, plus the wrap face when periodic.
    pub fn bv_seminorm(&self) -> f64 {
        bv_of(&self.values, self.grid.boundary)
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `dx * sum u_j`.
    pub fn mass(&self) -> f64 {
        self.grid.dx * self.values.iter().sum::<f64>()
    }

    /// `dx * sum |u_j - v_j|`; the grids must match.
    pub fn distance_l1(&self, other: &GridFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("distance between functions on different grids".into()));
        }
        Ok(self.grid.dx * self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// Writes `x,u` rows at cell centers with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,u")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.grid.cell_center(j), v)?;
        }
        Ok(())
    }

    /// Reads the `x,u` format produced by [`GridFunction::write_csv`]. The
    /// grid is recovered from the first two centers.
    pub fn read_csv<R: BufRead>(input: R, boundary: Boundary) -> Result<Self> {
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line = line?;
            if k == 0 {
                if line.trim() != "x,u" {
                    return Err(Error::InvalidGrid(format!("unexpected header `{line}`")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (x, u) = line.split_once(',').ok_or_else(|| Error::InvalidGrid(format!("malformed row `{line}`")))?;
            let parse =
                |s: &str| s.trim().parse::<f64>().map_err(|e| Error::InvalidGrid(format!("bad number `{s}`: {e}")));
            xs.push(parse(x)?);
            us.push(parse(u)?);
        }
        if xs.len() < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 rows, got {}", xs.len())));
        }
        let dx = xs[1] - xs[0];
        let grid = Grid1D::new(xs[0] - 0.5 * dx, dx, xs.len(), boundary)?;
        Self::new(grid, us)
    }
}

#[inline]
pub(crate) fn right_neighbor(values: &[f64], j: usize, boundary: Boundary) -> f64 {
    let n = values.len();
    if j + 1 < n {
        values[j + 1]
    } else {
        match boundary {
            Boundary::Periodic => values[0],
            Boundary::Extrapolate => values[n - 1],
        }
    }
}

#[inline]
pub(crate) fn left_neighbor(values: &[f64], j: usize, boundary: Boundary) -> f64 {
    if j > 0 {
        values[j - 1]
    } else {
        match boundary {
            Boundary::Periodic => values[values.len() - 1],
            Boundary::Extrapolate => values[0],
        }
    }
}

pub(crate) fn bv_of(values: &[f64], boundary: Boundary) -> f64 {
    let interior: f64 = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    match boundary {
        Boundary::Periodic => interior + (values[0] - values[values.len() - 1]).abs(),
        Boundary::Extrapolate => interior,
    }
}

/// Cell averages `(1/dx) * integral of u0 over each cell`, by composite
/// five-point Gauss–Legendre quadrature.
pub fn cell_average_project<F: Fn(f64) -> f64>(u0: F, grid: &Grid1D) -> Result<GridFunction> {
    let values = (0..grid.n_cells)
        .map(|j| {
            let (lo, hi) = grid.cell_bounds(j);
            gauss_legendre5_mean(&u0, lo, hi, CELL_QUAD_PIECES)
        })
        .collect();
    GridFunction::new(*grid, values)
}
