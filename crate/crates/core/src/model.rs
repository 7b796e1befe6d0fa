//! Problem instances `u_t + f(u)_x = A(u)_xx, u(x, 0) = u0(x)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functions::{RealFn, ScalarFn};
use crate::grid::{Boundary, Grid1D};

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Number of points used to spot-check model derivatives.
pub const MODEL_CHECK_SAMPLES: usize = 64;

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Precondition(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    /// `n` equispaced points including both endpoints (`n >= 2`), or the
    /// single point of a degenerate interval.
    pub fn samples(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let n = if self.width() == 0.0 { 1 } else { n.max(2) };
        let step = if n > 1 { self.width() / (n - 1) as f64 } else { 0.0 };
        (0..n).map(move |k| if k + 1 == n { self.hi } else { self.lo + k as f64 * step })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Spatial domain `[x_left, x_right]` and its boundary policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_left: f64,
    pub x_right: f64,
    pub boundary: Boundary,
}

impl Domain {
    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn grid(&self, n_cells: usize) -> Result<Grid1D> {
        Grid1D::on_interval(self.x_left, self.x_right, n_cells, self.boundary)
    }

    /// Grid with spacing `dx`; the domain length must be an integer multiple.
    pub fn grid_with_dx(&self, dx: f64) -> Result<Grid1D> {
        let n = self.length() / dx;
        let rounded = n.round();
        if (n - rounded).abs() > 1e-9 * n.max(1.0) || rounded < 3.0 {
            return Err(Error::InvalidGrid(format!("dx = {dx} does not divide the domain length {}", self.length())));
        }
        self.grid(rounded as usize)
    }
}

/// One PDE instance: flux, diffusion function, initial data and (optionally)
/// the exact entropy solution.
#[derive(Clone)]
pub struct ProblemModel {
    pub key: String,
    pub flux: ScalarFn,
    pub diffusion: ScalarFn,
    pub initial: RealFn,
    /// Closed interval containing the range of the initial data.
    pub value_range: Interval,
    pub exact: Option<SpaceTimeFn>,
    pub final_time: f64,
    pub domain: Domain,
    /// Whether `u0` lies in L1 ∩ L∞ ∩ BV and `A(u0)_x` in BV classically.
    pub regularity: String,
}

impl fmt::Debug for ProblemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemModel")
            .field("key", &self.key)
            .field("flux", &self.flux)
            .field("diffusion", &self.diffusion)
            .field("value_range", &self.value_range)
            .field("has_exact", &self.exact.is_some())
            .field("final_time", &self.final_time)
            .field("domain", &self.domain)
            .finish()
    }
}

impl ProblemModel {
    #[inline]
    pub fn f(&self, w: f64) -> f64 {
        self.flux.value(w)
    }

    #[inline]
    pub fn f_prime(&self, w: f64) -> f64 {
        self.flux.derivative(w)
    }

    #[inline]
    pub fn a(&self, w: f64) -> f64 {
        self.diffusion.value(w)
    }

    #[inline]
    pub fn a_prime(&self, w: f64) -> f64 {
        self.diffusion.derivative(w)
    }

    pub fn u0(&self, x: f64) -> f64 {
        (self.initial)(x)
    }

    pub fn exact_at(&self, x: f64, t: f64) -> Option<f64> {
        self.exact.as_ref().map(|e| e(x, t))
    }

    pub fn grid(&self, n_cells: usize) -> Result<Grid1D> {
        self.domain.grid(n_cells)
    }

    /// Same model with a different final time.
    pub fn with_final_time(mut self, final_time: f64) -> Self {
        self.final_time = final_time;
        self
    }

    /// Checks `A(0) = 0`, `A' >= 0` and derivative consistency of `f` and `A`
    /// by central differences at [`MODEL_CHECK_SAMPLES`] points.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::InvalidModel { key: self.key.clone(), reason };
        if !(self.final_time >= 0.0) {
            return Err(fail(format!("final_time must be nonnegative, got {}", self.final_time)));
        }
        let a0 = self.a(0.0);
        if a0.abs() > 1e-14 {
            return Err(fail(format!("A(0) = {a0}, expected 0")));
        }
        let scale = self.value_range.width().max(1.0);
        for w in self.value_range.samples(MODEL_CHECK_SAMPLES) {
            let ap = self.a_prime(w);
            if !(ap >= 0.0) {
                return Err(fail(format!("A'({w}) = {ap} is negative")));
            }
            let h = 1e-6 * scale;
            for (name, g) in [("f", &self.flux), ("A", &self.diffusion)] {
                let fd = (g.value(w + h) - g.value(w - h)) / (2.0 * h);
                let d = g.derivative(w);
                if (fd - d).abs() > 1e-6 * d.abs().max(1.0) {
                    return Err(fail(format!("{name}' inconsistent at {w}: derivative {d}, finite difference {fd}")));
                }
            }
        }
        Ok(())
    }
}
