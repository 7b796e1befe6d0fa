//! Semi-discrete, implicit Euler and explicit Euler monotone schemes sharing
//! the conservative spatial operator
//! `-D-( F(u_j, u_{j+1}) ) + D-D+ A(u_j)`.

mod driver;
mod explicit;
mod implicit;
mod operator;
mod semi;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use driver::{run_from, run_to_time, semi_discrete_solve};
pub use explicit::explicit_step;
pub use implicit::{implicit_residual, implicit_step, implicit_step_with_stats};
pub use operator::{cfl_max_dt, cfl_sup, spatial_rhs, CflSup, CFL_SAMPLES};
pub use semi::ssp_rk3_step;

pub(crate) use operator::SpatialOperator;

use crate::error::{Error, Result};
use crate::grid::GridFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    SemiDiscrete,
    Implicit,
    Explicit,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::SemiDiscrete => "semi",
            SchemeKind::Implicit => "implicit",
            SchemeKind::Explicit => "explicit",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semi" | "semi-discrete" | "semidiscrete" => Ok(SchemeKind::SemiDiscrete),
            "implicit" => Ok(SchemeKind::Implicit),
            "explicit" => Ok(SchemeKind::Explicit),
            other => Err(Error::Precondition(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Which intermediate states a solve keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaveSchedule {
    /// Initial and final state only.
    Endpoints,
    /// Every `k`-th step, plus the final state.
    Every(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Fraction of the CFL bound used, in `(0, 1]`.
    pub cfl_safety: f64,
    /// Also cap explicit steps at `dx^(8/3)`.
    pub strengthened_cfl: bool,
    /// Newton stops when `||R||_1 <= newton_tol * (1 + ||u_prev||_1)`.
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    /// Semi-discrete steps are this fraction of the CFL step.
    pub rk_substep_factor: f64,
    pub fixed_dt: Option<f64>,
    pub save: SaveSchedule,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            kind: SchemeKind::Explicit,
            cfl_safety: 0.9,
            strengthened_cfl: false,
            newton_tol: 1e-12,
            newton_max_iters: 50,
            rk_substep_factor: 0.25,
            fixed_dt: None,
            save: SaveSchedule::Endpoints,
        }
    }
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind) -> Self {
        Self { kind, ..Self::default() }
    }

    pub fn with_fixed_dt(mut self, dt: f64) -> Self {
        self.fixed_dt = Some(dt);
        self
    }

    pub fn with_save(mut self, save: SaveSchedule) -> Self {
        self.save = save;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Precondition(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::Precondition(format!("newton_tol must be positive, got {}", self.newton_tol)));
        }
        if !(self.rk_substep_factor > 0.0) {
            return Err(Error::Precondition(format!(
                "rk_substep_factor must be positive, got {}",
                self.rk_substep_factor
            )));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::Precondition(format!("fixed_dt must be positive, got {dt}")));
            }
        }
        if self.save == SaveSchedule::Every(0) {
            return Err(Error::Precondition("save interval must be at least 1".into()));
        }
        Ok(())
    }
}

/// Saved states of a solve.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    /// Times of the saved states; starts at 0 and ends at the final time.
    pub times: Vec<f64>,
    pub states: Vec<GridFunction>,
    /// Step index (0 = initial data) of each saved state.
    pub step_indices: Vec<usize>,
    pub step_count: usize,
    /// Nominal step size (before clipping or halving).
    pub dt: f64,
    /// Newton iterations per implicit step.
    pub newton_iterations: BTreeMap<usize, usize>,
    /// Number of implicit steps that needed dt halving.
    pub halvings: usize,
}

impl SolveTrace {
    pub fn initial(&self) -> &GridFunction {
        &self.states[0]
    }

    pub fn last(&self) -> &GridFunction {
        self.states.last().expect("trace holds at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trace holds at least the initial time")
    }
}
