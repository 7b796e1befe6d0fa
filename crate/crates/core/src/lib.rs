#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Monotone finite difference schemes for one-dimensional strongly degenerate
//! convection–diffusion equations
//!
//! ```text
//! u_t + f(u)_x = A(u)_xx,   A(0) = 0,  A' >= 0,
//! ```
//!
//! where `A'` may vanish on whole intervals. The crate provides the
//! semi-discrete, implicit Euler and explicit Euler schemes built on a split
//! monotone flux, a catalog of test problems with exact or reference
//! solutions, an L1 convergence-study harness, and numerical audits of the
//! discrete entropy and stability structure of the schemes.

pub mod audit;
pub mod error;
pub mod flux;
pub mod functions;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod problems;
pub mod quadrature;
pub mod schemes;
pub mod trace_io;

pub use error::{Error, Result};
pub use flux::{affine_split_flux, check_monotone, engquist_osher, numerical_entropy_flux, SplitFlux};
pub use functions::ScalarFn;
pub use grid::{cell_average_project, Boundary, Grid1D, GridFunction};
pub use model::{Domain, Interval, ProblemModel};
pub use schemes::{SaveSchedule, SchemeConfig, SchemeKind, SolveTrace};
