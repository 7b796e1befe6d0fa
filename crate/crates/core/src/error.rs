use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at cell {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("quadrature did not converge on [{a}, {b}] after {levels} bisection levels")]
    Quadrature { a: f64, b: f64, levels: u32 },

    #[error("invalid model `{key}`: {reason}")]
    InvalidModel { key: String, reason: String },

    #[error("flux construction failed: {0}")]
    Flux(String),

    #[error("unknown model key `{0}`")]
    UnknownModel(String),

    #[error("CFL evaluation failed: {0}")]
    Cfl(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("step {step} at t = {time} failed: {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("time step degenerated to {dt:e}")]
    DegenerateTimeStep { dt: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("missing exact solution for model `{0}`; use a fine-grid reference instead")]
    MissingExact(String),

    #[error("grids are not nested: {0}")]
    NonNested(String),

    #[error("study level {level} (dx = {dx}) failed: {source}")]
    StudyLevel {
        level: usize,
        dx: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
