use crate::flux::SplitFlux;
use crate::grid::GridFunction;
use crate::model::ProblemModel;

use super::SpatialOperator;

/// One forward Euler step `u + dt * rhs(u)`.
///
/// Monotone only when `dt` respects [`cfl_max_dt`](super::cfl_max_dt) for the
/// range of `u`; the driver enforces that.
pub fn explicit_step(u: &GridFunction, dt: f64, split: &SplitFlux, model: &ProblemModel) -> GridFunction {
    let mut op = SpatialOperator::new(split, model, u.grid());
    let mut out = vec![0.0; u.len()];
    op.apply(u.values(), &mut out);
    for (o, &v) in out.iter_mut().zip(u.values()) {
        *o = v + dt * *o;
    }
    GridFunction::from_parts(*u.grid(), out)
}
