use crate::flux::SplitFlux;
use crate::grid::GridFunction;
use crate::model::ProblemModel;

use super::SpatialOperator;

/// One SSP-RK3 (Shu–Osher) step of `du/dt = rhs(u)`. Each stage is a convex
/// combination of forward Euler steps.
pub fn ssp_rk3_step(u: &GridFunction, dt: f64, split: &SplitFlux, model: &ProblemModel) -> GridFunction {
    let mut op = SpatialOperator::new(split, model, u.grid());
    let mut stages = RkStages::new(u.len());
    let mut out = u.values().to_vec();
    stages.step(&mut op, &mut out, dt);
    GridFunction::from_parts(*u.grid(), out)
}

/// Scratch buffers for repeated SSP-RK3 steps.
pub(crate) struct RkStages {
    k: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl RkStages {
    pub(crate) fn new(n: usize) -> Self {
        Self { k: vec![0.0; n], u1: vec![0.0; n], u2: vec![0.0; n] }
    }

    pub(crate) fn step(&mut self, op: &mut SpatialOperator<'_>, u: &mut [f64], dt: f64) {
        op.apply(u, &mut self.k);
        for ((u1, &u0), &k) in self.u1.iter_mut().zip(u.iter()).zip(&self.k) {
            *u1 = u0 + dt * k;
        }
        op.apply(&self.u1, &mut self.k);
        for (((u2, &u0), &u1), &k) in self.u2.iter_mut().zip(u.iter()).zip(&self.u1).zip(&self.k) {
            *u2 = 0.75 * u0 + 0.25 * (u1 + dt * k);
        }
        op.apply(&self.u2, &mut self.k);
        for ((u0, &u2), &k) in u.iter_mut().zip(&self.u2).zip(&self.k) {
            *u0 = *u0 / 3.0 + 2.0 / 3.0 * (u2 + dt * k);
        }
    }
}
