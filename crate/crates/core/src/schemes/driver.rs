use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::flux::{check_monotone, SplitFlux, FLUX_CHECK_SAMPLES};
use crate::grid::{cell_average_project, Grid1D, GridFunction};
use crate::model::{Interval, ProblemModel};

use super::implicit::implicit_step_with_stats;
use super::semi::RkStages;
use super::{cfl_max_dt, SaveSchedule, SchemeConfig, SchemeKind, SolveTrace, SpatialOperator};

/// Maximum number of dt halvings when an implicit step fails.
pub const MAX_DT_HALVINGS: usize = 10;

/// Projects `model.u0` onto `grid` and integrates to `model.final_time` with
/// the stepper selected by `config.kind`.
///
/// Explicit steps default to the CFL bound, implicit steps to `dt = dx`,
/// semi-discrete steps to `rk_substep_factor` times the CFL bound.
pub fn run_to_time(
    model: &ProblemModel,
    split: &SplitFlux,
    grid: &Grid1D,
    config: &SchemeConfig,
) -> Result<SolveTrace> {
    let initial = cell_average_project(|x| model.u0(x), grid)?;
    run_from(initial, model, split, config, model.final_time)
}

/// [`run_to_time`] with SSP-RK3 time integration of the semi-discrete scheme.
pub fn semi_discrete_solve(
    model: &ProblemModel,
    split: &SplitFlux,
    grid: &Grid1D,
    config: &SchemeConfig,
) -> Result<SolveTrace> {
    let config = SchemeConfig { kind: SchemeKind::SemiDiscrete, ..config.clone() };
    run_to_time(model, split, grid, &config)
}

struct Recorder {
    schedule: SaveSchedule,
    trace: SolveTrace,
}

impl Recorder {
    fn new(schedule: SaveSchedule, initial: GridFunction, dt: f64) -> Self {
        Self {
            schedule,
            trace: SolveTrace {
                times: vec![0.0],
                states: vec![initial],
                step_indices: vec![0],
                step_count: 0,
                dt,
                newton_iterations: BTreeMap::new(),
                halvings: 0,
            },
        }
    }

    fn wants(&self, step: usize, last: bool) -> bool {
        last || matches!(self.schedule, SaveSchedule::Every(k) if step.is_multiple_of(k))
    }

    fn save(&mut self, step: usize, time: f64, grid: Grid1D, values: &[f64]) -> Result<()> {
        let state =
            GridFunction::new(grid, values.to_vec()).map_err(|e| Error::Step { step, time, source: Box::new(e) })?;
        self.trace.times.push(time);
        self.trace.states.push(state);
        self.trace.step_indices.push(step);
        Ok(())
    }
}

/// Step end times `t_1 < ... < t_N = final_time` for a nominal step `dt`.
fn time_levels(dt: f64, final_time: f64) -> Vec<f64> {
    let ratio = final_time / dt;
    let n = ((ratio - 1e-9 * ratio.max(1.0)).ceil() as usize).max(1);
    (1..=n).map(|k| if k == n { final_time } else { (k as f64 * dt).min(final_time) }).collect()
}

/// Integrates from the given initial state to `final_time`.
pub fn run_from(
    initial: GridFunction,
    model: &ProblemModel,
    split: &SplitFlux,
    config: &SchemeConfig,
    final_time: f64,
) -> Result<SolveTrace> {
    config.validate()?;
    if !(final_time >= 0.0) {
        return Err(Error::Precondition(format!("final_time must be nonnegative, got {final_time}")));
    }
    let grid = *initial.grid();
    let dx = grid.dx();
    let range = Interval::new(initial.min(), initial.max())?;

    if final_time == 0.0 {
        return Ok(Recorder::new(config.save, initial, 0.0).trace);
    }

    let dt = match (config.kind, config.fixed_dt) {
        (_, Some(dt)) => dt,
        (SchemeKind::Implicit, None) => dx,
        (SchemeKind::Explicit, None) => cfl_max_dt(&range, split, model, dx, config)?,
        (SchemeKind::SemiDiscrete, None) => config.rk_substep_factor * cfl_max_dt(&range, split, model, dx, config)?,
    };
    if !(dt >= 1e-14 * final_time) {
        return Err(Error::DegenerateTimeStep { dt });
    }
    if config.kind == SchemeKind::Explicit {
        let report = check_monotone(split, &range, FLUX_CHECK_SAMPLES);
        if !report.pass {
            return Err(Error::Precondition(format!("explicit scheme needs a monotone flux: {report}")));
        }
    }

    let levels = time_levels(dt, final_time);
    let n_steps = levels.len();
    let mut rec = Recorder::new(config.save, initial.clone(), dt);
    let mut op = SpatialOperator::new(split, model, &grid);
    let mut u = initial.values().to_vec();
    let mut t = 0.0;

    match config.kind {
        SchemeKind::Explicit => {
            let mut k = vec![0.0; u.len()];
            for (i, &t_next) in levels.iter().enumerate() {
                let h = t_next - t;
                op.apply(&u, &mut k);
                for (uj, kj) in u.iter_mut().zip(&k) {
                    *uj += h * kj;
                }
                t = t_next;
                let step = i + 1;
                if rec.wants(step, step == n_steps) {
                    rec.save(step, t, grid, &u)?;
                }
            }
        }
        SchemeKind::SemiDiscrete => {
            let mut stages = RkStages::new(u.len());
            for (i, &t_next) in levels.iter().enumerate() {
                stages.step(&mut op, &mut u, t_next - t);
                t = t_next;
                let step = i + 1;
                if rec.wants(step, step == n_steps) {
                    rec.save(step, t, grid, &u)?;
                }
            }
        }
        SchemeKind::Implicit => {
            let mut state = initial;
            for (i, &t_next) in levels.iter().enumerate() {
                let step = i + 1;
                let (next, iters, halvings) = implicit_advance(&state, t_next - t, split, model, config, 0)
                    .map_err(|e| Error::Step { step, time: t, source: Box::new(e) })?;
                rec.trace.newton_iterations.insert(step, iters);
                rec.trace.halvings += halvings;
                state = next;
                t = t_next;
                if rec.wants(step, step == n_steps) {
                    rec.save(step, t, grid, state.values())?;
                }
            }
        }
    }
    rec.trace.step_count = n_steps;
    Ok(rec.trace)
}

/// Implicit step with dt halving on Newton failure. Returns the state, the
/// total Newton iterations, and how many halvings were needed.
fn implicit_advance(
    u: &GridFunction,
    dt: f64,
    split: &SplitFlux,
    model: &ProblemModel,
    config: &SchemeConfig,
    depth: usize,
) -> Result<(GridFunction, usize, usize)> {
    match implicit_step_with_stats(u, dt, split, model, config) {
        Ok((next, iters)) => Ok((next, iters, 0)),
        Err(e @ Error::NewtonDivergence { .. }) => {
            if depth >= MAX_DT_HALVINGS {
                return Err(e);
            }
            let half = 0.5 * dt;
            let (mid, i1, h1) = implicit_advance(u, half, split, model, config, depth + 1)?;
            let (end, i2, h2) = implicit_advance(&mid, half, split, model, config, depth + 1)?;
            Ok((end, i1 + i2, 1 + h1 + h2))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_levels_end_exactly() {
        let levels = time_levels(0.3, 1.0);
        assert_eq!(levels.len(), 4);
        assert_eq!(*levels.last().unwrap(), 1.0);
        assert!((levels[2] - 0.9).abs() < 1e-15);
        // an exact multiple does not produce a sliver step
        let levels = time_levels(0.1, 1.0);
        assert_eq!(levels.len(), 10);
        let levels = time_levels(2.0, 1.0);
        assert_eq!(levels, vec![1.0]);
    }
}
