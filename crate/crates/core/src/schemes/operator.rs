use crate::error::{Error, Result};
use crate::flux::SplitFlux;
use crate::grid::{Boundary, Grid1D, GridFunction};
use crate::model::{Interval, ProblemModel};

use super::SchemeConfig;

/// Samples of the value range used for the CFL suprema.
pub const CFL_SAMPLES: usize = 512;

/// Evaluates the spatial operator into preallocated buffers.
pub(crate) struct SpatialOperator<'a> {
    split: &'a SplitFlux,
    model: &'a ProblemModel,
    boundary: Boundary,
    inv_dx: f64,
    inv_dx2: f64,
    f1: Vec<f64>,
    f2: Vec<f64>,
    a: Vec<f64>,
}

impl<'a> SpatialOperator<'a> {
    pub(crate) fn new(split: &'a SplitFlux, model: &'a ProblemModel, grid: &Grid1D) -> Self {
        let n = grid.n_cells();
        Self {
            split,
            model,
            boundary: grid.boundary(),
            inv_dx: 1.0 / grid.dx(),
            inv_dx2: 1.0 / (grid.dx() * grid.dx()),
            f1: vec![0.0; n],
            f2: vec![0.0; n],
            a: vec![0.0; n],
        }
    }

    /// `out_j = -(F_{j+1/2} - F_{j-1/2}) / dx + (A_{j+1} - 2 A_j + A_{j-1}) / dx^2`.
    pub(crate) fn apply(&mut self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        self.split.fill_parts(u, &mut self.f1, &mut self.f2);
        self.model.diffusion.fill_values(u, &mut self.a);
        let (f1, f2, a) = (&self.f1, &self.f2, &self.a);
        // face fluxes at the two domain ends, including ghosts
        let (flux_left_end, a_left_ghost, flux_right_end, a_right_ghost) = match self.boundary {
            Boundary::Periodic => {
                let wrap = f1[n - 1] + f2[0];
                (wrap, a[n - 1], wrap, a[0])
            }
            Boundary::Extrapolate => (f1[0] + f2[0], a[0], f1[n - 1] + f2[n - 1], a[n - 1]),
        };
        let (inv_dx, inv_dx2) = (self.inv_dx, self.inv_dx2);
        let cell = |fl: f64, fr: f64, al: f64, ac: f64, ar: f64| -(fr - fl) * inv_dx + (ar - 2.0 * ac + al) * inv_dx2;
        out[0] = cell(flux_left_end, f1[0] + f2[1], a_left_ghost, a[0], a[1]);
        for j in 1..n - 1 {
            out[j] = cell(f1[j - 1] + f2[j], f1[j] + f2[j + 1], a[j - 1], a[j], a[j + 1]);
        }
        out[n - 1] = cell(f1[n - 2] + f2[n - 1], flux_right_end, a[n - 2], a[n - 1], a_right_ghost);
    }
}

/// `-D-F(u_j, u_{j+1}) + D-D+ A(u_j)` per cell.
pub fn spatial_rhs(u: &GridFunction, split: &SplitFlux, model: &ProblemModel) -> GridFunction {
    let mut op = SpatialOperator::new(split, model, u.grid());
    let mut out = vec![0.0; u.len()];
    op.apply(u.values(), &mut out);
    GridFunction::from_parts(*u.grid(), out)
}

/// Suprema of `F1' - F2'` and `A'` over a value range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflSup {
    pub convective: f64,
    pub diffusive: f64,
}

/// Samples `F1' - F2'` and `A'` at [`CFL_SAMPLES`] points of `range`.
/// Negative or NaN samples are an error: the split is not monotone or `A`
/// is decreasing there.
pub fn cfl_sup(range: &Interval, split: &SplitFlux, model: &ProblemModel) -> Result<CflSup> {
    let mut sup = CflSup { convective: 0.0, diffusive: 0.0 };
    for z in range.samples(CFL_SAMPLES) {
        let conv = split.f1_prime(z) - split.f2_prime(z);
        let diff = model.a_prime(z);
        if !(conv >= 0.0) {
            return Err(Error::Cfl(format!("F1'({z}) - F2'({z}) = {conv} is negative or NaN")));
        }
        if !(diff >= 0.0) {
            return Err(Error::Cfl(format!("A'({z}) = {diff} is negative or NaN")));
        }
        sup.convective = sup.convective.max(conv);
        sup.diffusive = sup.diffusive.max(diff);
    }
    Ok(sup)
}

/// Largest stable explicit step, `cfl_safety * dx^2 / (dx sup(F1' - F2') + 2 sup A')`,
/// optionally capped at `dx^(8/3)`. When both suprema vanish the bound is
/// the model's final time.
pub fn cfl_max_dt(
    u_range: &Interval,
    split: &SplitFlux,
    model: &ProblemModel,
    dx: f64,
    config: &SchemeConfig,
) -> Result<f64> {
    let sup = cfl_sup(u_range, split, model)?;
    let denom = dx * sup.convective + 2.0 * sup.diffusive;
    let mut dt = if denom > 0.0 { config.cfl_safety * dx * dx / denom } else { model.final_time };
    if config.strengthened_cfl {
        dt = dt.min(dx.powf(8.0 / 3.0));
    }
    Ok(dt)
}
