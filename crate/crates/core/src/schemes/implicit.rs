use crate::error::{Error, Result};
use crate::flux::SplitFlux;
use crate::grid::{Boundary, GridFunction};
use crate::linalg::{solve_cyclic_tridiagonal, solve_tridiagonal};
use crate::model::ProblemModel;

use super::{SchemeConfig, SpatialOperator};

const MAX_DAMPING_HALVINGS: usize = 30;

fn l1(dx: f64, v: &[f64]) -> f64 {
    dx * v.iter().map(|x| x.abs()).sum::<f64>()
}

fn residual_into(op: &mut SpatialOperator<'_>, u: &[f64], u_prev: &[f64], dt: f64, out: &mut [f64]) {
    op.apply(u, out);
    for j in 0..u.len() {
        out[j] = u[j] - u_prev[j] - dt * out[j];
    }
}

/// Scheme residual `u_j - u_prev_j + dt (D-F(u_j, u_{j+1}) - D-D+ A(u_j))`.
pub fn implicit_residual(
    u: &GridFunction,
    u_prev: &GridFunction,
    dt: f64,
    split: &SplitFlux,
    model: &ProblemModel,
) -> GridFunction {
    let mut op = SpatialOperator::new(split, model, u.grid());
    let mut out = vec![0.0; u.len()];
    residual_into(&mut op, u.values(), u_prev.values(), dt, &mut out);
    GridFunction::from_parts(*u.grid(), out)
}

/// One implicit Euler step; see [`implicit_step_with_stats`].
pub fn implicit_step(
    u_prev: &GridFunction,
    dt: f64,
    split: &SplitFlux,
    model: &ProblemModel,
    config: &SchemeConfig,
) -> Result<GridFunction> {
    implicit_step_with_stats(u_prev, dt, split, model, config).map(|(u, _)| u)
}

/// Solves the implicit Euler system by damped Newton iteration started from
/// `u_prev`, returning the new state and the number of Newton iterations.
///
/// The Jacobian is tridiagonal (cyclic on periodic grids). Each Newton step
/// is halved until the l1 residual decreases. Converged when
/// `||R||_1 <= newton_tol * (1 + ||u_prev||_1)`.
pub fn implicit_step_with_stats(
    u_prev: &GridFunction,
    dt: f64,
    split: &SplitFlux,
    model: &ProblemModel,
    config: &SchemeConfig,
) -> Result<(GridFunction, usize)> {
    if !(dt > 0.0) {
        return Err(Error::Precondition(format!("implicit step needs dt > 0, got {dt}")));
    }
    let grid = *u_prev.grid();
    let n = grid.n_cells();
    let dx = grid.dx();
    let prev = u_prev.values();
    let mut op = SpatialOperator::new(split, model, &grid);

    let mut u = prev.to_vec();
    let mut r = vec![0.0; n];
    residual_into(&mut op, &u, prev, dt, &mut r);
    let mut rn = l1(dx, &r);
    let target = config.newton_tol * (1.0 + u_prev.norm_l1());

    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut neg_r = vec![0.0; n];
    let mut candidate = vec![0.0; n];
    let mut r_candidate = vec![0.0; n];
    let (lam, mu) = (dt / dx, dt / (dx * dx));

    let mut iterations = 0;
    while rn > target {
        if iterations >= config.newton_max_iters {
            return Err(Error::NewtonDivergence { iterations, residual: rn });
        }
        // d rhs_j / d u_{j-1}, d u_j, d u_{j+1}, scaled by -dt
        let from_left = |w: f64| -(lam * split.f1_prime(w) + mu * model.a_prime(w));
        let from_right = |w: f64| lam * split.f2_prime(w) - mu * model.a_prime(w);
        for j in 0..n {
            let w = u[j];
            diag[j] = 1.0 + lam * (split.f1_prime(w) - split.f2_prime(w)) + 2.0 * mu * model.a_prime(w);
            let wl = if j > 0 { u[j - 1] } else { u[n - 1] };
            let wr = if j + 1 < n { u[j + 1] } else { u[0] };
            lower[j] = from_left(wl);
            upper[j] = from_right(wr);
            neg_r[j] = -r[j];
        }
        let delta = match grid.boundary() {
            Boundary::Periodic => solve_cyclic_tridiagonal(&lower, &diag, &upper, &neg_r)?,
            Boundary::Extrapolate => {
                // ghost cells copy the edge value, folding the outer coupling onto the diagonal
                diag[0] += from_left(u[0]);
                diag[n - 1] += from_right(u[n - 1]);
                lower[0] = 0.0;
                upper[n - 1] = 0.0;
                solve_tridiagonal(&lower, &diag, &upper, &neg_r)?
            }
        };

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_DAMPING_HALVINGS {
            for j in 0..n {
                candidate[j] = u[j] + step * delta[j];
            }
            residual_into(&mut op, &candidate, prev, dt, &mut r_candidate);
            let rc = l1(dx, &r_candidate);
            if rc < rn {
                std::mem::swap(&mut u, &mut candidate);
                std::mem::swap(&mut r, &mut r_candidate);
                rn = rc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if !accepted {
            return Err(Error::NewtonDivergence { iterations, residual: rn });
        }
    }
    Ok((GridFunction::new(grid, u)?, iterations))
}
