#![allow(dead_code)]

use dcd_core::{Boundary, Grid1D, GridFunction};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Periodic grid on `[0, 1)`.
pub fn unit_periodic(n: usize) -> Grid1D {
    Grid1D::on_interval(0.0, 1.0, n, Boundary::Periodic).unwrap()
}

/// Piecewise constant profile with a random number of pieces and values in `[lo, hi]`.
pub fn random_bv(rng: &mut ChaCha8Rng, grid: Grid1D, lo: f64, hi: f64) -> GridFunction {
    let n = grid.n_cells();
    let pieces = rng.gen_range(2..=12);
    let mut cuts: Vec<usize> = (0..pieces - 1).map(|_| rng.gen_range(1..n)).collect();
    cuts.sort_unstable();
    let mut values = Vec::with_capacity(n);
    let mut level = rng.gen_range(lo..=hi);
    let mut next = 0;
    for j in 0..n {
        while next < cuts.len() && cuts[next] == j {
            level = rng.gen_range(lo..=hi);
            next += 1;
        }
        values.push(level);
    }
    GridFunction::new(grid, values).unwrap()
}

/// Dense Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let m = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= m * a[k][j];
            }
            b[i] -= m * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Matrix of `I - dt (c D-D+ - v D-)` on a periodic grid: implicit heat
/// (`c` diffusion) plus upwind advection at speed `v >= 0`.
pub fn periodic_linear_matrix(n: usize, dx: f64, dt: f64, c: f64, v: f64) -> Vec<Vec<f64>> {
    let d = c * dt / (dx * dx);
    let a = v * dt / dx;
    let mut m = vec![vec![0.0; n]; n];
    for j in 0..n {
        m[j][j] += 1.0 + 2.0 * d + a;
        m[j][(j + n - 1) % n] -= d + a;
        m[j][(j + 1) % n] -= d;
    }
    m
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
