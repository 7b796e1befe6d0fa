//! Fixed-order Gauss–Legendre and adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Maximum bisection depth for [`adaptive_simpson`].
pub const MAX_LEVELS: u32 = 30;

// Local tolerances halve with depth but never drop below `tol * 2^-FLOOR_LEVEL`.
// Without the floor a derivative jump inside [a, b] needs ~40 levels at 1e-12.
const FLOOR_LEVEL: i32 = 14;

const GL5_NODES: [f64; 5] =
    [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Five-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite five-point Gauss–Legendre rule over `pieces` equal subintervals.
pub fn composite_gauss_legendre5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let lo = a + k as f64 * h;
            let hi = if k + 1 == pieces { b } else { lo + h };
            gauss_legendre5(&f, lo, hi)
        })
        .sum()
}

/// Mean value of `f` over `[a, b]` by the composite five-point rule on
/// `pieces` equal subintervals, with compensated summation so constants are
/// reproduced to within an ulp or two.
pub fn gauss_legendre5_mean<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for k in 0..pieces {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            let term = w * f(mid + 0.5 * h * x);
            let t = sum + term;
            comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
            sum = t;
        }
    }
    (sum + comp) / (2.0 * pieces as f64)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` (either orientation).
///
/// Fails with [`Error::Quadrature`] if some subinterval still misses its
/// local tolerance after [`MAX_LEVELS`] bisections.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let floor = tol * 2f64.powi(-FLOOR_LEVEL);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, floor, 0).ok_or(Error::Quadrature { a, b, levels: MAX_LEVELS })
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    floor: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return None;
    }
    if delta.abs() <= 15.0 * tol.max(floor) {
        return Some(left + right + delta / 15.0);
    }
    if depth + 1 >= MAX_LEVELS {
        return None;
    }
    let half_tol = 0.5 * tol;
    let l = simpson_step(f, a, m, fa, flm, fm, left, half_tol, floor, depth + 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, half_tol, floor, depth + 1)?;
    Some(l + r)
}

/// Adaptive Simpson over `[a, b]` split at every breakpoint strictly inside
/// the interval. The tolerance is shared out in proportion to piece length.
pub fn adaptive_simpson_with_breaks<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut points: Vec<f64> = breaks.iter().copied().filter(|&p| p > lo && p < hi).collect();
    points.sort_by(|x, y| x.total_cmp(y));
    points.dedup();
    let mut nodes = Vec::with_capacity(points.len() + 2);
    nodes.push(lo);
    nodes.extend(points);
    nodes.push(hi);
    let len = hi - lo;
    let mut acc = 0.0;
    for w in nodes.windows(2) {
        let piece_tol = tol * (w[1] - w[0]) / len;
        acc += adaptive_simpson(&f, w[0], w[1], piece_tol.max(f64::MIN_POSITIVE))?;
    }
    Ok(sign * acc)
}
