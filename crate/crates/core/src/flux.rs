//! Monotone two-point numerical fluxes in split form
//! `F(u, v) = F1(u) + F2(v)` with `F1' >= 0 >= F2'` and `F1' + F2' = f'`.
//!
//! Engquist–Osher splits have kinks in `F1'` and `F2'` wherever `f'` changes
//! sign, so they are only piecewise C1. They are accepted as admissible; the
//! kink locations are recorded so quadratures can split there.

use std::fmt;

use crate::error::{Error, Result};
use crate::functions::{sign_changes, ScalarFn};
use crate::model::{Interval, ProblemModel};
use crate::quadrature::adaptive_simpson_with_breaks;

/// Samples used for consistency and monotonicity checks at construction.
pub const FLUX_CHECK_SAMPLES: usize = 256;
/// Absolute tolerance of every flux-related quadrature.
pub const FLUX_QUAD_TOL: f64 = 1e-12;

#[derive(Clone)]
enum SplitKind {
    /// Engquist–Osher for `f(w) = slope * w`.
    EoLinear { slope: f64 },
    /// Engquist–Osher for `f(w) = w^2 / 2`.
    EoBurgers,
    /// Engquist–Osher by quadrature of `max(f', 0)` and `min(f', 0)` from 0.
    EoQuadrature { flux: ScalarFn, f_at_zero: f64 },
    /// `F1 = a f + b id`, `F2 = (1 - a) f - b id`.
    Affine { a: f64, b: f64, flux: ScalarFn },
}

/// A split numerical flux.
#[derive(Clone)]
pub struct SplitFlux {
    kind: SplitKind,
    kinks: Vec<f64>,
}

impl fmt::Debug for SplitFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SplitFlux({})", self.label())
    }
}

impl SplitFlux {
    pub fn label(&self) -> String {
        match &self.kind {
            SplitKind::EoLinear { slope } => format!("engquist-osher (linear, slope {slope})"),
            SplitKind::EoBurgers => "engquist-osher (burgers)".into(),
            SplitKind::EoQuadrature { .. } => "engquist-osher (quadrature)".into(),
            SplitKind::Affine { a, b, .. } => format!("affine a={a} b={b}"),
        }
    }

    /// Points where `F1'` or `F2'` may fail to be differentiable.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    #[inline]
    pub fn f1(&self, u: f64) -> f64 {
        match &self.kind {
            SplitKind::EoLinear { slope } => slope.max(0.0) * u,
            SplitKind::EoBurgers => {
                let p = u.max(0.0);
                0.5 * p * p
            }
            SplitKind::EoQuadrature { flux, f_at_zero } => {
                f_at_zero
                    + adaptive_simpson_with_breaks(|s| flux.derivative(s).max(0.0), 0.0, u, &self.kinks, FLUX_QUAD_TOL)
                        .unwrap_or(f64::NAN)
            }
            SplitKind::Affine { a, b, flux } => a * flux.value(u) + b * u,
        }
    }

    #[inline]
    pub fn f2(&self, v: f64) -> f64 {
        match &self.kind {
            SplitKind::EoLinear { slope } => slope.min(0.0) * v,
            SplitKind::EoBurgers => {
                let m = v.min(0.0);
                0.5 * m * m
            }
            SplitKind::EoQuadrature { flux, .. } => {
                adaptive_simpson_with_breaks(|s| flux.derivative(s).min(0.0), 0.0, v, &self.kinks, FLUX_QUAD_TOL)
                    .unwrap_or(f64::NAN)
            }
            SplitKind::Affine { a, b, flux } => (1.0 - a) * flux.value(v) - b * v,
        }
    }

    #[inline]
    pub fn f1_prime(&self, u: f64) -> f64 {
        match &self.kind {
            SplitKind::EoLinear { slope } => slope.max(0.0),
            SplitKind::EoBurgers => u.max(0.0),
            SplitKind::EoQuadrature { flux, .. } => flux.derivative(u).max(0.0),
            SplitKind::Affine { a, b, flux } => a * flux.derivative(u) + b,
        }
    }

    #[inline]
    pub fn f2_prime(&self, v: f64) -> f64 {
        match &self.kind {
            SplitKind::EoLinear { slope } => slope.min(0.0),
            SplitKind::EoBurgers => v.min(0.0),
            SplitKind::EoQuadrature { flux, .. } => flux.derivative(v).min(0.0),
            SplitKind::Affine { a, b, flux } => (1.0 - a) * flux.derivative(v) - b,
        }
    }

    /// Evaluates `F1` and `F2` over a slice, dispatching once.
    pub fn fill_parts(&self, u: &[f64], f1: &mut [f64], f2: &mut [f64]) {
        match &self.kind {
            SplitKind::EoLinear { slope } => {
                let (p, m) = (slope.max(0.0), slope.min(0.0));
                for ((a, b), &w) in f1.iter_mut().zip(f2.iter_mut()).zip(u) {
                    *a = p * w;
                    *b = m * w;
                }
            }
            SplitKind::EoBurgers => {
                for ((a, b), &w) in f1.iter_mut().zip(f2.iter_mut()).zip(u) {
                    let (p, m) = (w.max(0.0), w.min(0.0));
                    *a = 0.5 * p * p;
                    *b = 0.5 * m * m;
                }
            }
            SplitKind::Affine { a, b, flux } => {
                flux.fill_values(u, f1);
                for ((x, y), &w) in f1.iter_mut().zip(f2.iter_mut()).zip(u) {
                    let fw = *x;
                    *x = a * fw + b * w;
                    *y = (1.0 - a) * fw - b * w;
                }
            }
            SplitKind::EoQuadrature { .. } => {
                for ((a, b), &w) in f1.iter_mut().zip(f2.iter_mut()).zip(u) {
                    *a = self.f1(w);
                    *b = self.f2(w);
                }
            }
        }
    }

    /// `F(u, v) = F1(u) + F2(v)`.
    #[inline]
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.f1(u) + self.f2(v)
    }

    /// Affine split without the monotonicity precondition; for probing with
    /// [`check_monotone`].
    pub fn affine_unchecked(a: f64, b: f64, model: &ProblemModel) -> Self {
        SplitFlux { kind: SplitKind::Affine { a, b, flux: model.flux.clone() }, kinks: Vec::new() }
    }

    /// Checks consistency and derivative splitting against `model.f` on
    /// [`FLUX_CHECK_SAMPLES`] points of the value range.
    fn validate(self, model: &ProblemModel) -> Result<Self> {
        for u in model.value_range.samples(FLUX_CHECK_SAMPLES) {
            let f = model.f(u);
            let sum = self.eval(u, u);
            if !sum.is_finite() {
                return Err(Error::Flux(format!("F({u}, {u}) is not finite (quadrature failure?)")));
            }
            if (sum - f).abs() > 1e-10 * (1.0 + f.abs()) {
                return Err(Error::Flux(format!("inconsistent: F({u}, {u}) = {sum} but f = {f}")));
            }
            let fp = model.f_prime(u);
            let dsum = self.f1_prime(u) + self.f2_prime(u);
            if (dsum - fp).abs() > 1e-10 * (1.0 + fp.abs()) {
                return Err(Error::Flux(format!("derivative splitting fails at {u}: F1' + F2' = {dsum}, f' = {fp}")));
            }
        }
        let report = check_monotone(&self, &model.value_range, FLUX_CHECK_SAMPLES);
        if !report.pass {
            return Err(Error::Flux(format!("not monotone: {report}")));
        }
        Ok(self)
    }
}

fn quadrature_kinks(flux: &ScalarFn, range: &Interval) -> Vec<f64> {
    let lo = range.lo.min(0.0);
    let hi = range.hi.max(0.0);
    sign_changes(|s| flux.derivative(s), lo, hi, 2 * FLUX_CHECK_SAMPLES)
}

/// Engquist–Osher split `F1(u) = f(0) + int_0^u max(f', 0)`,
/// `F2(v) = int_0^v min(f', 0)`, with closed forms for linear and Burgers
/// fluxes.
pub fn engquist_osher(model: &ProblemModel) -> Result<SplitFlux> {
    let kind = match &model.flux {
        ScalarFn::Zero => SplitKind::EoLinear { slope: 0.0 },
        ScalarFn::Linear { slope } => SplitKind::EoLinear { slope: *slope },
        ScalarFn::HalfSquare => SplitKind::EoBurgers,
        _ => return engquist_osher_quadrature(model),
    };
    let kinks = match kind {
        SplitKind::EoBurgers => vec![0.0],
        _ => Vec::new(),
    };
    SplitFlux { kind, kinks }.validate(model)
}

/// Engquist–Osher split evaluated by adaptive quadrature even when a closed
/// form exists.
pub fn engquist_osher_quadrature(model: &ProblemModel) -> Result<SplitFlux> {
    let kinks = quadrature_kinks(&model.flux, &model.value_range);
    let kind = SplitKind::EoQuadrature { flux: model.flux.clone(), f_at_zero: model.f(0.0) };
    SplitFlux { kind, kinks }.validate(model)
}

/// `F1(u) = a f(u) + b u`, `F2(v) = (1 - a) f(v) - b v`. Fails unless
/// `F1' >= 0` and `F2' <= 0` at every sampled point of the value range.
pub fn affine_split_flux(a: f64, b: f64, model: &ProblemModel) -> Result<SplitFlux> {
    SplitFlux::affine_unchecked(a, b, model).validate(model)
}

/// `Q(u, v) = int_c^u psi'(z) F1'(z) dz + int_c^v psi'(z) F2'(z) dz`.
pub fn numerical_entropy_flux<P: Fn(f64) -> f64>(
    split: &SplitFlux,
    psi_prime: P,
    c: f64,
    u: f64,
    v: f64,
) -> Result<f64> {
    let mut breaks = split.kinks.clone();
    breaks.push(c);
    let q1 = adaptive_simpson_with_breaks(|z| psi_prime(z) * split.f1_prime(z), c, u, &breaks, FLUX_QUAD_TOL)?;
    let q2 = adaptive_simpson_with_breaks(|z| psi_prime(z) * split.f2_prime(z), c, v, &breaks, FLUX_QUAD_TOL)?;
    Ok(q1 + q2)
}

/// Which half of the split violated monotonicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxSide {
    /// `F1' < 0`
    Left,
    /// `F2' > 0`
    Right,
}

/// Outcome of [`check_monotone`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneReport {
    pub pass: bool,
    /// Sample with the largest violation, if any.
    pub worst_point: Option<f64>,
    pub worst_side: Option<FluxSide>,
    /// Size of the largest violation (0 when passing).
    pub worst_violation: f64,
}

impl fmt::Display for MonotoneReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.worst_point, self.worst_side) {
            (Some(p), Some(side)) => {
                let what = match side {
                    FluxSide::Left => "F1' < 0",
                    FluxSide::Right => "F2' > 0",
                };
                write!(f, "{what} at u = {p} (violation {:e})", self.worst_violation)
            }
            _ => f.write_str("monotone"),
        }
    }
}

/// Samples `F1'` and `F2'` at `n_samples` points of `range`.
pub fn check_monotone(split: &SplitFlux, range: &Interval, n_samples: usize) -> MonotoneReport {
    let mut report = MonotoneReport { pass: true, worst_point: None, worst_side: None, worst_violation: 0.0 };
    for u in range.samples(n_samples.max(2)) {
        let left = -split.f1_prime(u);
        let right = split.f2_prime(u);
        for (violation, side) in [(left, FluxSide::Left), (right, FluxSide::Right)] {
            if violation > report.worst_violation || violation.is_nan() {
                report.pass = false;
                report.worst_point = Some(u);
                report.worst_side = Some(side);
                report.worst_violation = if violation.is_nan() { f64::INFINITY } else { violation };
            }
        }
    }
    report
}
