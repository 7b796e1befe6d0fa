//! Catalog of test problems with exact entropy solutions or fine-grid
//! references, and the viscous regularization `A -> A + eta * id`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functions::ScalarFn;
use crate::grid::Boundary;
use crate::model::{Domain, Interval, ProblemModel};

/// Keys accepted by [`by_key`].
pub const MODEL_KEYS: [&str; 8] =
    ["burgers_shock", "burgers_rarefaction", "heat", "pme2", "pme3", "pme4", "sd_bench", "advection"];

/// Looks up a catalog model by its string key.
pub fn by_key(key: &str) -> Result<ProblemModel> {
    match key {
        "burgers_shock" => burgers_riemann(1.0, 0.0),
        "burgers_rarefaction" => burgers_riemann(0.0, 1.0),
        "heat" => Ok(heat_smooth()),
        "pme2" => porous_medium_barenblatt(2),
        "pme3" => porous_medium_barenblatt(3),
        "pme4" => porous_medium_barenblatt(4),
        "sd_bench" => Ok(strongly_degenerate_benchmark()),
        "advection" => Ok(linear_advection()),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Burgers' equation `u_t + (u^2/2)_x = 0` with Riemann data on `[-2, 2]`.
///
/// The exact solution is a shock moving at `(u_left + u_right) / 2` when
/// `u_left > u_right` and a centered rarefaction `u = x / t` otherwise.
pub fn burgers_riemann(u_left: f64, u_right: f64) -> Result<ProblemModel> {
    if u_left == u_right || !u_left.is_finite() || !u_right.is_finite() {
        return Err(Error::InvalidModel {
            key: "burgers_riemann".into(),
            reason: format!("need distinct finite states, got {u_left} and {u_right}"),
        });
    }
    let key = if u_left > u_right { "burgers_shock" } else { "burgers_rarefaction" };
    let exact: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> = if u_left > u_right {
        let speed = 0.5 * (u_left + u_right);
        Arc::new(move |x: f64, t: f64| if x < speed * t { u_left } else { u_right })
    } else {
        Arc::new(move |x: f64, t: f64| {
            if x < u_left * t {
                u_left
            } else if x >= u_right * t {
                u_right
            } else {
                x / t
            }
        })
    };
    Ok(ProblemModel {
        key: key.into(),
        flux: ScalarFn::HalfSquare,
        diffusion: ScalarFn::Zero,
        initial: Arc::new(move |x: f64| if x < 0.0 { u_left } else { u_right }),
        value_range: Interval::new(u_left.min(u_right), u_left.max(u_right))?,
        exact: Some(exact),
        final_time: 0.5,
        domain: Domain { x_left: -2.0, x_right: 2.0, boundary: Boundary::Extrapolate },
        regularity: "u0 is a step: bounded, BV, L1 after subtracting the far-field state; \
                     A = 0 so A(u0)_x = 0 is trivially BV"
            .into(),
    })
}

/// The heat equation on the periodic unit interval with `u0 = sin(2 pi x)`.
pub fn heat_smooth() -> ProblemModel {
    let k = 2.0 * PI;
    ProblemModel {
        key: "heat".into(),
        flux: ScalarFn::Zero,
        diffusion: ScalarFn::Linear { slope: 1.0 },
        initial: Arc::new(move |x: f64| (k * x).sin()),
        value_range: Interval { lo: -1.0, hi: 1.0 },
        exact: Some(Arc::new(move |x: f64, t: f64| (-k * k * t).exp() * (k * x).sin())),
        final_time: 0.05,
        domain: Domain { x_left: 0.0, x_right: 1.0, boundary: Boundary::Periodic },
        regularity: "smooth periodic data: both conditions hold classically".into(),
    }
}

/// Parameters of the Barenblatt solution of `u_t = (u^m u_x)_x`.
///
/// Writing `M = m + 1`, the equation is `u_t = (u^M)_xx / M`, so
/// `u(x, t) = V(x, (t + t0) / M)` where
/// `V(x, s) = s^-a (C - k x^2 s^-2a)_+^(1/(M-1))`, `a = 1/(M+1)`,
/// `k = a (M-1) / (2M)` solves `V_s = (V^M)_xx`. `C` is chosen so the
/// profile peaks at 1 at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barenblatt {
    pub m: u32,
    pub t0: f64,
    alpha: f64,
    k: f64,
    c: f64,
}

impl Barenblatt {
    pub fn new(m: u32, t0: f64) -> Self {
        let big_m = m as f64 + 1.0;
        let alpha = 1.0 / (big_m + 1.0);
        let k = alpha * (big_m - 1.0) / (2.0 * big_m);
        let s0 = t0 / big_m;
        let c = s0.powf(alpha * (big_m - 1.0));
        Self { m, t0, alpha, k, c }
    }

    fn self_similar_time(&self, t: f64) -> f64 {
        (t + self.t0) / (self.m as f64 + 1.0)
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        let s = self.self_similar_time(t);
        let inner = self.c - self.k * x * x * s.powf(-2.0 * self.alpha);
        if inner <= 0.0 {
            0.0
        } else {
            s.powf(-self.alpha) * inner.powf(1.0 / self.m as f64)
        }
    }

    /// Half-width of the support at time `t`.
    pub fn front(&self, t: f64) -> f64 {
        (self.c / self.k).sqrt() * self.self_similar_time(t).powf(self.alpha)
    }

    /// Total mass, constant in time.
    pub fn mass(&self) -> f64 {
        // integral of (C - k x^2)^p over the support, p = 1/m, via the Beta function
        // identity int_{-1}^{1} (1 - y^2)^p dy = sqrt(pi) Gamma(p+1) / Gamma(p+3/2)
        let p = 1.0 / self.m as f64;
        let r = (self.c / self.k).sqrt();
        self.c.powf(p) * r * beta_half_integral(p)
    }
}

// int_{-1}^{1} (1 - y^2)^p dy by Gauss–Legendre on the substitution y = sin(theta)
fn beta_half_integral(p: f64) -> f64 {
    crate::quadrature::composite_gauss_legendre5(|th: f64| th.cos().powf(2.0 * p + 1.0), -PI / 2.0, PI / 2.0, 256)
}

/// Porous medium equation `u_t = (u^m u_x)_x` (so `A(w) = w|w|^m / (m+1)`)
/// with the Barenblatt solution started at `t0 = 0.1`.
pub fn porous_medium_barenblatt(m: u32) -> Result<ProblemModel> {
    if !(2..=4).contains(&m) {
        return Err(Error::InvalidModel {
            key: format!("pme{m}"),
            reason: "supported exponents are 2, 3 and 4".into(),
        });
    }
    let profile = Barenblatt::new(m, 0.1);
    let final_time = 0.5;
    debug_assert!(profile.front(final_time) < 1.25);
    Ok(ProblemModel {
        key: format!("pme{m}"),
        flux: ScalarFn::Zero,
        diffusion: ScalarFn::Power { m },
        initial: Arc::new(move |x: f64| profile.value(x, 0.0)),
        value_range: Interval { lo: 0.0, hi: 1.0 },
        exact: Some(Arc::new(move |x: f64, t: f64| profile.value(x, t))),
        final_time,
        domain: Domain { x_left: -1.5, x_right: 1.5, boundary: Boundary::Extrapolate },
        regularity: "Barenblatt profile: u0 Hoelder at the front, in L1 ∩ L∞ ∩ BV; \
                     A(u0)_x is continuous and BV"
            .into(),
    })
}

/// Burgers flux with `A' = 0` on `[-0.5, 0.5]` and `A' = 2(|w| - 0.5)` outside.
pub fn strongly_degenerate_benchmark() -> ProblemModel {
    ProblemModel {
        key: "sd_bench".into(),
        flux: ScalarFn::HalfSquare,
        diffusion: ScalarFn::DeadZone { threshold: 0.5 },
        initial: Arc::new(|x: f64| {
            if (-0.5..=0.0).contains(&x) {
                1.0
            } else if x > 0.0 && x <= 0.5 {
                -1.0
            } else {
                0.0
            }
        }),
        value_range: Interval { lo: -1.0, hi: 1.0 },
        exact: None,
        final_time: 0.25,
        domain: Domain { x_left: -2.0, x_right: 2.0, boundary: Boundary::Extrapolate },
        regularity: "u0 piecewise constant: L1 ∩ L∞ ∩ BV; A(u0) jumps, so A(u0)_x \
                     is a measure and condition (ii) holds only distributionally"
            .into(),
    }
}

/// `u_t + u_x = 0` on the periodic unit interval with `u0 = sin(2 pi x)`.
pub fn linear_advection() -> ProblemModel {
    let k = 2.0 * PI;
    ProblemModel {
        key: "advection".into(),
        flux: ScalarFn::Linear { slope: 1.0 },
        diffusion: ScalarFn::Zero,
        initial: Arc::new(move |x: f64| (k * x).sin()),
        value_range: Interval { lo: -1.0, hi: 1.0 },
        exact: Some(Arc::new(move |x: f64, t: f64| (k * (x - t)).sin())),
        final_time: 0.5,
        domain: Domain { x_left: 0.0, x_right: 1.0, boundary: Boundary::Periodic },
        regularity: "smooth periodic data: both conditions hold classically".into(),
    }
}

/// Replaces `A` by `A + eta * id`. The exact solution is dropped.
pub fn regularize(model: &ProblemModel, eta: f64) -> Result<ProblemModel> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Precondition(format!("regularization needs eta > 0, got {eta}")));
    }
    let mut out = model.clone();
    out.key = format!("{}+eta={eta}", model.key);
    out.diffusion = model.diffusion.shifted(eta);
    out.exact = None;
    Ok(out)
}
