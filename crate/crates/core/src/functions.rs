//! Scalar nonlinearities used for the convective flux `f` and the diffusion
//! function `A`, each paired with its derivative.

use std::fmt;
use std::sync::Arc;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function of one variable together with its derivative.
///
/// The closed-form variants let the hot loops avoid dynamic dispatch and let
/// the flux constructors recognize cases with closed-form splittings.
#[derive(Clone)]
pub enum ScalarFn {
    Zero,
    /// `slope * w`
    Linear {
        slope: f64,
    },
    /// `w^2 / 2`
    HalfSquare,
    /// `w |w|^m / (m + 1)`, derivative `|w|^m`.
    Power {
        m: u32,
    },
    /// `sign(w) * max(|w| - threshold, 0)^2`, derivative `2 max(|w| - threshold, 0)`.
    DeadZone {
        threshold: f64,
    },
    /// `base(w) + slope * w`
    Shifted {
        base: Box<ScalarFn>,
        slope: f64,
    },
    Custom {
        value: RealFn,
        derivative: RealFn,
    },
}

impl ScalarFn {
    pub fn custom<V, D>(value: V, derivative: D) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ScalarFn::Custom { value: Arc::new(value), derivative: Arc::new(derivative) }
    }

    #[inline]
    pub fn value(&self, w: f64) -> f64 {
        match self {
            ScalarFn::Zero => 0.0,
            ScalarFn::Linear { slope } => slope * w,
            ScalarFn::HalfSquare => 0.5 * w * w,
            ScalarFn::Power { m } => w * w.abs().powi(*m as i32) / (*m as f64 + 1.0),
            ScalarFn::DeadZone { threshold } => {
                let e = (w.abs() - threshold).max(0.0);
                w.signum() * e * e
            }
            ScalarFn::Shifted { base, slope } => base.value(w) + slope * w,
            ScalarFn::Custom { value, .. } => value(w),
        }
    }

    #[inline]
    pub fn derivative(&self, w: f64) -> f64 {
        match self {
            ScalarFn::Zero => 0.0,
            ScalarFn::Linear { slope } => *slope,
            ScalarFn::HalfSquare => w,
            ScalarFn::Power { m } => w.abs().powi(*m as i32),
            ScalarFn::DeadZone { threshold } => 2.0 * (w.abs() - threshold).max(0.0),
            ScalarFn::Shifted { base, slope } => base.derivative(w) + slope,
            ScalarFn::Custom { derivative, .. } => derivative(w),
        }
    }

    /// `out[i] = self.value(w[i])`, dispatching once for the whole slice.
    pub fn fill_values(&self, w: &[f64], out: &mut [f64]) {
        match self {
            ScalarFn::Zero => out.fill(0.0),
            ScalarFn::Linear { slope } => out.iter_mut().zip(w).for_each(|(o, &x)| *o = slope * x),
            ScalarFn::HalfSquare => out.iter_mut().zip(w).for_each(|(o, &x)| *o = 0.5 * x * x),
            ScalarFn::DeadZone { threshold } => out.iter_mut().zip(w).for_each(|(o, &x)| {
                let e = (x.abs() - threshold).max(0.0);
                *o = x.signum() * e * e
            }),
            ScalarFn::Shifted { base, slope } => {
                base.fill_values(w, out);
                out.iter_mut().zip(w).for_each(|(o, &x)| *o += slope * x);
            }
            other => out.iter_mut().zip(w).for_each(|(o, &x)| *o = other.value(x)),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ScalarFn::Zero => true,
            ScalarFn::Linear { slope } => *slope == 0.0,
            _ => false,
        }
    }

    /// `self + slope * id`, folding into closed forms where possible.
    pub fn shifted(&self, slope: f64) -> ScalarFn {
        match self {
            ScalarFn::Zero => ScalarFn::Linear { slope },
            ScalarFn::Linear { slope: s } => ScalarFn::Linear { slope: s + slope },
            ScalarFn::Shifted { base, slope: s } => ScalarFn::Shifted { base: base.clone(), slope: s + slope },
            other => ScalarFn::Shifted { base: Box::new(other.clone()), slope },
        }
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Zero => f.write_str("Zero"),
            ScalarFn::Linear { slope } => write!(f, "Linear({slope})"),
            ScalarFn::HalfSquare => f.write_str("HalfSquare"),
            ScalarFn::Power { m } => write!(f, "Power({m})"),
            ScalarFn::DeadZone { threshold } => write!(f, "DeadZone({threshold})"),
            ScalarFn::Shifted { base, slope } => write!(f, "Shifted({base:?}, {slope})"),
            ScalarFn::Custom { .. } => f.write_str("Custom"),
        }
    }
}

/// Points in `[lo, hi]` where `g` changes sign, located by sampling at
/// `samples + 1` points and refining each bracket by bisection.
pub fn sign_changes<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let mut out = Vec::new();
    if !(hi > lo) {
        return out;
    }
    let h = (hi - lo) / samples as f64;
    let mut x_prev = lo;
    let mut g_prev = g(lo);
    for k in 1..=samples {
        let x = if k == samples { hi } else { lo + k as f64 * h };
        let gx = g(x);
        if g_prev == 0.0 {
            out.push(x_prev);
        } else if g_prev * gx < 0.0 {
            let (mut a, mut b) = (x_prev, x);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if g(m) * g_prev > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        x_prev = x;
        g_prev = gx;
    }
    out
}
