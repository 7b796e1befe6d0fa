//! Numerical audits of the discrete entropy and stability structure.
//!
//! The entropy audits evaluate, for each Kruzkov constant `c` and cell `j`,
//!
//! ```text
//! T_j + D-Q^c(u_j, u_{j+1}) - D-D+ |A(u_j) - A(c)|_eps - RHS_j
//! ```
//!
//! where `T_j` is the time term of the scheme and `RHS_j` collects the
//! `psi''` integrals of the cell entropy inequality. A scheme passes when this
//! is nonpositive up to the stated tolerance.
//!
//! The `psi''` moments are evaluated in closed form. With `G(z) =
//! sign_eps(A(z) - A(c))`, integration by parts gives
//!
//! ```text
//! int_b^a psi''(z) (A(z) - A(b)) dz = G(a)(A(a) - A(b)) - |A(a) - A(c)|_eps + |A(b) - A(c)|_eps.
//! ```

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};
use std::io::Write;

use crate::error::{Error, Result};
use crate::flux::SplitFlux;
use crate::grid::{bv_of, left_neighbor, right_neighbor, GridFunction};
use crate::model::{Interval, ProblemModel};
use crate::quadrature::adaptive_simpson_with_breaks;
use crate::schemes::{spatial_rhs, SolveTrace, CFL_SAMPLES};

/// Absolute tolerance of the entropy quadratures.
pub const AUDIT_QUAD_TOL: f64 = 1e-12;
/// Tolerance of the semi-discrete and explicit entropy audits.
pub const ENTROPY_TOL: f64 = 1e-8;
/// Slack for the flux-difference monotonicity checks.
pub const FLUX_DIFF_SLACK: f64 = 1e-8;
/// Default number of Kruzkov constants.
pub const DEFAULT_CONSTANTS: usize = 9;

/// Smoothed sign `sin(pi s / 2 eps)` inside the band `|s| < eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedSign {
    eps: f64,
}

impl SmoothedSign {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn sign(&self, sigma: f64) -> f64 {
        sign_eps(sigma, self.eps)
    }

    pub fn abs(&self, sigma: f64) -> f64 {
        abs_eps(sigma, self.eps)
    }

    pub fn sign_prime(&self, sigma: f64) -> f64 {
        sign_eps_prime(sigma, self.eps)
    }
}

pub fn sign_eps(sigma: f64, eps: f64) -> f64 {
    if sigma >= eps {
        1.0
    } else if sigma <= -eps {
        -1.0
    } else {
        (FRAC_PI_2 * sigma / eps).sin()
    }
}

/// `int_0^sigma sign_eps(z) dz`.
pub fn abs_eps(sigma: f64, eps: f64) -> f64 {
    let s = sigma.abs();
    if s >= eps {
        s - eps + FRAC_2_PI * eps
    } else {
        FRAC_2_PI * eps * (1.0 - (FRAC_PI_2 * s / eps).cos())
    }
}

pub fn sign_eps_prime(sigma: f64, eps: f64) -> f64 {
    if sigma.abs() >= eps {
        0.0
    } else {
        FRAC_PI_2 / eps * (FRAC_PI_2 * sigma / eps).cos()
    }
}

/// `1e-4` times the width of `A` over the value range, or `1e-4` if `A` is
/// constant there.
pub fn default_eps(model: &ProblemModel) -> f64 {
    let r = model.value_range;
    let width = model.a(r.hi) - model.a(r.lo);
    if width > 0.0 {
        1e-4 * width
    } else {
        1e-4
    }
}

/// `k` uniformly spaced constants over the value range.
pub fn default_constants(model: &ProblemModel, k: usize) -> Vec<f64> {
    model.value_range.samples(k).collect()
}

/// Points where `z -> sign_eps(A(z) - A(c))` may bend: `c` and the preimages
/// of `A(c) - eps` and `A(c) + eps` inside `[lo, hi]`.
fn band_breaks(model: &ProblemModel, c: f64, eps: f64, lo: f64, hi: f64) -> Vec<f64> {
    let ac = model.a(c);
    let mut out = vec![c];
    for level in [ac - eps, ac + eps] {
        if let Some(z) = preimage(|z| model.a(z), level, lo.min(c), hi.max(c)) {
            out.push(z);
        }
    }
    out
}

// smallest bracketed z with g(z) = level for nondecreasing g
fn preimage<G: Fn(f64) -> f64>(g: G, level: f64, lo: f64, hi: f64) -> Option<f64> {
    let (mut a, mut b) = (lo, hi);
    if !(g(a) < level && g(b) > level) {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) < level {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Entropy quadrature data for one constant.
struct EntropyKernel<'a> {
    model: &'a ProblemModel,
    ac: f64,
    eps: f64,
    breaks: Vec<f64>,
}

impl<'a> EntropyKernel<'a> {
    fn new(model: &'a ProblemModel, split: Option<&SplitFlux>, c: f64, eps: f64, hull: Interval) -> Self {
        let mut breaks = band_breaks(model, c, eps, hull.lo, hull.hi);
        if let Some(s) = split {
            breaks.extend_from_slice(s.kinks());
        }
        Self { model, ac: model.a(c), eps, breaks }
    }

    fn g(&self, z: f64) -> f64 {
        sign_eps(self.model.a(z) - self.ac, self.eps)
    }

    fn integrate<H: Fn(f64) -> f64>(&self, h: H, from: f64, to: f64) -> Result<f64> {
        adaptive_simpson_with_breaks(|z| self.g(z) * h(z), from, to, &self.breaks, AUDIT_QUAD_TOL)
    }

    /// `psi_eps(to) - psi_eps(from)`.
    fn psi_diff(&self, from: f64, to: f64) -> Result<f64> {
        self.integrate(|_| 1.0, from, to)
    }

    fn abs_a(&self, w: f64) -> f64 {
        abs_eps(self.model.a(w) - self.ac, self.eps)
    }

    /// `int_b^a psi''(z) (A(z) - A(b)) dz`, closed form.
    fn moment(&self, a: f64, b: f64) -> f64 {
        let (aa, ab) = (self.model.a(a), self.model.a(b));
        self.g(a) * (aa - ab) - self.abs_a(a) + self.abs_a(b)
    }
}

/// `psi_eps(u, c) = int_c^u sign_eps(A(z) - A(c)) dz`.
pub fn psi_eps(u: f64, c: f64, model: &ProblemModel, eps: f64) -> Result<f64> {
    SmoothedSign::new(eps)?;
    let k = EntropyKernel::new(model, None, c, eps, hull_of(&[u, c]));
    k.psi_diff(c, u)
}

/// `q_eps(u, c) = int_c^u sign_eps(A(z) - A(c)) f'(z) dz`.
pub fn q_eps(u: f64, c: f64, model: &ProblemModel, eps: f64) -> Result<f64> {
    SmoothedSign::new(eps)?;
    let k = EntropyKernel::new(model, None, c, eps, hull_of(&[u, c]));
    k.integrate(|z| model.f_prime(z), c, u)
}

/// `Q^c(u, v) = int_c^u psi' F1' dz + int_c^v psi' F2' dz`.
pub fn q_split(u: f64, v: f64, c: f64, split: &SplitFlux, model: &ProblemModel, eps: f64) -> Result<f64> {
    SmoothedSign::new(eps)?;
    let k = EntropyKernel::new(model, Some(split), c, eps, hull_of(&[u, v, c]));
    Ok(k.integrate(|z| split.f1_prime(z), c, u)? + k.integrate(|z| split.f2_prime(z), c, v)?)
}

/// `int_b^a psi_eps''(z, c) (A(z) - A(b)) dz` in closed form.
pub fn psi_second_moment(a: f64, b: f64, c: f64, model: &ProblemModel, eps: f64) -> Result<f64> {
    SmoothedSign::new(eps)?;
    let k = EntropyKernel::new(model, None, c, eps, hull_of(&[a, b, c]));
    Ok(k.moment(a, b))
}

fn hull_of(values: &[f64]) -> Interval {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Interval { lo, hi }
}

fn hull_of_states(states: &[&GridFunction], constants: &[f64]) -> Interval {
    let mut h = hull_of(constants);
    for s in states {
        h.lo = h.lo.min(s.min());
        h.hi = h.hi.max(s.max());
    }
    h
}

/// Worst cell for one Kruzkov constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantResult {
    pub c: f64,
    pub worst_cell_index: usize,
    /// Largest signed residual over the cells.
    pub worst_value: f64,
    pub pass: bool,
}

/// Outcome of an entropy audit.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub constants_tested: Vec<f64>,
    /// Largest positive part of the residual; 0 when every cell satisfies the inequality exactly.
    pub worst_violation: f64,
    /// Per-cell maximum of the residual over all constants.
    pub per_cell_max: Vec<f64>,
    pub per_constant: Vec<ConstantResult>,
    pub tolerance_used: f64,
    pub eps: f64,
    pub pass: bool,
}

impl ResidualReport {
    /// Writes `c,worst_cell_index,worst_value,pass` rows and summary comments.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "c,worst_cell_index,worst_value,pass")?;
        for r in &self.per_constant {
            writeln!(out, "{:.16e},{},{:.16e},{}", r.c, r.worst_cell_index, r.worst_value, r.pass)?;
        }
        writeln!(out, "# eps={:.16e}", self.eps)?;
        writeln!(out, "# tolerance={:.16e}", self.tolerance_used)?;
        writeln!(out, "# worst_violation={:.16e}", self.worst_violation)?;
        writeln!(out, "# pass={}", self.pass)?;
        Ok(())
    }
}

/// Which time term enters the residual.
enum TimeTerm<'a> {
    /// `psi'(u_j) rhs_j`
    Chain(&'a GridFunction),
    /// `(psi(u_j) - psi(prev_j)) / dt`, spatial terms at `u`
    Backward { prev: &'a GridFunction, dt: f64 },
    /// `(psi(next_j) - psi(u_j)) / dt - (G(next_j) - G(u_j)) D-D+ A(u_j)`
    Forward { next: &'a GridFunction, dt: f64 },
}

#[allow(clippy::too_many_arguments)]
fn entropy_residual(
    u: &GridFunction,
    time: TimeTerm<'_>,
    split: &SplitFlux,
    model: &ProblemModel,
    eps: f64,
    constants: &[f64],
    tolerance: f64,
) -> Result<ResidualReport> {
    SmoothedSign::new(eps)?;
    if constants.is_empty() {
        return Err(Error::Precondition("at least one Kruzkov constant is required".into()));
    }
    let other = match &time {
        TimeTerm::Chain(rhs) => *rhs,
        TimeTerm::Backward { prev, .. } => *prev,
        TimeTerm::Forward { next, .. } => *next,
    };
    if other.grid() != u.grid() {
        return Err(Error::Precondition("audited states live on different grids".into()));
    }
    let hull = hull_of_states(&[u, other], constants);
    let n = u.len();
    let dx = u.dx();
    let inv_dx2 = 1.0 / (dx * dx);
    let vals = u.values();
    let boundary = u.grid().boundary();
    let dd_a = u.map(|w| model.a(w))?.d_minus_d_plus();

    let mut per_cell_max = vec![f64::NEG_INFINITY; n];
    let mut per_constant = Vec::with_capacity(constants.len());
    for &c in constants {
        let k = EntropyKernel::new(model, Some(split), c, eps, hull);
        let mut worst = (0, f64::NEG_INFINITY);
        for j in 0..n {
            let (ul, uj, ur) = (left_neighbor(vals, j, boundary), vals[j], right_neighbor(vals, j, boundary));
            let t_term = match &time {
                TimeTerm::Chain(rhs) => k.g(uj) * rhs.values()[j],
                TimeTerm::Backward { prev, dt } => k.psi_diff(prev.values()[j], uj)? / dt,
                TimeTerm::Forward { next, dt } => {
                    let un = next.values()[j];
                    k.psi_diff(uj, un)? / dt - (k.g(un) - k.g(uj)) * dd_a.values()[j]
                }
            };
            let d_q = (k.integrate(|z| split.f1_prime(z), ul, uj)? + k.integrate(|z| split.f2_prime(z), uj, ur)?) / dx;
            let dd_abs = (k.abs_a(ur) - 2.0 * k.abs_a(uj) + k.abs_a(ul)) * inv_dx2;
            let rhs = -(k.moment(uj, ur) + k.moment(uj, ul)) * inv_dx2;
            let r = t_term + d_q - dd_abs - rhs;
            if !r.is_finite() {
                return Err(Error::NonFinite { index: j, value: r });
            }
            per_cell_max[j] = per_cell_max[j].max(r);
            if r > worst.1 {
                worst = (j, r);
            }
        }
        per_constant.push(ConstantResult {
            c,
            worst_cell_index: worst.0,
            worst_value: worst.1,
            pass: worst.1 <= tolerance,
        });
    }
    let worst_violation = per_cell_max.iter().fold(0.0f64, |m, &r| m.max(r));
    Ok(ResidualReport {
        constants_tested: constants.to_vec(),
        worst_violation,
        per_cell_max,
        per_constant,
        tolerance_used: tolerance,
        eps,
        pass: worst_violation <= tolerance,
    })
}

/// Cell entropy inequality of the semi-discrete scheme at the state `u`,
/// with `d/dt psi_eps(u_j, c) = psi_eps'(u_j, c) rhs_j`.
pub fn semidiscrete_entropy_residual(
    u: &GridFunction,
    split: &SplitFlux,
    model: &ProblemModel,
    eps: f64,
    constants: &[f64],
) -> Result<ResidualReport> {
    let rhs = spatial_rhs(u, split, model);
    entropy_residual(u, TimeTerm::Chain(&rhs), split, model, eps, constants, ENTROPY_TOL)
}

/// Tolerance of [`implicit_entropy_residual`]: the Newton residual of the step
/// enters the time difference pointwise, scaled by `1 / (dx dt)`.
pub fn implicit_tolerance(u_prev: &GridFunction, dt: f64, newton_tol: f64) -> f64 {
    ENTROPY_TOL + newton_tol * (1.0 + u_prev.norm_l1()) / (u_prev.dx() * dt)
}

/// Cell entropy inequality of one implicit Euler step from `u_prev` to `u_next`.
#[allow(clippy::too_many_arguments)]
pub fn implicit_entropy_residual(
    u_prev: &GridFunction,
    u_next: &GridFunction,
    dt: f64,
    split: &SplitFlux,
    model: &ProblemModel,
    eps: f64,
    constants: &[f64],
    newton_tol: f64,
) -> Result<ResidualReport> {
    if !(dt > 0.0) {
        return Err(Error::Precondition(format!("dt must be positive, got {dt}")));
    }
    let tol = implicit_tolerance(u_prev, dt, newton_tol);
    entropy_residual(u_next, TimeTerm::Backward { prev: u_prev, dt }, split, model, eps, constants, tol)
}

/// Checks `1 - dt/dx (F1'(z) - F2'(z)) >= 0` on [`CFL_SAMPLES`] points of `range`.
pub fn convective_cfl_holds(range: &Interval, split: &SplitFlux, dt: f64, dx: f64) -> Option<f64> {
    range.samples(CFL_SAMPLES).find(|&z| !(1.0 - dt / dx * (split.f1_prime(z) - split.f2_prime(z)) >= 0.0))
}

/// Cell entropy inequality of one explicit Euler step, including the extra
/// `(int_{u^n}^{u^{n+1}} psi'') D-D+ A(u^n)` term.
///
/// Refuses with [`Error::Precondition`] when the convective CFL condition
/// fails on the range of the two states.
pub fn explicit_entropy_residual(
    u_n: &GridFunction,
    u_np1: &GridFunction,
    dt: f64,
    split: &SplitFlux,
    model: &ProblemModel,
    eps: f64,
    constants: &[f64],
) -> Result<ResidualReport> {
    if !(dt > 0.0) {
        return Err(Error::Precondition(format!("dt must be positive, got {dt}")));
    }
    let range = hull_of_states(&[u_n, u_np1], &[]);
    if let Some(z) = convective_cfl_holds(&range, split, dt, u_n.dx()) {
        return Err(Error::Precondition(format!(
            "convective CFL condition fails at z = {z} for dt = {dt}, dx = {}",
            u_n.dx()
        )));
    }
    entropy_residual(u_n, TimeTerm::Forward { next: u_np1, dt }, split, model, eps, constants, ENTROPY_TOL)
}

/// Reports of one audit at `eps`, `eps/2`, `eps/4`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsStability {
    pub eps: Vec<f64>,
    pub worst: Vec<f64>,
    /// No worst violation exceeds twice its predecessor plus the tolerance.
    pub stable: bool,
    pub all_pass: bool,
}

/// Runs `audit` at `eps`, `eps/2` and `eps/4` and compares the worst violations.
pub fn eps_halving_stability<F>(eps: f64, mut audit: F) -> Result<EpsStability>
where
    F: FnMut(f64) -> Result<ResidualReport>,
{
    let mut out = EpsStability { eps: Vec::new(), worst: Vec::new(), stable: true, all_pass: true };
    let mut e = eps;
    for _ in 0..3 {
        let r = audit(e)?;
        if let Some(&prev) = out.worst.last() {
            if r.worst_violation > 2.0 * prev + r.tolerance_used {
                out.stable = false;
            }
        }
        out.all_pass &= r.pass;
        out.eps.push(e);
        out.worst.push(r.worst_violation);
        e *= 0.5;
    }
    Ok(out)
}

/// Outcome of [`flux_diff_audit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FluxDiffReport {
    pub times: Vec<f64>,
    /// `sup_j |F(u_j, u_{j+1}) - D+A(u_j)|` per saved state.
    pub sup_norms: Vec<f64>,
    /// BV seminorm of the same sequence per saved state.
    pub bv_seminorms: Vec<f64>,
    pub slack: f64,
    pub pass: bool,
}

/// `v_j = F(u_j, u_{j+1}) - D+A(u_j)`.
pub fn flux_difference(u: &GridFunction, split: &SplitFlux, model: &ProblemModel) -> Vec<f64> {
    let vals = u.values();
    let b = u.grid().boundary();
    let inv_dx = 1.0 / u.dx();
    (0..vals.len())
        .map(|j| {
            let ur = right_neighbor(vals, j, b);
            split.eval(vals[j], ur) - (model.a(ur) - model.a(vals[j])) * inv_dx
        })
        .collect()
}

/// Checks that the sup norm and BV seminorm of the flux difference never
/// exceed their initial values by more than [`FLUX_DIFF_SLACK`].
pub fn flux_diff_audit(trace: &SolveTrace, split: &SplitFlux, model: &ProblemModel) -> FluxDiffReport {
    let mut report = FluxDiffReport {
        times: trace.times.clone(),
        sup_norms: Vec::with_capacity(trace.states.len()),
        bv_seminorms: Vec::with_capacity(trace.states.len()),
        slack: FLUX_DIFF_SLACK,
        pass: true,
    };
    for state in &trace.states {
        let v = flux_difference(state, split, model);
        report.sup_norms.push(v.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        report.bv_seminorms.push(bv_of(&v, state.grid().boundary()));
    }
    if let (Some(&s0), Some(&b0)) = (report.sup_norms.first(), report.bv_seminorms.first()) {
        report.pass = report.sup_norms.iter().all(|&s| s <= s0 + FLUX_DIFF_SLACK)
            && report.bv_seminorms.iter().all(|&b| b <= b0 + FLUX_DIFF_SLACK);
    }
    report
}

/// Outcome of [`time_holder_audit`].
#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    /// Smallest `L` with `H(m, n) <= L sqrt(t_m - t_n)` over all saved pairs.
    pub l: f64,
    pub pairs: usize,
    /// Pair attaining `l`, as indices into the trace.
    pub worst_pair: Option<(usize, usize)>,
}

/// Fits the time Hölder constant of `D+A(u)` in `l1` over every saved pair.
pub fn time_holder_audit(trace: &SolveTrace, model: &ProblemModel) -> HolderReport {
    let mut report = HolderReport { l: 0.0, pairs: 0, worst_pair: None };
    if model.diffusion.is_zero() {
        report.pairs = trace.states.len() * trace.states.len().saturating_sub(1) / 2;
        return report;
    }
    let grads: Vec<Vec<f64>> = trace
        .states
        .iter()
        .map(|s| {
            let vals = s.values();
            let b = s.grid().boundary();
            let inv_dx = 1.0 / s.dx();
            (0..vals.len()).map(|j| (model.a(right_neighbor(vals, j, b)) - model.a(vals[j])) * inv_dx).collect()
        })
        .collect();
    for m in 1..grads.len() {
        let dx = trace.states[m].dx();
        for n in 0..m {
            let gap = trace.times[m] - trace.times[n];
            if !(gap > 0.0) {
                continue;
            }
            let h: f64 = dx * grads[m].iter().zip(&grads[n]).map(|(a, b)| (a - b).abs()).sum::<f64>();
            report.pairs += 1;
            let l = h / gap.sqrt();
            if l > report.l {
                report.l = l;
                report.worst_pair = Some((m, n));
            }
        }
    }
    report
}

/// Largest admissible growth of the fitted Hölder constant under a 2x refinement.
pub const HOLDER_RATIO_LIMIT: f64 = 1.5;

/// `L_fine / L_coarse`, or 1 when both vanish.
pub fn holder_refinement_ratio(coarse: &HolderReport, fine: &HolderReport) -> f64 {
    if coarse.l == 0.0 && fine.l == 0.0 {
        1.0
    } else {
        fine.l / coarse.l
    }
}
