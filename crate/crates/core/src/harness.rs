//! L1 errors, grid-refinement studies and empirical convergence rates.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::flux::{engquist_osher, SplitFlux};
use crate::grid::{cell_average_project, GridFunction};
use crate::model::ProblemModel;
use crate::problems::{by_key, regularize};
use crate::schemes::{run_to_time, SchemeConfig, SchemeKind};

/// Refinement factor of the fine-grid reference over the finest ladder level.
pub const REFERENCE_FACTOR: usize = 4;

/// `dx * sum_j |u_j - avg_{I_j} exact(., t)|`.
pub fn l1_error(numeric: &GridFunction, model: &ProblemModel, t: f64) -> Result<f64> {
    let exact = model.exact.as_ref().ok_or_else(|| Error::MissingExact(model.key.clone()))?;
    let projected = cell_average_project(|x| exact(x, t), numeric.grid())?;
    numeric.distance_l1(&projected)
}

/// Averages each block of `factor` fine cells onto the coarse grid of `coarse`.
pub fn restrict_to(fine: &GridFunction, coarse: &GridFunction) -> Result<GridFunction> {
    let (gf, gc) = (fine.grid(), coarse.grid());
    let ratio = gc.dx() / gf.dx();
    let factor = ratio.round() as usize;
    let nested = factor >= 1
        && factor.is_power_of_two()
        && (ratio - factor as f64).abs() <= 1e-9 * ratio
        && gf.n_cells() == factor * gc.n_cells()
        && (gf.x_left() - gc.x_left()).abs() <= 1e-9 * gc.dx()
        && gf.boundary() == gc.boundary();
    if !nested {
        return Err(Error::NonNested(format!(
            "reference ({} cells, dx {}) is not a 2^k refinement of ({} cells, dx {})",
            gf.n_cells(),
            gf.dx(),
            gc.n_cells(),
            gc.dx()
        )));
    }
    let values = fine.values().chunks(factor).map(|c| c.iter().sum::<f64>() / factor as f64).collect();
    GridFunction::new(*gc, values)
}

/// L1 distance from `numeric` to the cell-averaged restriction of `reference`.
pub fn reference_error(numeric: &GridFunction, reference: &GridFunction) -> Result<f64> {
    numeric.distance_l1(&restrict_to(reference, numeric)?)
}

/// Least-squares slope of `log e` against `log h`.
pub fn estimate_rate(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::Precondition(format!("need at least 2 (h, e) pairs, got {}", pairs.len())));
    }
    if let Some(&(h, e)) = pairs.iter().find(|(h, e)| !(*h > 0.0 && *e > 0.0)) {
        return Err(Error::Precondition(format!("rate fit needs positive entries, got ({h}, {e})")));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("rate fit needs distinct h values".into()));
    }
    Ok(sxy / sxx)
}

/// How each ladder level picks its time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtRule {
    /// The scheme's default: CFL bound (explicit), a fraction of it
    /// (semi-discrete) or `dx` (implicit).
    CflBound,
    DtEqDx,
    /// `dt = dx^p`.
    DtEqDxHalfPow(f64),
    Fixed(f64),
}

impl DtRule {
    /// Step size imposed at spacing `dx`, or `None` for the scheme default.
    pub fn fixed_dt(&self, dx: f64) -> Option<f64> {
        match *self {
            DtRule::CflBound => None,
            DtRule::DtEqDx => Some(dx),
            DtRule::DtEqDxHalfPow(p) => Some(dx.powf(p)),
            DtRule::Fixed(v) => Some(v),
        }
    }
}

impl fmt::Display for DtRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DtRule::CflBound => f.write_str("cfl"),
            DtRule::DtEqDx => f.write_str("dx"),
            DtRule::DtEqDxHalfPow(p) => write!(f, "dx^{p}"),
            DtRule::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

impl FromStr for DtRule {
    type Err = Error;

    /// `cfl`, `dx`, `dx23` (for `dx^(2/3)`), `dx^<p>` or `fixed:<v>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad =
            || Error::Precondition(format!("unknown dt rule `{s}` (expected cfl, dx, dx23, dx^<p> or fixed:<v>)"));
        match s {
            "cfl" => Ok(DtRule::CflBound),
            "dx" => Ok(DtRule::DtEqDx),
            "dx23" => Ok(DtRule::DtEqDxHalfPow(2.0 / 3.0)),
            _ => {
                if let Some(p) = s.strip_prefix("dx^") {
                    p.parse().map(DtRule::DtEqDxHalfPow).map_err(|_| bad())
                } else if let Some(v) = s.strip_prefix("fixed:") {
                    v.parse().map(DtRule::Fixed).map_err(|_| bad())
                } else {
                    Err(bad())
                }
            }
        }
    }
}

/// One rung of a refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyLevel {
    pub dx: f64,
    pub dt: f64,
    pub n_cells: usize,
    pub l1_error: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub model_key: String,
    pub scheme: SchemeConfig,
    /// Sorted by decreasing `dx`.
    pub ladder: Vec<StudyLevel>,
    pub fitted_rate: f64,
    /// `log2(e_k / e_{k+1})`.
    pub pairwise_rates: Vec<f64>,
    /// The finest level does not have the smallest error.
    pub preasymptotic: bool,
    /// Cells of the fine-grid reference, if one was used.
    pub reference_cells: Option<usize>,
}

impl ConvergenceStudy {
    /// Assembles a study from measured levels, fitting the rates.
    pub fn from_levels(model_key: &str, scheme: SchemeConfig, ladder: Vec<StudyLevel>) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = ladder.iter().map(|l| (l.dx, l.l1_error)).collect();
        let fitted_rate = estimate_rate(&pairs)?;
        let pairwise_rates = ladder.windows(2).map(|w| (w[0].l1_error / w[1].l1_error).log2()).collect();
        let finest = ladder.last().map_or(0.0, |l| l.l1_error);
        let preasymptotic = ladder.iter().any(|l| l.l1_error < finest);
        Ok(Self {
            model_key: model_key.to_string(),
            scheme,
            ladder,
            fitted_rate,
            pairwise_rates,
            preasymptotic,
            reference_cells: None,
        })
    }

    pub fn min_pairwise_rate(&self) -> f64 {
        self.pairwise_rates.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Writes `dx,dt,n_cells,l1_error,pairwise_rate` rows and the fitted rate.
    /// The first row has an empty pairwise rate.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "dx,dt,n_cells,l1_error,pairwise_rate")?;
        for (k, l) in self.ladder.iter().enumerate() {
            let rate = if k == 0 { String::new() } else { format!("{:.16e}", self.pairwise_rates[k - 1]) };
            writeln!(out, "{:.16e},{:.16e},{},{:.16e},{}", l.dx, l.dt, l.n_cells, l.l1_error, rate)?;
        }
        writeln!(out, "# fitted_rate={:.16e}", self.fitted_rate)?;
        Ok(())
    }
}

type ReferenceKey = (String, String, u64, u64);
type ReferenceSlot = Arc<Mutex<Option<Arc<GridFunction>>>>;

fn reference_cache() -> &'static Mutex<HashMap<ReferenceKey, ReferenceSlot>> {
    static CACHE: OnceLock<Mutex<HashMap<ReferenceKey, ReferenceSlot>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Explicit solution at `model.final_time` with spacing `dx`, computed once
/// per process for each (model, flux, dx, final time). Concurrent callers
/// asking for the same reference wait for the first one.
pub fn fine_reference(model: &ProblemModel, split: &SplitFlux, dx: f64) -> Result<Arc<GridFunction>> {
    let key = (model.key.clone(), split.label(), dx.to_bits(), model.final_time.to_bits());
    let slot = {
        let mut map = reference_cache().lock().unwrap_or_else(|e| e.into_inner());
        Arc::clone(map.entry(key).or_default())
    };
    let mut guard = slot.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(r) = guard.as_ref() {
        return Ok(Arc::clone(r));
    }
    let grid = model.domain.grid_with_dx(dx)?;
    let trace = run_to_time(model, split, &grid, &SchemeConfig::new(SchemeKind::Explicit))?;
    let reference = Arc::new(trace.last().clone());
    *guard = Some(Arc::clone(&reference));
    Ok(reference)
}

fn check_ladder(ladder: &[f64], what: &str) -> Result<()> {
    if ladder.len() < 3 {
        return Err(Error::Precondition(format!("{what} ladder needs at least 3 levels, got {}", ladder.len())));
    }
    for w in ladder.windows(2) {
        if !(w[0] > 0.0) || ((w[1] / w[0]) - 0.5).abs() > 1e-12 {
            return Err(Error::Precondition(format!("{what} ladder must halve at each level: {} -> {}", w[0], w[1])));
        }
    }
    Ok(())
}

/// `dx_coarsest * 2^-k` for `k = 0..levels`.
pub fn halving_ladder(coarsest: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| coarsest / (1u64 << k) as f64).collect()
}

/// [`run_study_with`] on a catalog model with its Engquist–Osher flux.
pub fn run_study(
    model_key: &str,
    scheme: &SchemeConfig,
    dx_ladder: &[f64],
    dt_rule: DtRule,
) -> Result<ConvergenceStudy> {
    let model = by_key(model_key)?;
    let split = engquist_osher(&model)?;
    run_study_with(&model, &split, scheme, dx_ladder, dt_rule)
}

/// Solves at each level and measures the L1 error at the final time against
/// the exact solution, or against an explicit run on the finest grid refined
/// [`REFERENCE_FACTOR`] times when the model has none.
pub fn run_study_with(
    model: &ProblemModel,
    split: &SplitFlux,
    scheme: &SchemeConfig,
    dx_ladder: &[f64],
    dt_rule: DtRule,
) -> Result<ConvergenceStudy> {
    check_ladder(dx_ladder, "dx")?;
    let reference = match model.exact {
        Some(_) => None,
        None => {
            let finest = dx_ladder[dx_ladder.len() - 1];
            Some(fine_reference(model, split, finest / REFERENCE_FACTOR as f64)?)
        }
    };
    let mut levels = Vec::with_capacity(dx_ladder.len());
    for (k, &dx) in dx_ladder.iter().enumerate() {
        let wrap = |e: Error| Error::StudyLevel { level: k, dx, source: Box::new(e) };
        let grid = model.domain.grid_with_dx(dx).map_err(wrap)?;
        let config = SchemeConfig { fixed_dt: dt_rule.fixed_dt(dx), ..scheme.clone() };
        let trace = run_to_time(model, split, &grid, &config).map_err(wrap)?;
        let numeric = trace.last();
        let error = match &reference {
            Some(r) => reference_error(numeric, r),
            None => l1_error(numeric, model, trace.final_time()),
        }
        .map_err(wrap)?;
        levels.push(StudyLevel {
            dx,
            dt: trace.dt.min(model.final_time),
            n_cells: grid.n_cells(),
            l1_error: error,
            steps: trace.step_count,
        });
    }
    let mut study = ConvergenceStudy::from_levels(&model.key, scheme.clone(), levels)?;
    study.reference_cells = reference.map(|r| r.len());
    Ok(study)
}

/// Distances between regularized and unregularized solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscosityStudy {
    pub model_key: String,
    pub n_cells: usize,
    pub etas: Vec<f64>,
    pub distances: Vec<f64>,
    /// Least-squares slope of `log distance` against `log eta`.
    pub fitted_rate: f64,
    pub pairwise_rates: Vec<f64>,
    /// Distances grow with `eta` along the whole ladder.
    pub monotone: bool,
}

impl ViscosityStudy {
    /// Writes `eta,n_cells,l1_distance,pairwise_rate` rows and the fitted rate.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "eta,n_cells,l1_distance,pairwise_rate")?;
        for (k, (eta, d)) in self.etas.iter().zip(&self.distances).enumerate() {
            let rate = if k == 0 { String::new() } else { format!("{:.16e}", self.pairwise_rates[k - 1]) };
            writeln!(out, "{eta:.16e},{},{d:.16e},{rate}", self.n_cells)?;
        }
        writeln!(out, "# fitted_rate={:.16e}", self.fitted_rate)?;
        writeln!(out, "# monotone={}", self.monotone)?;
        Ok(())
    }
}

/// Solves `model` and `regularize(model, eta)` on the same grid for each
/// `eta` and fits the rate of the L1 distance in `eta`.
pub fn viscosity_rate_study(
    model_key: &str,
    eta_ladder: &[f64],
    grid: &crate::grid::Grid1D,
    scheme: &SchemeConfig,
) -> Result<ViscosityStudy> {
    check_ladder(eta_ladder, "eta")?;
    let smallest = eta_ladder[eta_ladder.len() - 1];
    if grid.dx() > 0.25 * smallest * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "grid too coarse for the eta ladder: dx = {} > min(eta)/4 = {}",
            grid.dx(),
            0.25 * smallest
        )));
    }
    let model = by_key(model_key)?;
    let split = engquist_osher(&model)?;
    let base = run_to_time(&model, &split, grid, scheme)?;
    let mut distances = Vec::with_capacity(eta_ladder.len());
    for (k, &eta) in eta_ladder.iter().enumerate() {
        let wrap = |e: Error| Error::StudyLevel { level: k, dx: grid.dx(), source: Box::new(e) };
        let reg = regularize(&model, eta).map_err(wrap)?;
        let reg_split = engquist_osher(&reg).map_err(wrap)?;
        let trace = run_to_time(&reg, &reg_split, grid, scheme).map_err(wrap)?;
        distances.push(trace.last().distance_l1(base.last()).map_err(wrap)?);
    }
    let pairs: Vec<(f64, f64)> = eta_ladder.iter().copied().zip(distances.iter().copied()).collect();
    Ok(ViscosityStudy {
        model_key: model_key.to_string(),
        n_cells: grid.n_cells(),
        etas: eta_ladder.to_vec(),
        fitted_rate: estimate_rate(&pairs)?,
        pairwise_rates: distances.windows(2).map(|w| (w[0] / w[1]).log2()).collect(),
        monotone: distances.windows(2).all(|w| w[0] >= w[1]),
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, Grid1D};

    fn gf(x_left: f64, dx: f64, values: Vec<f64>) -> GridFunction {
        let grid = Grid1D::new(x_left, dx, values.len(), Boundary::Periodic).unwrap();
        GridFunction::new(grid, values).unwrap()
    }

    #[test]
    fn rate_examples() {
        assert!((estimate_rate(&[(0.1, 0.02), (0.05, 0.01)]).unwrap() - 1.0).abs() < 1e-12);
        assert!(estimate_rate(&[(1.0, 1.0), (0.5, 1.0)]).unwrap().abs() < 1e-15);
        let third = estimate_rate(&[(1.0, 1.0), (0.5, 2f64.powf(-1.0 / 3.0))]).unwrap();
        assert!((third - 1.0 / 3.0).abs() < 1e-12);
        assert!(estimate_rate(&[(1.0, 0.0), (0.5, 1.0)]).is_err());
        assert!(estimate_rate(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn rate_is_scale_invariant() {
        let base = [(0.1, 0.3), (0.05, 0.17), (0.025, 0.11)];
        let scaled: Vec<_> = base.iter().map(|&(h, e)| (h, 7.5 * e)).collect();
        let a = estimate_rate(&base).unwrap();
        let b = estimate_rate(&scaled).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn reference_error_examples() {
        // 3 coarse cells of width 1, refined twice
        let coarse = gf(0.0, 1.0, vec![1.0, 0.0, 5.0]);
        let fine = gf(0.0, 0.5, vec![0.0, 2.0, 1.0, 3.0, 5.0, 5.0]);
        let restricted = restrict_to(&fine, &coarse).unwrap();
        assert_eq!(restricted.values(), &[1.0, 2.0, 5.0]);
        assert_eq!(reference_error(&coarse, &fine).unwrap(), 2.0);
        let copy = gf(0.0, 0.25, coarse.values().iter().flat_map(|&v| [v; 4]).collect());
        assert_eq!(reference_error(&coarse, &copy).unwrap(), 0.0);
        let odd = gf(0.0, 1.0 / 3.0, vec![0.0; 9]);
        assert!(matches!(reference_error(&coarse, &odd), Err(Error::NonNested(_))));
    }

    #[test]
    fn synthetic_study() {
        let levels = [(0.1, 0.1), (0.05, 0.05), (0.025, 0.025)]
            .iter()
            .map(|&(dx, e)| StudyLevel { dx, dt: dx, n_cells: (1.0 / dx) as usize, l1_error: e, steps: 1 })
            .collect();
        let s = ConvergenceStudy::from_levels("synthetic", SchemeConfig::default(), levels).unwrap();
        assert_eq!(s.fitted_rate, 1.0);
        assert!(s.pairwise_rates.iter().all(|r| (r - 1.0).abs() < 1e-12));
        assert!(!s.preasymptotic);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "dx,dt,n_cells,l1_error,pairwise_rate");
        assert!(lines[1].ends_with(','));
        assert_eq!(lines[4], "# fitted_rate=1.0000000000000000e0");
    }

    #[test]
    fn dt_rules_parse() {
        assert_eq!("cfl".parse::<DtRule>().unwrap(), DtRule::CflBound);
        assert_eq!("dx".parse::<DtRule>().unwrap(), DtRule::DtEqDx);
        assert_eq!("dx23".parse::<DtRule>().unwrap(), DtRule::DtEqDxHalfPow(2.0 / 3.0));
        assert_eq!("fixed:0.01".parse::<DtRule>().unwrap(), DtRule::Fixed(0.01));
        assert!("sometimes".parse::<DtRule>().is_err());
    }

    #[test]
    fn ladders_must_halve() {
        assert!(check_ladder(&[0.1, 0.05, 0.025], "dx").is_ok());
        assert!(check_ladder(&[0.1, 0.05], "dx").is_err());
        assert!(check_ladder(&[0.1, 0.04, 0.02], "dx").is_err());
        assert_eq!(halving_ladder(0.5, 3), vec![0.5, 0.25, 0.125]);
    }
}
