use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dcd_core::audit::{
    convective_cfl_holds, default_constants, default_eps, eps_halving_stability, explicit_entropy_residual,
    flux_diff_audit, implicit_entropy_residual, semidiscrete_entropy_residual, time_holder_audit, ResidualReport,
    DEFAULT_CONSTANTS,
};
use dcd_core::harness::{self, ConvergenceStudy, DtRule, StudyLevel};
use dcd_core::problems::by_key;
use dcd_core::schemes::run_to_time;
use dcd_core::trace_io::write_trace;
use dcd_core::{
    affine_split_flux, engquist_osher, Error, ProblemModel, SaveSchedule, SchemeConfig, SchemeKind, SplitFlux,
};

/// Pairwise rates below this fail `converge`.
const RATE_FLOOR: f64 = 1.0 / 3.0 - 0.03;
/// Smallest fitted rate in eta accepted by `viscosity`.
const VISCOSITY_FLOOR: f64 = 0.4;

const EXIT_SOLVER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RATE: u8 = 3;
const EXIT_AUDIT: u8 = 4;
const EXIT_VISCOSITY: u8 = 5;

#[derive(Parser)]
#[command(name = "dcd", version, about = "Monotone schemes for degenerate convection-diffusion equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one model and write the saved states.
    Solve(SolveArgs),
    /// Run a refinement study and write its CSV.
    Converge(ConvergeArgs),
    /// Entropy, flux-difference and Hoelder audits on one solve.
    Audit(AuditArgs),
    /// Distance to viscous regularizations as eta shrinks.
    Viscosity(ViscosityArgs),
}

#[derive(Args)]
struct SchemeArgs {
    /// Catalog key, e.g. heat, burgers_shock, pme2, sd_bench.
    #[arg(long)]
    model: String,
    /// semi, implicit or explicit.
    #[arg(long, default_value = "explicit")]
    scheme: String,
    /// Cap explicit steps at dx^(8/3).
    #[arg(long)]
    strengthened_cfl: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, default_value_t = 128)]
    cells: usize,
    /// Fixed time step.
    #[arg(long, conflicts_with = "dt_rule")]
    dt: Option<f64>,
    /// cfl, dx, dx23, dx^<p> or fixed:<v>.
    #[arg(long, default_value = "cfl")]
    dt_rule: String,
    /// eo, or ab:<a>,<b> for the affine splitting.
    #[arg(long, default_value = "eo")]
    flux: String,
    /// Directory for the manifest and state files.
    #[arg(long, default_value = "dcd-out")]
    out: PathBuf,
    /// Save every k-th step (default: initial and final state only).
    #[arg(long)]
    save_every: Option<usize>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long, default_value_t = 64)]
    coarsest_cells: usize,
    #[arg(long, default_value = "cfl")]
    dt_rule: String,
    /// Study CSV path.
    #[arg(long, default_value = "convergence.csv")]
    out: PathBuf,
    /// Test hook: use these errors instead of solving.
    #[arg(long, hide = true, value_delimiter = ',')]
    synthetic_errors: Option<Vec<f64>>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long, default_value_t = 128)]
    cells: usize,
    /// Smoothing width of sign_eps (default: 1e-4 times the range of A).
    #[arg(long)]
    eps: Option<f64>,
    /// Number of Kruzkov constants.
    #[arg(long, default_value_t = DEFAULT_CONSTANTS)]
    constants: usize,
    /// Fixed time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Number of audited steps, spread over the run.
    #[arg(long, default_value_t = 8)]
    snapshots: usize,
    /// Per-constant CSV of the worst audited step.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ViscosityArgs {
    #[arg(long)]
    model: String,
    /// Comma list (`1/16,1/32`) or halving range (`1/16..1/128`).
    #[arg(long, default_value = "1/16..1/128")]
    etas: String,
    #[arg(long, default_value_t = 2048)]
    cells: usize,
    #[arg(long, default_value = "explicit")]
    scheme: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: error_code(&e), message: e.to_string() }
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::StudyLevel { source, .. } => error_code(source),
        Error::Step { .. }
        | Error::NewtonDivergence { .. }
        | Error::DegenerateTimeStep { .. }
        | Error::NonFinite { .. }
        | Error::Quadrature { .. }
        | Error::Cfl(_)
        | Error::Io(_) => EXIT_SOLVER,
        _ => EXIT_USAGE,
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

type Outcome = Result<(), Failure>;

fn scheme_config(args: &SchemeArgs) -> Result<SchemeConfig, Failure> {
    let kind: SchemeKind = args.scheme.parse()?;
    Ok(SchemeConfig { strengthened_cfl: args.strengthened_cfl, ..SchemeConfig::new(kind) })
}

fn parse_flux(spec: &str, model: &ProblemModel) -> Result<SplitFlux, Failure> {
    if spec == "eo" {
        return Ok(engquist_osher(model)?);
    }
    let bad = || usage(format!("unknown flux `{spec}` (expected eo or ab:<a>,<b>)"));
    let params = spec.strip_prefix("ab:").ok_or_else(bad)?;
    let (a, b) = params.split_once(',').ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    Ok(affine_split_flux(a, b, model)?)
}

fn parse_number(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((n, d)) => Some(n.trim().parse::<f64>().ok()? / d.trim().parse::<f64>().ok()?),
        None => s.trim().parse().ok(),
    }
}

fn parse_etas(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || usage(format!("cannot parse eta ladder `{s}`"));
    if let Some((hi, lo)) = s.split_once("..") {
        let (hi, lo) = (parse_number(hi).ok_or_else(bad)?, parse_number(lo).ok_or_else(bad)?);
        if !(hi > 0.0 && lo > 0.0 && lo <= hi) {
            return Err(bad());
        }
        let levels = (hi / lo).log2().round() as usize + 1;
        return Ok(harness::halving_ladder(hi, levels));
    }
    s.split(',').map(|p| parse_number(p).ok_or_else(bad)).collect()
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(Error::from)?;
    }
    Ok(BufWriter::new(File::create(path).map_err(Error::from)?))
}

fn solve(args: SolveArgs) -> Outcome {
    let model = by_key(&args.scheme.model)?;
    let split = parse_flux(&args.flux, &model)?;
    let mut config = scheme_config(&args.scheme)?;
    let grid = model.grid(args.cells)?;
    config.fixed_dt = match args.dt {
        Some(dt) => Some(dt),
        None => args.dt_rule.parse::<DtRule>()?.fixed_dt(grid.dx()),
    };
    if let Some(k) = args.save_every {
        config.save = SaveSchedule::Every(k);
    }
    let trace = run_to_time(&model, &split, &grid, &config)?;
    let manifest = write_trace(&trace, &args.out)?;
    let u = trace.last();
    let mut line = format!(
        "RESULT solve model={} scheme={} cells={} steps={} dt={:e} t={} l1={:.12e} linf={:.12e} bv={:.12e} mass={:.12e}",
        model.key,
        config.kind,
        grid.n_cells(),
        trace.step_count,
        trace.dt,
        trace.final_time(),
        u.norm_l1(),
        u.norm_linf(),
        u.bv_seminorm(),
        u.mass()
    );
    if model.exact.is_some() {
        line += &format!(" l1_error={:.12e}", harness::l1_error(u, &model, trace.final_time())?);
    }
    if config.kind == SchemeKind::Implicit {
        line +=
            &format!(" newton_iters={} halvings={}", trace.newton_iterations.values().sum::<usize>(), trace.halvings);
    }
    println!("{line}");
    println!("manifest: {}", manifest.display());
    Ok(())
}

fn converge(args: ConvergeArgs) -> Outcome {
    let model = by_key(&args.scheme.model)?;
    let config = scheme_config(&args.scheme)?;
    let rule: DtRule = args.dt_rule.parse()?;
    if args.coarsest_cells == 0 {
        return Err(usage("--coarsest-cells must be positive"));
    }
    let ladder = harness::halving_ladder(model.domain.length() / args.coarsest_cells as f64, args.levels);
    let study = match &args.synthetic_errors {
        Some(errors) => {
            if errors.len() != ladder.len() {
                return Err(usage(format!("{} synthetic errors for {} levels", errors.len(), ladder.len())));
            }
            let levels = ladder
                .iter()
                .zip(errors)
                .enumerate()
                .map(|(k, (&dx, &e))| StudyLevel {
                    dx,
                    dt: rule.fixed_dt(dx).unwrap_or(dx),
                    n_cells: args.coarsest_cells << k,
                    l1_error: e,
                    steps: 0,
                })
                .collect();
            ConvergenceStudy::from_levels(&model.key, config.clone(), levels)?
        }
        None => harness::run_study(&model.key, &config, &ladder, rule)?,
    };
    study.write_csv(create(&args.out)?)?;
    let rates: Vec<String> = study.pairwise_rates.iter().map(|r| format!("{r:.4}")).collect();
    let min = study.min_pairwise_rate();
    let pass = min >= RATE_FLOOR;
    println!(
        "RESULT converge model={} scheme={} dt_rule={rule} levels={} fitted_rate={:.6} pairwise=[{}] min_pairwise={min:.6} preasymptotic={} pass={pass}",
        model.key,
        config.kind,
        study.ladder.len(),
        study.fitted_rate,
        rates.join(","),
        study.preasymptotic
    );
    if pass {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_RATE,
            message: format!("rate below theoretical guarantee: min pairwise {min:.4} < {RATE_FLOOR:.4}"),
        })
    }
}

fn audit(args: AuditArgs) -> Outcome {
    let model = by_key(&args.scheme.model)?;
    let split = engquist_osher(&model)?;
    let mut config = scheme_config(&args.scheme)?;
    config.fixed_dt = args.dt;
    config.save = SaveSchedule::Every(1);
    let grid = model.grid(args.cells)?;
    if args.constants == 0 || args.snapshots == 0 {
        return Err(usage("--constants and --snapshots must be positive"));
    }
    if let (SchemeKind::Explicit, Some(dt)) = (config.kind, args.dt) {
        if let Some(z) = convective_cfl_holds(&model.value_range, &split, dt, grid.dx()) {
            return Err(usage(format!(
                "refusing explicit audit: convective CFL condition fails at z = {z} for dt = {dt}, dx = {}",
                grid.dx()
            )));
        }
    }
    let eps = args.eps.unwrap_or_else(|| default_eps(&model));
    let constants = default_constants(&model, args.constants);
    let trace = run_to_time(&model, &split, &grid, &config)?;

    let n = trace.states.len() - 1;
    let picks: Vec<usize> = {
        let mut p: Vec<usize> = (1..=args.snapshots).map(|k| (k * n).div_ceil(args.snapshots).max(1)).collect();
        p.dedup();
        p
    };
    let (mut all_pass, mut stable) = (true, true);
    let mut worst: Option<(usize, ResidualReport)> = None;
    for &k in &picks {
        let (prev, next) = (&trace.states[k - 1], &trace.states[k]);
        let dt = trace.times[k] - trace.times[k - 1];
        let run = |e: f64| match config.kind {
            SchemeKind::SemiDiscrete => semidiscrete_entropy_residual(next, &split, &model, e, &constants),
            SchemeKind::Implicit => {
                implicit_entropy_residual(prev, next, dt, &split, &model, e, &constants, config.newton_tol)
            }
            SchemeKind::Explicit => explicit_entropy_residual(prev, next, dt, &split, &model, e, &constants),
        };
        let s = eps_halving_stability(eps, run)?;
        all_pass &= s.all_pass;
        stable &= s.stable;
        let report = run(eps)?;
        if worst.as_ref().is_none_or(|(_, w)| report.worst_violation > w.worst_violation) {
            worst = Some((k, report));
        }
    }
    let (worst_step, worst) = worst.expect("at least one audited step");
    if let Some(path) = &args.out {
        worst.write_csv(create(path)?)?;
    }

    let flux = flux_diff_audit(&trace, &split, &model);
    let holder = time_holder_audit(&trace, &model);
    let pass = all_pass && stable && flux.pass;
    println!(
        "RESULT audit model={} scheme={} cells={} eps={eps:e} constants={} steps_audited={} worst_violation={:.6e} worst_step={worst_step} tolerance={:.3e} eps_halving_stable={stable} flux_diff_pass={} holder_l={:.6e} pass={pass}",
        model.key,
        config.kind,
        grid.n_cells(),
        constants.len(),
        picks.len(),
        worst.worst_violation,
        worst.tolerance_used,
        flux.pass,
        holder.l
    );
    if pass {
        Ok(())
    } else {
        Err(Failure { code: EXIT_AUDIT, message: "audit violation".into() })
    }
}

fn viscosity(args: ViscosityArgs) -> Outcome {
    let model = by_key(&args.model)?;
    let etas = parse_etas(&args.etas)?;
    let config = SchemeConfig::new(args.scheme.parse()?);
    let grid = model.grid(args.cells)?;
    let study = harness::viscosity_rate_study(&model.key, &etas, &grid, &config)?;
    if let Some(path) = &args.out {
        study.write_csv(create(path)?)?;
    }
    let pass = study.fitted_rate >= VISCOSITY_FLOOR;
    let d: Vec<String> = study.distances.iter().map(|d| format!("{d:.6e}")).collect();
    println!(
        "RESULT viscosity model={} cells={} etas={} distances=[{}] fitted_rate={:.6} monotone={} pass={pass}",
        model.key,
        grid.n_cells(),
        etas.len(),
        d.join(","),
        study.fitted_rate,
        study.monotone
    );
    if pass {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VISCOSITY,
            message: format!("viscosity rate {:.4} < {VISCOSITY_FLOOR}", study.fitted_rate),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Converge(a) => converge(a),
        Command::Audit(a) => audit(a),
        Command::Viscosity(a) => viscosity(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
