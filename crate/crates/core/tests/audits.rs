mod common;

use common::*;
use dcd_core::audit::*;
use dcd_core::problems::{self, burgers_riemann, heat_smooth, regularize};
use dcd_core::schemes::{run_from, run_to_time};
use dcd_core::*;

fn every_step(model: &ProblemModel, kind: SchemeKind, cells: usize, t: f64) -> (SplitFlux, SolveTrace, SchemeConfig) {
    let split = engquist_osher(model).unwrap();
    let grid = model.grid(cells).unwrap();
    let config = SchemeConfig::new(kind).with_save(SaveSchedule::Every(1));
    let trace = run_to_time(&model.clone().with_final_time(t), &split, &grid, &config).unwrap();
    (split, trace, config)
}

fn audit_steps(model: &ProblemModel, kind: SchemeKind, cells: usize, t: f64) {
    let (split, trace, config) = every_step(model, kind, cells, t);
    let eps = default_eps(model);
    let constants = default_constants(model, DEFAULT_CONSTANTS);
    assert_eq!(constants.len(), DEFAULT_CONSTANTS);
    for (k, w) in trace.states.windows(2).enumerate() {
        let dt = trace.times[k + 1] - trace.times[k];
        let report = match kind {
            SchemeKind::Implicit => {
                implicit_entropy_residual(&w[0], &w[1], dt, &split, model, eps, &constants, config.newton_tol)
            }
            SchemeKind::Explicit => explicit_entropy_residual(&w[0], &w[1], dt, &split, model, eps, &constants),
            SchemeKind::SemiDiscrete => semidiscrete_entropy_residual(&w[1], &split, model, eps, &constants),
        }
        .unwrap();
        assert!(report.pass, "{} {kind} step {k}: worst {}", model.key, report.worst_violation);
        assert_eq!(report.per_constant.len(), DEFAULT_CONSTANTS);
    }
}

#[test]
fn burgers_shock_semidiscrete_snapshot() {
    let model = burgers_riemann(1.0, 0.0).unwrap();
    let split = engquist_osher(&model).unwrap();
    let grid = model.grid(256).unwrap();
    let trace =
        run_to_time(&model.clone().with_final_time(0.25), &split, &grid, &SchemeConfig::new(SchemeKind::SemiDiscrete))
            .unwrap();
    let constants = default_constants(&model, DEFAULT_CONSTANTS);
    let report = semidiscrete_entropy_residual(trace.last(), &split, &model, default_eps(&model), &constants).unwrap();
    assert!(report.pass, "worst {}", report.worst_violation);

    // with A = eta u the diffusion part of the inequality is exercised too
    let reg = regularize(&model, 0.05).unwrap();
    let reg_split = engquist_osher(&reg).unwrap();
    let trace = run_to_time(
        &reg.clone().with_final_time(0.25),
        &reg_split,
        &grid,
        &SchemeConfig::new(SchemeKind::SemiDiscrete),
    )
    .unwrap();
    let eps = default_eps(&reg);
    let stab =
        eps_halving_stability(eps, |e| semidiscrete_entropy_residual(trace.last(), &reg_split, &reg, e, &constants))
            .unwrap();
    assert!(stab.all_pass && stab.stable, "{stab:?}");
}

#[test]
fn heat_steps_satisfy_entropy_inequality() {
    audit_steps(&heat_smooth(), SchemeKind::Implicit, 64, 0.01);
    audit_steps(&heat_smooth(), SchemeKind::Explicit, 64, 0.002);
}

#[test]
fn strongly_degenerate_steps_satisfy_entropy_inequality() {
    audit_steps(&problems::strongly_degenerate_benchmark(), SchemeKind::Implicit, 128, 0.05);
    audit_steps(&problems::strongly_degenerate_benchmark(), SchemeKind::Explicit, 128, 0.02);
    audit_steps(&problems::strongly_degenerate_benchmark(), SchemeKind::SemiDiscrete, 128, 0.01);
}

#[test]
fn random_periodic_data_pass() {
    let mut rng = rng(23);
    let model = problems::strongly_degenerate_benchmark();
    let split = engquist_osher(&model).unwrap();
    let constants = default_constants(&model, DEFAULT_CONSTANTS);
    for _ in 0..5 {
        let u = random_bv(&mut rng, unit_periodic(64), -1.0, 1.0);
        let report = semidiscrete_entropy_residual(&u, &split, &model, default_eps(&model), &constants).unwrap();
        assert!(report.pass, "worst {}", report.worst_violation);
    }
}

#[test]
fn advection_explicit_at_half_cfl_and_refusal() {
    let model = problems::linear_advection();
    let split = engquist_osher(&model).unwrap();
    let grid = model.grid(64).unwrap();
    let u0 = cell_average_project(|x| model.u0(x), &grid).unwrap();
    let dt = 0.5 * grid.dx();
    let config = SchemeConfig::new(SchemeKind::Explicit).with_fixed_dt(dt);
    let trace = run_from(u0.clone(), &model, &split, &config, dt).unwrap();
    let constants = default_constants(&model, DEFAULT_CONSTANTS);
    let report =
        explicit_entropy_residual(&u0, trace.last(), dt, &split, &model, default_eps(&model), &constants).unwrap();
    assert!(report.pass);

    let err = explicit_entropy_residual(&u0, trace.last(), 2.0 * grid.dx(), &split, &model, 1e-4, &constants);
    assert!(matches!(err, Err(Error::Precondition(_))));
}

#[test]
fn flux_difference_stays_bounded() {
    let heat = heat_smooth();
    let (split, trace, _) = every_step(&heat, SchemeKind::Explicit, 64, 0.01);
    let report = flux_diff_audit(&trace, &split, &heat);
    assert!(report.pass, "{report:?}");
    assert_eq!(report.sup_norms.len(), trace.states.len());

    let burgers = burgers_riemann(1.0, 0.0).unwrap();
    let (split, trace, _) = every_step(&burgers, SchemeKind::SemiDiscrete, 128, 0.1);
    let report = flux_diff_audit(&trace, &split, &burgers);
    assert!(report.pass);
    assert!(report.sup_norms.windows(2).all(|w| w[1] <= w[0] + report.slack));
}

#[test]
fn holder_trivial_cases() {
    let burgers = burgers_riemann(1.0, 0.0).unwrap();
    let (_, trace, _) = every_step(&burgers, SchemeKind::Explicit, 32, 0.05);
    let report = time_holder_audit(&trace, &burgers);
    assert_eq!(report.l, 0.0);
    assert!(report.pairs > 0);

    let heat = heat_smooth();
    let split = engquist_osher(&heat).unwrap();
    let flat = GridFunction::constant(heat.grid(16).unwrap(), 0.4).unwrap();
    let config = SchemeConfig::new(SchemeKind::Explicit).with_save(SaveSchedule::Every(1));
    let trace = run_from(flat, &heat, &split, &config, 0.01).unwrap();
    let report = time_holder_audit(&trace, &heat);
    assert_eq!(report.l, 0.0);
    assert_eq!(holder_refinement_ratio(&report, &report), 1.0);

    let (_, trace, _) = every_step(&heat, SchemeKind::Explicit, 32, 0.01);
    assert!(time_holder_audit(&trace, &heat).l > 0.0);
}

#[test]
fn report_csv_round_trips_counts() {
    let model = problems::strongly_degenerate_benchmark();
    let split = engquist_osher(&model).unwrap();
    let u = GridFunction::from_centers(model.grid(64).unwrap(), |x| model.u0(x)).unwrap();
    let report = semidiscrete_entropy_residual(&u, &split, &model, 1e-3, &[0.0, 0.5, 0.75]).unwrap();
    let mut out = Vec::new();
    report.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}
