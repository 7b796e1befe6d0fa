mod common;

use common::*;
use dcd_core::problems::{self, burgers_riemann, heat_smooth};
use dcd_core::schemes::{explicit_step, implicit_step, run_from, run_to_time, ssp_rk3_step};
use dcd_core::*;
use proptest::prelude::*;

fn models() -> Vec<ProblemModel> {
    vec![burgers_riemann(1.0, 0.0).unwrap(), heat_smooth(), problems::strongly_degenerate_benchmark()]
}

fn run(u0: &GridFunction, model: &ProblemModel, config: &SchemeConfig, t: f64) -> SolveTrace {
    let split = engquist_osher(model).unwrap();
    run_from(u0.clone(), model, &split, config, t).unwrap()
}

#[test]
fn stable_and_conservative_on_random_data() {
    let mut rng = rng(7);
    for model in models() {
        for kind in [SchemeKind::Explicit, SchemeKind::SemiDiscrete, SchemeKind::Implicit] {
            for _ in 0..4 {
                let u0 = random_bv(&mut rng, unit_periodic(96), -1.0, 1.0);
                let config = SchemeConfig::new(kind).with_save(SaveSchedule::Every(1));
                let trace = run(&u0, &model, &config, 0.02);
                let (lo, hi) = (u0.min(), u0.max());
                let mut prev = &trace.states[0];
                for state in &trace.states[1..] {
                    assert!(state.min() >= lo - 1e-12 && state.max() <= hi + 1e-12, "{} {kind}", model.key);
                    assert!(state.bv_seminorm() <= prev.bv_seminorm() + 1e-10, "{} {kind}", model.key);
                    assert!(state.norm_l1() <= prev.norm_l1() + 1e-10, "{} {kind}", model.key);
                    let mass_tol = match kind {
                        SchemeKind::Implicit => 50.0 * config.newton_tol,
                        _ => 1e-12,
                    };
                    assert!((state.mass() - u0.mass()).abs() <= mass_tol * u0.norm_l1().max(1.0));
                    prev = state;
                }
            }
        }
    }
}

#[test]
fn l1_contraction_between_solutions() {
    let mut rng = rng(11);
    for model in models() {
        for _ in 0..4 {
            let u = random_bv(&mut rng, unit_periodic(128), -1.0, 1.0);
            let v = random_bv(&mut rng, unit_periodic(128), -1.0, 1.0);
            let split = engquist_osher(&model).unwrap();
            let range = Interval::new(-1.0, 1.0).unwrap();
            let dt = schemes::cfl_max_dt(&range, &split, &model, u.dx(), &SchemeConfig::default()).unwrap();
            let config = SchemeConfig::new(SchemeKind::Explicit).with_fixed_dt(dt);
            let (a, b) = (run(&u, &model, &config, 50.0 * dt), run(&v, &model, &config, 50.0 * dt));
            let d0 = u.distance_l1(&v).unwrap();
            assert!(a.last().distance_l1(b.last()).unwrap() <= d0 + 1e-10, "{}", model.key);
        }
    }
}

#[test]
fn time_translates_contract() {
    let mut rng = rng(3);
    for model in models() {
        let u0 = random_bv(&mut rng, unit_periodic(64), -1.0, 1.0);
        let config = SchemeConfig::new(SchemeKind::Explicit).with_save(SaveSchedule::Every(1));
        let trace = run(&u0, &model, &config, 0.01);
        let n = trace.states.len() - 1;
        let first = trace.states[1].distance_l1(&trace.states[0]).unwrap();
        // the final step may be clipped, so only full steps are compared
        for w in trace.states[..n].windows(2) {
            assert!(w[1].distance_l1(&w[0]).unwrap() <= first * (1.0 + 1e-10) + 1e-14, "{}", model.key);
        }
    }
}

#[test]
fn burgers_shock_speed() {
    let model = burgers_riemann(1.0, 0.0).unwrap();
    let split = engquist_osher(&model).unwrap();
    let grid = model.domain.grid_with_dx(1.0 / 512.0).unwrap();
    let trace = run_to_time(&model, &split, &grid, &SchemeConfig::new(SchemeKind::Explicit)).unwrap();
    let u = trace.last();
    let j = (0..u.len() - 1).find(|&j| u.values()[j] >= 0.5 && u.values()[j + 1] < 0.5).unwrap();
    let (x0, x1) = (grid.cell_center(j), grid.cell_center(j + 1));
    let (u0, u1) = (u.values()[j], u.values()[j + 1]);
    let crossing = x0 + (u0 - 0.5) / (u0 - u1) * (x1 - x0);
    assert!((crossing - 0.25).abs() <= grid.dx(), "shock at {crossing}");
}

#[test]
fn runge_kutta_time_error_is_small() {
    let model = heat_smooth();
    let split = engquist_osher(&model).unwrap();
    let grid = model.grid(64).unwrap();
    let coarse = SchemeConfig::new(SchemeKind::SemiDiscrete);
    let fine = SchemeConfig { rk_substep_factor: 0.125, ..coarse.clone() };
    let a = run_to_time(&model, &split, &grid, &coarse).unwrap();
    let b = run_to_time(&model, &split, &grid, &fine).unwrap();
    let diff = a.last().distance_l1(b.last()).unwrap();
    assert!(diff < 1e-8, "RK3 time error {diff}");
    // spatial error dominates
    let err = harness::l1_error(b.last(), &model, model.final_time).unwrap();
    assert!(diff < 1e-3 * err);
}

#[test]
fn implicit_euler_is_first_order_in_time() {
    let model = heat_smooth();
    let split = engquist_osher(&model).unwrap();
    let grid = model.grid(32).unwrap();
    let solve = |dt: f64| {
        let config = SchemeConfig::new(SchemeKind::Implicit).with_fixed_dt(dt);
        run_to_time(&model, &split, &grid, &config).unwrap().last().clone()
    };
    let dt = model.final_time / 10.0;
    let (a, b, c) = (solve(dt), solve(dt / 2.0), solve(dt / 4.0));
    let ratio = a.distance_l1(&b).unwrap() / b.distance_l1(&c).unwrap();
    assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");

    // explicit Euler on the same grid differs from implicit by O(dt)
    let explicit = run_to_time(&model, &split, &grid, &SchemeConfig::new(SchemeKind::Explicit)).unwrap();
    let dt_e = explicit.dt;
    let implicit = solve(dt_e);
    let implicit_half = solve(dt_e / 2.0);
    assert!(explicit.last().distance_l1(&implicit).unwrap() > implicit.distance_l1(&implicit_half).unwrap());
}

#[test]
fn implicit_matches_dense_linear_solve() {
    let mut rng = rng(19);
    for (c, v) in [(1.0, 0.0), (0.3, 1.0), (0.0, 2.0)] {
        let mut model = heat_smooth();
        model.diffusion = if c == 0.0 { ScalarFn::Zero } else { ScalarFn::Linear { slope: c } };
        model.flux = if v == 0.0 { ScalarFn::Zero } else { ScalarFn::Linear { slope: v } };
        let split = engquist_osher(&model).unwrap();
        for _ in 0..5 {
            let u = random_bv(&mut rng, unit_periodic(48), -1.0, 1.0);
            let dt = 0.01;
            let config = SchemeConfig::new(SchemeKind::Implicit);
            let got = implicit_step(&u, dt, &split, &model, &config).unwrap();
            let m = periodic_linear_matrix(48, u.dx(), dt, c, v);
            let want = dense_solve(m, u.values().to_vec());
            assert!(max_abs_diff(got.values(), &want) <= 1e-10, "c={c} v={v}");
        }
    }
}

#[test]
fn rk3_of_constant_is_constant() {
    for model in models() {
        let split = engquist_osher(&model).unwrap();
        let c = GridFunction::constant(unit_periodic(16), 0.75).unwrap();
        assert_eq!(ssp_rk3_step(&c, 1e-4, &split, &model).values(), c.values());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn explicit_step_is_monotone(
        base in prop::collection::vec(-1.0f64..1.0, 24),
        bump in prop::collection::vec(0.0f64..0.5, 24),
        which in 0usize..3,
    ) {
        let model = &models()[which];
        let split = engquist_osher(model).unwrap();
        let grid = unit_periodic(24);
        let lower = GridFunction::new(grid, base.clone()).unwrap();
        let upper: Vec<f64> = base.iter().zip(&bump).map(|(b, d)| (b + d).min(1.0)).collect();
        let upper = GridFunction::new(grid, upper).unwrap();
        let range = Interval::new(-1.0, 1.0).unwrap();
        let dt = schemes::cfl_max_dt(&range, &split, model, grid.dx(), &SchemeConfig::default()).unwrap();
        let a = explicit_step(&lower, dt, &split, model);
        let b = explicit_step(&upper, dt, &split, model);
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!(x <= &(y + 1e-14));
        }
    }
}
