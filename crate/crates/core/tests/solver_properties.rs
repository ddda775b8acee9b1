use forager_core::grid::{cell_integral, Field, Grid};
use forager_core::harness::InitialSpec;
use forager_core::model::{ModelParams, NutrientSource, State};
use forager_core::solver::{
    advance_to, stable_dt, StepControl, StepMode, Stepper, Termination, NEGATIVE_TOLERANCE,
};
use proptest::prelude::*;

fn random_state(grid: Grid<f64>, seed: u64, amp: f64) -> State<f64> {
    State::new(
        0.0,
        InitialSpec::random(1.0, amp, 3, seed).build(grid),
        InitialSpec::random(1.0, amp, 3, seed + 1).build(grid),
        InitialSpec::random(1.0, amp, 3, seed + 2).build(grid),
    )
    .unwrap()
}

fn params_strategy() -> impl Strategy<Value = ModelParams<f64>> {
    (
        0.0f64..5.0,
        0.0f64..5.0,
        0.0f64..3.0,
        0.0f64..3.0,
        0.0f64..2.0,
        0.0f64..2.0,
        1.5f64..4.0,
        1.5f64..4.0,
    )
        .prop_map(|(chi, xi, lambda, mu, eta1, eta2, m, l)| ModelParams {
            chi,
            xi,
            lambda,
            mu,
            eta1,
            eta2,
            m,
            l,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn explicit_steps_preserve_positivity_and_nutrient_ceiling(
        params in params_strategy(),
        seed in 0u64..1000,
        amp in 0.0f64..1.0,
        r0 in 0.0f64..3.0,
        mode in prop_oneof![Just(StepMode::Explicit), Just(StepMode::ImexDiffusion)],
    ) {
        let grid = Grid::rect([12, 12], [1.0, 1.0]).unwrap();
        let state = random_state(grid, seed, amp);
        let source = NutrientSource::constant(r0).unwrap();
        let ceiling = if params.mu > 0.0 { state.w.max().max(r0 / params.mu) } else { f64::INFINITY };
        let ctrl = StepControl { mode, ..StepControl::default() };
        let mut stepper = Stepper::new(grid);
        let mut s = state;
        let mut masses = [cell_integral(&s.u), cell_integral(&s.v)];
        for _ in 0..300 {
            let (next, report) = stepper.step(&s, &params, &source, &ctrl, None).unwrap();
            for f in next.fields() {
                prop_assert!(f.min() >= -NEGATIVE_TOLERANCE, "negative entry {}", f.min());
            }
            if mode == StepMode::Explicit {
                prop_assert!(next.w.max() <= ceiling + 1e-10);
            }
            if params.eta1 == 0.0 {
                prop_assert!((report.post_masses[0] - masses[0]).abs() <= 1e-11 * masses[0].max(1.0));
            }
            if params.eta2 == 0.0 {
                prop_assert!((report.post_masses[1] - masses[1]).abs() <= 1e-11 * masses[1].max(1.0));
            }
            masses = [report.post_masses[0], report.post_masses[1]];
            s = next;
        }
    }

    #[test]
    fn step_size_respects_cap_and_is_positive(params in params_strategy(), seed in 0u64..100) {
        let grid = Grid::line(16, 2.0).unwrap();
        let state = random_state(grid, seed, 0.9);
        let ctrl = StepControl::default();
        let dt = stable_dt(&state, &params, &ctrl);
        prop_assert!(dt > 0.0 && dt <= ctrl.dt_max);
    }
}

#[test]
fn positivity_over_ten_thousand_steps() {
    let grid = Grid::rect([16, 16], [2.0, 2.0]).unwrap();
    let params = ModelParams {
        chi: 4.0,
        xi: 2.0,
        lambda: 1.0,
        mu: 0.5,
        eta1: 1.0,
        eta2: 1.0,
        m: 2.0,
        l: 3.0,
    };
    let source = NutrientSource::constant(1.0).unwrap();
    // Steep data: mostly near zero with a narrow bump.
    let u0 = InitialSpec::gaussian(1e-3, 5.0, 0.1).build(grid);
    let v0 = InitialSpec::random(0.5, 0.5, 4, 3).build(grid);
    let w0 = InitialSpec::random(1.0, 1.0, 4, 4).build(grid);
    let mut s = State::new(0.0, u0, v0, w0).unwrap();
    let ctrl = StepControl::default();
    let mut stepper = Stepper::new(grid);
    let mut min = f64::INFINITY;
    for _ in 0..10_000 {
        let (next, _) = stepper.step(&s, &params, &source, &ctrl, None).unwrap();
        min = next.fields().iter().map(|f| f.min()).fold(min, f64::min);
        s = next;
    }
    assert!(min >= -NEGATIVE_TOLERANCE, "min entry {min}");
}

#[test]
fn imex_and_explicit_agree_on_smooth_data() {
    let grid = Grid::rect([24, 24], [1.0, 1.0]).unwrap();
    let params = ModelParams {
        chi: 1.0,
        xi: 0.5,
        lambda: 1.0,
        mu: 1.0,
        eta1: 1.0,
        eta2: 0.5,
        m: 2.0,
        l: 3.0,
    };
    let source = NutrientSource::constant(1.0).unwrap();
    let s0 = random_state(grid, 11, 0.5);
    let run = |mode, dt_max| {
        let ctrl = StepControl {
            mode,
            dt_max,
            ..StepControl::default()
        };
        advance_to(
            &mut Stepper::new(grid),
            s0.clone(),
            0.2,
            &params,
            &source,
            &ctrl,
            |_, _| {},
        )
        .unwrap()
    };
    let ex = run(StepMode::Explicit, 1e-4);
    let im = run(StepMode::ImexDiffusion, 1e-4);
    assert_eq!(ex.termination, Termination::Reached);
    for (a, b) in ex.state.fields().iter().zip(im.state.fields()) {
        let diff = a.zip_map(b, |x, y| (x - y).abs()).max();
        assert!(diff < 2e-3, "explicit and imex differ by {diff}");
    }
}

#[test]
fn stepping_is_deterministic() {
    let grid = Grid::rect([16, 16], [1.0, 1.0]).unwrap();
    let params = ModelParams {
        chi: 2.0,
        xi: 1.0,
        lambda: 1.0,
        mu: 1.0,
        eta1: 1.0,
        eta2: 1.0,
        m: 2.0,
        l: 2.0,
    };
    let source = NutrientSource::constant(1.0).unwrap();
    let go = || {
        advance_to(
            &mut Stepper::new(grid),
            random_state(grid, 5, 0.8),
            0.5,
            &params,
            &source,
            &StepControl::default(),
            |_, _| {},
        )
        .unwrap()
        .state
    };
    assert_eq!(go(), go());
}

#[test]
fn f32_stepping_tracks_f64() {
    let g64: Grid<f64> = Grid::line(32, 1.0).unwrap();
    let g32: Grid<f32> = Grid::line(32, 1.0).unwrap();
    let p64 = ModelParams {
        chi: 1.0,
        xi: 0.5,
        lambda: 1.0,
        mu: 1.0,
        eta1: 1.0,
        eta2: 0.0,
        m: 2.0,
        l: 2.0,
    };
    let p32 = ModelParams {
        chi: 1.0f32,
        xi: 0.5,
        lambda: 1.0,
        mu: 1.0,
        eta1: 1.0,
        eta2: 0.0,
        m: 2.0,
        l: 2.0,
    };
    let s64 = State::new(
        0.0,
        Field::from_fn(g64, |x| 1.0 + 0.5 * (3.0 * x[0]).cos()),
        Field::constant(g64, 1.0),
        Field::from_fn(g64, |x| 1.0 + 0.3 * (std::f64::consts::PI * x[0]).cos()),
    )
    .unwrap();
    let s32 = State::new(
        0.0f32,
        Field::from_fn(g32, |x| 1.0 + 0.5 * (3.0 * x[0]).cos()),
        Field::constant(g32, 1.0),
        Field::from_fn(g32, |x| 1.0 + 0.3 * (std::f32::consts::PI * x[0]).cos()),
    )
    .unwrap();
    let c64 = StepControl {
        dt_max: 1e-4,
        ..StepControl::default()
    };
    let c32 = StepControl {
        dt_max: 1e-4f32,
        ..StepControl::default()
    };
    let a = advance_to(
        &mut Stepper::new(g64),
        s64,
        0.05,
        &p64,
        &NutrientSource::constant(1.0).unwrap(),
        &c64,
        |_, _| {},
    )
    .unwrap();
    let b = advance_to(
        &mut Stepper::new(g32),
        s32,
        0.05,
        &p32,
        &NutrientSource::constant(1.0f32).unwrap(),
        &c32,
        |_, _| {},
    )
    .unwrap();
    for (x, y) in a.state.u.values().iter().zip(b.state.u.values()) {
        assert!((x - *y as f64).abs() < 1e-3, "{x} vs {y}");
    }
}
