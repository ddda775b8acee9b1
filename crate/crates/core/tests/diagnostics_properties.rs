use forager_core::diagnostics::{
    classify_run, default_window, lp_norm, ode_comparison_bound, window_integrals, NormSeries,
    Observation,
};
use forager_core::grid::{Field, Grid};
use forager_core::harness::{run, InitialSpec, RunConfig};
use forager_core::solver::Termination;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact solution of `y' = -a y + f` for `f` piecewise constant on cells of
/// width `dt`; returns the trajectory maximum (attained at cell ends, since
/// `y` is monotone on each cell).
fn comparison_trajectory_max(y0: f64, a: f64, f: &[f64], dt: f64) -> f64 {
    let decay = (-a * dt).exp();
    let mut y = y0;
    let mut max = y0;
    for &fk in f {
        y = y * decay + fk * (1.0 - decay) / a;
        max = max.max(y);
    }
    max
}

#[test]
fn comparison_bound_dominates_random_trajectories() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let a: f64 = rng.gen_range(0.05..5.0);
        let y0: f64 = rng.gen_range(0.0..5.0);
        // Horizon of `cells` steps; the window is min(1, T/2) as a whole
        // number of steps so that aligned window sums are exact maxima.
        let per_window = 40usize;
        let windows: usize = rng.gen_range(1..30);
        let t_end = if rng.gen_bool(0.2) {
            rng.gen_range(0.2..2.0)
        } else {
            windows as f64
        };
        let tau = default_window(t_end);
        let dt = tau / per_window as f64;
        let cells = (t_end / dt).round() as usize;
        let f: Vec<f64> = (0..cells)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    rng.gen_range(0.0..20.0)
                } else {
                    0.0
                }
            })
            .collect();
        let b = (0..=cells.saturating_sub(per_window))
            .map(|s| f[s..(s + per_window).min(cells)].iter().sum::<f64>() * dt)
            .fold(0.0f64, f64::max)
            .max(1e-12);
        let bound = ode_comparison_bound(y0, a, b).unwrap();
        let max = comparison_trajectory_max(y0, a, &f, dt);
        assert!(
            max <= bound + 1e-6,
            "a={a} b={b} y0={y0}: max {max} > {bound}"
        );
    }
}

#[test]
fn comparison_constant_forcing_example() {
    let f = vec![1.0; 10_000];
    let max = comparison_trajectory_max(0.0, 1.0, &f, 1e-3);
    assert!((max - (1.0 - (-10.0f64).exp())).abs() < 1e-9);
    assert!(max <= ode_comparison_bound(0.0, 1.0, 1.0).unwrap());
}

proptest! {
    #[test]
    fn lp_norms_increase_with_exponent_on_unit_measure(
        values in prop::collection::vec(0.0f64..10.0, 64),
        p in 1.0f64..6.0,
        dq in 0.0f64..6.0,
    ) {
        let g = Grid::rect([8, 8], [0.5, 2.0]).unwrap();
        let f = Field::new(g, values).unwrap();
        let lo = lp_norm(&f, p).unwrap();
        let hi = lp_norm(&f, p + dq).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn classification_ignores_time_shift(
        shift in 0u32..1000,
        growth in 0.0f64..3.0,
        rate in 0.0f64..2.0,
        blow in any::<bool>(),
    ) {
        // Dyadic sample times keep the shift exact.
        let horizon = 8.0;
        let build = |offset: f64| {
            let mut s = NormSeries::new(2, vec![]).unwrap();
            for k in 0..=64 {
                let t = k as f64 / 8.0;
                let u = 1.0 + growth * (1.0 - (-rate * t).exp()) + if rate < 0.3 { growth * t } else { 0.0 };
                s.records.push(Observation {
                    t: t + offset,
                    sup: [u, 1.0, 0.5],
                    mass: [0.0; 3],
                    lp: vec![],
                    w1_2p: [0.0; 3],
                    grad_w_2p2: 0.0,
                    grad_u_2p: 0.0,
                    lap_w_p1: 0.0,
                    grad_u_2p2: 0.0,
                });
            }
            s.termination = Some(if blow {
                Termination::BlowUp { t: offset + 8.0, max: 1e9 }
            } else {
                Termination::Reached
            });
            s
        };
        let a = classify_run(&build(0.0), horizon, 1e6);
        let b = classify_run(&build(shift as f64), horizon, 1e6);
        prop_assert_eq!(a.kind, b.kind);
        prop_assert_eq!(a.ceilings, b.ceilings);
    }
}

/// Pure diffusion of `w = 1 + cos(pi x)/2` in 1D: the first window of
/// `∫|Δw|²` equals `(pi^4 / 8) (1 - e^{-2 pi^2 tau}) / (2 pi^2)`.
#[test]
fn heat_flow_window_matches_mode_decay() {
    let mut cfg = RunConfig {
        cells: vec![128],
        extent: vec![1.0],
        horizon: 0.2,
        stride: 1,
        ..RunConfig::default()
    };
    cfg.params.chi = 0.0;
    cfg.params.xi = 0.0;
    cfg.params.lambda = 0.0;
    cfg.params.mu = 0.0;
    cfg.source.r0 = 0.0;
    cfg.u0 = InitialSpec::constant(1.0);
    cfg.v0 = InitialSpec::constant(1.0);
    cfg.w0 = InitialSpec::cosine(1.0, 0.5, 1);
    let record = run(&cfg, None).unwrap();
    assert_eq!(record.quantities.p, 1);
    let tau = default_window(cfg.horizon);
    let windows = window_integrals(&record.series, tau).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    let exact = pi2 * pi2 / 8.0 * (1.0 - (-2.0 * pi2 * tau).exp()) / (2.0 * pi2);
    let got = windows.windows[0].lap_w_p1;
    assert!(
        ((got - exact) / exact).abs() < 0.02,
        "window {got} vs {exact}"
    );
}
