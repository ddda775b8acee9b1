//! Canned scenario suites with their pass/fail assertions.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use super::config::RunConfig;
use super::presets::InitialSpec;
use super::run::{run, run_observed, RunRecord};
use super::HarnessError;
use crate::diagnostics::{gradient_hessian_inequality, VerdictKind};
use crate::grid::{cell_integral, Grid};
use crate::model::damping_exponents_admissible;
use crate::solver::{StepMode, NEGATIVE_TOLERANCE};

pub const SUITE_NAMES: [&str; 6] = [
    "thm-1.1",
    "thm-1.2",
    "thm-1.3",
    "mass-identities",
    "inequality-3.5a",
    "steady-state",
];

/// Horizon of the regime suites.
const REGIME_HORIZON: f64 = 50.0;
const MASS_TOLERANCE: f64 = 1e-8;
const SUP_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, Default)]
pub struct SuiteOptions {
    /// Cells per axis, replacing the suite's default resolution.
    pub cells: Option<usize>,
    /// Replaces the regime horizon (not used by the fixed-step checks).
    pub horizon: Option<f64>,
    /// Directory for the report and per-run artifacts.
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteCheck {
    pub name: String,
    pub passed: bool,
    /// Reported but never fails the suite.
    pub informational: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<SuiteCheck>,
    pub runs: Vec<(String, RunRecord)>,
    pub wall_time: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }

    pub fn check(&self, name: &str) -> Option<&SuiteCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn run(&self, label: &str) -> Option<&RunRecord> {
        self.runs.iter().find(|(l, _)| l == label).map(|(_, r)| r)
    }

    pub fn text(&self) -> String {
        let mut s = format!("suite {}\n", self.name);
        for c in &self.checks {
            let tag = match (c.informational, c.passed) {
                (true, _) => "INFO",
                (false, true) => "PASS",
                (false, false) => "FAIL",
            };
            let _ = writeln!(s, "{tag} {}: {}", c.name, c.detail);
        }
        if !self.runs.is_empty() {
            let _ = writeln!(
                s,
                "\nrun,verdict,ceiling_u,ceiling_v,ceiling_w,steps,min_dt,termination"
            );
        }
        for (label, r) in &self.runs {
            let v = &r.verdict;
            let _ = writeln!(
                s,
                "{label},{},{},{},{},{},{},{}",
                v.kind,
                v.ceilings[0],
                v.ceilings[1],
                v.ceilings[2],
                r.steps,
                r.min_dt.map_or("-".into(), |d| d.to_string()),
                r.termination().label()
            );
        }
        let _ = writeln!(
            s,
            "\nresult: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        );
        s
    }
}

struct Builder {
    name: String,
    out: Option<PathBuf>,
    checks: Vec<SuiteCheck>,
    runs: Vec<(String, RunRecord)>,
}

impl Builder {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(SuiteCheck {
            name: name.into(),
            passed,
            informational: false,
            detail: detail.into(),
        });
    }

    fn info(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.checks.push(SuiteCheck {
            name: name.into(),
            passed: true,
            informational: true,
            detail: detail.into(),
        });
    }

    fn dir(&self, label: &str) -> Option<PathBuf> {
        self.out.as_ref().map(|d| d.join(label))
    }

    fn run(&mut self, label: &str, cfg: &RunConfig) -> Result<&RunRecord, HarnessError> {
        let record = run(cfg, self.dir(label).as_deref())?;
        self.runs.push((label.to_string(), record));
        Ok(&self.runs.last().expect("just pushed").1)
    }

    fn bounded_check(&mut self, label: &str) {
        let r = &self
            .runs
            .iter()
            .find(|(l, _)| l == label)
            .expect("run exists")
            .1;
        let v = &r.verdict;
        let detail = format!(
            "{} ({}); ceilings u={} v={} w={}",
            v.kind, v.reason, v.ceilings[0], v.ceilings[1], v.ceilings[2]
        );
        let ok = v.kind == VerdictKind::Bounded;
        self.check(format!("{label} bounded"), ok, detail);
    }

    fn finish(self, started: Instant) -> Result<SuiteReport, HarnessError> {
        let report = SuiteReport {
            name: self.name,
            checks: self.checks,
            runs: self.runs,
            wall_time: started.elapsed(),
        };
        if let Some(dir) = &self.out {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("report.txt"), report.text())?;
        }
        Ok(report)
    }
}

/// 2D square regime setup: IMEX stepping, smooth bump data, constant source.
fn regime_base(cells: usize, horizon: f64) -> RunConfig {
    let mut cfg = RunConfig {
        cells: vec![cells, cells],
        extent: vec![1.0, 1.0],
        horizon,
        stride: 10,
        ..RunConfig::default()
    };
    cfg.control.mode = StepMode::ImexDiffusion;
    cfg.control.dt_max = 0.05;
    cfg.params.lambda = 1.0;
    cfg.params.mu = 1.0;
    cfg.source.r0 = 1.0;
    cfg.u0 = InitialSpec::gaussian(0.5, 1.0, 0.15);
    cfg.v0 = InitialSpec::cosine(1.0, 0.5, 1);
    cfg.w0 = InitialSpec::cosine(1.0, 0.5, 2);
    cfg.lp = vec![2.0, 4.0];
    cfg
}

/// Explicit stepping on a wider square, where the diffusive step limit is
/// mild enough for long explicit runs.
fn identity_base(cells: usize) -> RunConfig {
    let mut cfg = RunConfig {
        cells: vec![cells, cells],
        extent: vec![4.0, 4.0],
        stride: 50,
        ..RunConfig::default()
    };
    cfg.control.mode = StepMode::Explicit;
    cfg.params.chi = 1.0;
    cfg.params.xi = 0.5;
    cfg.params.lambda = 1.0;
    cfg.params.mu = 1.0;
    cfg.source.r0 = 1.0;
    cfg.u0 = InitialSpec::gaussian(0.5, 1.0, 0.6);
    cfg.v0 = InitialSpec::cosine(1.0, 0.5, 1);
    cfg.w0 = InitialSpec::random(1.0, 0.5, 4, 7);
    cfg
}

/// A step size well inside every explicit limit of [`identity_base`], so that
/// runs proceed at exactly this step.
fn fixed_step(cfg: &RunConfig) -> f64 {
    let h = cfg.extent[0] / cfg.cells[0] as f64;
    0.05 * h * h
}

/// Runs the named suite.
pub fn scenario_suite(name: &str, opts: &SuiteOptions) -> Result<SuiteReport, HarnessError> {
    let started = Instant::now();
    let mut b = Builder {
        name: name.to_string(),
        out: opts.out.clone(),
        checks: vec![],
        runs: vec![],
    };
    let horizon = opts.horizon.unwrap_or(REGIME_HORIZON);
    match name {
        "thm-1.1" => taxis_only(&mut b, opts.cells.unwrap_or(32), horizon)?,
        "thm-1.2" => forager_damping(&mut b, opts.cells.unwrap_or(64), horizon)?,
        "thm-1.3" => double_damping(&mut b, opts.cells.unwrap_or(32), horizon)?,
        "mass-identities" => mass_identities(&mut b, opts.cells.unwrap_or(32))?,
        "inequality-3.5a" => inequality(&mut b, opts.cells.unwrap_or(128)),
        "steady-state" => steady_state(&mut b, opts.cells.unwrap_or(16), horizon)?,
        other => return Err(HarnessError::UnknownSuite(other.to_string())),
    }
    b.finish(started)
}

/// No damping; small data obtained by scaling `u0`, `w0` and `r` jointly.
fn taxis_only(b: &mut Builder, cells: usize, horizon: f64) -> Result<(), HarnessError> {
    b.info(
        "scaling",
        "u0, w0 and r scaled jointly by eps; per-component scaling is the alternative probe",
    );
    for eps in [0.1, 0.02] {
        let mut cfg = regime_base(cells, horizon);
        cfg.params.eta1 = 0.0;
        cfg.params.eta2 = 0.0;
        cfg.params.chi = 1.0;
        cfg.params.xi = 1.0;
        cfg.u0 = InitialSpec::gaussian(0.5 * eps, eps, 0.15);
        cfg.w0 = InitialSpec::cosine(eps, 0.5 * eps, 2);
        cfg.source.r0 = eps;
        let label = format!("eps={eps}");
        let r = b.run(&label, &cfg)?;
        let drift = r.extremes.mass_drift;
        let s = r.smallness;
        let detail = format!(
            "kappa={}: chi={} vs {} ({}), xi={} vs {} ({})",
            r.quantities.kappa,
            s.chi,
            s.chi_threshold,
            s.chi_ok(),
            s.xi,
            s.xi_threshold,
            s.xi_ok()
        );
        b.info(format!("{label} smallness"), detail);
        b.check(
            format!("{label} masses conserved"),
            drift[0] <= MASS_TOLERANCE && drift[1] <= MASS_TOLERANCE,
            format!("max drift u={:e} v={:e}", drift[0], drift[1]),
        );
        b.bounded_check(&label);
    }
    Ok(())
}

/// Forager damping only, weak exploiter taxis.
fn forager_damping(b: &mut Builder, cells: usize, horizon: f64) -> Result<(), HarnessError> {
    let mut cfg = regime_base(cells, horizon);
    cfg.params.eta1 = 1.0;
    cfg.params.m = 2.0;
    cfg.params.eta2 = 0.0;
    cfg.params.chi = 1.0;
    cfg.params.xi = 1e-3;
    let label = "xi=0.001";
    let r = b.run(label, &cfg)?;
    let c = r.verdict.ceilings;
    let w1 = r.series.records.iter().fold([0.0f64; 3], |m, o| {
        std::array::from_fn(|k| m[k].max(o.w1_2p[k]))
    });
    let p = r.quantities.p;
    b.check(
        "sup ceilings finite",
        c[0].is_finite() && c[1].is_finite(),
        format!("sup u <= {}, sup v <= {}", c[0], c[1]),
    );
    b.check(
        format!("W1,{} ceilings finite", 2 * p),
        w1.iter().all(|x| x.is_finite()),
        format!("u <= {}, v <= {}, w <= {}", w1[0], w1[1], w1[2]),
    );
    b.bounded_check(label);
    Ok(())
}

/// Damping on both populations for exponent pairs either side of the
/// admissibility boundary.
fn double_damping(b: &mut Builder, cells: usize, horizon: f64) -> Result<(), HarnessError> {
    for (m, l, expected) in [(2.0, 6.0, true), (3.0, 3.0, true), (2.0, 5.0, false)] {
        let label = format!("m={m},l={l}");
        let admissible = damping_exponents_admissible(m, l)?;
        b.check(
            format!("{label} condition"),
            admissible == expected,
            format!("checker says {admissible}"),
        );
        let mut cfg = regime_base(cells, horizon);
        cfg.params.eta1 = 1.0;
        cfg.params.eta2 = 1.0;
        cfg.params.m = m;
        cfg.params.l = l;
        cfg.params.chi = 1.0;
        cfg.params.xi = 1.0;
        let r = b.run(&label, &cfg)?;
        if admissible {
            b.bounded_check(&label);
        } else {
            let v = &r.verdict;
            let detail = format!(
                "outside regime; verdict {} (informational), ceiling {}",
                v.kind, v.ceiling
            );
            b.info(format!("{label} outside regime"), detail);
        }
    }
    Ok(())
}

fn mass_identities(b: &mut Builder, cells: usize) -> Result<(), HarnessError> {
    let base = identity_base(cells);
    let dt = fixed_step(&base);
    let measure: f64 = base.extent.iter().product();

    // Conservation without damping.
    let mut cfg = base.clone();
    cfg.params.eta1 = 0.0;
    cfg.params.eta2 = 0.0;
    cfg.horizon = 10.0;
    let r = b.run("conservation", &cfg)?;
    let drift = r.extremes.mass_drift;
    let (neg, steps) = (r.extremes.min_entry, r.steps);
    b.check(
        "mass conserved",
        drift[0] <= MASS_TOLERANCE && drift[1] <= MASS_TOLERANCE,
        format!(
            "max |int u - int u0| = {:e}, |int v - int v0| = {:e} over {steps} steps",
            drift[0], drift[1]
        ),
    );
    b.check(
        "conservation run nonnegative",
        neg >= -NEGATIVE_TOLERANCE,
        format!("min entry {neg:e}"),
    );

    // Forager mass ODE at two fixed step sizes.
    let mut defects = Vec::new();
    for (k, step) in [dt, dt / 2.0].into_iter().enumerate() {
        let mut cfg = base.clone();
        cfg.params.eta1 = 1.0;
        cfg.params.m = 2.0;
        cfg.horizon = 2.0;
        cfg.control.dt_max = step;
        let (defect, max_mass, m0, fixed, record) =
            mass_ode_run(&cfg, b.dir(&format!("mass-ode-{k}")).as_deref())?;
        let bound = m0.max(measure);
        b.check(
            format!("L1 bound dt={step:e}"),
            max_mass <= bound + MASS_TOLERANCE,
            format!("max int u = {max_mass} vs max(int u0, |Omega|) = {bound}"),
        );
        b.check(
            format!("fixed step dt={step:e}"),
            fixed,
            format!("min step {:?}", record.min_dt),
        );
        defects.push(defect);
        b.runs.push((format!("mass-ode-{k}"), record));
    }
    let ratio = defects[0] / defects[1];
    b.check(
        "mass ODE defect halves with dt",
        (ratio - 2.0).abs() <= 0.4,
        format!(
            "max defect {:e} -> {:e}, ratio {ratio:.4}",
            defects[0], defects[1]
        ),
    );

    // Nutrient ceiling and positivity from randomised data over 10^4 steps.
    const STEPS: usize = 10_000;
    // The middle case starts with w above r*/mu, so the ceiling is max w0.
    for (seed, r0) in [(1u64, 2.0), (2, 0.5), (3, 1.0)] {
        let mut cfg = base.clone();
        cfg.params.eta1 = 1.0;
        cfg.params.eta2 = 1.0;
        cfg.params.chi = 2.0;
        cfg.params.xi = 1.0;
        cfg.source.r0 = r0;
        cfg.u0 = InitialSpec::random(1.0, 0.8, 4, seed);
        cfg.v0 = InitialSpec::random(1.0, 0.8, 4, seed + 100);
        cfg.w0 = InitialSpec::random(1.0, 0.9, 4, seed + 200);
        cfg.control.dt_max = dt;
        cfg.horizon = STEPS as f64 * dt;
        cfg.stride = 100;
        let label = format!("sup-bound-seed{seed}");
        let r = b.run(&label, &cfg)?;
        let q = r.quantities.q;
        let (max_w, min_entry, steps) = (r.extremes.max_w, r.extremes.min_entry, r.steps);
        b.check(
            format!("{label} w ceiling"),
            max_w <= q + SUP_TOLERANCE && steps >= STEPS,
            format!("max w = {max_w} vs max(max w0, r*/mu) = {q} over {steps} steps"),
        );
        b.check(
            format!("{label} nonnegative"),
            min_entry >= -NEGATIVE_TOLERANCE,
            format!("min entry {min_entry:e}"),
        );
    }
    Ok(())
}

/// Runs `cfg` and returns the largest per-step defect of the forager mass
/// balance, evaluated with the right-hand side at the new time level,
/// `|(M_{k+1} - M_k)/dt - eta1 (M_{k+1} - ∫u_{k+1}^m)|`; also the largest
/// mass, the initial mass and whether every untruncated step used `dt_max`.
/// The final step, shortened to land on the horizon, is left out of the
/// defect: dividing by its tiny length only measures roundoff.
fn mass_ode_run(
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Result<(f64, f64, f64, bool, RunRecord), HarnessError> {
    let (eta1, m, dt_max) = (cfg.params.eta1, cfg.params.m, cfg.control.dt_max);
    let grid = cfg.grid()?;
    let u0 = cfg.u0.build(grid);
    let m0 = cell_integral(&u0);
    let mut prev_mass = m0;
    let mut defect = 0.0f64;
    let mut max_mass = m0;
    let record = run_observed(cfg, out, |s, r| {
        let mass = r.post_masses[0];
        if r.dt_used == dt_max {
            let power = cell_integral(&s.u.map(|x| x.powf(m)));
            let d = (mass - prev_mass) / r.dt_used - eta1 * (mass - power);
            defect = defect.max(d.abs());
        }
        max_mass = max_mass.max(mass);
        prev_mass = mass;
    })?;
    let fixed = record.min_dt == Some(cfg.control.dt_max);
    Ok((defect, max_mass, m0, fixed, record))
}

fn inequality(b: &mut Builder, cells: usize) {
    const FIELDS: u64 = 100;
    const P: u32 = 2;
    let mut worst_overall = 0.0f64;
    for dim in [1usize, 2] {
        let max_ratio = |n: usize| {
            let grid = if dim == 1 {
                Grid::line(n, 1.0)
            } else {
                Grid::rect([n, n], [1.0, 1.0])
            }
            .expect("valid grid");
            (0..FIELDS)
                .map(|seed| {
                    let u = InitialSpec::random(0.0, 1.0, 4, seed).build(grid);
                    gradient_hessian_inequality(&u, P).ratio
                })
                .fold(0.0f64, f64::max)
        };
        let coarse = max_ratio(cells);
        let fine = max_ratio(2 * cells);
        worst_overall = worst_overall.max(coarse).max(fine);
        b.check(
            format!("n={dim} ratio <= 1.1"),
            coarse <= 1.1,
            format!("max lhs/rhs = {coarse:.6} at {cells} cells"),
        );
        b.check(
            format!("n={dim} max ratio decreases under refinement"),
            fine < coarse,
            format!(
                "max lhs/rhs {coarse:.6} at {cells} -> {fine:.6} at {} cells",
                2 * cells
            ),
        );
    }
    b.info("worst ratio", format!("{worst_overall:.6}"));
}

/// Constant data in exact equilibrium: `u = v = w = 1`, `r = λ(u + v)w + μw`.
fn steady_state(b: &mut Builder, cells: usize, horizon: f64) -> Result<(), HarnessError> {
    let mut cfg = identity_base(cells);
    cfg.horizon = horizon;
    cfg.params.eta1 = 1.0;
    cfg.params.eta2 = 1.0;
    cfg.params.chi = 1.0;
    cfg.params.xi = 1.0;
    cfg.u0 = InitialSpec::constant(1.0);
    cfg.v0 = InitialSpec::constant(1.0);
    cfg.w0 = InitialSpec::constant(1.0);
    cfg.source.r0 = 3.0;
    let r = b.run("steady", &cfg)?;
    let c = r.verdict.ceilings;
    let initial = r.series.records[0].sup;
    b.check(
        "ceilings equal initial norms",
        c == initial,
        format!("ceilings {c:?}, initial {initial:?}"),
    );
    b.bounded_check("steady");
    Ok(())
}
