use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use serde_json::json;

use super::config::RunConfig;
use super::HarnessError;
use crate::diagnostics::{classify_run, NormSeries, Verdict};
use crate::grid::write_snapshot;
use crate::model::{
    compute_regime_quantities, damping_exponents_admissible, taxis_smallness, RegimeQuantities,
    State, TaxisSmallness,
};
use crate::solver::{advance_to, StepReport, Stepper, Termination};

/// Extremes seen over every accepted step, not only the recorded samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepExtremes {
    /// Smallest entry of any field.
    pub min_entry: f64,
    /// Largest entry of `w`.
    pub max_w: f64,
    /// Largest `|∫u - ∫u(0)|` and `|∫v - ∫v(0)|`.
    pub mass_drift: [f64; 2],
    pub clipped: usize,
    pub any_negative: bool,
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub config: RunConfig,
    pub quantities: RegimeQuantities<f64>,
    pub smallness: TaxisSmallness<f64>,
    /// `None` when the exponents are outside the checker's domain.
    pub damping_admissible: Option<bool>,
    pub blowup_threshold: f64,
    pub series: NormSeries<f64>,
    pub verdict: Verdict<f64>,
    pub wall_time: Duration,
    pub steps: usize,
    pub min_dt: Option<f64>,
    pub extremes: StepExtremes,
    /// Snapshots taken at the configured times (and the final state).
    pub snapshots: Vec<State<f64>>,
}

impl RunRecord {
    pub fn termination(&self) -> &Termination {
        self.series.termination.as_ref().expect("set by run")
    }

    pub fn final_state(&self) -> &State<f64> {
        self.snapshots.last().expect("final state is always kept")
    }

    pub fn report_json(&self) -> serde_json::Value {
        let q = &self.quantities;
        let s = &self.smallness;
        let v = &self.verdict;
        json!({
            "config": self.config.to_text(),
            "regime": {
                "p": q.p, "A": q.a, "B": q.b, "Q": q.q, "G0": q.g0, "H0": q.h0,
                "r_star": q.r_star, "kappa": q.kappa, "u0_w1_2p": q.u0_w1_2p,
            },
            "smallness": {
                "chi": s.chi, "chi_threshold": json_num(s.chi_threshold), "chi_ok": s.chi_ok(),
                "xi": s.xi, "xi_threshold": json_num(s.xi_threshold), "xi_ok": s.xi_ok(),
            },
            "damping_admissible": self.damping_admissible,
            "blowup_threshold": self.blowup_threshold,
            "termination": self.termination().label(),
            "verdict": {
                "kind": v.kind.to_string(),
                "reason": v.reason,
                "ceiling": v.ceiling,
                "ceilings": { "u": v.ceilings[0], "v": v.ceilings[1], "w": v.ceilings[2] },
                "time": v.time,
            },
            "steps": self.steps,
            "min_dt": self.min_dt,
            "wall_time_s": self.wall_time.as_secs_f64(),
            "extremes": {
                "min_entry": self.extremes.min_entry,
                "max_w": self.extremes.max_w,
                "mass_drift_u": self.extremes.mass_drift[0],
                "mass_drift_v": self.extremes.mass_drift[1],
                "clipped": self.extremes.clipped,
                "any_negative": self.extremes.any_negative,
            },
        })
    }

    /// Writes the run directory:
    ///
    /// ```text
    /// config.txt      exact configuration
    /// report.json     regime quantities, checks, verdict, counters
    /// series.csv      one row per recorded sample
    /// plot/<col>.dat  "t value" per tracked norm
    /// snapshots/      field snapshots at the configured times
    /// ```
    pub fn persist(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir.join("plot"))?;
        fs::write(dir.join("config.txt"), self.config.to_text())?;
        let report =
            serde_json::to_string_pretty(&self.report_json()).expect("serialisable report");
        fs::write(dir.join("report.json"), report + "\n")?;
        self.series
            .write_csv(BufWriter::new(fs::File::create(dir.join("series.csv"))?))?;
        let times = self.series.times();
        for (name, column) in self.series.columns().into_iter().skip(1) {
            let mut w = BufWriter::new(fs::File::create(
                dir.join("plot").join(format!("{name}.dat")),
            )?);
            for (t, x) in times.iter().zip(&column) {
                writeln!(w, "{t} {x}")?;
            }
            w.flush()?;
        }
        if !self.config.snapshots.is_empty() {
            let snap = dir.join("snapshots");
            fs::create_dir_all(&snap)?;
            let wanted = |t: f64| {
                self.config
                    .snapshots
                    .iter()
                    .any(|&s| (s - t).abs() <= 1e-12 * s.max(1.0))
            };
            for state in self.snapshots.iter().filter(|s| wanted(s.t)) {
                for (name, f) in ["u", "v", "w"].iter().zip(state.fields()) {
                    let file = fs::File::create(snap.join(format!("{name}_t{}.txt", state.t)))?;
                    write_snapshot(f, BufWriter::new(file))?;
                }
            }
        }
        Ok(())
    }
}

fn json_num(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!("inf")
    }
}

/// Runs one configuration to its horizon (or to blow-up) and, if `out` is
/// given, persists the run directory there.
pub fn run(config: &RunConfig, out: Option<&Path>) -> Result<RunRecord, HarnessError> {
    run_observed(config, out, |_, _| {})
}

/// [`run`] with an extra hook that sees every accepted state.
pub fn run_observed(
    config: &RunConfig,
    out: Option<&Path>,
    mut hook: impl FnMut(&State<f64>, &StepReport<f64>),
) -> Result<RunRecord, HarnessError> {
    config.validate()?;
    let started = Instant::now();
    let grid = config.grid()?;
    let source = config.nutrient_source(grid)?;
    let [u0, v0, w0] = config.initial_fields(grid);
    let quantities =
        compute_regime_quantities(&config.params, &source, &u0, &v0, &w0, config.kappa)?;
    let smallness = taxis_smallness(&quantities, &config.params);
    let damping_admissible = damping_exponents_admissible(config.params.m, config.params.l).ok();
    let blowup_threshold = config
        .blowup_threshold
        .unwrap_or_else(|| quantities.default_blowup_threshold());
    let mut ctrl = config.control;
    ctrl.blowup_threshold = blowup_threshold;

    let state = State::new(0.0, u0, v0, w0)?;
    let mut series = NormSeries::new(quantities.p, config.lp.clone())?;
    series.observe(&state);

    let m0 = [
        crate::grid::cell_integral(&state.u),
        crate::grid::cell_integral(&state.v),
    ];
    let mut extremes = StepExtremes {
        min_entry: state
            .fields()
            .iter()
            .map(|f| f.min())
            .fold(f64::INFINITY, f64::min),
        max_w: state.w.max(),
        mass_drift: [0.0; 2],
        clipped: 0,
        any_negative: false,
    };

    let mut stops: Vec<f64> = config
        .snapshots
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < config.horizon)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut snapshots: Vec<State<f64>> = if config.snapshots.contains(&0.0) {
        vec![state.clone()]
    } else {
        vec![]
    };
    stops.push(config.horizon);

    let mut stepper = Stepper::new(grid);
    let mut state = state;
    let mut steps = 0usize;
    let mut min_dt: Option<f64> = None;
    let mut last_recorded = 0usize;
    let mut termination = Termination::Reached;
    for (k, &stop) in stops.iter().enumerate() {
        let mut observer = |s: &State<f64>, r: &StepReport<f64>| {
            steps += 1;
            for f in s.fields() {
                extremes.min_entry = extremes.min_entry.min(f.min());
            }
            extremes.max_w = extremes.max_w.max(s.w.max());
            extremes.mass_drift[0] = extremes.mass_drift[0].max((r.post_masses[0] - m0[0]).abs());
            extremes.mass_drift[1] = extremes.mass_drift[1].max((r.post_masses[1] - m0[1]).abs());
            extremes.clipped += r.clipped;
            extremes.any_negative |= r.any_negative;
            hook(s, r);
            if steps % config.stride == 0 {
                series.observe(s);
                last_recorded = steps;
            }
        };
        let adv = advance_to(
            &mut stepper,
            state,
            stop,
            &config.params,
            &source,
            &ctrl,
            &mut observer,
        )?;
        min_dt = match (min_dt, adv.min_dt) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        state = adv.state;
        termination = adv.termination;
        if termination != Termination::Reached {
            break;
        }
        if k + 1 < stops.len() {
            snapshots.push(state.clone());
        }
    }
    if last_recorded != steps {
        series.observe(&state);
    }
    series.termination = Some(termination);
    snapshots.push(state);
    let verdict = classify_run(&series, config.horizon, blowup_threshold);

    let record = RunRecord {
        config: config.clone(),
        quantities,
        smallness,
        damping_admissible,
        blowup_threshold,
        series,
        verdict,
        wall_time: started.elapsed(),
        steps,
        min_dt,
        extremes,
        snapshots,
    };
    if let Some(dir) = out {
        record.persist(dir)?;
    }
    Ok(record)
}
