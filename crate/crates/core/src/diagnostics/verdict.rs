//! Finite-horizon classification of a run.
//!
//! A verdict is evidence, not proof: "bounded" means the tracked sup norms
//! have plateaued over the last quarter of the horizon and stayed far below
//! the blow-up ceiling.

use std::fmt;

use crate::scalar::Scalar;
use crate::solver::Termination;

use super::series::NormSeries;

/// Allowed growth of the last-quarter maximum over the third-quarter maximum.
pub const PLATEAU_FACTOR: f64 = 1.01;
/// `ln 10`: a tenfold rise of a sup norm over the horizon counts as growth.
pub const GROWTH_LOG_THRESHOLD: f64 = std::f64::consts::LN_10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    Bounded,
    Growing,
    BlowUp,
    Inconclusive,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Bounded => "bounded",
            VerdictKind::Growing => "growing",
            VerdictKind::BlowUp => "blow-up",
            VerdictKind::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict<T> {
    pub kind: VerdictKind,
    /// Largest observed sup norm over all three fields.
    pub ceiling: T,
    /// Largest observed sup norm of `u`, `v`, `w` separately.
    pub ceilings: [T; 3],
    pub reason: String,
    /// Time of the last observation.
    pub time: T,
}

fn max_in<T: Scalar>(
    series: &NormSeries<T>,
    field: usize,
    from: T,
    to: T,
    include_end: bool,
) -> Option<T> {
    series
        .records
        .iter()
        .filter(|r| r.t >= from && (r.t < to || (include_end && r.t <= to)))
        .map(|r| r.sup[field])
        .reduce(T::max)
}

/// Classifies a run observed from its first record over `horizon`.
///
/// Order of tests: solver blow-up flag; early stop; plateau (last-quarter max
/// of every sup norm at most `PLATEAU_FACTOR` times its third-quarter max, and
/// the overall ceiling below `threshold`); tenfold growth of any sup norm
/// between the first and last record; otherwise inconclusive.
pub fn classify_run<T: Scalar>(series: &NormSeries<T>, horizon: T, threshold: T) -> Verdict<T> {
    let mut ceilings = [T::zero(); 3];
    for r in &series.records {
        for k in 0..3 {
            ceilings[k] = ceilings[k].max(r.sup[k]);
        }
    }
    let ceiling = ceilings.iter().copied().fold(T::zero(), T::max);
    let time = series.records.last().map_or(T::zero(), |r| r.t);
    let verdict = |kind, reason: String| Verdict {
        kind,
        ceiling,
        ceilings,
        reason,
        time,
    };

    if let Some(Termination::BlowUp { t, max }) = &series.termination {
        return verdict(
            VerdictKind::BlowUp,
            format!("solver blow-up at t={t} (max entry {max})"),
        );
    }
    if let Some(Termination::NegativeDensity { field, t, value }) = &series.termination {
        return verdict(
            VerdictKind::Inconclusive,
            format!("negative {field}={value} at t={t}"),
        );
    }
    let Some(first) = series.records.first() else {
        return verdict(VerdictKind::Inconclusive, "no observations".into());
    };
    let t0 = first.t;
    let end = t0 + horizon;
    let tol = T::epsilon() * T::lit(64.0) * end.abs().max(T::one());
    if time < end - tol {
        return verdict(
            VerdictKind::Inconclusive,
            format!("series stops at t={time} before horizon end {end}"),
        );
    }

    let q2 = t0 + horizon * T::lit(0.5);
    let q3 = t0 + horizon * T::lit(0.75);
    let factor = T::lit(PLATEAU_FACTOR);
    let mut plateau = true;
    let mut detail = String::new();
    for (k, name) in ["u", "v", "w"].iter().enumerate() {
        match (
            max_in(series, k, q2, q3, false),
            max_in(series, k, q3, end + tol, true),
        ) {
            (Some(third), Some(last)) => {
                if last > factor * third {
                    plateau = false;
                    detail =
                        format!("sup {name} still rising: {last} > {PLATEAU_FACTOR} x {third}");
                }
            }
            _ => {
                plateau = false;
                detail = "too few observations in the trailing half".into();
            }
        }
    }
    if plateau && ceiling < threshold {
        return verdict(
            VerdictKind::Bounded,
            format!("sup norms plateau over the last quarter, ceiling {ceiling}"),
        );
    }
    let last = series.records.last().expect("nonempty");
    let log_threshold = T::lit(GROWTH_LOG_THRESHOLD);
    for (k, name) in ["u", "v", "w"].iter().enumerate() {
        let (a, b) = (first.sup[k], last.sup[k]);
        let grew = if a > T::zero() {
            (b / a).ln() > log_threshold
        } else {
            false
        };
        if grew {
            return verdict(
                VerdictKind::Growing,
                format!("sup {name} grew from {a} to {b}"),
            );
        }
    }
    if plateau {
        detail = format!("ceiling {ceiling} not below threshold {threshold}");
    }
    verdict(VerdictKind::Inconclusive, detail)
}
