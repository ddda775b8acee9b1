use super::config::RunConfig;
use super::run::run;
use super::HarnessError;
use crate::diagnostics::VerdictKind;
use crate::model::{compute_regime_quantities, xi_threshold};

#[derive(Clone, Debug, PartialEq)]
pub struct KappaProbe {
    pub kappa: f64,
    pub chi: f64,
    pub xi: f64,
    pub verdict: VerdictKind,
    pub ceiling: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KappaCalibration {
    /// Largest probed κ whose induced run stayed bounded.
    pub kappa: f64,
    /// `kappa` and the smallest probed κ known to fail (equal when the upper
    /// end itself was bounded or the bracket was degenerate).
    pub bracket: (f64, f64),
    pub probes: Vec<KappaProbe>,
}

/// Runs `base` with the largest taxis pair admitted by κ:
/// `χ = κ / G0` and `ξ` at its threshold for that `χ`.
///
/// With `G0 = 0` the forager condition holds for any `χ`, so the base `χ` is
/// kept.
fn probe(base: &RunConfig, kappa: f64) -> Result<KappaProbe, HarnessError> {
    let mut cfg = base.clone();
    cfg.kappa = kappa;
    let grid = cfg.grid()?;
    let source = cfg.nutrient_source(grid)?;
    let [u0, v0, w0] = cfg.initial_fields(grid);
    let q = compute_regime_quantities(&cfg.params, &source, &u0, &v0, &w0, kappa)?;
    if q.g0 > 0.0 {
        cfg.params.chi = kappa / q.g0;
    }
    cfg.params.xi = xi_threshold(&q, cfg.params.chi);
    let record = run(&cfg, None)?;
    Ok(KappaProbe {
        kappa,
        chi: cfg.params.chi,
        xi: cfg.params.xi,
        verdict: record.verdict.kind,
        ceiling: record.verdict.ceiling,
    })
}

/// Bisects (geometrically) for the largest κ in `[lo, hi]` whose induced runs
/// are classified bounded.
///
/// Requires the damping-free setting (`eta1 = eta2 = 0`). Fails when the
/// lower end itself is not bounded, which means the horizon or resolution
/// cannot resolve the regime.
pub fn calibrate_kappa(
    base: &RunConfig,
    lo: f64,
    hi: f64,
    iterations: usize,
) -> Result<KappaCalibration, HarnessError> {
    if base.params.eta1 != 0.0 || base.params.eta2 != 0.0 {
        return Err(HarnessError::Calibration(
            "base config must have eta1 = eta2 = 0".into(),
        ));
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(HarnessError::Calibration(format!(
            "need 0 < lo <= hi, got lo={lo}, hi={hi}"
        )));
    }
    base.validate()?;
    let mut probes = Vec::new();
    let first = probe(base, lo)?;
    let ok = first.verdict == VerdictKind::Bounded;
    probes.push(first);
    if !ok {
        return Err(HarnessError::Calibration(format!(
            "bracket failure: the smallest candidate kappa={lo} already yields a {} verdict",
            probes[0].verdict
        )));
    }
    if hi == lo {
        return Ok(KappaCalibration {
            kappa: lo,
            bracket: (lo, lo),
            probes,
        });
    }
    let top = probe(base, hi)?;
    let top_ok = top.verdict == VerdictKind::Bounded;
    probes.push(top);
    if top_ok {
        return Ok(KappaCalibration {
            kappa: hi,
            bracket: (hi, hi),
            probes,
        });
    }
    let (mut good, mut bad) = (lo, hi);
    for _ in 0..iterations {
        let mid = (good * bad).sqrt();
        let p = probe(base, mid)?;
        if p.verdict == VerdictKind::Bounded {
            good = mid;
        } else {
            bad = mid;
        }
        probes.push(p);
    }
    Ok(KappaCalibration {
        kappa: good,
        bracket: (good, bad),
        probes,
    })
}
