use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::config::RunConfig;
use super::run::{run, RunRecord};
use super::HarnessError;

#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub value: f64,
    pub record: RunRecord,
}

/// Runs `base` once per value of the numeric key `axis`.
///
/// Runs are independent; with `parallel` they go to the rayon pool, and the
/// results are identical to a serial sweep. Every derived config is validated
/// before anything runs. With `out`, run `k` is persisted under
/// `out/run_<k>` and the summary table goes to `out/summary.csv`.
pub fn sweep(
    base: &RunConfig,
    axis: &str,
    values: &[f64],
    parallel: bool,
    out: Option<&Path>,
) -> Result<Vec<SweepEntry>, HarnessError> {
    if !RunConfig::is_numeric_key(axis) {
        return Err(HarnessError::UnknownAxis(axis.to_string()));
    }
    let configs = values
        .iter()
        .map(|&x| {
            let mut cfg = base.clone();
            cfg.set(axis, &x.to_string())
                .map_err(|e| super::ConfigError {
                    problems: vec![format!("{axis}: {e}")],
                })?;
            cfg.validate()?;
            Ok((x, cfg))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let one = |(k, (x, cfg)): (usize, &(f64, RunConfig))| -> Result<SweepEntry, HarnessError> {
        let dir = out.map(|d| d.join(format!("run_{k:03}")));
        let record = run(cfg, dir.as_deref())?;
        Ok(SweepEntry { value: *x, record })
    };
    let entries: Vec<SweepEntry> = if parallel {
        configs
            .par_iter()
            .enumerate()
            .map(one)
            .collect::<Result<_, _>>()?
    } else {
        configs
            .iter()
            .enumerate()
            .map(one)
            .collect::<Result<_, _>>()?
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("summary.csv"), sweep_summary(axis, &entries))?;
    }
    Ok(entries)
}

/// CSV table: axis value, verdict, overall and per-field ceilings.
pub fn sweep_summary(axis: &str, entries: &[SweepEntry]) -> String {
    let mut s = format!("{axis},verdict,ceiling,ceiling_u,ceiling_v,ceiling_w\n");
    for e in entries {
        let v = &e.record.verdict;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            e.value, v.kind, v.ceiling, v.ceilings[0], v.ceilings[1], v.ceilings[2]
        );
    }
    s
}
