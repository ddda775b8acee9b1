//! Plain-text run configuration.
//!
//! One `section.key = value` per line; `#` starts a comment; blank lines are
//! ignored. Keys not given keep their defaults. Lists are comma-separated.
//!
//! ```text
//! grid.dim = 2
//! grid.cells = 64, 64
//! grid.extent = 1, 1
//! params.chi = 1          # also xi, lambda, mu, eta1, eta2, m, l
//! source.kind = constant  # or decay (uses source.delta)
//! source.r0 = 1
//! source.profile = uniform  # or cosine: 1 + cos(pi x / L) / 2 per axis
//! u0.kind = gaussian-bump # constant | cosine-bump | gaussian-bump | random-smooth
//! u0.base = 0.5           # also amplitude, width, mode, modes, seed
//! control.mode = imex     # or explicit
//! control.dt_max = 0.05   # also cfl_safety, positivity_floor
//! run.horizon = 50
//! run.stride = 10         # steps between recorded samples
//! run.kappa = 1
//! run.blowup_threshold = auto
//! run.lp = 2, 4           # extra Lq norms to track
//! run.snapshots = 1, 10   # times at which field snapshots are written
//! ```

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::presets::{InitialSpec, PresetKind};
use crate::grid::{Field, Grid};
use crate::model::{ModelParams, NutrientSource};
use crate::solver::{StepControl, StepMode};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid configuration:\n  {}", .problems.join("\n  "))]
pub struct ConfigError {
    pub problems: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKindSpec {
    Constant,
    Decay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceProfile {
    Uniform,
    Cosine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKindSpec,
    pub r0: f64,
    pub delta: f64,
    pub profile: SourceProfile,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub cells: Vec<usize>,
    pub extent: Vec<f64>,
    pub params: ModelParams<f64>,
    pub source: SourceSpec,
    pub u0: InitialSpec,
    pub v0: InitialSpec,
    pub w0: InitialSpec,
    pub control: StepControl<f64>,
    pub horizon: f64,
    pub stride: usize,
    pub kappa: f64,
    /// `None` selects the default ceiling derived from the initial data.
    pub blowup_threshold: Option<f64>,
    pub lp: Vec<f64>,
    pub snapshots: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cells: vec![32, 32],
            extent: vec![1.0, 1.0],
            params: ModelParams {
                chi: 1.0,
                xi: 0.1,
                lambda: 1.0,
                mu: 1.0,
                eta1: 0.0,
                eta2: 0.0,
                m: 2.0,
                l: 2.0,
            },
            source: SourceSpec {
                kind: SourceKindSpec::Constant,
                r0: 1.0,
                delta: 0.0,
                profile: SourceProfile::Uniform,
            },
            u0: InitialSpec::gaussian(0.5, 1.0, 0.15),
            v0: InitialSpec::cosine(1.0, 0.5, 1),
            w0: InitialSpec::constant(1.0),
            control: StepControl::default(),
            horizon: 10.0,
            stride: 10,
            kappa: 1.0,
            blowup_threshold: None,
            lp: vec![2.0],
            snapshots: vec![],
        }
    }
}

const PARAM_KEYS: [&str; 8] = ["chi", "xi", "lambda", "mu", "eta1", "eta2", "m", "l"];
const PRESET_KEYS: [&str; 7] = [
    "kind",
    "base",
    "amplitude",
    "width",
    "mode",
    "modes",
    "seed",
];

fn fmt_list<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_f64(v: &str) -> Result<f64, String> {
    v.parse::<f64>()
        .map_err(|_| format!("expected a number, got {v:?}"))
}

fn parse_int<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse::<T>()
        .map_err(|_| format!("expected a nonnegative integer, got {v:?}"))
}

fn parse_list<T>(v: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    if v.trim().is_empty() {
        return Ok(vec![]);
    }
    v.split(',').map(|s| item(s.trim())).collect()
}

impl RunConfig {
    /// Every key in serialisation order.
    pub fn keys() -> Vec<String> {
        let mut keys: Vec<String> = ["grid.dim", "grid.cells", "grid.extent"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        keys.extend(PARAM_KEYS.iter().map(|k| format!("params.{k}")));
        keys.extend(
            ["source.kind", "source.r0", "source.delta", "source.profile"]
                .iter()
                .map(|s| s.to_string()),
        );
        for field in ["u0", "v0", "w0"] {
            keys.extend(PRESET_KEYS.iter().map(|k| format!("{field}.{k}")));
        }
        keys.extend(
            [
                "control.mode",
                "control.dt_max",
                "control.cfl_safety",
                "control.positivity_floor",
                "run.horizon",
                "run.stride",
                "run.kappa",
                "run.blowup_threshold",
                "run.lp",
                "run.snapshots",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        keys
    }

    /// Whether `key` holds a single number (and so can be swept).
    pub fn is_numeric_key(key: &str) -> bool {
        let Some((section, leaf)) = key.split_once('.') else {
            return false;
        };
        match section {
            "params" => PARAM_KEYS.contains(&leaf),
            "source" => matches!(leaf, "r0" | "delta"),
            "u0" | "v0" | "w0" => PRESET_KEYS.contains(&leaf) && leaf != "kind",
            "control" => matches!(leaf, "dt_max" | "cfl_safety" | "positivity_floor"),
            "run" => matches!(leaf, "horizon" | "stride" | "kappa" | "blowup_threshold"),
            _ => false,
        }
    }

    fn preset_mut(&mut self, name: &str) -> Option<&mut InitialSpec> {
        match name {
            "u0" => Some(&mut self.u0),
            "v0" => Some(&mut self.v0),
            "w0" => Some(&mut self.w0),
            _ => None,
        }
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        let (section, leaf) = key
            .split_once('.')
            .ok_or_else(|| format!("unknown key {key:?}"))?;
        match (section, leaf) {
            ("grid", "dim") => {
                let dim: usize = parse_int(value)?;
                if dim != self.cells.len() {
                    // Resize the axis lists so that `dim` may precede or follow them.
                    self.cells.resize(dim, *self.cells.first().unwrap_or(&32));
                    self.extent
                        .resize(dim, *self.extent.first().unwrap_or(&1.0));
                }
            }
            ("grid", "cells") => self.cells = parse_list(value, parse_int)?,
            ("grid", "extent") => self.extent = parse_list(value, parse_f64)?,
            ("params", k) if PARAM_KEYS.contains(&k) => {
                let x = parse_f64(value)?;
                let p = &mut self.params;
                *match k {
                    "chi" => &mut p.chi,
                    "xi" => &mut p.xi,
                    "lambda" => &mut p.lambda,
                    "mu" => &mut p.mu,
                    "eta1" => &mut p.eta1,
                    "eta2" => &mut p.eta2,
                    "m" => &mut p.m,
                    _ => &mut p.l,
                } = x;
            }
            ("source", "kind") => {
                self.source.kind = match value {
                    "constant" => SourceKindSpec::Constant,
                    "decay" => SourceKindSpec::Decay,
                    _ => {
                        return Err(format!(
                            "source.kind must be constant or decay, got {value:?}"
                        ))
                    }
                }
            }
            ("source", "r0") => self.source.r0 = parse_f64(value)?,
            ("source", "delta") => self.source.delta = parse_f64(value)?,
            ("source", "profile") => {
                self.source.profile = match value {
                    "uniform" => SourceProfile::Uniform,
                    "cosine" => SourceProfile::Cosine,
                    _ => {
                        return Err(format!(
                            "source.profile must be uniform or cosine, got {value:?}"
                        ))
                    }
                }
            }
            ("u0" | "v0" | "w0", k) if PRESET_KEYS.contains(&k) => {
                let spec = self.preset_mut(section).expect("preset section");
                match k {
                    "kind" => {
                        spec.kind = PresetKind::parse(value).ok_or_else(|| {
                            format!(
                                "{section}.kind must be constant, cosine-bump, gaussian-bump or random-smooth, got {value:?}"
                            )
                        })?
                    }
                    "base" => spec.base = parse_f64(value)?,
                    "amplitude" => spec.amplitude = parse_f64(value)?,
                    "width" => spec.width = parse_f64(value)?,
                    "mode" => spec.mode = parse_int(value)?,
                    "modes" => spec.modes = parse_int(value)?,
                    _ => spec.seed = parse_int(value)?,
                }
            }
            ("control", "mode") => {
                self.control.mode = match value {
                    "explicit" => StepMode::Explicit,
                    "imex" => StepMode::ImexDiffusion,
                    _ => {
                        return Err(format!(
                            "control.mode must be explicit or imex, got {value:?}"
                        ))
                    }
                }
            }
            ("control", "dt_max") => self.control.dt_max = parse_f64(value)?,
            ("control", "cfl_safety") => self.control.cfl_safety = parse_f64(value)?,
            ("control", "positivity_floor") => self.control.positivity_floor = parse_f64(value)?,
            ("run", "horizon") => self.horizon = parse_f64(value)?,
            ("run", "stride") => self.stride = parse_int(value)?,
            ("run", "kappa") => self.kappa = parse_f64(value)?,
            ("run", "blowup_threshold") => {
                self.blowup_threshold = if value == "auto" {
                    None
                } else {
                    Some(parse_f64(value)?)
                }
            }
            ("run", "lp") => self.lp = parse_list(value, parse_f64)?,
            ("run", "snapshots") => self.snapshots = parse_list(value, parse_f64)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Textual value of one key, as written by [`RunConfig::to_text`].
    pub fn get(&self, key: &str) -> Option<String> {
        let (section, leaf) = key.split_once('.')?;
        let p = &self.params;
        Some(match (section, leaf) {
            ("grid", "dim") => self.cells.len().to_string(),
            ("grid", "cells") => fmt_list(&self.cells),
            ("grid", "extent") => fmt_list(&self.extent),
            ("params", "chi") => p.chi.to_string(),
            ("params", "xi") => p.xi.to_string(),
            ("params", "lambda") => p.lambda.to_string(),
            ("params", "mu") => p.mu.to_string(),
            ("params", "eta1") => p.eta1.to_string(),
            ("params", "eta2") => p.eta2.to_string(),
            ("params", "m") => p.m.to_string(),
            ("params", "l") => p.l.to_string(),
            ("source", "kind") => match self.source.kind {
                SourceKindSpec::Constant => "constant".into(),
                SourceKindSpec::Decay => "decay".into(),
            },
            ("source", "r0") => self.source.r0.to_string(),
            ("source", "delta") => self.source.delta.to_string(),
            ("source", "profile") => match self.source.profile {
                SourceProfile::Uniform => "uniform".into(),
                SourceProfile::Cosine => "cosine".into(),
            },
            ("u0" | "v0" | "w0", k) => {
                let s = match section {
                    "u0" => &self.u0,
                    "v0" => &self.v0,
                    _ => &self.w0,
                };
                match k {
                    "kind" => s.kind.name().into(),
                    "base" => s.base.to_string(),
                    "amplitude" => s.amplitude.to_string(),
                    "width" => s.width.to_string(),
                    "mode" => s.mode.to_string(),
                    "modes" => s.modes.to_string(),
                    "seed" => s.seed.to_string(),
                    _ => return None,
                }
            }
            ("control", "mode") => match self.control.mode {
                StepMode::Explicit => "explicit".into(),
                StepMode::ImexDiffusion => "imex".into(),
            },
            ("control", "dt_max") => self.control.dt_max.to_string(),
            ("control", "cfl_safety") => self.control.cfl_safety.to_string(),
            ("control", "positivity_floor") => self.control.positivity_floor.to_string(),
            ("run", "horizon") => self.horizon.to_string(),
            ("run", "stride") => self.stride.to_string(),
            ("run", "kappa") => self.kappa.to_string(),
            ("run", "blowup_threshold") => self
                .blowup_threshold
                .map_or("auto".into(), |x| x.to_string()),
            ("run", "lp") => fmt_list(&self.lp),
            ("run", "snapshots") => fmt_list(&self.snapshots),
            _ => return None,
        })
    }

    /// Complete configuration text; parsing it yields `self` again.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut section = String::new();
        for key in Self::keys() {
            let this = key.split_once('.').map_or("", |(s, _)| s);
            if !section.is_empty() && this != section {
                out.push('\n');
            }
            section = this.to_string();
            let value = self.get(&key).expect("listed key");
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    /// Parses and validates configuration text; all problems are reported
    /// together.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut problems = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut declared_dim: Option<usize> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                problems.push(format!("line {}: expected `key = value`", n + 1));
                continue;
            };
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                problems.push(format!("line {}: duplicate key {key:?}", n + 1));
                continue;
            }
            if key == "grid.dim" {
                declared_dim = value.trim().parse().ok();
            }
            if let Err(e) = cfg.set(key, value) {
                problems.push(format!("line {}: {e}", n + 1));
            }
        }
        if let Some(d) = declared_dim {
            if cfg.cells.len() != d || cfg.extent.len() != d {
                problems.push(format!(
                    "grid.dim = {d} disagrees with {} cell counts and {} extents",
                    cfg.cells.len(),
                    cfg.extent.len()
                ));
            }
        }
        problems.extend(cfg.problems());
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError { problems })
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            problems: vec![format!("cannot read {}: {e}", path.display())],
        })?;
        Self::parse(&text)
    }

    /// Every validation problem, empty when the config is runnable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = Grid::<f64>::new(&self.cells, &self.extent) {
            out.push(format!("grid: {e}"));
        }
        if let Err(errs) = self.params.validate_allowing_zero() {
            out.extend(errs.into_iter().map(|e| format!("params: {e}")));
        }
        if !(self.source.r0 >= 0.0 && self.source.r0.is_finite()) {
            out.push("source.r0 must be nonnegative".into());
        }
        if !(self.source.delta >= 0.0 && self.source.delta.is_finite()) {
            out.push("source.delta must be nonnegative".into());
        }
        out.extend(self.u0.problems("u0"));
        out.extend(self.v0.problems("v0"));
        out.extend(self.w0.problems("w0"));
        if let Err(e) = self.control.validate() {
            out.push(format!("control: {e}"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            out.push(format!(
                "run.horizon must be positive and finite, got {}",
                self.horizon
            ));
        }
        if self.stride == 0 {
            out.push("run.stride must be at least 1".into());
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            out.push("run.kappa must be positive".into());
        }
        if let Some(b) = self.blowup_threshold {
            if !(b > 0.0) {
                out.push("run.blowup_threshold must be positive or auto".into());
            }
        }
        if let Some(q) = self.lp.iter().find(|&&q| !(q >= 1.0 && q.is_finite())) {
            out.push(format!("run.lp exponents must be at least 1, got {q}"));
        }
        if let Some(s) = self
            .snapshots
            .iter()
            .find(|&&s| !(s >= 0.0 && s <= self.horizon))
        {
            out.push(format!(
                "run.snapshots times must lie in [0, horizon], got {s}"
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { problems })
        }
    }

    pub fn grid(&self) -> Result<Grid<f64>, ConfigError> {
        Grid::new(&self.cells, &self.extent).map_err(|e| ConfigError {
            problems: vec![format!("grid: {e}")],
        })
    }

    pub fn initial_fields(&self, grid: Grid<f64>) -> [Field<f64>; 3] {
        [
            self.u0.build(grid),
            self.v0.build(grid),
            self.w0.build(grid),
        ]
    }

    pub fn nutrient_source(&self, grid: Grid<f64>) -> Result<NutrientSource<f64>, ConfigError> {
        let wrap = |e: crate::model::ModelError| ConfigError {
            problems: vec![format!("source: {e}")],
        };
        let base = match self.source.kind {
            SourceKindSpec::Constant => NutrientSource::constant(self.source.r0),
            SourceKindSpec::Decay => NutrientSource::decaying(self.source.r0, self.source.delta),
        }
        .map_err(wrap)?;
        match self.source.profile {
            SourceProfile::Uniform => Ok(base),
            SourceProfile::Cosine => {
                let ext = grid.extent().to_vec();
                let dim = grid.dim();
                let g = Field::from_fn(grid, |x| {
                    (0..dim)
                        .map(|a| 1.0 + 0.5 * (std::f64::consts::PI * x[a] / ext[a]).cos())
                        .product()
                });
                base.with_profile(g).map_err(wrap)
            }
        }
    }
}
