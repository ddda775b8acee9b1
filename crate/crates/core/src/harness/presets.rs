//! Smooth nonnegative initial data.
//!
//! Each preset's norms are known in closed form (on a domain `Ω` of sides
//! `L_a`, wave number `k`):
//!
//! | preset          | sup                | ∫                          | max gradient            |
//! |-----------------|--------------------|----------------------------|-------------------------|
//! | constant        | `base`             | `base |Ω|`                 | 0                       |
//! | cosine-bump     | `base + amp`       | `base |Ω|`                 | `amp k π / min L_a`     |
//! | gaussian-bump   | `base + amp`       | `≈ base |Ω| + amp (2π σ²)^{n/2}` | `amp e^{-1/2} / σ` |
//! | random-smooth   | `≤ base + amp`     | `base |Ω|`                 | `≤ amp π modes / min L_a` |
//!
//! The cosine and random presets need `base >= amp` to stay nonnegative.
//! Sampled values sit at cell centres, so the discrete sup can fall slightly
//! below the tabulated one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Field, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetKind {
    Constant,
    CosineBump,
    GaussianBump,
    RandomSmooth,
}

impl PresetKind {
    pub fn name(&self) -> &'static str {
        match self {
            PresetKind::Constant => "constant",
            PresetKind::CosineBump => "cosine-bump",
            PresetKind::GaussianBump => "gaussian-bump",
            PresetKind::RandomSmooth => "random-smooth",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "constant" => PresetKind::Constant,
            "cosine-bump" => PresetKind::CosineBump,
            "gaussian-bump" => PresetKind::GaussianBump,
            "random-smooth" => PresetKind::RandomSmooth,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialSpec {
    pub kind: PresetKind,
    pub base: f64,
    pub amplitude: f64,
    /// Gaussian standard deviation.
    pub width: f64,
    /// Cosine wave number.
    pub mode: u32,
    /// Highest wave number per axis of the random mixture.
    pub modes: u32,
    pub seed: u64,
}

impl InitialSpec {
    pub fn constant(base: f64) -> Self {
        Self {
            kind: PresetKind::Constant,
            base,
            amplitude: 0.0,
            width: 0.1,
            mode: 1,
            modes: 4,
            seed: 0,
        }
    }

    pub fn cosine(base: f64, amplitude: f64, mode: u32) -> Self {
        Self {
            kind: PresetKind::CosineBump,
            amplitude,
            mode,
            ..Self::constant(base)
        }
    }

    pub fn gaussian(base: f64, amplitude: f64, width: f64) -> Self {
        Self {
            kind: PresetKind::GaussianBump,
            amplitude,
            width,
            ..Self::constant(base)
        }
    }

    pub fn random(base: f64, amplitude: f64, modes: u32, seed: u64) -> Self {
        Self {
            kind: PresetKind::RandomSmooth,
            amplitude,
            modes,
            seed,
            ..Self::constant(base)
        }
    }

    /// Problems with this spec, prefixed by `name`.
    pub fn problems(&self, name: &str) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.base >= 0.0 && self.base.is_finite()) {
            out.push(format!("{name}.base must be nonnegative"));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            out.push(format!("{name}.amplitude must be nonnegative"));
        }
        match self.kind {
            PresetKind::CosineBump | PresetKind::RandomSmooth if self.amplitude > self.base => out
                .push(format!(
                    "{name}: {} needs base >= amplitude to stay nonnegative",
                    self.kind.name()
                )),
            PresetKind::GaussianBump if !(self.width > 0.0 && self.width.is_finite()) => {
                out.push(format!("{name}.width must be positive"))
            }
            PresetKind::RandomSmooth if self.modes == 0 => {
                out.push(format!("{name}.modes must be at least 1"))
            }
            _ => {}
        }
        out
    }

    pub fn build(&self, grid: Grid<f64>) -> Field<f64> {
        let ext = grid.extent().to_vec();
        let dim = grid.dim();
        let pi = std::f64::consts::PI;
        match self.kind {
            PresetKind::Constant => Field::constant(grid, self.base),
            PresetKind::CosineBump => {
                let k = self.mode as f64;
                Field::from_fn(grid, |x| {
                    let prod: f64 = (0..dim).map(|a| (k * pi * x[a] / ext[a]).cos()).product();
                    self.base + self.amplitude * prod
                })
            }
            PresetKind::GaussianBump => {
                let s2 = 2.0 * self.width * self.width;
                Field::from_fn(grid, |x| {
                    let r2: f64 = (0..dim).map(|a| (x[a] - 0.5 * ext[a]).powi(2)).sum();
                    self.base + self.amplitude * (-r2 / s2).exp()
                })
            }
            PresetKind::RandomSmooth => {
                let terms = random_modes(dim, self.modes, self.seed);
                let norm: f64 = terms.iter().map(|t| t.2.abs()).sum();
                Field::from_fn(grid, |x| {
                    let s: f64 = terms
                        .iter()
                        .map(|&(k, l, a)| {
                            let cy = if dim == 2 {
                                (l as f64 * pi * x[1] / ext[1]).cos()
                            } else {
                                1.0
                            };
                            a * (k as f64 * pi * x[0] / ext[0]).cos() * cy
                        })
                        .sum();
                    self.base + self.amplitude * s / norm
                })
            }
        }
    }
}

/// Coefficients of a random low-frequency cosine mixture with zero mean.
/// Mode `(k, l)` gets a uniform weight in `[-1, 1]` damped by `1 / (1 + k + l)`.
pub fn random_modes(dim: usize, modes: u32, seed: u64) -> Vec<(u32, u32, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lmax = if dim == 2 { modes } else { 0 };
    let mut out = Vec::new();
    for k in 0..=modes {
        for l in 0..=lmax {
            if k == 0 && l == 0 {
                continue;
            }
            let a: f64 = rng.gen_range(-1.0..=1.0);
            out.push((k, l, a / (1.0 + k as f64 + l as f64)));
        }
    }
    out
}
