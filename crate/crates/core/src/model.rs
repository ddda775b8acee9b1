//! Coefficients, state and nutrient source of the forager-exploiter system
//!
//! ```text
//! u_t = Δu - χ ∇·(u ∇w) + η1 (u - u^m)
//! v_t = Δv - ξ ∇·(v ∇u) + η2 (v - v^l)
//! w_t = Δw - λ (u + v) w - μ w + r(x, t)
//! ```
//!
//! with no-flux boundaries, together with the bootstrap constants used to
//! state the small-data and weak-taxis regimes.

use thiserror::Error;

use crate::diagnostics::{sup_norm, w1p_norm, w2p_norm};
use crate::grid::{Field, Grid};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be nonnegative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("exponent {name} must exceed 1, got {value}")]
    Exponent { name: &'static str, value: f64 },
    #[error("spatial dimension must be at least 1, got {0}")]
    Dimension(usize),
    #[error("initial field {0} is identically zero")]
    ZeroInitial(&'static str),
    #[error("initial field {0} has negative entries")]
    NegativeInitial(&'static str),
    #[error("fields are not on the same grid")]
    GridMismatch,
    #[error("source profile must be nonnegative and finite")]
    SourceProfile,
    #[error("the two equivalent forms of the damping condition disagree at m={m}, l={l}")]
    ConditionFormsDisagree { m: f64, l: f64 },
}

fn positive<T: Scalar>(name: &'static str, value: T) -> Result<(), ModelError> {
    if value > T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NotPositive {
            name,
            value: value.as_f64(),
        })
    }
}

fn nonnegative<T: Scalar>(name: &'static str, value: T) -> Result<(), ModelError> {
    if value >= T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Negative {
            name,
            value: value.as_f64(),
        })
    }
}

fn above_one<T: Scalar>(name: &'static str, value: T) -> Result<(), ModelError> {
    if value > T::one() && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Exponent {
            name,
            value: value.as_f64(),
        })
    }
}

/// PDE coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T> {
    /// Forager taxis strength towards the nutrient.
    pub chi: T,
    /// Exploiter taxis strength towards the foragers.
    pub xi: T,
    /// Consumption rate.
    pub lambda: T,
    /// Nutrient decay.
    pub mu: T,
    pub eta1: T,
    pub eta2: T,
    /// Forager degradation exponent.
    pub m: T,
    /// Exploiter degradation exponent.
    pub l: T,
}

impl<T: Scalar> ModelParams<T> {
    /// Checks the coefficient ranges of the model: `χ, ξ, λ, μ > 0`,
    /// `η1, η2 >= 0`, `m, l > 1`. Collects every violation.
    pub fn validate(&self) -> Result<(), Vec<ModelError>> {
        self.collect(true)
    }

    /// Like [`validate`](Self::validate) but lets `χ, ξ, λ, μ` vanish, which
    /// switches the corresponding mechanism off.
    pub fn validate_allowing_zero(&self) -> Result<(), Vec<ModelError>> {
        self.collect(false)
    }

    /// True when every coefficient lies in the strict model ranges.
    pub fn is_strict(&self) -> bool {
        self.validate().is_ok()
    }

    fn collect(&self, strict: bool) -> Result<(), Vec<ModelError>> {
        let rate = |name, v| {
            if strict {
                positive(name, v)
            } else {
                nonnegative(name, v)
            }
        };
        let errs: Vec<ModelError> = [
            rate("chi", self.chi),
            rate("xi", self.xi),
            rate("lambda", self.lambda),
            rate("mu", self.mu),
            nonnegative("eta1", self.eta1),
            nonnegative("eta2", self.eta2),
            above_one("m", self.m),
            above_one("l", self.l),
        ]
        .into_iter()
        .filter_map(Result::err)
        .collect();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceKind<T> {
    Constant,
    /// `r(x, t) = r0 * exp(-delta * t) * g(x)`.
    SeparableDecay {
        delta: T,
    },
}

/// Nonnegative nutrient production `r(x, t)`, bounded by `r_star`.
#[derive(Clone, Debug, PartialEq)]
pub struct NutrientSource<T> {
    kind: SourceKind<T>,
    r0: T,
    profile: Option<Field<T>>,
    r_star: T,
}

impl<T: Scalar> NutrientSource<T> {
    pub fn constant(r0: T) -> Result<Self, ModelError> {
        nonnegative("r0", r0)?;
        Ok(Self {
            kind: SourceKind::Constant,
            r0,
            profile: None,
            r_star: r0,
        })
    }

    pub fn decaying(r0: T, delta: T) -> Result<Self, ModelError> {
        nonnegative("r0", r0)?;
        nonnegative("delta", delta)?;
        Ok(Self {
            kind: SourceKind::SeparableDecay { delta },
            r0,
            profile: None,
            r_star: r0,
        })
    }

    /// Replaces the uniform spatial profile with `g`.
    pub fn with_profile(mut self, g: Field<T>) -> Result<Self, ModelError> {
        if !g.values().iter().all(|&v| v >= T::zero() && v.is_finite()) {
            return Err(ModelError::SourceProfile);
        }
        self.r_star = self.r0 * g.max();
        self.profile = Some(g);
        Ok(self)
    }

    pub fn kind(&self) -> SourceKind<T> {
        self.kind
    }

    pub fn r0(&self) -> T {
        self.r0
    }

    pub fn profile(&self) -> Option<&Field<T>> {
        self.profile.as_ref()
    }

    /// Supremum of the source over space and time.
    pub fn r_star(&self) -> T {
        self.r_star
    }

    fn amplitude(&self, t: T) -> T {
        match self.kind {
            SourceKind::Constant => self.r0,
            SourceKind::SeparableDecay { delta } => self.r0 * (-delta * t).exp(),
        }
    }

    /// Writes `r(·, t)` into `out`.
    pub fn evaluate_into(&self, t: T, out: &mut [T]) {
        let a = self.amplitude(t);
        match &self.profile {
            Some(g) => out
                .iter_mut()
                .zip(g.values())
                .for_each(|(o, &gv)| *o = a * gv),
            None => out.iter_mut().for_each(|o| *o = a),
        }
    }

    pub fn evaluate(&self, grid: Grid<T>, t: T) -> Field<T> {
        let mut f = Field::zeros(grid);
        self.evaluate_into(t, f.values_mut());
        f
    }
}

/// The three densities at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct State<T> {
    pub t: T,
    pub u: Field<T>,
    pub v: Field<T>,
    pub w: Field<T>,
}

impl<T: Scalar> State<T> {
    pub fn new(t: T, u: Field<T>, v: Field<T>, w: Field<T>) -> Result<Self, ModelError> {
        if u.grid() != v.grid() || u.grid() != w.grid() {
            return Err(ModelError::GridMismatch);
        }
        Ok(Self { t, u, v, w })
    }

    pub fn grid(&self) -> &Grid<T> {
        self.u.grid()
    }

    pub fn fields(&self) -> [&Field<T>; 3] {
        [&self.u, &self.v, &self.w]
    }
}

/// Bootstrap constants of the small-data regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeQuantities<T> {
    /// Smallest integer strictly above `n / 2`.
    pub p: u32,
    /// `2 ||u0||_inf`.
    pub a: T,
    /// `2 ||v0||_inf`.
    pub b: T,
    /// `max(||w0||_inf, r_star / mu)`.
    pub q: T,
    /// `(A + B + 1) (||w0||_{W1,2(p+1)} + r_star)`.
    pub g0: T,
    /// `(A + B + 1) Q + ||w0||_{W2,p+1} + r_star`.
    pub h0: T,
    pub r_star: T,
    /// Stand-in for the existential smallness constant; calibrated empirically.
    pub kappa: T,
    /// `||u0||_{W1,2p}`, needed by the exploiter smallness threshold.
    pub u0_w1_2p: T,
}

impl<T: Scalar> RegimeQuantities<T> {
    /// Default blow-up ceiling: `1e6 * max(A, B, Q, 1)`.
    pub fn default_blowup_threshold(&self) -> T {
        T::lit(1e6) * self.a.max(self.b).max(self.q).max(T::one())
    }
}

/// Smallest integer strictly greater than `n / 2`.
pub fn sobolev_exponent(n: usize) -> Result<u32, ModelError> {
    if n < 1 {
        return Err(ModelError::Dimension(n));
    }
    Ok((n / 2 + 1) as u32)
}

fn check_initial<T: Scalar>(
    name: &'static str,
    f: &Field<T>,
    allow_zero: bool,
) -> Result<(), ModelError> {
    if f.values().iter().any(|&v| v < T::zero() || !v.is_finite()) {
        return Err(ModelError::NegativeInitial(name));
    }
    if !allow_zero && f.values().iter().all(|&v| v == T::zero()) {
        return Err(ModelError::ZeroInitial(name));
    }
    Ok(())
}

/// Evaluates the bootstrap constants from the initial data.
///
/// `u0` and `v0` must not vanish identically; `w0 ≡ 0` is accepted so that a
/// nutrient-free start (with `r_star = 0`) yields `Q = G0 = H0 = 0`.
pub fn compute_regime_quantities<T: Scalar>(
    params: &ModelParams<T>,
    source: &NutrientSource<T>,
    u0: &Field<T>,
    v0: &Field<T>,
    w0: &Field<T>,
    kappa: T,
) -> Result<RegimeQuantities<T>, ModelError> {
    positive("kappa", kappa)?;
    nonnegative("mu", params.mu)?;
    if u0.grid() != v0.grid() || u0.grid() != w0.grid() {
        return Err(ModelError::GridMismatch);
    }
    check_initial("u0", u0, false)?;
    check_initial("v0", v0, false)?;
    check_initial("w0", w0, true)?;

    let p = sobolev_exponent(u0.grid().dim())?;
    let pf = T::from_u32(p).expect("small integer");
    let two = T::lit(2.0);
    let one = T::one();
    let r_star = source.r_star();
    let a = two * sup_norm(u0);
    let b = two * sup_norm(v0);
    let relaxed = if r_star == T::zero() {
        T::zero()
    } else {
        r_star / params.mu
    };
    let q = sup_norm(w0).max(relaxed);
    let w0_w1 = w1p_norm(w0, two * (pf + one)).expect("exponent >= 1");
    let w0_w2 = w2p_norm(w0, pf + one).expect("exponent >= 1");
    let u0_w1_2p = w1p_norm(u0, two * pf).expect("exponent >= 1");
    let scale = a + b + one;
    Ok(RegimeQuantities {
        p,
        a,
        b,
        q,
        g0: scale * (w0_w1 + r_star),
        h0: scale * q + w0_w2 + r_star,
        r_star,
        kappa,
        u0_w1_2p,
    })
}

/// Whether the degradation exponents satisfy
/// `m, l >= 2` and `l >= max(3, 3 m~ / (2 m~ - 3))` with `m~ = min(m, l)`.
///
/// The equivalent disjunction `2 <= m < 3 and l >= 3m/(2m-3)`, or `m, l >= 3`,
/// is evaluated alongside; disagreement is reported as an error.
pub fn damping_exponents_admissible<T: Scalar>(m: T, l: T) -> Result<bool, ModelError> {
    above_one("m", m)?;
    above_one("l", l)?;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let mt = m.min(l);
    let primary = m >= two && l >= two && l >= three.max(three * mt / (two * mt - three));
    let alternate =
        (m >= two && m < three && l >= three * m / (two * m - three)) || (m >= three && l >= three);
    if primary != alternate {
        return Err(ModelError::ConditionFormsDisagree {
            m: m.as_f64(),
            l: l.as_f64(),
        });
    }
    Ok(primary)
}

/// Both sides of the two taxis smallness inequalities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaxisSmallness<T> {
    pub chi: T,
    /// `kappa / G0`; infinite when `G0 = 0`.
    pub chi_threshold: T,
    pub xi: T,
    /// `kappa / (||u0||_{W1,2p} [(χ G0)^{2(p+1)} + (χ H0)^{p+1} + 1]^{1/(2p)})`.
    pub xi_threshold: T,
}

impl<T: Scalar> TaxisSmallness<T> {
    pub fn chi_ok(&self) -> bool {
        self.chi <= self.chi_threshold
    }

    pub fn xi_ok(&self) -> bool {
        self.xi <= self.xi_threshold
    }

    pub fn holds(&self) -> bool {
        self.chi_ok() && self.xi_ok()
    }
}

/// Exploiter threshold for a given forager taxis strength.
pub fn xi_threshold<T: Scalar>(q: &RegimeQuantities<T>, chi: T) -> T {
    let pf = T::from_u32(q.p).expect("small integer");
    let one = T::one();
    let two = T::lit(2.0);
    let bracket = (chi * q.g0).powf(two * (pf + one)) + (chi * q.h0).powf(pf + one) + one;
    let denom = q.u0_w1_2p * bracket.powf((two * pf).recip());
    if denom == T::zero() {
        T::infinity()
    } else {
        q.kappa / denom
    }
}

/// Evaluates the taxis smallness conditions exactly as stated; a vanishing
/// `G0` makes the forager condition hold trivially.
pub fn taxis_smallness<T: Scalar>(
    q: &RegimeQuantities<T>,
    params: &ModelParams<T>,
) -> TaxisSmallness<T> {
    let chi_threshold = if q.g0 == T::zero() {
        T::infinity()
    } else {
        q.kappa / q.g0
    };
    TaxisSmallness {
        chi: params.chi,
        chi_threshold,
        xi: params.xi,
        xi_threshold: xi_threshold(q, params.chi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams<f64> {
        ModelParams {
            chi: 1.0,
            xi: 1.0,
            lambda: 1.0,
            mu: 1.0,
            eta1: 0.0,
            eta2: 0.0,
            m: 2.0,
            l: 2.0,
        }
    }

    fn quantities(kappa: f64, g0: f64) -> RegimeQuantities<f64> {
        RegimeQuantities {
            p: 2,
            a: 1.0,
            b: 1.0,
            q: 1.0,
            g0,
            h0: 1.0,
            r_star: 0.0,
            kappa,
            u0_w1_2p: 1.0,
        }
    }

    #[test]
    fn sobolev_exponent_table() {
        assert_eq!(sobolev_exponent(1), Ok(1));
        assert_eq!(sobolev_exponent(2), Ok(2));
        assert_eq!(sobolev_exponent(3), Ok(2));
        assert_eq!(sobolev_exponent(4), Ok(3));
        assert_eq!(sobolev_exponent(0), Err(ModelError::Dimension(0)));
        for n in 1..=64usize {
            let p = sobolev_exponent(n).unwrap() as f64;
            assert!(p > n as f64 / 2.0 && p - 1.0 <= n as f64 / 2.0);
        }
    }

    #[test]
    fn params_validation_lists_everything() {
        let mut p = params();
        assert!(p.validate().is_ok());
        p.chi = 0.0;
        p.eta2 = -1.0;
        p.l = 1.0;
        assert_eq!(p.validate().unwrap_err().len(), 3);
        assert_eq!(p.validate_allowing_zero().unwrap_err().len(), 2);
    }

    #[test]
    fn q_examples() {
        let g = Grid::rect([4, 4], [1.0, 1.0]).unwrap();
        let one = Field::constant(g, 1.0);
        let two = Field::constant(g, 2.0);
        let rq = |r: f64| {
            compute_regime_quantities(
                &params(),
                &NutrientSource::constant(r).unwrap(),
                &one,
                &one,
                &two,
                1.0,
            )
            .unwrap()
        };
        assert_eq!(rq(3.0).q, 3.0);
        assert_eq!(rq(1.0).q, 2.0);

        let q = compute_regime_quantities(
            &params(),
            &NutrientSource::constant(0.0).unwrap(),
            &one,
            &one,
            &Field::zeros(g),
            1.0,
        )
        .unwrap();
        assert_eq!((q.a, q.b, q.q, q.g0, q.h0), (2.0, 2.0, 0.0, 0.0, 0.0));
        assert_eq!(q.p, 2);

        let err = compute_regime_quantities(
            &params(),
            &NutrientSource::constant(0.0).unwrap(),
            &Field::zeros(g),
            &one,
            &one,
            1.0,
        );
        assert_eq!(err, Err(ModelError::ZeroInitial("u0")));
    }

    #[test]
    fn damping_examples() {
        assert_eq!(damping_exponents_admissible(2.0, 6.0), Ok(true));
        assert_eq!(damping_exponents_admissible(3.0, 3.0), Ok(true));
        assert_eq!(damping_exponents_admissible(2.0, 5.0), Ok(false));
        assert_eq!(damping_exponents_admissible(4.0, 2.5), Ok(false));
        assert!(damping_exponents_admissible(1.0, 3.0).is_err());
    }

    #[test]
    fn smallness_examples() {
        let mut p = params();
        p.chi = 0.4;
        let s = taxis_smallness(&quantities(1.0, 2.0), &p);
        assert!(s.chi_ok());
        assert_eq!(s.chi_threshold, 0.5);
        p.chi = 0.6;
        assert!(!taxis_smallness(&quantities(1.0, 2.0), &p).chi_ok());
        p.chi = 0.0;
        p.xi = 0.0;
        assert!(taxis_smallness(&quantities(1.0, 2.0), &p).holds());
        p.chi = 1e3;
        let s = taxis_smallness(&quantities(1.0, 0.0), &p);
        assert!(s.chi_threshold.is_infinite() && s.chi_ok());
    }

    #[test]
    fn source_evaluation() {
        let g = Grid::line(8, 1.0).unwrap();
        assert!(NutrientSource::constant(0.0)
            .unwrap()
            .evaluate(g, 3.0)
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let profile = Field::from_fn(g, |x| 1.0 + x[0]);
        let s = NutrientSource::decaying(2.0, std::f64::consts::LN_2)
            .unwrap()
            .with_profile(profile.clone())
            .unwrap();
        assert_eq!(s.evaluate(g, 0.0), profile.scale(2.0));
        let half = s.evaluate(g, 1.0);
        for (a, b) in half.values().iter().zip(profile.values()) {
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b);
        }
        assert_eq!(s.r_star(), 2.0 * profile.max());
        assert!(NutrientSource::constant(1.0)
            .unwrap()
            .with_profile(Field::constant(g, -1.0))
            .is_err());
        assert!(NutrientSource::<f64>::constant(-1.0).is_err());
    }
}
