//! Time stepping for the forager-exploiter system.
//!
//! Both taxis terms use donor-cell upwinding in conservative flux form, so the
//! cell sums of `u` and `v` change only through their reaction terms. All
//! three equations are updated simultaneously from the old state.

mod implicit;

pub use implicit::NeumannHelmholtz;

use thiserror::Error;

use crate::grid::{divergence_into, face_gradients_into, FaceField, Field, Grid};
use crate::model::{ModelParams, NutrientSource, State};
use crate::scalar::Scalar;

/// Entries above `-NEGATIVE_TOLERANCE` count as roundoff, not scheme failure.
pub const NEGATIVE_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("blow-up at t={t}: max entry {max}")]
    BlowUp { t: f64, max: f64 },
    #[error("negative density {value} in {field} at t={t}")]
    NegativeDensity {
        field: &'static str,
        t: f64,
        value: f64,
    },
    #[error("t_end={t_end} precedes current time {t}")]
    BackwardsInTime { t: f64, t_end: f64 },
    #[error("invalid step control: {0}")]
    Control(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    /// Forward Euler for every term.
    Explicit,
    /// Backward Euler for diffusion, forward Euler for taxis and reactions.
    ImexDiffusion,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl<T> {
    pub dt_max: T,
    /// Fraction of each single-mechanism stability limit; in `(0, 1)`.
    pub cfl_safety: T,
    /// Negative entries no deeper than this are reset to zero (and counted).
    /// Zero disables clipping.
    pub positivity_floor: T,
    pub mode: StepMode,
    /// Any entry above this, or any non-finite entry, raises blow-up.
    pub blowup_threshold: T,
}

impl<T: Scalar> Default for StepControl<T> {
    fn default() -> Self {
        Self {
            dt_max: T::lit(0.1),
            cfl_safety: T::lit(0.4),
            positivity_floor: T::zero(),
            mode: StepMode::Explicit,
            blowup_threshold: T::infinity(),
        }
    }
}

impl<T: Scalar> StepControl<T> {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt_max > T::zero()) {
            return Err(SolverError::Control("dt_max must be positive"));
        }
        if !(self.cfl_safety > T::zero() && self.cfl_safety < T::one()) {
            return Err(SolverError::Control("cfl_safety must lie in (0, 1)"));
        }
        if !(self.positivity_floor >= T::zero()) {
            return Err(SolverError::Control("positivity_floor must be nonnegative"));
        }
        if !(self.blowup_threshold > T::zero()) {
            return Err(SolverError::Control("blowup_threshold must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport<T> {
    pub dt_used: T,
    /// Largest taxis face velocity of either population.
    pub max_face_speed: T,
    pub any_negative: bool,
    /// Cells reset by the positivity floor.
    pub clipped: usize,
    /// Cell integrals of `u`, `v`, `w` after the step.
    pub post_masses: [T; 3],
}

/// Why [`advance_to`] stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Reached,
    BlowUp {
        t: f64,
        max: f64,
    },
    NegativeDensity {
        field: &'static str,
        t: f64,
        value: f64,
    },
}

impl Termination {
    pub fn is_blow_up(&self) -> bool {
        matches!(self, Termination::BlowUp { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::Reached => "reached",
            Termination::BlowUp { .. } => "blow-up",
            Termination::NegativeDensity { .. } => "negative-density",
        }
    }
}

/// Writes donor-cell fluxes `carrier_up * velocity` for every face.
fn upwind_flux_into<T: Scalar>(
    grid: &Grid<T>,
    carrier: &[T],
    velocity: &FaceField<T>,
    out: &mut FaceField<T>,
) {
    let (n0, n1) = grid.shape();
    {
        let vel = velocity.axis(0);
        let f = out.axis_mut(0);
        for k in 0..=n0 {
            for j in 0..n1 {
                let idx = k * n1 + j;
                let a = vel[idx];
                f[idx] = if k == 0 || k == n0 {
                    T::zero()
                } else if a > T::zero() {
                    a * carrier[(k - 1) * n1 + j]
                } else {
                    a * carrier[k * n1 + j]
                };
            }
        }
    }
    if grid.dim() == 2 {
        let vel = velocity.axis(1);
        let f = out.axis_mut(1);
        let stride = n1 + 1;
        for i in 0..n0 {
            for k in 0..=n1 {
                let idx = i * stride + k;
                let a = vel[idx];
                f[idx] = if k == 0 || k == n1 {
                    T::zero()
                } else if a > T::zero() {
                    a * carrier[i * n1 + k - 1]
                } else {
                    a * carrier[i * n1 + k]
                };
            }
        }
    }
}

fn scale_faces<T: Scalar>(src: &FaceField<T>, c: T, out: &mut FaceField<T>) {
    for axis in 0..2 {
        for (o, &s) in out.axis_mut(axis).iter_mut().zip(src.axis(axis)) {
            *o = c * s;
        }
    }
}

/// `∇·(carrier * coeff ∇potential)` with donor-cell face values of `carrier`.
pub fn taxis_divergence<T: Scalar>(carrier: &Field<T>, potential: &Field<T>, coeff: T) -> Field<T> {
    let grid = *carrier.grid();
    let mut grad = FaceField::zeros(grid);
    face_gradients_into(&grid, potential.values(), &mut grad);
    let mut vel = FaceField::zeros(grid);
    scale_faces(&grad, coeff, &mut vel);
    let mut flux = FaceField::zeros(grid);
    upwind_flux_into(&grid, carrier.values(), &vel, &mut flux);
    let mut out = Field::zeros(grid);
    divergence_into(&flux, out.values_mut());
    out
}

fn check_nonnegative<T: Scalar>(name: &'static str, values: &[T], t: T) -> Result<(), SolverError> {
    let tol = -T::lit(NEGATIVE_TOLERANCE);
    match values.iter().copied().find(|&v| v < tol) {
        Some(v) => Err(SolverError::NegativeDensity {
            field: name,
            t: t.as_f64(),
            value: v.as_f64(),
        }),
        None => Ok(()),
    }
}

fn reactions_into<T: Scalar>(
    u: &[T],
    v: &[T],
    w: &[T],
    params: &ModelParams<T>,
    source_now: &[T],
    out: [&mut [T]; 3],
) {
    let [ru, rv, rw] = out;
    let zero = T::zero();
    for i in 0..u.len() {
        let (ui, vi, wi) = (u[i], v[i], w[i]);
        ru[i] = params.eta1 * (ui - ui.max(zero).powf(params.m));
        rv[i] = params.eta2 * (vi - vi.max(zero).powf(params.l));
        rw[i] = -params.lambda * (ui + vi) * wi - params.mu * wi + source_now[i];
    }
}

/// Zero-order terms `η1 (u - u^m)`, `η2 (v - v^l)` and
/// `-λ (u + v) w - μ w + r`. Powers act on `max(·, 0)`; entries of `u` or `v`
/// below `-NEGATIVE_TOLERANCE` are rejected.
pub fn reaction_terms<T: Scalar>(
    state: &State<T>,
    params: &ModelParams<T>,
    source_now: &Field<T>,
) -> Result<(Field<T>, Field<T>, Field<T>), SolverError> {
    check_nonnegative("u", state.u.values(), state.t)?;
    check_nonnegative("v", state.v.values(), state.t)?;
    let grid = *state.grid();
    let (mut ru, mut rv, mut rw) = (Field::zeros(grid), Field::zeros(grid), Field::zeros(grid));
    reactions_into(
        state.u.values(),
        state.v.values(),
        state.w.values(),
        params,
        source_now.values(),
        [ru.values_mut(), rv.values_mut(), rw.values_mut()],
    );
    Ok((ru, rv, rw))
}

/// Inverse time scales that bound the explicit step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateBounds<T> {
    /// `2 Σ 1/h_a^2`; zero in IMEX mode.
    pub diffusion: T,
    /// Largest `|face velocity| / h` over both taxis fluxes.
    pub advection: T,
    /// Largest total outflow rate of any cell through its taxis faces.
    pub cell_outflow: T,
    pub reaction: T,
    pub max_face_speed: T,
}

impl<T: Scalar> RateBounds<T> {
    /// `min(dt_max, safety / max(rates), 1 / (diffusion + outflow + reaction))`.
    ///
    /// The last term bounds the sum of all loss rates of a cell, which keeps
    /// every explicit update a nonnegative combination of old values.
    pub fn dt(&self, ctrl: &StepControl<T>) -> T {
        let worst = self.diffusion.max(self.advection).max(self.reaction);
        let mut dt = ctrl.dt_max;
        if worst > T::zero() {
            dt = dt.min(ctrl.cfl_safety / worst);
        }
        let total = self.diffusion + self.cell_outflow + self.reaction;
        if total > T::zero() {
            dt = dt.min(total.recip());
        }
        dt
    }
}

fn diffusion_rate<T: Scalar>(grid: &Grid<T>, mode: StepMode) -> T {
    match mode {
        StepMode::ImexDiffusion => T::zero(),
        StepMode::Explicit => {
            T::lit(2.0) * grid.spacing().iter().map(|&h| (h * h).recip()).sum::<T>()
        }
    }
}

fn reaction_rate<T: Scalar>(u_sup: T, v_sup: T, p: &ModelParams<T>) -> T {
    let one = T::one();
    p.eta1 * p.m * u_sup.powf(p.m - one)
        + p.eta2 * p.l * v_sup.powf(p.l - one)
        + p.lambda * (u_sup + v_sup)
        + p.mu
}

/// Velocity statistics of one face velocity field.
fn velocity_rates<T: Scalar>(grid: &Grid<T>, vel: &FaceField<T>, outflow: &mut [T]) -> (T, T) {
    let (n0, n1) = grid.shape();
    let mut max_speed = T::zero();
    let mut max_rate = T::zero();
    for axis in 0..grid.dim() {
        let inv_h = grid.spacing()[axis].recip();
        let mut axis_max = T::zero();
        for i in 0..n0 {
            for j in 0..n1 {
                let (lo, hi) = vel.around(axis, i, j);
                let out = (-lo).max(T::zero()) + hi.max(T::zero());
                let c = i * n1 + j;
                outflow[c] = outflow[c] + out * inv_h;
                axis_max = axis_max.max(lo.abs()).max(hi.abs());
            }
        }
        max_speed = max_speed.max(axis_max);
        max_rate = max_rate.max(axis_max * inv_h);
    }
    (max_speed, max_rate)
}

/// Reusable buffers for repeated steps on one grid.
#[derive(Clone, Debug)]
pub struct Stepper<T> {
    grid: Grid<T>,
    grad: [FaceField<T>; 3],
    vel_u: FaceField<T>,
    vel_v: FaceField<T>,
    flux: [FaceField<T>; 2],
    div: [Vec<T>; 3],
    react: [Vec<T>; 3],
    source: Vec<T>,
    outflow: Vec<T>,
    implicit: Option<NeumannHelmholtz<T>>,
}

impl<T: Scalar> Stepper<T> {
    pub fn new(grid: Grid<T>) -> Self {
        let faces = || FaceField::zeros(grid);
        let cells = || vec![T::zero(); grid.len()];
        Self {
            grid,
            grad: [faces(), faces(), faces()],
            vel_u: faces(),
            vel_v: faces(),
            flux: [faces(), faces()],
            div: [cells(), cells(), cells()],
            react: [cells(), cells(), cells()],
            source: cells(),
            outflow: cells(),
            implicit: None,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Computes gradients, taxis velocities and the resulting rate bounds.
    fn prepare(
        &mut self,
        state: &State<T>,
        params: &ModelParams<T>,
        mode: StepMode,
    ) -> RateBounds<T> {
        let g = self.grid;
        face_gradients_into(&g, state.u.values(), &mut self.grad[0]);
        face_gradients_into(&g, state.v.values(), &mut self.grad[1]);
        face_gradients_into(&g, state.w.values(), &mut self.grad[2]);
        scale_faces(&self.grad[2], params.chi, &mut self.vel_u);
        scale_faces(&self.grad[0], params.xi, &mut self.vel_v);
        self.outflow.iter_mut().for_each(|o| *o = T::zero());
        let (su, ru) = velocity_rates(&g, &self.vel_u, &mut self.outflow);
        let (sv, rv) = velocity_rates(&g, &self.vel_v, &mut self.outflow);
        let cell_outflow = self.outflow.iter().copied().fold(T::zero(), T::max);
        let u_sup = state
            .u
            .values()
            .iter()
            .fold(T::zero(), |m, &x| m.max(x.abs()));
        let v_sup = state
            .v
            .values()
            .iter()
            .fold(T::zero(), |m, &x| m.max(x.abs()));
        RateBounds {
            diffusion: diffusion_rate(&g, mode),
            advection: ru.max(rv),
            cell_outflow,
            reaction: reaction_rate(u_sup, v_sup, params),
            max_face_speed: su.max(sv),
        }
    }

    pub fn rate_bounds(
        &mut self,
        state: &State<T>,
        params: &ModelParams<T>,
        mode: StepMode,
    ) -> RateBounds<T> {
        self.prepare(state, params, mode)
    }

    /// One step; `dt_cap` further limits the chosen step (used to land on an
    /// end time exactly).
    pub fn step(
        &mut self,
        state: &State<T>,
        params: &ModelParams<T>,
        source: &NutrientSource<T>,
        ctrl: &StepControl<T>,
        dt_cap: Option<T>,
    ) -> Result<(State<T>, StepReport<T>), SolverError> {
        let g = self.grid;
        check_nonnegative("u", state.u.values(), state.t)?;
        check_nonnegative("v", state.v.values(), state.t)?;
        let rates = self.prepare(state, params, ctrl.mode);
        let mut dt = rates.dt(ctrl);
        if let Some(cap) = dt_cap {
            dt = dt.min(cap);
        }

        source.evaluate_into(state.t, &mut self.source);
        {
            let [ru, rv, rw] = &mut self.react;
            reactions_into(
                state.u.values(),
                state.v.values(),
                state.w.values(),
                params,
                &self.source,
                [ru, rv, rw],
            );
        }

        upwind_flux_into(&g, state.u.values(), &self.vel_u, &mut self.flux[0]);
        upwind_flux_into(&g, state.v.values(), &self.vel_v, &mut self.flux[1]);
        let explicit = ctrl.mode == StepMode::Explicit;
        // Net face flux: diffusive part (explicit mode only) minus taxis part.
        for (k, flux) in self.flux.iter_mut().enumerate() {
            for axis in 0..2 {
                let grad = self.grad[k].axis(axis);
                for (f, &gr) in flux.axis_mut(axis).iter_mut().zip(grad) {
                    *f = if explicit { gr - *f } else { -*f };
                }
            }
        }
        divergence_into(&self.flux[0], &mut self.div[0]);
        divergence_into(&self.flux[1], &mut self.div[1]);
        if explicit {
            divergence_into(&self.grad[2], &mut self.div[2]);
        } else {
            self.div[2].iter_mut().for_each(|d| *d = T::zero());
        }

        let olds = [state.u.values(), state.v.values(), state.w.values()];
        let mut new: [Vec<T>; 3] = std::array::from_fn(|k| {
            olds[k]
                .iter()
                .zip(&self.div[k])
                .zip(&self.react[k])
                .map(|((&o, &d), &r)| o + dt * (d + r))
                .collect()
        });
        if !explicit {
            let solver = self
                .implicit
                .get_or_insert_with(|| NeumannHelmholtz::new(g));
            for f in new.iter_mut() {
                solver.solve_in_place(dt, f);
            }
        }

        let t_new = state.t + dt;
        let tol = -T::lit(NEGATIVE_TOLERANCE);
        let mut clipped = 0;
        let mut any_negative = false;
        let mut max = T::neg_infinity();
        let mut finite = true;
        for f in new.iter_mut() {
            for v in f.iter_mut() {
                if *v < T::zero()
                    && ctrl.positivity_floor > T::zero()
                    && *v >= -ctrl.positivity_floor
                {
                    *v = T::zero();
                    clipped += 1;
                }
                if *v < tol {
                    any_negative = true;
                }
                finite &= v.is_finite();
                max = max.max(*v);
            }
        }
        if !finite || max > ctrl.blowup_threshold {
            let max = if finite { max.as_f64() } else { f64::INFINITY };
            return Err(SolverError::BlowUp {
                t: t_new.as_f64(),
                max,
            });
        }
        let [u, v, w] = new;
        let vol = g.cell_volume();
        let post_masses = [
            u.iter().copied().sum::<T>() * vol,
            v.iter().copied().sum::<T>() * vol,
            w.iter().copied().sum::<T>() * vol,
        ];
        let next = State {
            t: t_new,
            u: Field::new(g, u).expect("grid length"),
            v: Field::new(g, v).expect("grid length"),
            w: Field::new(g, w).expect("grid length"),
        };
        let report = StepReport {
            dt_used: dt,
            max_face_speed: rates.max_face_speed,
            any_negative,
            clipped,
            post_masses,
        };
        Ok((next, report))
    }
}

/// Step size the scheme would take from `state`.
pub fn stable_dt<T: Scalar>(state: &State<T>, params: &ModelParams<T>, ctrl: &StepControl<T>) -> T {
    Stepper::new(*state.grid())
        .prepare(state, params, ctrl.mode)
        .dt(ctrl)
}

/// Single step with freshly allocated buffers.
pub fn step<T: Scalar>(
    state: &State<T>,
    params: &ModelParams<T>,
    source: &NutrientSource<T>,
    ctrl: &StepControl<T>,
) -> Result<(State<T>, StepReport<T>), SolverError> {
    Stepper::new(*state.grid()).step(state, params, source, ctrl, None)
}

#[derive(Clone, Debug)]
pub struct Advance<T> {
    /// Last successfully computed state.
    pub state: State<T>,
    pub steps: usize,
    /// Smallest step taken, excluding the truncated final one; `None` if no
    /// untruncated step was taken.
    pub min_dt: Option<T>,
    pub termination: Termination,
}

/// Steps until `t_end` (landing on it exactly) or until the scheme signals
/// blow-up or a negative density. `observer` sees every accepted state.
pub fn advance_to<T: Scalar>(
    stepper: &mut Stepper<T>,
    state: State<T>,
    t_end: T,
    params: &ModelParams<T>,
    source: &NutrientSource<T>,
    ctrl: &StepControl<T>,
    mut observer: impl FnMut(&State<T>, &StepReport<T>),
) -> Result<Advance<T>, SolverError> {
    ctrl.validate()?;
    if t_end < state.t {
        return Err(SolverError::BackwardsInTime {
            t: state.t.as_f64(),
            t_end: t_end.as_f64(),
        });
    }
    let mut state = state;
    let mut steps = 0;
    let mut min_dt: Option<T> = None;
    while state.t < t_end {
        let remaining = t_end - state.t;
        match stepper.step(&state, params, source, ctrl, Some(remaining)) {
            Ok((mut next, report)) => {
                let last = report.dt_used >= remaining;
                if last {
                    next.t = t_end;
                } else {
                    min_dt = Some(min_dt.map_or(report.dt_used, |m| m.min(report.dt_used)));
                }
                steps += 1;
                observer(&next, &report);
                state = next;
            }
            Err(SolverError::BlowUp { t, max }) => {
                return Ok(Advance {
                    state,
                    steps,
                    min_dt,
                    termination: Termination::BlowUp { t, max },
                })
            }
            Err(SolverError::NegativeDensity { field, t, value }) => {
                return Ok(Advance {
                    state,
                    steps,
                    min_dt,
                    termination: Termination::NegativeDensity { field, t, value },
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Advance {
        state,
        steps,
        min_dt,
        termination: Termination::Reached,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{cell_integral, laplacian};
    use std::f64::consts::PI;

    fn quiet() -> ModelParams<f64> {
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

    fn state(grid: Grid<f64>, u: f64, v: f64, w: f64) -> State<f64> {
        State::new(
            0.0,
            Field::constant(grid, u),
            Field::constant(grid, v),
            Field::constant(grid, w),
        )
        .unwrap()
    }

    #[test]
    fn taxis_examples() {
        let g: Grid<f64> = Grid::rect([9, 7], [1.0, 1.3]).unwrap();
        let carrier = Field::from_fn(g, |x| 1.0 + x[0] * x[1]);
        let flat = Field::constant(g, 2.0);
        assert!(taxis_divergence(&carrier, &flat, 3.0)
            .values()
            .iter()
            .all(|&v| v == 0.0));

        let pot = Field::from_fn(g, |x| (2.0 * x[0]).sin() + x[1] * x[1]);
        let got = taxis_divergence(&Field::constant(g, 1.5), &pot, 0.7);
        let want = laplacian(&pot).scale(1.5 * 0.7);
        for (a, b) in got.values().iter().zip(want.values()) {
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
        assert!(cell_integral(&taxis_divergence(&carrier, &pot, 2.0)).abs() < 1e-12);
    }

    #[test]
    fn reaction_examples() {
        let g = Grid::line(6, 1.0).unwrap();
        let p = ModelParams {
            eta1: 2.0,
            eta2: 1.0,
            m: 2.5,
            ..quiet()
        };
        let (ru, _, _) = reaction_terms(&state(g, 1.0, 0.5, 0.0), &p, &Field::zeros(g)).unwrap();
        assert!(ru.values().iter().all(|&v| v == 0.0));

        let (_, _, rw) =
            reaction_terms(&state(g, 0.0, 0.0, 0.7), &p, &Field::constant(g, 2.0)).unwrap();
        assert!(rw.values().iter().all(|&v| (v - (2.0 - 0.7)).abs() < 1e-15));

        let p = ModelParams {
            lambda: 1.0,
            mu: 1.0,
            ..p
        };
        let (_, _, rw) =
            reaction_terms(&state(g, 1.0, 1.0, 1.0), &p, &Field::constant(g, 3.0)).unwrap();
        assert!(rw.values().iter().all(|&v| v == 0.0));

        let mut s = state(g, 1.0, 1.0, 1.0);
        s.v.values_mut()[2] = -1e-6;
        assert!(matches!(
            reaction_terms(&s, &p, &Field::zeros(g)),
            Err(SolverError::NegativeDensity { field: "v", .. })
        ));
    }

    #[test]
    fn dt_examples() {
        let ctrl = StepControl {
            dt_max: 1.0,
            ..StepControl::default()
        };
        let p = quiet();
        for n in [16usize, 32] {
            let g = Grid::rect([n, n], [1.0, 1.0]).unwrap();
            let h = 1.0 / n as f64;
            let dt = stable_dt(&state(g, 0.0, 0.0, 0.0), &p, &ctrl);
            assert!((dt - 0.4 * h * h / 4.0).abs() < 1e-15);
        }
        let g16 = Grid::rect([16, 16], [1.0, 1.0]).unwrap();
        let g32 = Grid::rect([32, 32], [1.0, 1.0]).unwrap();
        let d16 = stable_dt(&state(g16, 0.0, 0.0, 0.0), &p, &ctrl);
        let d32 = stable_dt(&state(g32, 0.0, 0.0, 0.0), &p, &ctrl);
        assert!((d16 / d32 - 4.0).abs() < 1e-12);
        let tiny = StepControl {
            dt_max: 1e-9,
            ..ctrl
        };
        assert_eq!(stable_dt(&state(g16, 0.0, 0.0, 0.0), &p, &tiny), 1e-9);
    }

    #[test]
    fn steep_potential_is_advection_limited() {
        let g = Grid::line(64, 1.0).unwrap();
        let h = 1.0 / 64.0;
        let ctrl = StepControl {
            dt_max: 1.0,
            mode: StepMode::ImexDiffusion,
            ..StepControl::default()
        };
        let p = ModelParams {
            lambda: 1e-3,
            mu: 1e-3,
            ..quiet()
        };
        let mut prev: Option<f64> = None;
        for slope in [1e3, 2e3, 4e3] {
            let s = State::new(
                0.0,
                Field::constant(g, 0.1),
                Field::constant(g, 0.0),
                Field::from_fn(g, |x| slope * x[0]),
            )
            .unwrap();
            let dt = stable_dt(&s, &p, &ctrl);
            // h / (chi |grad w|) scaled by the safety factor.
            assert!((dt - 0.4 * h / slope).abs() < 1e-12 * dt.max(1e-12), "{dt}");
            if let Some(prev) = prev {
                assert!((prev / dt - 2.0f64).abs() < 1e-9);
            }
            prev = Some(dt);
        }
    }

    #[test]
    fn homogeneous_steady_state_is_fixed() {
        let g = Grid::rect([8, 8], [1.0, 1.0]).unwrap();
        let p = ModelParams {
            eta1: 1.0,
            eta2: 0.5,
            m: 2.0,
            l: 3.0,
            ..quiet()
        };
        let src = NutrientSource::constant(3.0).unwrap();
        for mode in [StepMode::Explicit, StepMode::ImexDiffusion] {
            let ctrl = StepControl {
                mode,
                dt_max: 0.05,
                ..StepControl::default()
            };
            let s0 = state(g, 1.0, 1.0, 1.0);
            let (s1, rep) = step(&s0, &p, &src, &ctrl).unwrap();
            for (a, b) in s1.fields().iter().zip(s0.fields()) {
                for (x, y) in a.values().iter().zip(b.values()) {
                    assert!((x - y).abs() < 1e-14);
                }
            }
            assert!(!rep.any_negative);
        }
    }

    #[test]
    fn uniform_nutrient_relaxation() {
        let g = Grid::line(8, 1.0).unwrap();
        let p = ModelParams {
            lambda: 1.0,
            mu: 2.0,
            ..quiet()
        };
        let src = NutrientSource::constant(1.0).unwrap();
        let dt = 1e-3;
        let ctrl = StepControl {
            dt_max: dt,
            ..StepControl::default()
        };
        let s0 = state(g, 0.0, 0.0, 2.0);
        let mut stepper = Stepper::new(g);
        let out = advance_to(&mut stepper, s0, 1.0, &p, &src, &ctrl, |_, _| {}).unwrap();
        let exact = 0.5 + 1.5 * (-2.0f64).exp();
        assert!((out.state.w.values()[3] - exact).abs() < 2.0 * dt);
    }

    #[test]
    fn advance_edge_cases() {
        let g = Grid::line(8, 1.0).unwrap();
        let p = quiet();
        let src = NutrientSource::constant(0.0).unwrap();
        let ctrl = StepControl::default();
        let s0 = state(g, 1.0, 1.0, 0.0);
        let mut stepper = Stepper::new(g);
        let out = advance_to(&mut stepper, s0.clone(), 0.0, &p, &src, &ctrl, |_, _| {
            panic!("no steps")
        })
        .unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.state, s0);
        let mut s1 = s0.clone();
        s1.t = 1.0;
        assert!(matches!(
            advance_to(&mut stepper, s1, 0.5, &p, &src, &ctrl, |_, _| {}),
            Err(SolverError::BackwardsInTime { .. })
        ));
        let out = advance_to(&mut stepper, s0, 0.0123, &p, &src, &ctrl, |_, _| {}).unwrap();
        assert_eq!(out.state.t, 0.0123);
        assert_eq!(out.termination, Termination::Reached);
    }

    #[test]
    fn blow_up_is_reported() {
        let g = Grid::line(8, 1.0).unwrap();
        let p = quiet();
        let src = NutrientSource::constant(100.0).unwrap();
        let ctrl = StepControl {
            blowup_threshold: 5.0,
            dt_max: 0.01,
            ..StepControl::default()
        };
        let mut stepper = Stepper::new(g);
        let out = advance_to(
            &mut stepper,
            state(g, 0.1, 0.1, 0.0),
            10.0,
            &p,
            &src,
            &ctrl,
            |_, _| {},
        )
        .unwrap();
        assert!(out.termination.is_blow_up());
        assert!(out.state.w.max() <= 5.0);
        let err = Stepper::new(g).step(
            &out.state,
            &p,
            &src,
            &StepControl {
                dt_max: 1.0,
                ..ctrl
            },
            None,
        );
        assert!(matches!(err, Err(SolverError::BlowUp { .. })) || err.is_ok());
    }

    #[test]
    fn heat_mode_decay_short_time() {
        let g = Grid::line(64, 1.0).unwrap();
        let p = ModelParams {
            chi: 0.0,
            xi: 0.0,
            lambda: 0.0,
            mu: 0.0,
            ..quiet()
        };
        let src = NutrientSource::constant(0.0).unwrap();
        let cos = Field::from_fn(g, |x| (PI * x[0]).cos());
        let s0 = State::new(
            0.0,
            cos.map(|c| 1.0 + 0.5 * c),
            Field::zeros(g),
            Field::zeros(g),
        )
        .unwrap();
        for mode in [StepMode::Explicit, StepMode::ImexDiffusion] {
            let ctrl = StepControl {
                dt_max: 1e-4,
                mode,
                ..StepControl::default()
            };
            let out = advance_to(
                &mut Stepper::new(g),
                s0.clone(),
                0.05,
                &p,
                &src,
                &ctrl,
                |_, _| {},
            )
            .unwrap();
            assert_eq!(out.termination, Termination::Reached);
            let amp = (out.state.u.values()[0] - 1.0) / (0.5 * cos.values()[0]);
            assert!(
                (amp - (-PI * PI * 0.05).exp()).abs() < 2e-3,
                "{mode:?} {amp}"
            );
        }
    }
}
