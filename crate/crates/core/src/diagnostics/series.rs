//! Time series of tracked functionals and their windowed time integrals.

use std::io::Write;

use crate::grid::{cell_gradient_sq, cell_integral, laplacian, Field};
use crate::model::State;
use crate::scalar::Scalar;
use crate::solver::Termination;

use super::norms::{lp_power, power_of_sq_integral, sup_norm, w1p_norm};
use super::DiagnosticsError;

/// Functionals of one observed state.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation<T> {
    pub t: T,
    /// `||u||_inf`, `||v||_inf`, `||w||_inf`.
    pub sup: [T; 3],
    /// `∫u`, `∫v`, `∫w`.
    pub mass: [T; 3],
    /// Lq norms of `(u, v, w)` for each configured exponent.
    pub lp: Vec<[T; 3]>,
    /// W1,2p norms of `(u, v, w)`.
    pub w1_2p: [T; 3],
    /// `∫|∇w|^{2(p+1)}`.
    pub grad_w_2p2: T,
    /// `∫|∇u|^{2p}`.
    pub grad_u_2p: T,
    /// `∫|Δw|^{p+1}`.
    pub lap_w_p1: T,
    /// `∫|∇u|^{2(p+1)}`.
    pub grad_u_2p2: T,
}

/// Observations in increasing time order, with the run's termination.
#[derive(Clone, Debug, PartialEq)]
pub struct NormSeries<T> {
    pub p: u32,
    pub lp_exponents: Vec<T>,
    pub records: Vec<Observation<T>>,
    pub termination: Option<Termination>,
}

impl<T: Scalar> NormSeries<T> {
    pub fn new(p: u32, lp_exponents: Vec<T>) -> Result<Self, DiagnosticsError> {
        if let Some(&bad) = lp_exponents.iter().find(|&&q| !(q >= T::one())) {
            return Err(DiagnosticsError::Exponent(bad.as_f64()));
        }
        Ok(Self {
            p,
            lp_exponents,
            records: Vec::new(),
            termination: None,
        })
    }

    pub fn observe(&mut self, state: &State<T>) {
        let obs = self.evaluate(state);
        self.records.push(obs);
    }

    pub fn evaluate(&self, state: &State<T>) -> Observation<T> {
        let p = T::from_u32(self.p).expect("small integer");
        let one = T::one();
        let two = T::lit(2.0);
        let fields = state.fields();
        let vol = state.grid().cell_volume();
        let triple = |f: &dyn Fn(&Field<T>) -> T| [f(fields[0]), f(fields[1]), f(fields[2])];
        let lp = self
            .lp_exponents
            .iter()
            .map(|&q| triple(&|f: &Field<T>| lp_power(f.values(), q, vol).powf(q.recip())))
            .collect();
        let gu = cell_gradient_sq(&state.u);
        let gw = cell_gradient_sq(&state.w);
        let lap_w = laplacian(&state.w);
        Observation {
            t: state.t,
            sup: triple(&|f: &Field<T>| sup_norm(f)),
            mass: triple(&|f: &Field<T>| cell_integral(f)),
            lp,
            w1_2p: triple(&|f: &Field<T>| w1p_norm(f, two * p).expect("exponent >= 1")),
            grad_w_2p2: power_of_sq_integral(&gw, two * (p + one)),
            grad_u_2p: power_of_sq_integral(&gu, two * p),
            lap_w_p1: lp_power(lap_w.values(), p + one, vol),
            grad_u_2p2: power_of_sq_integral(&gu, two * (p + one)),
        }
    }

    pub fn is_blow_up(&self) -> bool {
        self.termination
            .as_ref()
            .is_some_and(Termination::is_blow_up)
    }

    pub fn times(&self) -> Vec<T> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Column names, in the fixed CSV order.
    pub fn header(&self) -> Vec<String> {
        let p = self.p;
        let mut cols: Vec<String> = ["t", "sup_u", "sup_v", "sup_w", "int_u", "int_v", "int_w"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for q in &self.lp_exponents {
            for f in ["u", "v", "w"] {
                cols.push(format!("L{q}_{f}"));
            }
        }
        for f in ["u", "v", "w"] {
            cols.push(format!("W1_{}_{f}", 2 * p));
        }
        cols.push(format!("int_grad_w_pow{}", 2 * (p + 1)));
        cols.push(format!("int_grad_u_pow{}", 2 * p));
        cols.push(format!("int_lap_w_pow{}", p + 1));
        cols.push(format!("int_grad_u_pow{}", 2 * (p + 1)));
        cols
    }

    fn row(r: &Observation<T>) -> Vec<T> {
        let mut row = vec![r.t];
        row.extend(r.sup);
        row.extend(r.mass);
        for q in &r.lp {
            row.extend(q);
        }
        row.extend(r.w1_2p);
        row.extend([r.grad_w_2p2, r.grad_u_2p, r.lap_w_p1, r.grad_u_2p2]);
        row
    }

    /// Writes one header row then one row per observation. Values use the
    /// shortest round-trip representation, so identical series give identical
    /// bytes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header().join(","))?;
        for r in &self.records {
            let row: Vec<String> = Self::row(r).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// `(t, value)` columns for plotting, keyed by header name.
    pub fn columns(&self) -> Vec<(String, Vec<T>)> {
        let header = self.header();
        let rows: Vec<Vec<T>> = self.records.iter().map(Self::row).collect();
        header
            .into_iter()
            .enumerate()
            .map(|(k, name)| (name, rows.iter().map(|r| r[k]).collect()))
            .collect()
    }
}

/// `min(1, horizon / 2)`.
pub fn default_window<T: Scalar>(horizon: T) -> T {
    T::one().min(horizon * T::lit(0.5))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window<T> {
    pub start: T,
    pub end: T,
    /// Time integral of `∫|Δw|^{p+1}`.
    pub lap_w_p1: T,
    /// Time integral of `∫|∇u|^{2(p+1)}`.
    pub grad_u_2p2: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowIntegrals<T> {
    pub length: T,
    /// Set when the window exceeded the observed span and was cut to it.
    pub truncated: bool,
    pub windows: Vec<Window<T>>,
}

impl<T: Scalar> WindowIntegrals<T> {
    pub fn max_lap_w(&self) -> T {
        self.windows
            .iter()
            .fold(T::zero(), |m, w| m.max(w.lap_w_p1))
    }

    pub fn max_grad_u(&self) -> T {
        self.windows
            .iter()
            .fold(T::zero(), |m, w| m.max(w.grad_u_2p2))
    }
}

/// Trapezoidal integral of the piecewise-linear interpolant over `[a, b]`.
fn trapezoid<T: Scalar>(ts: &[T], ys: &[T], a: T, b: T) -> T {
    let half = T::lit(0.5);
    let lerp = |k: usize, t: T| {
        let s = (t - ts[k]) / (ts[k + 1] - ts[k]);
        ys[k] + s * (ys[k + 1] - ys[k])
    };
    let mut total = T::zero();
    for k in 0..ts.len().saturating_sub(1) {
        let (t0, t1) = (ts[k], ts[k + 1]);
        if t1 <= a || t0 >= b || t1 <= t0 {
            continue;
        }
        let lo = t0.max(a);
        let hi = t1.min(b);
        total = total + (hi - lo) * (lerp(k, lo) + lerp(k, hi)) * half;
    }
    total
}

/// Sliding-window time integrals starting at each observation time whose
/// window fits inside the observed span. A window longer than the span
/// yields a single window over the whole span, flagged as truncated.
pub fn window_integrals<T: Scalar>(
    series: &NormSeries<T>,
    window: T,
) -> Result<WindowIntegrals<T>, DiagnosticsError> {
    if !(window > T::zero()) {
        return Err(DiagnosticsError::Window(window.as_f64()));
    }
    let ts = series.times();
    let lap: Vec<T> = series.records.iter().map(|r| r.lap_w_p1).collect();
    let grad: Vec<T> = series.records.iter().map(|r| r.grad_u_2p2).collect();
    if ts.len() < 2 {
        return Ok(WindowIntegrals {
            length: window,
            truncated: true,
            windows: Vec::new(),
        });
    }
    let (first, last) = (ts[0], ts[ts.len() - 1]);
    let make = |a: T, b: T| Window {
        start: a,
        end: b,
        lap_w_p1: trapezoid(&ts, &lap, a, b),
        grad_u_2p2: trapezoid(&ts, &grad, a, b),
    };
    if window > last - first {
        return Ok(WindowIntegrals {
            length: last - first,
            truncated: true,
            windows: vec![make(first, last)],
        });
    }
    let slack = T::epsilon() * T::lit(16.0) * last.abs().max(T::one());
    let windows = ts
        .iter()
        .take_while(|&&t| t + window <= last + slack)
        .map(|&t| make(t, (t + window).min(last)))
        .collect();
    Ok(WindowIntegrals {
        length: window,
        truncated: false,
        windows,
    })
}
