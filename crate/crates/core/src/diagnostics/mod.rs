//! Functionals tracked along a run, numerical checks of closed-form
//! inequalities, and the bounded/growing/blow-up classification.

mod comparison;
mod inequality;
mod norms;
mod series;
mod verdict;

use thiserror::Error;

pub use comparison::ode_comparison_bound;
pub use inequality::{gradient_hessian_inequality, InequalityCheck};
pub use norms::{lp_norm, sup_norm, w1p_norm, w2p_norm};
pub use series::{
    default_window, window_integrals, NormSeries, Observation, Window, WindowIntegrals,
};
pub use verdict::{classify_run, Verdict, VerdictKind, GROWTH_LOG_THRESHOLD, PLATEAU_FACTOR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("norm exponent must be at least 1, got {0}")]
    Exponent(f64),
    #[error("comparison constants must be positive (a={a}, b={b}) with y0={y0} nonnegative")]
    Comparison { y0: f64, a: f64, b: f64 },
    #[error("window length must be positive, got {0}")]
    Window(f64),
}
