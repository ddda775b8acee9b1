use crate::scalar::Scalar;

use super::DiagnosticsError;

/// Upper bound `y0 + 2b + b/a` for nonnegative `y` with `y' + a y <= f` and
/// every window integral of `f` over `min(1, T/2)` at most `b`.
pub fn ode_comparison_bound<T: Scalar>(y0: T, a: T, b: T) -> Result<T, DiagnosticsError> {
    if !(a > T::zero() && b > T::zero() && y0 >= T::zero()) {
        return Err(DiagnosticsError::Comparison {
            y0: y0.as_f64(),
            a: a.as_f64(),
            b: b.as_f64(),
        });
    }
    Ok(y0 + T::lit(2.0) * b + b / a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_values() {
        assert_eq!(ode_comparison_bound(0.0, 1.0, 1.0), Ok(3.0));
        assert_eq!(ode_comparison_bound(5.0, 2.0, 4.0), Ok(15.0));
        assert!(ode_comparison_bound(0.0, 0.0, 1.0).is_err());
        assert!(ode_comparison_bound(0.0, 1.0, -1.0).is_err());
        assert!(ode_comparison_bound(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn unit_forcing_trajectory_stays_below() {
        // y' = -y + 1, y(0) = 0 has y(t) = 1 - e^{-t}; unit windows of f integrate to 1.
        let bound = ode_comparison_bound(0.0, 1.0, 1.0).unwrap();
        let max = (0..=2000)
            .map(|k| 1.0 - (-(k as f64) * 0.01f64).exp())
            .fold(0.0, f64::max);
        assert!(max <= 1.0 && max < bound);
    }
}
