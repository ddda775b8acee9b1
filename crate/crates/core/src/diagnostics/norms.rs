//! Discrete Lebesgue and Sobolev norms on cell-centred fields.

use crate::grid::{cell_gradient_sq, hessian_frobenius_sq, Field};
use crate::scalar::Scalar;

use super::DiagnosticsError;

fn check_exponent<T: Scalar>(p: T) -> Result<(), DiagnosticsError> {
    if p >= T::one() && p.is_finite() {
        Ok(())
    } else {
        Err(DiagnosticsError::Exponent(p.as_f64()))
    }
}

pub fn sup_norm<T: Scalar>(f: &Field<T>) -> T {
    f.values().iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// `sum |f_i|^p * vol`, the p-th power of the Lp norm.
pub(crate) fn lp_power<T: Scalar>(values: &[T], p: T, vol: T) -> T {
    values.iter().map(|v| v.abs().powf(p)).sum::<T>() * vol
}

/// `(sum |f_i|^p * vol)^(1/p)`.
pub fn lp_norm<T: Scalar>(f: &Field<T>, p: T) -> Result<T, DiagnosticsError> {
    check_exponent(p)?;
    Ok(lp_power(f.values(), p, f.grid().cell_volume()).powf(p.recip()))
}

/// `integral of |g|^power` where `sq` holds `|g|^2` per cell.
pub(crate) fn power_of_sq_integral<T: Scalar>(sq: &Field<T>, power: T) -> T {
    let half = power * T::lit(0.5);
    sq.values().iter().map(|&s| s.powf(half)).sum::<T>() * sq.grid().cell_volume()
}

/// `(||f||_p^p + || |grad f| ||_p^p)^(1/p)` with the cell-gradient convention
/// of [`cell_gradient_sq`].
pub fn w1p_norm<T: Scalar>(f: &Field<T>, p: T) -> Result<T, DiagnosticsError> {
    check_exponent(p)?;
    let vol = f.grid().cell_volume();
    let zero_order = lp_power(f.values(), p, vol);
    let first = power_of_sq_integral(&cell_gradient_sq(f), p);
    Ok((zero_order + first).powf(p.recip()))
}

/// W2,p norm: adds `|| |D^2 f| ||_p^p` to the W1,p sum.
pub fn w2p_norm<T: Scalar>(f: &Field<T>, p: T) -> Result<T, DiagnosticsError> {
    check_exponent(p)?;
    let vol = f.grid().cell_volume();
    let zero_order = lp_power(f.values(), p, vol);
    let first = power_of_sq_integral(&cell_gradient_sq(f), p);
    let second = power_of_sq_integral(&hessian_frobenius_sq(f), p);
    Ok((zero_order + first + second).powf(p.recip()))
}
