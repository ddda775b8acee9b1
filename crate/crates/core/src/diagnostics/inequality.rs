use crate::grid::{cell_gradient_sq, hessian_frobenius_sq, Field};
use crate::scalar::Scalar;

use super::norms::sup_norm;

/// Both sides of
/// `∫|∇u|^{2(p+1)} <= 2(n + 4p^2) ||u||_inf^2 ∫|∇u|^{2(p-1)} |D^2 u|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityCheck<T> {
    pub lhs: T,
    pub rhs: T,
    /// `lhs / rhs`; zero when both sides vanish, infinite when only `rhs` does.
    pub ratio: T,
    /// Set when `rhs == 0 < lhs`, which can only come from the discretisation.
    pub discretisation_artifact: bool,
}

impl<T: Scalar> InequalityCheck<T> {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Evaluates the gradient/Hessian interpolation inequality for `u` with the
/// crate's cell-gradient and Hessian conventions; `n` is the grid dimension.
pub fn gradient_hessian_inequality<T: Scalar>(u: &Field<T>, p: u32) -> InequalityCheck<T> {
    let grid = u.grid();
    let vol = grid.cell_volume();
    let pf = T::from_u32(p.max(1)).expect("small integer");
    let one = T::one();
    let n = T::from_usize_lossy(grid.dim());
    let g2 = cell_gradient_sq(u);
    let h2 = hessian_frobenius_sq(u);
    let lhs = g2.values().iter().map(|&g| g.powf(pf + one)).sum::<T>() * vol;
    let weighted = g2
        .values()
        .iter()
        .zip(h2.values())
        .map(|(&g, &h)| g.powf(pf - one) * h)
        .sum::<T>()
        * vol;
    let sup = sup_norm(u);
    let rhs = T::lit(2.0) * (n + T::lit(4.0) * pf * pf) * sup * sup * weighted;
    let (ratio, artifact) = if rhs > T::zero() {
        (lhs / rhs, false)
    } else if lhs > T::zero() {
        (T::infinity(), true)
    } else {
        (T::zero(), false)
    };
    InequalityCheck {
        lhs,
        rhs,
        ratio,
        discretisation_artifact: artifact,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_is_zero_over_zero() {
        let g = Grid::rect([8, 8], [1.0, 1.0]).unwrap();
        let c = gradient_hessian_inequality(&Field::constant(g, 2.0), 2);
        assert_eq!((c.lhs, c.rhs, c.ratio), (0.0, 0.0, 0.0));
        assert!(!c.discretisation_artifact && c.holds());
    }

    #[test]
    fn cosine_mode_matches_closed_form() {
        // lhs = π^6 ∫ sin^6 = 5π^6/16, rhs = 2·17·π^6 ∫ sin^2 cos^2 = 34π^6/8.
        let exact_lhs = 5.0 * PI.powi(6) / 16.0;
        let exact_rhs = 34.0 * PI.powi(6) / 8.0;
        let mut prev_err = f64::INFINITY;
        for n in [64, 128, 256] {
            let f = Field::from_fn(Grid::line(n, 1.0).unwrap(), |x| (PI * x[0]).cos());
            let c = gradient_hessian_inequality(&f, 2);
            assert!(c.holds());
            let err = (c.lhs / exact_lhs - 1.0)
                .abs()
                .max((c.rhs / exact_rhs - 1.0).abs());
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-3);
    }
}
