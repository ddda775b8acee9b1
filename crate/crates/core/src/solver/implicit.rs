//! Direct solver for `(I - dt Δ_h) x = b` with the mirrored-ghost Laplacian.
//!
//! On a uniform rectangle the discrete Neumann Laplacian is diagonalised by
//! the orthonormal cosine basis `cos(π k (i + 1/2) / n)` along each axis, with
//! eigenvalues `-(4 / h^2) sin^2(π k / (2 n))`. The solve is a forward
//! transform, a diagonal scaling and the transpose transform. Mode zero is
//! scaled by exactly one, so the cell sum is preserved up to roundoff.

use crate::grid::Grid;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct NeumannHelmholtz<T> {
    grid: Grid<T>,
    /// Row-major `n x n` basis per axis; row `k` is mode `k`.
    basis: [Vec<T>; 2],
    /// Eigenvalues of `-Δ_h` per axis.
    eig: [Vec<T>; 2],
    scratch: Vec<T>,
}

fn axis_basis<T: Scalar>(n: usize, h: T) -> (Vec<T>, Vec<T>) {
    let nf = T::from_usize_lossy(n);
    let half = T::lit(0.5);
    let pi = T::PI();
    let mut basis = Vec::with_capacity(n * n);
    for k in 0..n {
        let s = if k == 0 {
            nf.recip().sqrt()
        } else {
            (T::lit(2.0) / nf).sqrt()
        };
        let kf = T::from_usize_lossy(k);
        for i in 0..n {
            let x = pi * kf * (T::from_usize_lossy(i) + half) / nf;
            basis.push(s * x.cos());
        }
    }
    let eig = (0..n)
        .map(|k| {
            let sn = (pi * T::from_usize_lossy(k) / (T::lit(2.0) * nf)).sin();
            T::lit(4.0) / (h * h) * sn * sn
        })
        .collect();
    (basis, eig)
}

impl<T: Scalar> NeumannHelmholtz<T> {
    pub fn new(grid: Grid<T>) -> Self {
        let (n0, n1) = grid.shape();
        let h = grid.spacing();
        let (b0, e0) = axis_basis(n0, h[0]);
        let (b1, e1) = if grid.dim() == 2 {
            axis_basis(n1, h[1])
        } else {
            (vec![T::one()], vec![T::zero()])
        };
        Self {
            grid,
            basis: [b0, b1],
            eig: [e0, e1],
            scratch: vec![T::zero(); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Overwrites `rhs` with the solution of `(I - dt Δ_h) x = rhs`.
    pub fn solve_in_place(&mut self, dt: T, rhs: &mut [T]) {
        let (n0, n1) = self.grid.shape();
        self.transform(rhs, false);
        for k in 0..n0 {
            for l in 0..n1 {
                let idx = k * n1 + l;
                rhs[idx] = rhs[idx] / (T::one() + dt * (self.eig[0][k] + self.eig[1][l]));
            }
        }
        self.transform(rhs, true);
    }

    /// Applies the separable basis (or its transpose when `inverse`).
    fn transform(&mut self, data: &mut [T], inverse: bool) {
        let (n0, n1) = self.grid.shape();
        let tmp = &mut self.scratch;
        if n1 > 1 {
            let c = &self.basis[1];
            for i in 0..n0 {
                let row = &data[i * n1..(i + 1) * n1];
                for k in 0..n1 {
                    let mut s = T::zero();
                    for j in 0..n1 {
                        let cij = if inverse {
                            c[j * n1 + k]
                        } else {
                            c[k * n1 + j]
                        };
                        s = s + cij * row[j];
                    }
                    tmp[i * n1 + k] = s;
                }
            }
            data.copy_from_slice(tmp);
        }
        let c = &self.basis[0];
        for v in tmp.iter_mut() {
            *v = T::zero();
        }
        for k in 0..n0 {
            for i in 0..n0 {
                let cki = if inverse {
                    c[i * n0 + k]
                } else {
                    c[k * n0 + i]
                };
                let src = &data[i * n1..(i + 1) * n1];
                let dst = &mut tmp[k * n1..(k + 1) * n1];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = *d + cki * s;
                }
            }
        }
        data.copy_from_slice(tmp);
    }
}
