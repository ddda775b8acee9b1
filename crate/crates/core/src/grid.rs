//! Uniform rectangular grids with mirrored (homogeneous Neumann) ghost cells
//! and the discrete calculus built on them.
//!
//! Fields live at cell centres; fluxes live on faces. Cells are stored
//! row-major: the flat index of cell `(i, j)` is `i * n1 + j`, so the axis-1
//! index runs fastest. In one dimension `n1 == 1`.
//!
//! Face layout per axis (face `k` sits between cells `k - 1` and `k`):
//! axis 0 holds `(n0 + 1) * n1` faces indexed `k * n1 + j`, axis 1 holds
//! `n0 * (n1 + 1)` faces indexed `i * (n1 + 1) + k`. Boundary faces are always
//! zero, which is the discrete no-flux condition.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::scalar::Scalar;

/// Minimum number of cells along every active axis.
pub const MIN_CELLS: usize = 4;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("dimension must be 1 or 2, got {0}")]
    Dimension(usize),
    #[error("axis {axis}: need at least {MIN_CELLS} cells, got {cells}")]
    TooFewCells { axis: usize, cells: usize },
    #[error("axis {axis}: extent must be positive and finite, got {extent}")]
    Extent { axis: usize, extent: f64 },
    #[error("expected {expected} values per axis, got {got}")]
    AxisCount { expected: usize, got: usize },
    #[error("field has {got} values but grid has {expected} cells")]
    Length { expected: usize, got: usize },
    #[error("snapshot parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    cells: [usize; 2],
    extent: [T; 2],
    h: [T; 2],
}

impl<T: Scalar> Grid<T> {
    /// Builds a grid from per-axis cell counts and side lengths; the slices
    /// must both have `dim` entries.
    pub fn new(cells: &[usize], extent: &[T]) -> Result<Self, GridError> {
        let dim = cells.len();
        if !(1..=2).contains(&dim) {
            return Err(GridError::Dimension(dim));
        }
        if extent.len() != dim {
            return Err(GridError::AxisCount {
                expected: dim,
                got: extent.len(),
            });
        }
        let mut c = [1usize; 2];
        let mut e = [T::one(); 2];
        let mut h = [T::one(); 2];
        for axis in 0..dim {
            if cells[axis] < MIN_CELLS {
                return Err(GridError::TooFewCells {
                    axis,
                    cells: cells[axis],
                });
            }
            let ext = extent[axis];
            if !(ext > T::zero() && ext.is_finite()) {
                return Err(GridError::Extent {
                    axis,
                    extent: ext.as_f64(),
                });
            }
            c[axis] = cells[axis];
            e[axis] = ext;
            h[axis] = ext / T::from_usize_lossy(cells[axis]);
        }
        Ok(Self {
            dim,
            cells: c,
            extent: e,
            h,
        })
    }

    pub fn line(cells: usize, length: T) -> Result<Self, GridError> {
        Self::new(&[cells], &[length])
    }

    pub fn rect(cells: [usize; 2], extent: [T; 2]) -> Result<Self, GridError> {
        Self::new(&cells, &extent)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cell counts of the active axes.
    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn extent(&self) -> &[T] {
        &self.extent[..self.dim]
    }

    /// Cell widths of the active axes.
    pub fn spacing(&self) -> &[T] {
        &self.h[..self.dim]
    }

    /// Smallest cell width over the active axes.
    pub fn min_spacing(&self) -> T {
        self.spacing().iter().copied().fold(T::infinity(), T::min)
    }

    /// `n0` and `n1` with `n1 == 1` on a line.
    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.cells[0], self.cells[1])
    }

    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> T {
        self.spacing().iter().copied().fold(T::one(), |a, b| a * b)
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> T {
        self.extent().iter().copied().fold(T::one(), |a, b| a * b)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.cells[1] + j
    }

    /// Cell-centre coordinates; the unused second coordinate is zero on a line.
    pub fn center(&self, idx: usize) -> [T; 2] {
        let (i, j) = (idx / self.cells[1], idx % self.cells[1]);
        let half = T::lit(0.5);
        let x = (T::from_usize_lossy(i) + half) * self.h[0];
        let y = if self.dim == 2 {
            (T::from_usize_lossy(j) + half) * self.h[1]
        } else {
            T::zero()
        };
        [x, y]
    }

    /// Number of faces normal to `axis`, boundary faces included.
    pub fn face_count(&self, axis: usize) -> usize {
        let (n0, n1) = self.shape();
        match axis {
            0 => (n0 + 1) * n1,
            1 if self.dim == 2 => n0 * (n1 + 1),
            _ => 0,
        }
    }
}

/// One real value per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Length {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: Grid<T>, c: T) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 2]) -> T) -> Self {
        let values = (0..grid.len()).map(|idx| f(grid.center(idx))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Mirror image across the midplane normal to `axis`.
    pub fn reflect(&self, axis: usize) -> Self {
        let (n0, n1) = self.grid.shape();
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..n0 {
            for j in 0..n1 {
                let (si, sj) = if axis == 0 {
                    (n0 - 1 - i, j)
                } else {
                    (i, n1 - 1 - j)
                };
                values.push(self.values[self.grid.index(si, sj)]);
            }
        }
        Self {
            grid: self.grid,
            values,
        }
    }
}

/// Normal components of a vector quantity on every face.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceField<T> {
    grid: Grid<T>,
    axes: [Vec<T>; 2],
}

impl<T: Scalar> FaceField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            grid,
            axes: [
                vec![T::zero(); grid.face_count(0)],
                vec![T::zero(); grid.face_count(1)],
            ],
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn axis(&self, axis: usize) -> &[T] {
        &self.axes[axis]
    }

    pub fn axis_mut(&mut self, axis: usize) -> &mut [T] {
        &mut self.axes[axis]
    }

    /// Values of the two faces bounding cell `(i, j)` along `axis`, low side first.
    #[inline]
    pub fn around(&self, axis: usize, i: usize, j: usize) -> (T, T) {
        let n1 = self.grid.cells[1];
        let f = &self.axes[axis];
        if axis == 0 {
            (f[i * n1 + j], f[(i + 1) * n1 + j])
        } else {
            let k = i * (n1 + 1) + j;
            (f[k], f[k + 1])
        }
    }

    pub fn max_abs(&self) -> T {
        self.axes
            .iter()
            .flatten()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Writes face-normal difference quotients of `values` into `out`.
/// Boundary faces are set to zero.
pub(crate) fn face_gradients_into<T: Scalar>(grid: &Grid<T>, values: &[T], out: &mut FaceField<T>) {
    let (n0, n1) = grid.shape();
    let h = grid.h;
    {
        let f = &mut out.axes[0];
        let inv = T::one() / h[0];
        for j in 0..n1 {
            f[j] = T::zero();
            f[n0 * n1 + j] = T::zero();
        }
        for k in 1..n0 {
            for j in 0..n1 {
                f[k * n1 + j] = (values[k * n1 + j] - values[(k - 1) * n1 + j]) * inv;
            }
        }
    }
    if grid.dim == 2 {
        let f = &mut out.axes[1];
        let inv = T::one() / h[1];
        let stride = n1 + 1;
        for i in 0..n0 {
            let row = &values[i * n1..(i + 1) * n1];
            let frow = &mut f[i * stride..(i + 1) * stride];
            frow[0] = T::zero();
            frow[n1] = T::zero();
            for k in 1..n1 {
                frow[k] = (row[k] - row[k - 1]) * inv;
            }
        }
    }
}

/// Writes the discrete divergence of a face field into `out`.
pub(crate) fn divergence_into<T: Scalar>(faces: &FaceField<T>, out: &mut [T]) {
    let grid = faces.grid;
    let (n0, n1) = grid.shape();
    let inv0 = T::one() / grid.h[0];
    let f0 = &faces.axes[0];
    for i in 0..n0 {
        for j in 0..n1 {
            out[i * n1 + j] = (f0[(i + 1) * n1 + j] - f0[i * n1 + j]) * inv0;
        }
    }
    if grid.dim == 2 {
        let inv1 = T::one() / grid.h[1];
        let f1 = &faces.axes[1];
        let stride = n1 + 1;
        for i in 0..n0 {
            for j in 0..n1 {
                let k = i * stride + j;
                out[i * n1 + j] = out[i * n1 + j] + (f1[k + 1] - f1[k]) * inv1;
            }
        }
    }
}

/// Face-normal difference quotients; boundary faces carry exactly zero.
pub fn gradient_faces<T: Scalar>(f: &Field<T>) -> FaceField<T> {
    let mut out = FaceField::zeros(f.grid);
    face_gradients_into(&f.grid, &f.values, &mut out);
    out
}

/// Conservative divergence of a face field.
pub fn divergence<T: Scalar>(faces: &FaceField<T>) -> Field<T> {
    let mut out = Field::zeros(faces.grid);
    divergence_into(faces, &mut out.values);
    out
}

/// Second-order Laplacian with mirrored ghosts, assembled as the divergence
/// of the face gradients.
pub fn laplacian<T: Scalar>(f: &Field<T>) -> Field<T> {
    divergence(&gradient_faces(f))
}

/// Squared gradient magnitude at cell centres.
///
/// This is the single cell-gradient convention used by every norm and
/// functional in the crate: each component is the mean of the two face
/// quotients bounding the cell along that axis, so a boundary cell sees half
/// of its interior-side quotient.
pub fn cell_gradient_sq<T: Scalar>(f: &Field<T>) -> Field<T> {
    let faces = gradient_faces(f);
    let grid = f.grid;
    let (n0, n1) = grid.shape();
    let half = T::lit(0.5);
    let mut out = Field::zeros(grid);
    for i in 0..n0 {
        for j in 0..n1 {
            let mut s = T::zero();
            for axis in 0..grid.dim {
                let (lo, hi) = faces.around(axis, i, j);
                let g = (lo + hi) * half;
                s = s + g * g;
            }
            out.values[grid.index(i, j)] = s;
        }
    }
    out
}

/// `|D^2 f|^2` at cell centres.
///
/// Diagonal entries use the centred second difference; the mixed entry uses
/// the centred cross difference. Ghosts are mirrored (index clamping, so
/// corners are mirrored twice). Both symmetric off-diagonal entries are
/// counted: `f_xx^2 + f_yy^2 + 2 f_xy^2`.
pub fn hessian_frobenius_sq<T: Scalar>(f: &Field<T>) -> Field<T> {
    let grid = f.grid;
    let (n0, n1) = grid.shape();
    let v = &f.values;
    let at = |i: isize, j: isize| -> T {
        let ci = i.clamp(0, n0 as isize - 1) as usize;
        let cj = j.clamp(0, n1 as isize - 1) as usize;
        v[ci * n1 + cj]
    };
    let two = T::lit(2.0);
    let h0 = grid.h[0];
    let h1 = grid.h[1];
    let mut out = Field::zeros(grid);
    for i in 0..n0 as isize {
        for j in 0..n1 as isize {
            let c = at(i, j);
            let fxx = (at(i + 1, j) - two * c + at(i - 1, j)) / (h0 * h0);
            let mut s = fxx * fxx;
            if grid.dim == 2 {
                let fyy = (at(i, j + 1) - two * c + at(i, j - 1)) / (h1 * h1);
                let fxy = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1)
                    + at(i - 1, j - 1))
                    / (T::lit(4.0) * h0 * h1);
                s = s + fyy * fyy + two * fxy * fxy;
            }
            out.values[grid.index(i as usize, j as usize)] = s;
        }
    }
    out
}

/// Midpoint quadrature over the domain.
pub fn cell_integral<T: Scalar>(f: &Field<T>) -> T {
    f.values.iter().copied().sum::<T>() * f.grid.cell_volume()
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes a snapshot: one header line then one value per line in cell order.
/// Values use the shortest representation that parses back to the same bits.
pub fn write_snapshot<T: Scalar, W: Write>(f: &Field<T>, mut w: W) -> Result<(), GridError> {
    let g = f.grid;
    writeln!(
        w,
        "# grid dim={} cells={} extent={}",
        g.dim,
        join(g.cells()),
        join(g.extent())
    )?;
    for v in &f.values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn read_snapshot<T: Scalar, R: BufRead>(r: R) -> Result<Field<T>, GridError> {
    let mut lines = r.lines();
    let header = lines.next().ok_or(GridError::Parse {
        line: 1,
        msg: "empty input".into(),
    })??;
    let perr = |msg: &str| GridError::Parse {
        line: 1,
        msg: msg.to_string(),
    };
    let rest = header
        .strip_prefix("# grid ")
        .ok_or_else(|| perr("missing '# grid' header"))?;
    let (mut dim, mut cells, mut extent) = (None, None, None);
    for tok in rest.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| perr("malformed header token"))?;
        match k {
            "dim" => dim = Some(v.parse::<usize>().map_err(|_| perr("bad dim"))?),
            "cells" => {
                cells = Some(
                    v.split(',')
                        .map(|s| s.parse::<usize>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| perr("bad cells"))?,
                )
            }
            "extent" => {
                extent = Some(
                    v.split(',')
                        .map(|s| s.parse::<T>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| perr("bad extent"))?,
                )
            }
            _ => return Err(perr("unknown header key")),
        }
    }
    let (dim, cells, extent) = match (dim, cells, extent) {
        (Some(d), Some(c), Some(e)) => (d, c, e),
        _ => return Err(perr("header needs dim, cells and extent")),
    };
    if cells.len() != dim {
        return Err(GridError::AxisCount {
            expected: dim,
            got: cells.len(),
        });
    }
    let grid = Grid::new(&cells, &extent)?;
    let mut values = Vec::with_capacity(grid.len());
    for (n, line) in lines.enumerate() {
        let line = line?;
        let s = line.trim();
        if s.is_empty() {
            continue;
        }
        let v = s.parse::<T>().map_err(|_| GridError::Parse {
            line: n + 2,
            msg: format!("bad value '{s}'"),
        })?;
        values.push(v);
    }
    Field::new(grid, values)
}
