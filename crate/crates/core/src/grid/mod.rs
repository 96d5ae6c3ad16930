//! Periodic Cartesian grids and the fields that live on them.
//!
//! Storage is a flat row-major buffer (last axis fastest). Every grid is
//! periodic: index arithmetic wraps modulo the per-axis count. Cells also
//! carry a *lattice coordinate* `origin + storage_index` per axis, which is
//! the integer index `i` the wave equation is written in. Cells whose
//! lattice coordinates are all negative form the physical block; the
//! absorbing layer occupies everything with some coordinate `>= 0`.

mod scalar;
pub mod snapshot;

use serde::{Deserialize, Serialize};

pub use scalar::{Scalar, ScalarKind};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;
pub const MIN_AXIS_CELLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    dx: f64,
    shape: [usize; MAX_DIM],
    origin: [i64; MAX_DIM],
}

/// Builds a `d`-dimensional periodic grid with `n` cells per axis, centered
/// so that lattice coordinates run over `-n/2 .. n - n/2`.
pub fn make_grid(d: usize, dx: f64, n: usize) -> Result<GridSpec> {
    let origin = -((n / 2) as i64);
    GridSpec::new(dx, &vec![n; d], &vec![origin; d])
}

impl GridSpec {
    pub fn new(dx: f64, shape: &[usize], origin: &[i64]) -> Result<Self> {
        let dim = shape.len();
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} unsupported (expected 1..={MAX_DIM})"
            )));
        }
        if origin.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "origin has {} entries for a {dim}-dimensional grid",
                origin.len()
            )));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {dx}")));
        }
        if let Some(&n) = shape.iter().find(|&&n| n < MIN_AXIS_CELLS) {
            return Err(Error::InvalidGrid(format!(
                "at least {MIN_AXIS_CELLS} cells per axis required, got {n}"
            )));
        }
        let mut s = [1usize; MAX_DIM];
        let mut o = [0i64; MAX_DIM];
        s[..dim].copy_from_slice(shape);
        o[..dim].copy_from_slice(origin);
        Ok(Self {
            dim,
            dx,
            shape: s,
            origin: o,
        })
    }

    /// Grid with a physical block of `physical` cells and `layer` absorbing
    /// cells per axis; the layer runs from lattice coordinate 0 up to the
    /// periodic wrap.
    pub fn with_layer(d: usize, dx: f64, physical: usize, layer: usize) -> Result<Self> {
        GridSpec::new(dx, &vec![physical + layer; d], &vec![-(physical as i64); d])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim]
    }

    #[inline]
    pub fn origin(&self) -> &[i64] {
        &self.origin[..self.dim]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..self.dim].iter().product()
    }

    /// `(outer, n, inner)` such that a linear offset decomposes as
    /// `(o * n + c) * inner + t` with `c` the coordinate along `axis`.
    #[inline]
    pub fn axis_blocks(&self, axis: usize) -> (usize, usize, usize) {
        let outer = self.shape[..axis].iter().product();
        (outer, self.shape[axis], self.stride(axis))
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis < self.dim {
            Ok(())
        } else {
            Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            })
        }
    }

    /// Storage index tuple to linear offset; indices wrap periodically.
    pub fn offset(&self, index: &[i64]) -> usize {
        let mut off = 0usize;
        for (axis, &i) in index.iter().enumerate().take(self.dim) {
            let n = self.shape[axis] as i64;
            off = off * self.shape[axis] + i.rem_euclid(n) as usize;
        }
        off
    }

    pub fn index(&self, mut offset: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for axis in (0..self.dim).rev() {
            idx[axis] = offset % self.shape[axis];
            offset /= self.shape[axis];
        }
        idx
    }

    pub fn lattice_coords(&self, offset: usize) -> [i64; MAX_DIM] {
        let idx = self.index(offset);
        let mut out = [0i64; MAX_DIM];
        for axis in 0..self.dim {
            out[axis] = idx[axis] as i64 + self.origin[axis];
        }
        out
    }

    /// Linear offset of a lattice coordinate, if it lies inside the stored
    /// window (no wrapping).
    pub fn offset_of_lattice(&self, coords: &[i64]) -> Option<usize> {
        let mut off = 0usize;
        for axis in 0..self.dim {
            let s = coords[axis] - self.origin[axis];
            if s < 0 || s >= self.shape[axis] as i64 {
                return None;
            }
            off = off * self.shape[axis] + s as usize;
        }
        Some(off)
    }

    /// Number of cells per axis with negative lattice coordinate.
    pub fn physical_cells(&self, axis: usize) -> usize {
        (-self.origin[axis]).clamp(0, self.shape[axis] as i64) as usize
    }

    pub fn is_physical(&self, offset: usize) -> bool {
        let c = self.lattice_coords(offset);
        c[..self.dim].iter().all(|&x| x < 0)
    }

    /// Lattice coordinate of storage index `c` along `axis`.
    #[inline]
    pub fn lattice_coord(&self, axis: usize, c: usize) -> i64 {
        self.origin[axis] + c as i64
    }

    pub fn same_layout(&self, other: &GridSpec) -> bool {
        self == other
    }
}

/// Scalar values over a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: GridSpec,
    values: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Evaluates `f` at the lattice coordinates of every cell.
    pub fn from_lattice_fn(grid: GridSpec, mut f: impl FnMut(&[i64]) -> T) -> Self {
        let values = (0..grid.len())
            .map(|off| {
                let c = grid.lattice_coords(off);
                f(&c[..grid.dim()])
            })
            .collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Value at a storage index tuple (wrapping).
    pub fn get(&self, index: &[i64]) -> T {
        self.values[self.grid.offset(index)]
    }

    pub fn at_lattice(&self, coords: &[i64]) -> Option<T> {
        self.grid.offset_of_lattice(coords).map(|o| self.values[o])
    }

    pub fn check_same_grid(&self, other: &Field<T>) -> Result<()> {
        if self.grid.same_layout(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.modulus()))
    }

    pub fn fill_zero(&mut self) {
        self.values.iter_mut().for_each(|v| *v = T::zero());
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &Field<T>) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (x, &y) in self.values.iter_mut().zip(&other.values) {
            *x += y * a;
        }
    }

    pub fn scaled(&self, a: T) -> Field<T> {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| v * a).collect(),
        }
    }

    /// `(shift(F, axis, +1))(i) = F(i + e_axis)`, periodic.
    pub fn shift(&self, axis: usize, offset: i8) -> Result<Field<T>> {
        self.grid.check_axis(axis)?;
        if offset != 1 && offset != -1 {
            return Err(Error::param("offset", format!("must be +1 or -1, got {offset}")));
        }
        let (outer, n, inner) = self.grid.axis_blocks(axis);
        let mut out = Field::zeros(self.grid);
        for o in 0..outer {
            let base = o * n * inner;
            for c in 0..n {
                let src = if offset > 0 { (c + 1) % n } else { (c + n - 1) % n };
                let dst_row = base + c * inner;
                let src_row = base + src * inner;
                out.values[dst_row..dst_row + inner]
                    .copy_from_slice(&self.values[src_row..src_row + inner]);
            }
        }
        Ok(out)
    }

    /// `Σ_axis (-2U + τ⁻¹U + τU) / Δx²`, periodic.
    pub fn discrete_laplacian(&self) -> Field<T> {
        let mut out = Field::zeros(self.grid);
        laplacian_into(&self.grid, &self.values, &mut out.values);
        out
    }
}

/// Writes the periodic discrete Laplacian of `u` into `out` (overwrites).
pub(crate) fn laplacian_into<T: Scalar>(grid: &GridSpec, u: &[T], out: &mut [T]) {
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    out.iter_mut().for_each(|v| *v = T::zero());
    for axis in 0..grid.dim() {
        let (outer, n, inner) = grid.axis_blocks(axis);
        for o in 0..outer {
            let base = o * n * inner;
            for c in 0..n {
                let row = base + c * inner;
                let rm = base + ((c + n - 1) % n) * inner;
                let rp = base + ((c + 1) % n) * inner;
                let (um, u0, up) = (&u[rm..rm + inner], &u[row..row + inner], &u[rp..rp + inner]);
                for (t, o) in out[row..row + inner].iter_mut().enumerate() {
                    *o += (u0[t] * -2.0 + um[t] + up[t]) * inv_dx2;
                }
            }
        }
    }
}

pub fn shift<T: Scalar>(field: &Field<T>, axis: usize, offset: i8) -> Result<Field<T>> {
    field.shift(axis, offset)
}

pub fn discrete_laplacian<T: Scalar>(field: &Field<T>) -> Field<T> {
    field.discrete_laplacian()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn ring(values: Vec<f64>) -> Field<f64> {
        let g = GridSpec::new(1.0, &[values.len()], &[0]).unwrap();
        Field::from_values(g, values).unwrap()
    }

    #[test]
    fn make_grid_benchmark_layout() {
        let g = make_grid(2, 1.0 / 80.0, 160).unwrap();
        assert_eq!(g.len(), 160 * 160);
        assert_eq!(g.origin(), &[-80, -80]);
        assert_eq!(g.physical_cells(0), 80);
        // covers [-1, 1)
        assert_eq!(g.lattice_coord(0, 0) as f64 * g.dx(), -1.0);
        assert_eq!(g.lattice_coord(0, 159) as f64 * g.dx(), 1.0 - g.dx());
    }

    #[test]
    fn make_grid_minimal_and_invalid() {
        let g = make_grid(1, 1.0, 4).unwrap();
        assert_eq!(g.len(), 4);
        assert!(make_grid(2, 0.0, 8).is_err());
        assert!(make_grid(2, -1.0, 8).is_err());
        assert!(make_grid(1, 1.0, 3).is_err());
        assert!(make_grid(4, 1.0, 8).is_err());
        assert!(make_grid(0, 1.0, 8).is_err());
    }

    #[test]
    fn offset_index_bijection() {
        let g = GridSpec::new(0.5, &[4, 5, 6], &[-2, -3, 0]).unwrap();
        for off in 0..g.len() {
            let idx = g.index(off);
            let back = g.offset(&[idx[0] as i64, idx[1] as i64, idx[2] as i64]);
            assert_eq!(back, off);
            let lat = g.lattice_coords(off);
            assert_eq!(g.offset_of_lattice(&lat[..3]), Some(off));
        }
        assert_eq!(g.offset(&[-1, 0, 0]), g.offset(&[3, 0, 0]));
    }

    #[test]
    fn shift_ring() {
        let f = ring(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(f.shift(0, 1).unwrap().values(), &[2.0, 3.0, 4.0, 1.0]);
        assert_eq!(f.shift(0, -1).unwrap().values(), &[4.0, 1.0, 2.0, 3.0]);
        assert!(f.shift(1, 1).is_err());
        assert!(f.shift(0, 2).is_err());
    }

    #[test]
    fn shift_constant_field() {
        let g = make_grid(2, 0.1, 6).unwrap();
        let f = Field::from_values(g, vec![3.5; g.len()]).unwrap();
        for axis in 0..2 {
            assert_eq!(f.shift(axis, 1).unwrap(), f);
        }
    }

    #[test]
    fn laplacian_delta() {
        let f = ring(vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.discrete_laplacian().values(), &[-2.0, 1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn laplacian_constant_is_zero() {
        let g = make_grid(3, 0.25, 5).unwrap();
        let f = Field::from_values(g, vec![7.0; g.len()]).unwrap();
        assert!(f.discrete_laplacian().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn laplacian_plane_wave_eigenvalue() {
        let n = 12;
        let dx = 0.3;
        let g = GridSpec::new(dx, &[n], &[0]).unwrap();
        for m in 0..n {
            let k = 2.0 * std::f64::consts::PI * m as f64 / (n as f64 * dx);
            let f = Field::from_lattice_fn(g, |c| Complex64::new(0.0, k * dx * c[0] as f64).exp());
            let lam = -4.0 / (dx * dx) * (k * dx / 2.0).sin().powi(2);
            let l = f.discrete_laplacian();
            for (a, b) in l.values().iter().zip(f.values()) {
                assert!((a - b * lam).norm() <= 1e-12 * (4.0 / (dx * dx)));
            }
        }
    }

    proptest! {
        #[test]
        fn shift_roundtrip_and_permutation(vals in proptest::collection::vec(-1e3f64..1e3, 24), axis in 0usize..3) {
            let g = GridSpec::new(1.0, &[4, 4, 5], &[0, 0, 0]).unwrap();
            let vals: Vec<f64> = vals.iter().cycle().take(g.len()).copied().collect();
            let f = Field::from_values(g, vals).unwrap();
            let back = f.shift(axis, 1).unwrap().shift(axis, -1).unwrap();
            prop_assert_eq!(&back, &f);
            let mut a: Vec<f64> = f.values().to_vec();
            let mut b: Vec<f64> = f.shift(axis, 1).unwrap().values().to_vec();
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
            prop_assert_eq!(a, b);
        }

        #[test]
        fn laplacian_linear_and_self_adjoint(
            u in proptest::collection::vec(-1.0f64..1.0, 36),
            w in proptest::collection::vec(-1.0f64..1.0, 36),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let g = GridSpec::new(0.2, &[6, 6], &[-3, -3]).unwrap();
            let fu = Field::from_values(g, u).unwrap();
            let fw = Field::from_values(g, w).unwrap();
            let lu = fu.discrete_laplacian();
            let lw = fw.discrete_laplacian();

            let mut comb = fu.scaled(a);
            comb.add_scaled(b, &fw);
            let lcomb = comb.discrete_laplacian();
            let scale = 8.0 / (0.2f64 * 0.2) * (a.abs() + b.abs());
            for i in 0..g.len() {
                let expect = lu.values()[i] * a + lw.values()[i] * b;
                prop_assert!((lcomb.values()[i] - expect).abs() <= 1e-13 * scale.max(1.0));
            }

            let wlu: f64 = fw.values().iter().zip(lu.values()).map(|(x, y)| x * y).sum();
            let ulw: f64 = fu.values().iter().zip(lw.values()).map(|(x, y)| x * y).sum();
            let mag: f64 = fw.values().iter().zip(lu.values()).map(|(x, y)| (x * y).abs()).sum();
            prop_assert!((wlu - ulw).abs() <= 1e-12 * mag.max(1e-300));
        }
    }
}
