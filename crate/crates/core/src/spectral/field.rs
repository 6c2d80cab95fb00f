use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Real samples of a scalar on a [`Grid`], flat index `(i1 * n + i2) * n + i3`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    data: Vec<f64>,
}

impl ScalarField {
    pub(crate) fn from_raw(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self { data: vec![value; grid.num_points()] }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        Self { data: grid.points().map(f).collect() }
    }

    pub fn from_vec(grid: &Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.num_points() {
            return Err(Error::ShapeMismatch { expected: grid.num_points(), got: data.len() });
        }
        Ok(Self { data })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self { data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sum of squares of the samples (no volume factor).
    pub fn sum_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Real-space L2 norm over the box.
    pub fn l2_norm(&self, grid: &Grid) -> f64 {
        (self.sum_sq() * grid.cell_volume()).sqrt()
    }

    pub fn check_finite(&self, field: &'static str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { field })
        }
    }
}

/// Three real components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField(pub [ScalarField; 3]);

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        Self(std::array::from_fn(|_| ScalarField::zeros(grid)))
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let vals: Vec<[f64; 3]> = grid.points().map(f).collect();
        Self(std::array::from_fn(|i| ScalarField::from_raw(vals.iter().map(|v| v[i]).collect())))
    }

    pub fn from_components(components: [ScalarField; 3]) -> Self {
        Self(components)
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.0
    }

    pub fn at(&self, p: usize) -> [f64; 3] {
        std::array::from_fn(|i| self.0[i].as_slice()[p])
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self(std::array::from_fn(|i| f(&self.0[i])))
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        Self(std::array::from_fn(|i| f(&self.0[i], &other.0[i])))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, ScalarField::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, ScalarField::sub)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|c| c.scale(a))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(ScalarField::max_abs).fold(0.0, f64::max)
    }

    pub fn sum_sq(&self) -> f64 {
        self.0.iter().map(ScalarField::sum_sq).sum()
    }

    pub fn l2_norm(&self, grid: &Grid) -> f64 {
        (self.sum_sq() * grid.cell_volume()).sqrt()
    }

    pub fn check_finite(&self, field: &'static str) -> Result<()> {
        self.0.iter().try_for_each(|c| c.check_finite(field))
    }
}

impl Index<usize> for VectorField {
    type Output = ScalarField;
    fn index(&self, i: usize) -> &ScalarField {
        &self.0[i]
    }
}

impl IndexMut<usize> for VectorField {
    fn index_mut(&mut self, i: usize) -> &mut ScalarField {
        &mut self.0[i]
    }
}

/// 3x3 tensor components, row-major: entry `(i, j)` is component `3 * i + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField33(pub [ScalarField; 9]);

pub type Mat3 = [[f64; 3]; 3];

impl TensorField33 {
    pub fn zeros(grid: &Grid) -> Self {
        Self(std::array::from_fn(|_| ScalarField::zeros(grid)))
    }

    pub fn identity(grid: &Grid) -> Self {
        Self::constant(grid, IDENTITY)
    }

    pub fn constant(grid: &Grid, m: Mat3) -> Self {
        Self(std::array::from_fn(|c| ScalarField::constant(grid, m[c / 3][c % 3])))
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> Mat3) -> Self {
        let vals: Vec<Mat3> = grid.points().map(f).collect();
        Self::from_matrices(&vals)
    }

    pub fn from_matrices(vals: &[Mat3]) -> Self {
        Self(std::array::from_fn(|c| ScalarField::from_raw(vals.iter().map(|m| m[c / 3][c % 3]).collect())))
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.0[3 * i + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut ScalarField {
        &mut self.0[3 * i + j]
    }

    pub fn at(&self, p: usize) -> Mat3 {
        std::array::from_fn(|i| std::array::from_fn(|j| self.0[3 * i + j].as_slice()[p]))
    }

    pub fn matrices(&self) -> Vec<Mat3> {
        (0..self.0[0].len()).map(|p| self.at(p)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self(std::array::from_fn(|c| self.0[3 * (c % 3) + c / 3].clone()))
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self(std::array::from_fn(|c| f(&self.0[c])))
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        Self(std::array::from_fn(|c| f(&self.0[c], &other.0[c])))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, ScalarField::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, ScalarField::sub)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|c| c.scale(a))
    }

    /// Pointwise map over 3x3 matrices.
    pub fn map_points(&self, f: impl Fn(Mat3) -> Mat3) -> Self {
        let vals: Vec<Mat3> = (0..self.0[0].len()).map(|p| f(self.at(p))).collect();
        Self::from_matrices(&vals)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(ScalarField::max_abs).fold(0.0, f64::max)
    }

    pub fn sum_sq(&self) -> f64 {
        self.0.iter().map(ScalarField::sum_sq).sum()
    }

    pub fn l2_norm(&self, grid: &Grid) -> f64 {
        (self.sum_sq() * grid.cell_volume()).sqrt()
    }

    pub fn check_finite(&self, field: &'static str) -> Result<()> {
        self.0.iter().try_for_each(|c| c.check_finite(field))
    }
}

impl Index<usize> for TensorField33 {
    type Output = ScalarField;
    fn index(&self, c: usize) -> &ScalarField {
        &self.0[c]
    }
}

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

pub fn mat_transpose(a: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

pub fn mat_det(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Inverse via the adjugate; `None` if singular.
pub fn mat_inverse(a: &Mat3) -> Option<Mat3> {
    let det = mat_det(a);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let c = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]
    };
    Some(std::array::from_fn(|i| std::array::from_fn(|j| c(j, i) / det)))
}

/// Fourier coefficients on a grid's half-spectrum layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: &Grid) -> Self {
        Self { data: vec![Complex64::new(0.0, 0.0); grid.num_modes()] }
    }

    pub(crate) fn from_vec(data: Vec<Complex64>) -> Self {
        Self { data }
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn map_indexed(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self { data: self.data.iter().enumerate().map(|(i, &c)| f(i, c)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self { data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { data: self.data.iter().map(|&c| c * a).collect() }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * *y;
        }
    }
}

impl Index<usize> for Spectrum {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for Spectrum {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.data[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_matrix() {
        let a = [[2.0, 0.5, 0.1], [0.3, 1.5, -0.2], [0.0, 0.4, 1.1]];
        let inv = mat_inverse(&a).unwrap();
        let id = mat_mul(&a, &inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[i][j] - want).abs() < 1e-14);
            }
        }
        assert!(mat_inverse(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]).is_none());
    }

    #[test]
    fn nonfinite_is_an_error() {
        let grid = Grid::periodic(4).unwrap();
        let mut f = ScalarField::zeros(&grid);
        assert!(f.check_finite("f").is_ok());
        f.as_mut_slice()[5] = f64::NAN;
        assert!(matches!(f.check_finite("f"), Err(Error::NonFinite { field: "f" })));
    }

    #[test]
    fn transpose_swaps_components() {
        let grid = Grid::periodic(4).unwrap();
        let t = TensorField33::from_fn(&grid, |x| [[1.0, x[0], 2.0], [3.0, 4.0, 5.0], [6.0, 7.0, x[2]]]);
        let tt = t.transpose();
        assert_eq!(tt.get(1, 0), t.get(0, 1));
        assert_eq!(tt.get(2, 1), t.get(1, 2));
        assert_eq!(tt.get(2, 2), t.get(2, 2));
    }
}
