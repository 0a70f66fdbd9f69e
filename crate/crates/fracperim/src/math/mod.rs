//! Small fixed-dimension linear algebra (n <= 3), dimensional constants,
//! compensated summation, Gauss-Legendre nodes and tiny statistics helpers.

pub mod quad;
pub mod stats;

use crate::{Error, Result};
use num_traits::Float;

pub const MAX_DIM: usize = 3;

/// Point/vector in R^n for n in {1,2,3}. Storage is a fixed 3-array with
/// zero padding so arithmetic never branches on the dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vector {
    data: [f64; 3],
    dim: usize,
}

impl Vector {
    pub fn new(coords: &[f64]) -> Self {
        assert!(!coords.is_empty() && coords.len() <= MAX_DIM, "dimension 1..=3");
        let mut data = [0.0; 3];
        data[..coords.len()].copy_from_slice(coords);
        Vector { data, dim: coords.len() }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM);
        Vector { data: [0.0; 3], dim }
    }

    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[axis] = 1.0;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.data[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: f64) {
        debug_assert!(i < self.dim);
        self.data[i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.dim]
    }

    #[inline]
    pub fn dot(&self, o: &Vector) -> f64 {
        self.data[0] * o.data[0] + self.data[1] * o.data[1] + self.data[2] * o.data[2]
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn add(&self, o: &Vector) -> Vector {
        debug_assert_eq!(self.dim, o.dim);
        Vector {
            data: [
                self.data[0] + o.data[0],
                self.data[1] + o.data[1],
                self.data[2] + o.data[2],
            ],
            dim: self.dim,
        }
    }

    #[inline]
    pub fn sub(&self, o: &Vector) -> Vector {
        debug_assert_eq!(self.dim, o.dim);
        Vector {
            data: [
                self.data[0] - o.data[0],
                self.data[1] - o.data[1],
                self.data[2] - o.data[2],
            ],
            dim: self.dim,
        }
    }

    #[inline]
    pub fn scale(&self, k: f64) -> Vector {
        Vector {
            data: [self.data[0] * k, self.data[1] * k, self.data[2] * k],
            dim: self.dim,
        }
    }

    /// x + t*d without intermediate allocations.
    #[inline]
    pub fn add_scaled(&self, d: &Vector, t: f64) -> Vector {
        Vector {
            data: [
                self.data[0] + t * d.data[0],
                self.data[1] + t * d.data[1],
                self.data[2] + t * d.data[2],
            ],
            dim: self.dim,
        }
    }

    #[inline]
    pub fn dist(&self, o: &Vector) -> f64 {
        self.sub(o).norm()
    }

    pub fn unit(&self) -> Result<Vector> {
        let n = self.norm();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize zero vector".into()));
        }
        Ok(self.scale(1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }
}

/// Square matrix in R^{n x n}, n <= 3 (row-major, zero padded).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix {
    rows: [[f64; 3]; 3],
    dim: usize,
}

impl Matrix {
    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM);
        let mut rows = [[0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Matrix { rows, dim }
    }

    pub fn from_rows(dim: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        let mut rows = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                rows[i][j] = entries[i * dim + j];
            }
        }
        // pad the diagonal so padded vector lanes pass through unchanged
        for i in dim..3 {
            rows[i][i] = 1.0;
        }
        Matrix { rows, dim }
    }

    pub fn rotation_2d(angle: f64) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        Matrix::from_rows(2, &[c, -s, s, c])
    }

    /// Rotation about a (unit) axis by `angle` (Rodrigues), n = 3.
    pub fn rotation_3d(axis: &Vector, angle: f64) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        let (x, y, z) = (axis.coord(0), axis.coord(1), axis.coord(2));
        let omc = 1.0 - c;
        Matrix::from_rows(
            3,
            &[
                c + x * x * omc,
                x * y * omc - z * s,
                x * z * omc + y * s,
                y * x * omc + z * s,
                c + y * y * omc,
                y * z * omc - x * s,
                z * x * omc - y * s,
                z * y * omc + x * s,
                c + z * z * omc,
            ],
        )
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    #[inline]
    pub fn mul_vec(&self, v: &Vector) -> Vector {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = self.rows[i][0] * v.data[0]
                + self.rows[i][1] * v.data[1]
                + self.rows[i][2] * v.data[2];
        }
        Vector { data: out, dim: v.dim }
    }

    /// Transpose-multiply (the inverse for orthogonal maps).
    #[inline]
    pub fn tr_mul_vec(&self, v: &Vector) -> Vector {
        let mut out = [0.0; 3];
        for j in 0..3 {
            out[j] = self.rows[0][j] * v.data[0]
                + self.rows[1][j] * v.data[1]
                + self.rows[2][j] * v.data[2];
        }
        Vector { data: out, dim: v.dim }
    }

    pub fn transpose(&self) -> Matrix {
        let mut rows = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                rows[i][j] = self.rows[j][i];
            }
        }
        Matrix { rows, dim: self.dim }
    }

    /// Check orthogonality to tolerance (rows orthonormal).
    pub fn is_orthogonal(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut d = 0.0;
                for k in 0..self.dim {
                    d += self.rows[i][k] * self.rows[j][k];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                if (d - target).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Volume of the n-dimensional unit ball.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => core::f64::consts::PI,
        3 => 4.0 * core::f64::consts::PI / 3.0,
        _ => {
            let nh = n as f64 / 2.0;
            libm::pow(core::f64::consts::PI, nh) / libm::tgamma(nh + 1.0)
        }
    }
}

/// Surface measure of the (n-1)-sphere bounding the unit ball: n * w_n.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Kahan compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Kahan { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Orthonormal basis of the hyperplane orthogonal to a unit vector `w`.
/// Returns `dim - 1` vectors; deterministic construction.
pub fn orthonormal_complement(w: &Vector) -> alloc::vec::Vec<Vector> {
    let n = w.dim();
    let mut basis = alloc::vec::Vec::new();
    match n {
        1 => {}
        2 => {
            basis.push(Vector::new(&[-w.coord(1), w.coord(0)]));
        }
        3 => {
            // pick the coordinate axis least aligned with w
            let a = [w.coord(0).abs(), w.coord(1).abs(), w.coord(2).abs()];
            let k = if a[0] <= a[1] && a[0] <= a[2] {
                0
            } else if a[1] <= a[2] {
                1
            } else {
                2
            };
            let e = Vector::basis(3, k);
            let u = e.sub(&w.scale(e.dot(w)));
            let u = u.scale(1.0 / u.norm());
            // v = w x u
            let v = Vector::new(&[
                w.coord(1) * u.coord(2) - w.coord(2) * u.coord(1),
                w.coord(2) * u.coord(0) - w.coord(0) * u.coord(2),
                w.coord(0) * u.coord(1) - w.coord(1) * u.coord(0),
            ]);
            basis.push(u);
            basis.push(v);
        }
        _ => unreachable!(),
    }
    basis
}
