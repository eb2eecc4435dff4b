use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut, Mul};

use crate::error::{Error, Result};
use crate::math;

/// Matrices with `|det|` below this are rejected as cocycle values.
pub const DEGENERATE_DET: f64 = 1e-300;

/// Dense square real matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Rotation by `theta` in the plane; 2×2.
    pub fn rotation(theta: f64) -> Self {
        Self::rotation_cs(math::cos(theta), math::sin(theta))
    }

    /// Rotation from its cosine/sine pair, keeping exact zeros exact.
    pub fn rotation_cs(c: f64, s: f64) -> Self {
        Self { dim: 2, data: vec![c, -s, s, c] }
    }

    /// Rotation by `theta` in the `(p, q)` coordinate plane of `R^dim`.
    pub fn plane_rotation(dim: usize, p: usize, q: usize, theta: f64) -> Self {
        Self::plane_rotation_cs(dim, p, q, math::cos(theta), math::sin(theta))
    }

    pub fn plane_rotation_cs(dim: usize, p: usize, q: usize, c: f64, s: f64) -> Self {
        let mut m = Self::identity(dim);
        m[(p, p)] = c;
        m[(q, q)] = c;
        m[(p, q)] = -s;
        m[(q, p)] = s;
        m
    }

    /// Builds from row-major entries; `data.len()` must be `dim²`.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::MalformedMatrix("zero dimension".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::MalformedMatrix(alloc::format!(
                "{} entries for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { dim, data })
    }

    /// Builds from nested rows (the config literal form).
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::MalformedMatrix(alloc::format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(dim, data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        let n = self.dim;
        debug_assert_eq!(n, rhs.dim);
        let mut out = Self::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self.data[i * n + l];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.data[l * n..(l + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Multiplies every entry by `2^e`; exact away from over/underflow.
    pub(crate) fn scale_pow2(&mut self, e: i32) {
        let f = math::exp2i(e);
        for v in &mut self.data {
            *v *= f;
        }
    }

    /// LU factorization with partial pivoting: packed factors, permutation
    /// sign, and whether every pivot was nonzero.
    fn lu(&self) -> (Vec<f64>, f64, bool) {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut sign = 1.0;
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].abs();
            for r in col + 1..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return (a, sign, false);
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                sign = -sign;
            }
            let p = a[col * n + col];
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                if factor == 0.0 {
                    continue;
                }
                a[r * n + col] = factor;
                for j in col + 1..n {
                    a[r * n + j] -= factor * a[col * n + j];
                }
            }
        }
        (a, sign, true)
    }

    pub fn determinant(&self) -> f64 {
        let n = self.dim;
        match n {
            1 => return self.data[0],
            2 => return self.data[0] * self.data[3] - self.data[1] * self.data[2],
            _ => {}
        }
        let (lu, sign, ok) = self.lu();
        if !ok {
            return 0.0;
        }
        (0..n).fold(sign, |acc, i| acc * lu[i * n + i])
    }

    /// `ln|det|`, accumulated in log space so large dimensions do not overflow.
    pub fn log_abs_determinant(&self) -> f64 {
        let n = self.dim;
        if n <= 2 {
            return math::ln(self.determinant().abs());
        }
        let (lu, _, ok) = self.lu();
        if !ok {
            return f64::NEG_INFINITY;
        }
        (0..n).map(|i| math::ln(lu[i * n + i].abs())).sum()
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    ///
    /// Rejects matrices whose determinant magnitude is below [`DEGENERATE_DET`].
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim;
        let det = self.determinant();
        if !(det.abs() >= DEGENERATE_DET) {
            return Err(Error::Singular { det });
        }
        if n == 2 {
            let [a, b, c, d] = [self.data[0], self.data[1], self.data[2], self.data[3]];
            return Ok(Self { dim: 2, data: vec![d / det, -b / det, -c / det, a / det] });
        }
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[r * n + col].abs() > a[piv * n + col].abs() {
                    piv = r;
                }
            }
            if a[piv * n + col] == 0.0 {
                return Err(Error::Singular { det });
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                    inv.swap(col * n + j, piv * n + j);
                }
            }
            let p = a[col * n + col];
            for j in 0..n {
                a[col * n + j] /= p;
                inv[col * n + j] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[r * n + col];
                if factor == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[r * n + j] -= factor * a[col * n + j];
                    inv[r * n + j] -= factor * inv[col * n + j];
                }
            }
        }
        let out = Self { dim: n, data: inv };
        if !out.is_finite() {
            return Err(Error::Singular { det });
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.dim)).finish()
    }
}
