//! Exterior (compound) powers `∧^k M`.
//!
//! Entry `(I, J)` of the compound is the minor of `M` on rows `I` and
//! columns `J`, with `k`-subsets of `{0..d}` in lexicographic order.

use alloc::vec::Vec;

use super::{operator_norm, Matrix};
use crate::error::{Error, Result};

/// Up to this dimension minors are expanded by cofactors; above it each minor
/// is an LU determinant.
pub const COFACTOR_MAX_DIM: usize = 6;

/// `∧^k M` together with its degree.
#[derive(Clone, Debug, PartialEq)]
pub struct CompoundMatrix {
    k: usize,
    d: usize,
    matrix: Matrix,
}

impl CompoundMatrix {
    pub fn degree(&self) -> usize {
        self.k
    }

    /// Dimension of the underlying space `R^d`.
    pub fn base_dim(&self) -> usize {
        self.d
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn operator_norm(&self) -> f64 {
        operator_norm(&self.matrix)
    }
}

impl AsRef<Matrix> for CompoundMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.matrix
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // rightmost position that can still advance
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn exterior_power(m: &Matrix, k: usize) -> Result<CompoundMatrix> {
    let d = m.dim();
    if k == 0 || k > d {
        return Err(Error::DegreeOutOfRange { k, dim: d });
    }
    if k == 1 {
        return Ok(CompoundMatrix { k, d, matrix: m.clone() });
    }
    let subsets = k_subsets(d, k);
    let c = subsets.len();
    let mut data = Vec::with_capacity(c * c);
    let mut scratch = Vec::with_capacity(k * k);
    for rows in &subsets {
        for cols in &subsets {
            let minor = if d <= COFACTOR_MAX_DIM {
                cofactor_minor(m, rows, cols)
            } else {
                scratch.clear();
                for &i in rows {
                    for &j in cols {
                        scratch.push(m[(i, j)]);
                    }
                }
                Matrix::from_row_major(k, scratch.clone())?.determinant()
            };
            data.push(minor);
        }
    }
    Ok(CompoundMatrix { k, d, matrix: Matrix::from_row_major(c, data)? })
}

/// Laplace expansion along the first selected row.
fn cofactor_minor(m: &Matrix, rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        1 => m[(rows[0], cols[0])],
        2 => {
            m[(rows[0], cols[0])] * m[(rows[1], cols[1])]
                - m[(rows[0], cols[1])] * m[(rows[1], cols[0])]
        }
        len => {
            let mut sub_cols: Vec<usize> = Vec::with_capacity(len - 1);
            let mut acc = 0.0;
            for (pos, &j) in cols.iter().enumerate() {
                let a = m[(rows[0], j)];
                if a == 0.0 {
                    continue;
                }
                sub_cols.clear();
                sub_cols.extend(cols.iter().copied().filter(|&c| c != j));
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * a * cofactor_minor(m, &rows[1..], &sub_cols);
            }
            acc
        }
    }
}
