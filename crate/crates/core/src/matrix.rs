//! Dense real symmetric matrices.
//!
//! Every operator in this crate is real in the Fock-times-spin product basis,
//! so a thin wrapper over `nalgebra::DMatrix<f64>` that certifies symmetry at
//! construction is all the structure we need.

use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct RealSymmetricMatrix(DMatrix<f64>);

impl RealSymmetricMatrix {
    /// Wraps `m` after checking `|m[i][j] - m[j][i]| <= 1e-14 * max(|m[i][j]|, |m[j][i]|)`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidParameter(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                let dev = (a - b).abs();
                if dev > SYMMETRY_TOL * a.abs().max(b.abs()) {
                    return Err(Error::NotSymmetric { row: i, col: j, deviation: dev });
                }
            }
        }
        Ok(Self(m))
    }

    /// Builds from a generator evaluated on the lower triangle and mirrored.
    pub fn from_lower_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for i in j..dim {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = DMatrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Self(m)
    }

    /// Skips the symmetry check. Callers must construct `m` symmetric by design.
    pub(crate) fn from_symmetric_unchecked(m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// Max-norm of the commutator `[self, other]`.
    pub fn commutator_max_norm(&self, other: &DMatrix<f64>) -> f64 {
        let ab = &self.0 * other;
        let ba = other * &self.0;
        max_abs(&(ab - ba))
    }
}

impl Deref for RealSymmetricMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Kronecker product `a ⊗ b`, first factor slow.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}
