use std::ops::Deref;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrixcore::eigen::symmetric_eigenvalues;
use crate::matrixcore::Matrix;

/// Symmetric matrix. Entries are mirrored exactly: `s[(i, j)] == s[(j, i)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Accepts a square matrix that is already exactly symmetric.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dim("SymMatrix", "square", format!("{}x{}", m.rows(), m.cols())));
        }
        if m.rows() == 0 {
            return Err(Error::InvalidMatrix("order must be at least 1".into()));
        }
        let skew = m.max_abs_diff(&m.transpose());
        if skew != 0.0 {
            return Err(Error::InvalidMatrix(format!("not symmetric (skew {skew:e})")));
        }
        Ok(SymMatrix(m))
    }

    /// Stores (M + Mᵀ)/2.
    pub fn symmetrize(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dim("SymMatrix", "square", format!("{}x{}", m.rows(), m.cols())));
        }
        if m.rows() == 0 {
            return Err(Error::InvalidMatrix("order must be at least 1".into()));
        }
        Ok(SymMatrix(m.symmetric_part()))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    pub fn diag(values: &[f64]) -> Self {
        SymMatrix(Matrix::diag(values))
    }

    pub fn order(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Ascending eigenvalues.
    pub fn eigvals(&self) -> Result<Vec<f64>> {
        symmetric_eigenvalues(&self.0)
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> Result<SymMatrix> {
        SymMatrix::new(self.0.select(idx, idx))
    }
}

impl Deref for SymMatrix {
    type Target = Matrix;
    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = Matrix::deserialize(d)?;
        SymMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// Ascending eigenvalues of `s`.
pub fn sym_eigvals(s: &SymMatrix) -> Result<Vec<f64>> {
    s.eigvals()
}

/// Extreme eigenvalues (min, max).
pub fn eig_extremes(s: &SymMatrix) -> Result<(f64, f64)> {
    let ev = s.eigvals()?;
    Ok((ev[0], ev[ev.len() - 1]))
}
