use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::matrixcore::{Matrix, SymMatrix};

/// Block partition with addressed sub-matrices. Absent blocks are zero.
#[derive(Clone, Debug)]
pub struct BlockLayout {
    row_sizes: Vec<usize>,
    col_sizes: Vec<usize>,
    blocks: BTreeMap<(usize, usize), Matrix>,
}

impl BlockLayout {
    pub fn new(row_sizes: &[usize], col_sizes: &[usize]) -> Self {
        BlockLayout {
            row_sizes: row_sizes.to_vec(),
            col_sizes: col_sizes.to_vec(),
            blocks: BTreeMap::new(),
        }
    }

    pub fn symmetric(sizes: &[usize]) -> Self {
        BlockLayout::new(sizes, sizes)
    }

    pub fn row_sizes(&self) -> &[usize] {
        &self.row_sizes
    }

    pub fn col_sizes(&self) -> &[usize] {
        &self.col_sizes
    }

    pub fn row_offset(&self, r: usize) -> usize {
        self.row_sizes[..r].iter().sum()
    }

    pub fn col_offset(&self, c: usize) -> usize {
        self.col_sizes[..c].iter().sum()
    }

    /// Place a block; its shape must match the slot.
    pub fn set(&mut self, r: usize, c: usize, m: Matrix) -> Result<()> {
        if r >= self.row_sizes.len() || c >= self.col_sizes.len() {
            return Err(Error::dim("block slot", format!("< ({}, {})", self.row_sizes.len(), self.col_sizes.len()), format!("({r}, {c})")));
        }
        let want = (self.row_sizes[r], self.col_sizes[c]);
        if m.shape() != want {
            return Err(Error::dim(
                format!("block ({r}, {c})"),
                format!("{}x{}", want.0, want.1),
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        self.blocks.insert((r, c), m);
        Ok(())
    }

    pub fn get(&self, r: usize, c: usize) -> Option<&Matrix> {
        self.blocks.get(&(r, c))
    }

    /// Slots that have been explicitly filled, in row-major order.
    pub fn filled_slots(&self) -> Vec<(usize, usize)> {
        self.blocks.keys().copied().collect()
    }

    pub fn assemble(&self) -> Matrix {
        let nr: usize = self.row_sizes.iter().sum();
        let nc: usize = self.col_sizes.iter().sum();
        let mut m = Matrix::zeros(nr, nc);
        for (&(r, c), b) in &self.blocks {
            m.set_block(self.row_offset(r), self.col_offset(c), b);
        }
        m
    }

    /// Symmetric completion: lower blocks come from the transposes of upper blocks
    /// (the `*` convention). A lower block is used only where its mirror is absent.
    /// Diagonal blocks are symmetrized and the result stores (S + Sᵀ)/2.
    pub fn assemble_symmetric(&self) -> Result<SymMatrix> {
        if self.row_sizes != self.col_sizes {
            return Err(Error::dim("symmetric layout", format!("{:?}", self.row_sizes), format!("{:?}", self.col_sizes)));
        }
        let n: usize = self.row_sizes.iter().sum();
        let mut m = Matrix::zeros(n, n);
        for (&(r, c), b) in &self.blocks {
            let (ro, co) = (self.row_offset(r), self.col_offset(c));
            if r == c {
                m.set_block(ro, co, &b.symmetric_part());
            } else if r < c {
                m.set_block(ro, co, b);
                m.set_block(co, ro, &b.transpose());
            } else if !self.blocks.contains_key(&(c, r)) {
                m.set_block(ro, co, b);
                m.set_block(co, ro, &b.transpose());
            }
        }
        SymMatrix::symmetrize(&m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrors_upper_blocks() {
        let mut l = BlockLayout::symmetric(&[1, 2]);
        l.set(0, 0, Matrix::from_rows(&[[1.0]]).unwrap()).unwrap();
        l.set(0, 1, Matrix::from_rows(&[[2.0, 3.0]]).unwrap()).unwrap();
        l.set(1, 1, Matrix::identity(2)).unwrap();
        let s = l.assemble_symmetric().unwrap();
        assert_eq!(s[(2, 0)], 3.0);
        assert_eq!(s.order(), 3);
        assert_eq!(l.filled_slots(), vec![(0, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn rejects_wrong_block_shape() {
        let mut l = BlockLayout::symmetric(&[1, 2]);
        assert!(l.set(0, 1, Matrix::zeros(2, 2)).is_err());
        assert!(l.set(3, 0, Matrix::zeros(1, 1)).is_err());
    }
}
