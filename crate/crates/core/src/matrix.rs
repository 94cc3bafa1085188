//! Bit-packed Boolean matrices over the (OR, AND) semiring, where 1 + 1 = 1.

use std::fmt::Write as _;

use thiserror::Error;

use crate::id::ObjectId;

const WORD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error("matrix is not nilpotent: the relation has a cycle")]
    NotTriangular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Row-major Boolean matrix. Rows and columns carry the object ordering they
/// were built from; entry `(i, j)` set means an arrow from row object `i` to
/// column object `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    bits: Vec<u64>,
    pub row_ids: Vec<ObjectId>,
    pub col_ids: Vec<ObjectId>,
}

/// Result of [`BoolMatrix::causal_closure`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub matrix: BoolMatrix,
    /// Boolean matrix multiplications performed.
    pub iterations: usize,
}

impl BoolMatrix {
    pub fn zeros(row_ids: Vec<ObjectId>, col_ids: Vec<ObjectId>) -> Self {
        let (rows, cols) = (row_ids.len(), col_ids.len());
        let stride = cols.div_ceil(WORD);
        BoolMatrix { rows, cols, stride, bits: vec![0; rows * stride], row_ids, col_ids }
    }

    pub fn square(ids: Vec<ObjectId>) -> Self {
        BoolMatrix::zeros(ids.clone(), ids)
    }

    pub fn identity(ids: Vec<ObjectId>) -> Self {
        let mut m = BoolMatrix::square(ids);
        for i in 0..m.rows {
            m.set(i, i, true);
        }
        m
    }

    /// Square matrix with ids `0..n` (as strings), for index-only work.
    pub fn anonymous(n: usize) -> Self {
        let ids: Vec<ObjectId> = (0..n).map(|i| ObjectId::new(i.to_string()).expect("digits")).collect();
        BoolMatrix::square(ids)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        self.bits[i * self.stride + j / WORD] >> (j % WORD) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        debug_assert!(i < self.rows && j < self.cols);
        let w = &mut self.bits[i * self.stride + j / WORD];
        if v {
            *w |= 1 << (j % WORD);
        } else {
            *w &= !(1 << (j % WORD));
        }
    }

    fn row_words(&self, i: usize) -> &[u64] {
        &self.bits[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row_is_zero(&self, i: usize) -> bool {
        self.row_words(i).iter().all(|w| *w == 0)
    }

    pub fn col_is_zero(&self, j: usize) -> bool {
        (0..self.rows).all(|i| !self.get(i, j))
    }

    pub fn col_count(&self, j: usize) -> usize {
        (0..self.rows).filter(|&i| self.get(i, j)).count()
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Set entries as `(row, col)` index pairs in row-major order.
    pub fn ones(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn same_shape(&self, other: &BoolMatrix) -> Result<(), MatrixError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Boolean sum `self + other`.
    pub fn or(&self, other: &BoolMatrix) -> Result<BoolMatrix, MatrixError> {
        self.same_shape(other)?;
        let mut out = self.clone();
        out.or_assign(other);
        Ok(out)
    }

    fn or_assign(&mut self, other: &BoolMatrix) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
    }

    /// Boolean product `self · other`.
    pub fn mul(&self, other: &BoolMatrix) -> Result<BoolMatrix, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} · {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BoolMatrix::zeros(self.row_ids.clone(), other.col_ids.clone());
        for i in 0..self.rows {
            let dst = i * out.stride;
            for k in 0..self.cols {
                if self.get(i, k) {
                    let src = k * other.stride;
                    for w in 0..out.stride {
                        out.bits[dst + w] |= other.bits[src + w];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BoolMatrix {
        let mut out = BoolMatrix::zeros(self.col_ids.clone(), self.row_ids.clone());
        for (i, j) in self.ones() {
            out.set(j, i, true);
        }
        out
    }

    /// `Σ_{n≥1} Mⁿ` for a nilpotent `M`. Stops at the first zero power; a
    /// nonzero `Mⁿ` with `n` equal to the dimension means a cycle.
    pub fn causal_closure(&self) -> Result<Closure, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let mut acc = self.clone();
        let mut power = self.clone();
        let mut iterations = 0;
        let mut exponent = 1;
        while !power.is_zero() {
            if exponent >= n {
                return Err(MatrixError::NotTriangular);
            }
            power = power.mul(self)?;
            iterations += 1;
            exponent += 1;
            acc.or_assign(&power);
        }
        Ok(Closure { matrix: acc, iterations })
    }

    /// `Σ_{n≥1} Mⁿ` for any square `M` (cycles allowed), computed as a
    /// fixed point.
    pub fn transitive_closure(&self) -> Result<BoolMatrix, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare(self.rows, self.cols));
        }
        let mut acc = self.clone();
        loop {
            let mut next = acc.mul(self)?;
            next.or_assign(&acc);
            if next == acc {
                return Ok(acc);
            }
            acc = next;
        }
    }

    pub fn with_identity(&self) -> Result<BoolMatrix, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare(self.rows, self.cols));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            out.set(i, i, true);
        }
        Ok(out)
    }

    /// Whether every set entry lies strictly below the diagonal.
    pub fn is_strictly_lower(&self) -> bool {
        self.ones().iter().all(|(i, j)| i > j)
    }

    pub fn is_strictly_upper(&self) -> bool {
        self.ones().iter().all(|(i, j)| i < j)
    }

    /// Debug dump: `M <name> <rows>x<cols>` followed by one 0/1 string per row.
    pub fn dump(&self, name: &str) -> String {
        let mut s = format!("M {name} {}x{}\n", self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                s.push(if self.get(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    /// Parses one [`BoolMatrix::dump`] block back, with anonymous ids.
    pub fn parse_dump(text: &str) -> Option<(String, BoolMatrix)> {
        let mut lines = text.lines();
        let head: Vec<&str> = lines.next()?.split_whitespace().collect();
        if head.len() != 3 || head[0] != "M" {
            return None;
        }
        let (r, c) = head[2].split_once('x')?;
        let (r, c): (usize, usize) = (r.parse().ok()?, c.parse().ok()?);
        let ids = |n: usize| (0..n).map(|i| ObjectId::new(i.to_string()).expect("digits")).collect();
        let mut m = BoolMatrix::zeros(ids(r), ids(c));
        for i in 0..r {
            let row = lines.next()?;
            if row.len() != c {
                return None;
            }
            for (j, ch) in row.chars().enumerate() {
                match ch {
                    '1' => m.set(i, j, true),
                    '0' => {}
                    _ => return None,
                }
            }
        }
        Some((head[1].to_string(), m))
    }

    /// Entries as `row_id -> col_id` strings, handy in reports.
    pub fn describe_ones(&self) -> String {
        let mut s = String::new();
        for (i, j) in self.ones() {
            let _ = write!(s, "{}->{} ", self.row_ids[i], self.col_ids[j]);
        }
        s.trim_end().to_string()
    }
}
