use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use super::echelon::{small_rank, Echelon};
use super::rational::{format_rational, rat, Rational};

/// Sparse matrix with exact rational entries.
///
/// Stored row-major; each row is a list of `(column, value)` pairs with
/// strictly increasing columns and no explicit zeros, so structural
/// equality coincides with mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, Rational)>>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Vec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, &Rational::one())
    }

    pub fn scalar(n: usize, c: &Rational) -> Self {
        let mut m = Self::zeros(n, n);
        if !c.is_zero() {
            for (i, row) in m.data.iter_mut().enumerate() {
                row.push((i, c.clone()));
            }
        }
        m
    }

    /// Builds a matrix from `(row, col, value)` triples; repeated positions
    /// are summed.
    ///
    /// Panics if a position is out of range.
    pub fn from_entries<I>(rows: usize, cols: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Rational)>,
    {
        let mut b = MatrixBuilder::new(rows, cols);
        for (r, c, v) in entries {
            b.add(r, c, v);
        }
        b.build()
    }

    /// Dense row-major integer constructor, mostly for tests.
    pub fn from_i64(rows: usize, cols: usize, values: &[i64]) -> Self {
        assert_eq!(values.len(), rows * cols, "dense data has wrong length");
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(|(i, v)| (i / cols, i % cols, rat(*v)));
        Self::from_entries(rows, cols, entries)
    }

    /// Builds a matrix from column vectors of equal length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<(usize, Rational)>]) -> Self {
        let mut b = MatrixBuilder::new(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            for (r, v) in col {
                b.add(*r, c, v.clone());
            }
        }
        b.build()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    pub fn row(&self, r: usize) -> &[(usize, Rational)] {
        &self.data[r]
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        match self.data[r].binary_search_by_key(&c, |(col, _)| *col) {
            Ok(i) => self.data[r][i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Iterates over the nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, v)| (r, *c, v)))
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![Vec::new(); self.cols];
        for (r, row) in self.data.iter().enumerate() {
            for (c, v) in row {
                data[*c].push((r, v.clone()));
            }
        }
        RatMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Column `c` as a sparse vector.
    pub fn column(&self, c: usize) -> Vec<(usize, Rational)> {
        let mut out = Vec::new();
        for (r, row) in self.data.iter().enumerate() {
            if let Ok(i) = row.binary_search_by_key(&c, |(col, _)| *col) {
                out.push((r, row[i].1.clone()));
            }
        }
        out
    }

    /// Matrix product `self * rhs`. Panics on a shape mismatch.
    pub fn mul(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut acc: Vec<Rational> = vec![Rational::zero(); rhs.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; rhs.cols];
        let mut data = Vec::with_capacity(self.rows);
        for row in &self.data {
            for (k, a) in row {
                for (c, b) in &rhs.data[*k] {
                    if !mark[*c] {
                        mark[*c] = true;
                        touched.push(*c);
                    }
                    acc[*c] += a * b;
                }
            }
            touched.sort_unstable();
            let mut out = Vec::with_capacity(touched.len());
            for &c in &touched {
                mark[c] = false;
                let v = core::mem::replace(&mut acc[c], Rational::zero());
                if !v.is_zero() {
                    out.push((c, v));
                }
            }
            touched.clear();
            data.push(out);
        }
        RatMatrix {
            rows: self.rows,
            cols: rhs.cols,
            data,
        }
    }

    pub fn add(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shape mismatch");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| merge_rows(a, b, |x, y| x + y))
            .collect();
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &RatMatrix) -> RatMatrix {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> RatMatrix {
        self.scale(&rat(-1))
    }

    pub fn scale(&self, c: &Rational) -> RatMatrix {
        if c.is_zero() {
            return Self::zeros(self.rows, self.cols);
        }
        let data = self
            .data
            .iter()
            .map(|row| row.iter().map(|(j, v)| (*j, v * c)).collect())
            .collect();
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Places blocks side by side. All blocks must have `rows` rows.
    pub fn hstack(rows: usize, blocks: &[&RatMatrix]) -> RatMatrix {
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut data = vec![Vec::new(); rows];
        let mut offset = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hstack row mismatch");
            for (r, row) in b.data.iter().enumerate() {
                data[r].extend(row.iter().map(|(c, v)| (c + offset, v.clone())));
            }
            offset += b.cols;
        }
        RatMatrix { rows, cols, data }
    }

    /// Places blocks on top of each other. All blocks must have `cols` columns.
    pub fn vstack(cols: usize, blocks: &[&RatMatrix]) -> RatMatrix {
        let mut data = Vec::new();
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack column mismatch");
            data.extend(b.data.iter().cloned());
        }
        RatMatrix {
            rows: data.len(),
            cols,
            data,
        }
    }

    pub fn block_diag(blocks: &[&RatMatrix]) -> RatMatrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut data = Vec::with_capacity(rows);
        let mut offset = 0;
        for b in blocks {
            for row in &b.data {
                data.push(row.iter().map(|(c, v)| (c + offset, v.clone())).collect());
            }
            offset += b.cols;
        }
        RatMatrix { rows, cols, data }
    }

    /// Kronecker product: block `(i, j)` is `self[i][j] · other`.
    pub fn kron(&self, other: &RatMatrix) -> RatMatrix {
        let (r, c) = other.shape();
        let entries = self.entries().flat_map(|(i, j, a)| {
            other
                .entries()
                .map(move |(k, l, b)| (i * r + k, j * c + l, a * b))
        });
        RatMatrix::from_entries(self.rows * r, self.cols * c, entries.collect::<Vec<_>>())
    }

    pub fn select_columns(&self, cols: &[usize]) -> RatMatrix {
        let mut position = vec![usize::MAX; self.cols];
        for (i, c) in cols.iter().enumerate() {
            position[*c] = i;
        }
        let mut b = MatrixBuilder::new(self.rows, cols.len());
        for (r, row) in self.data.iter().enumerate() {
            for (c, v) in row {
                if position[*c] != usize::MAX {
                    b.add(r, position[*c], v.clone());
                }
            }
        }
        b.build()
    }

    pub fn select_rows(&self, rows: &[usize]) -> RatMatrix {
        RatMatrix {
            rows: rows.len(),
            cols: self.cols,
            data: rows.iter().map(|r| self.data[*r].clone()).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        if let Some(r) = small_rank(self) {
            return r;
        }
        if self.rows <= self.cols {
            Echelon::from_rows(self).rank()
        } else {
            Echelon::from_rows(&self.transpose()).rank()
        }
    }

    /// A basis of the null space, as the columns of a `cols × nullity` matrix.
    pub fn kernel(&self) -> RatMatrix {
        let mut ech = Echelon::from_rows(self);
        ech.reduce();
        ech.kernel_basis(self.cols)
    }

    /// Rank together with a null-space basis.
    pub fn rank_kernel(&self) -> (usize, RatMatrix) {
        let mut ech = Echelon::from_rows(self);
        ech.reduce();
        (ech.rank(), ech.kernel_basis(self.cols))
    }

    /// One solution `X` of `self * X = rhs`, or `None` if the system is
    /// inconsistent. Free variables are set to zero.
    pub fn solve(&self, rhs: &RatMatrix) -> Option<RatMatrix> {
        assert_eq!(self.rows, rhs.rows, "solve shape mismatch");
        let aug = RatMatrix::hstack(self.rows, &[self, rhs]);
        let mut ech = Echelon::from_rows(&aug);
        ech.reduce();
        ech.particular_solution(self.cols, rhs.cols)
    }
}

fn merge_rows(
    a: &[(usize, Rational)],
    b: &[(usize, Rational)],
    op: impl Fn(&Rational, &Rational) -> Rational,
) -> Vec<(usize, Rational)> {
    let zero = Rational::zero();
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (c, v) = match (a.get(i), b.get(j)) {
            (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                i += 1;
                j += 1;
                (*ca, op(va, vb))
            }
            (Some((ca, va)), Some((cb, _))) if ca < cb => {
                i += 1;
                (*ca, op(va, &zero))
            }
            (Some((ca, va)), None) => {
                i += 1;
                (*ca, op(va, &zero))
            }
            (_, Some((cb, vb))) => {
                j += 1;
                (*cb, op(&zero, vb))
            }
            (None, None) => unreachable!(),
        };
        if !v.is_zero() {
            out.push((c, v));
        }
    }
    out
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{} ", format_rational(&self.get(r, c)))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Accumulates triples and produces a normalized [`RatMatrix`].
#[derive(Debug, Clone)]
pub struct MatrixBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, Rational)>,
}

impl MatrixBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        MatrixBuilder {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn add(&mut self, r: usize, c: usize, v: Rational) {
        assert!(r < self.rows && c < self.cols, "entry ({r},{c}) out of range");
        if !v.is_zero() {
            self.entries.push((r, c, v));
        }
    }

    /// Adds `block` with its top-left corner at `(r0, c0)`.
    pub fn add_block(&mut self, r0: usize, c0: usize, block: &RatMatrix) {
        for (r, c, v) in block.entries() {
            self.add(r0 + r, c0 + c, v.clone());
        }
    }

    pub fn add_scaled_block(&mut self, r0: usize, c0: usize, block: &RatMatrix, sign: i32) {
        for (r, c, v) in block.entries() {
            let v = if sign < 0 { -v.clone() } else { v.clone() };
            self.add(r0 + r, c0 + c, v);
        }
    }

    pub fn build(mut self) -> RatMatrix {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut data: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); self.rows];
        for (r, c, v) in self.entries {
            let row = &mut data[r];
            match row.last_mut() {
                Some((lc, lv)) if *lc == c => *lv += v,
                _ => row.push((c, v)),
            }
        }
        for row in &mut data {
            row.retain(|(_, v)| !v.is_zero());
        }
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rank_and_kernel() {
        let (rank, ker) = RatMatrix::identity(2).rank_kernel();
        assert_eq!(rank, 2);
        assert_eq!(ker.cols(), 0);
    }

    #[test]
    fn row_of_ones_kernel() {
        let m = RatMatrix::from_i64(1, 2, &[1, 1]);
        let (rank, ker) = m.rank_kernel();
        assert_eq!(rank, 1);
        assert_eq!(ker.shape(), (2, 1));
        // spanned by (1, -1) up to scale
        let v0 = ker.get(0, 0);
        assert!(!v0.is_zero());
        assert_eq!(ker.get(1, 0), -v0);
        assert!(m.mul(&ker).is_zero());
    }

    #[test]
    fn product_and_transpose() {
        let a = RatMatrix::from_i64(2, 3, &[1, 2, 0, 0, 1, -1]);
        let b = RatMatrix::from_i64(3, 2, &[1, 0, 0, 1, 1, 1]);
        assert_eq!(a.mul(&b), RatMatrix::from_i64(2, 2, &[1, 2, -1, 0]));
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.mul(&b).transpose(), b.transpose().mul(&a.transpose()));
    }

    #[test]
    fn builder_cancels_duplicates() {
        let m = RatMatrix::from_entries(2, 2, [(0, 0, rat(1)), (0, 0, rat(-1)), (1, 1, rat(2))]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 1), rat(2));
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = RatMatrix::from_i64(3, 2, &[1, 0, 0, 2, 1, 1]);
        let x = RatMatrix::from_i64(2, 1, &[3, -1]);
        let b = a.mul(&x);
        assert_eq!(a.solve(&b).unwrap(), x);
        let bad = RatMatrix::from_i64(3, 1, &[1, 0, 0]);
        assert!(a.solve(&bad).is_none());
    }

    #[test]
    fn stacking() {
        let a = RatMatrix::from_i64(1, 1, &[2]);
        let b = RatMatrix::from_i64(1, 2, &[1, 3]);
        assert_eq!(RatMatrix::hstack(1, &[&a, &b]), RatMatrix::from_i64(1, 3, &[2, 1, 3]));
        assert_eq!(
            RatMatrix::block_diag(&[&a, &b]),
            RatMatrix::from_i64(2, 3, &[2, 0, 0, 0, 1, 3])
        );
        assert_eq!(RatMatrix::vstack(1, &[&a, &a]).rows(), 2);
    }
}
