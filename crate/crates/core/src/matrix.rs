//! Dense/sparse matrix handle used for the system matrices.

use crate::{CMat, RMat, C64};
use nalgebra::DMatrix;
use std::ops::Range;

/// Real compressed-sparse-column matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed, explicit zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut t: Vec<(usize, usize, f64)> = triplets.to_vec();
        t.sort_by(|x, y| (x.1, x.0).cmp(&(y.1, y.0)));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        let mut cols = Vec::with_capacity(t.len());
        for (i, j, v) in t {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(i);
                values.push(v);
                cols.push(j);
                last = Some((i, j));
            }
        }
        let mut keep_rows = Vec::with_capacity(row_idx.len());
        let mut keep_vals = Vec::with_capacity(row_idx.len());
        for ((i, v), j) in row_idx.into_iter().zip(values).zip(cols) {
            if v != 0.0 {
                keep_rows.push(i);
                keep_vals.push(v);
                col_ptr[j + 1] += 1;
            }
        }
        for j in 0..ncols {
            col_ptr[j + 1] += col_ptr[j];
        }
        SparseMatrix { nrows, ncols, col_ptr, row_idx: keep_rows, values: keep_vals }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, &[])
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &t)
    }

    pub fn from_dense(m: &RMat) -> Self {
        let mut t = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != 0.0 {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            (self.col_ptr[j]..self.col_ptr[j + 1]).map(move |k| (self.row_idx[k], j, self.values[k]))
        })
    }

    pub fn to_dense(&self) -> RMat {
        let mut m = RMat::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        let t: Vec<_> = self
            .triplets()
            .filter(|(i, j, _)| rows.contains(i) && cols.contains(j))
            .map(|(i, j, v)| (i - rows.start, j - cols.start, v))
            .collect();
        Self::from_triplets(rows.len(), cols.len(), &t)
    }

    pub fn norm1(&self) -> f64 {
        (0..self.ncols)
            .map(|j| self.values[self.col_ptr[j]..self.col_ptr[j + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn mul_generic<T>(&self, x: &DMatrix<T>, transpose: bool) -> DMatrix<T>
    where
        T: nalgebra::Scalar + num_like::Zero + std::ops::AddAssign + std::ops::Mul<f64, Output = T> + Copy,
    {
        let out_rows = if transpose { self.ncols } else { self.nrows };
        let mut y = DMatrix::from_element(out_rows, x.ncols(), T::zero());
        for c in 0..x.ncols() {
            for (i, j, v) in self.triplets() {
                if transpose {
                    let xi = x[(i, c)];
                    y[(j, c)] += xi * v;
                } else {
                    let xj = x[(j, c)];
                    y[(i, c)] += xj * v;
                }
            }
        }
        y
    }
}

mod num_like {
    pub trait Zero {
        fn zero() -> Self;
    }
    impl Zero for f64 {
        fn zero() -> Self {
            0.0
        }
    }
    impl Zero for crate::C64 {
        fn zero() -> Self {
            crate::C64::new(0.0, 0.0)
        }
    }
}

/// System matrix in either dense or compressed-sparse storage.
#[derive(Clone, Debug, PartialEq)]
pub enum SysMatrix {
    Dense(RMat),
    Sparse(SparseMatrix),
}

impl From<RMat> for SysMatrix {
    fn from(m: RMat) -> Self {
        SysMatrix::Dense(m)
    }
}

impl From<SparseMatrix> for SysMatrix {
    fn from(m: SparseMatrix) -> Self {
        SysMatrix::Sparse(m)
    }
}

impl SysMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            SysMatrix::Dense(m) => m.nrows(),
            SysMatrix::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            SysMatrix::Dense(m) => m.ncols(),
            SysMatrix::Sparse(m) => m.ncols(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, SysMatrix::Sparse(_))
    }

    /// Stored entries for sparse storage, nonzero entries for dense.
    pub fn nnz(&self) -> usize {
        match self {
            SysMatrix::Dense(m) => m.iter().filter(|v| **v != 0.0).count(),
            SysMatrix::Sparse(m) => m.nnz(),
        }
    }

    pub fn to_dense(&self) -> RMat {
        match self {
            SysMatrix::Dense(m) => m.clone(),
            SysMatrix::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        match self {
            SysMatrix::Dense(m) => SparseMatrix::from_dense(m),
            SysMatrix::Sparse(m) => m.clone(),
        }
    }

    /// Nonzero entries as triplets (column-major).
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        match self {
            SysMatrix::Dense(m) => {
                let mut t = Vec::new();
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        if m[(i, j)] != 0.0 {
                            t.push((i, j, m[(i, j)]));
                        }
                    }
                }
                t
            }
            SysMatrix::Sparse(m) => m.triplets().collect(),
        }
    }

    pub fn transpose(&self) -> SysMatrix {
        match self {
            SysMatrix::Dense(m) => SysMatrix::Dense(m.transpose()),
            SysMatrix::Sparse(m) => SysMatrix::Sparse(m.transpose()),
        }
    }

    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> SysMatrix {
        match self {
            SysMatrix::Dense(m) => SysMatrix::Dense(m.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned()),
            SysMatrix::Sparse(m) => SysMatrix::Sparse(m.submatrix(rows, cols)),
        }
    }

    pub fn norm1(&self) -> f64 {
        match self {
            SysMatrix::Dense(m) => m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max),
            SysMatrix::Sparse(m) => m.norm1(),
        }
    }

    pub fn norm_fro(&self) -> f64 {
        match self {
            SysMatrix::Dense(m) => m.norm(),
            SysMatrix::Sparse(m) => m.norm_fro(),
        }
    }

    /// True when every entry has magnitude at most `tol`.
    pub fn is_zero(&self, tol: f64) -> bool {
        match self {
            SysMatrix::Dense(m) => m.iter().all(|v| v.abs() <= tol),
            SysMatrix::Sparse(m) => m.triplets().all(|(_, _, v)| v.abs() <= tol),
        }
    }

    pub fn scaled(&self, alpha: f64) -> SysMatrix {
        match self {
            SysMatrix::Dense(m) => SysMatrix::Dense(m * alpha),
            SysMatrix::Sparse(m) => {
                let t: Vec<_> = m.triplets().map(|(i, j, v)| (i, j, alpha * v)).collect();
                SysMatrix::Sparse(SparseMatrix::from_triplets(m.nrows(), m.ncols(), &t))
            }
        }
    }

    pub fn mul(&self, x: &RMat) -> RMat {
        match self {
            SysMatrix::Dense(m) => m * x,
            SysMatrix::Sparse(m) => m.mul_generic(x, false),
        }
    }

    pub fn tr_mul(&self, x: &RMat) -> RMat {
        match self {
            SysMatrix::Dense(m) => m.tr_mul(x),
            SysMatrix::Sparse(m) => m.mul_generic(x, true),
        }
    }

    pub fn mul_c(&self, x: &CMat) -> CMat {
        match self {
            SysMatrix::Dense(m) => to_complex(m) * x,
            SysMatrix::Sparse(m) => m.mul_generic(x, false),
        }
    }

    pub fn tr_mul_c(&self, x: &CMat) -> CMat {
        match self {
            SysMatrix::Dense(m) => to_complex(m).tr_mul(x),
            SysMatrix::Sparse(m) => m.mul_generic(x, true),
        }
    }
}

/// `[[M11, M12], [M21, M22]]` from optional blocks (missing blocks are zero).
///
/// The result is sparse when any present block is sparse.
pub fn assemble_2x2(n1: usize, n2: usize, blocks: [[Option<&SysMatrix>; 2]; 2]) -> SysMatrix {
    let offs = [0, n1];
    let any_sparse = blocks.iter().flatten().flatten().any(|m| m.is_sparse());
    if any_sparse {
        let mut t = Vec::new();
        for (bi, row) in blocks.iter().enumerate() {
            for (bj, m) in row.iter().enumerate() {
                if let Some(m) = m {
                    t.extend(m.triplets().into_iter().map(|(i, j, v)| (i + offs[bi], j + offs[bj], v)));
                }
            }
        }
        SysMatrix::Sparse(SparseMatrix::from_triplets(n1 + n2, n1 + n2, &t))
    } else {
        let mut d = RMat::zeros(n1 + n2, n1 + n2);
        for (bi, row) in blocks.iter().enumerate() {
            for (bj, m) in row.iter().enumerate() {
                if let Some(SysMatrix::Dense(m)) = m {
                    d.view_mut((offs[bi], offs[bj]), m.shape()).copy_from(m);
                }
            }
        }
        SysMatrix::Dense(d)
    }
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|v| C64::new(v, 0.0))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|v| v.re)
}

pub fn imag_part(m: &CMat) -> RMat {
    m.map(|v| v.im)
}

/// Induced 1-norm of a dense complex matrix.
pub fn norm1_c(m: &CMat) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn norm1_r(m: &RMat) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}
