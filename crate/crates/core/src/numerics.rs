//! Dense row-major `f64` matrices and the few factorizations the kit needs:
//! Gauss-Jordan nullspaces, modified Gram-Schmidt, determinants and inverses.
//!
//! Everything here is O(n³) and allocation-happy. Matrices in this crate are
//! constraint systems of at most a few thousand rows, so that is fine.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use crate::error::{Error, Result};

/// Tolerance used when callers do not supply one.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative residual below which Gram-Schmidt drops a column as dependent.
const DROP_RATIO: f64 = 1e-12;

/// Dense real matrix stored row-major.
///
/// A matrix with zero columns is used as the explicit marker for an empty
/// basis (`n × 0`).
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Builds a `rows × columns.len()` matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Shape(format!("every column must have length {rows}")));
        }
        let cols = columns.len();
        Self::new(rows, cols, (0..rows * cols).map(|k| columns[k % cols][k / cols]).collect())
    }

    /// Permutation matrix sending basis vector `e_j` to `e_{perm[j]}`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
            }
        }
        let mut m = Self::zeros(n, n);
        for (j, &p) in perm.iter().enumerate() {
            m[(p, j)] = 1.0;
        }
        Ok(m)
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.cols).map(|j| self.column(j))
    }

    fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|x| !x.is_finite()) {
            Some(k) => Err(Error::NonFinite {
                row: k / self.cols.max(1),
                col: k % self.cols.max(1),
            }),
            None => Ok(()),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matvec length mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ · v` without materializing the transpose.
    pub fn matvec_transpose(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "matvec_transpose length mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                axpy(vi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    /// Block-diagonal matrix with the given blocks.
    pub fn block_diag(blocks: &[&Matrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)];
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Entrywise (Frobenius) inner product.
    pub fn frobenius_dot(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        dot(&self.data, &other.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_dot(self).sqrt()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> f64 {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[x * n + c].abs().total_cmp(&a[y * n + c].abs()))
                .unwrap();
            let pivot = a[p * n + c];
            if pivot == 0.0 {
                return 0.0;
            }
            if p != c {
                for j in 0..n {
                    a.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            det *= pivot;
            for i in c + 1..n {
                let f = a[i * n + c] / pivot;
                if f != 0.0 {
                    for j in c..n {
                        a[i * n + j] -= f * a[c * n + j];
                    }
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination; `None` if a pivot falls below
    /// `1e-12 · max|entry|`.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let thresh = 1e-12 * self.max_abs();
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = (c..n).max_by(|&x, &y| a[(x, c)].abs().total_cmp(&a[(y, c)].abs()))?;
            let pivot = a[(p, c)];
            if pivot.abs() <= thresh || pivot == 0.0 {
                return None;
            }
            a.swap_rows(p, c);
            inv.swap_rows(p, c);
            a.scale_row(c, 1.0 / pivot);
            inv.scale_row(c, 1.0 / pivot);
            for i in 0..n {
                let f = a[(i, c)];
                if i != c && f != 0.0 {
                    a.sub_scaled_row(i, c, f);
                    inv.sub_scaled_row(i, c, f);
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn scale_row(&mut self, r: usize, s: f64) {
        for x in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *x *= s;
        }
    }

    /// row[target] -= f · row[source]
    fn sub_scaled_row(&mut self, target: usize, source: usize, f: f64) {
        let c = self.cols;
        let (src, dst) = if source < target {
            let (lo, hi) = self.data.split_at_mut(target * c);
            (&lo[source * c..(source + 1) * c], &mut hi[..c])
        } else {
            let (lo, hi) = self.data.split_at_mut(source * c);
            (&hi[..c], &mut lo[target * c..(target + 1) * c])
        };
        axpy(-f, src, dst);
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy(a, rhs.row(k), out_row);
                }
            }
        }
        out
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += a · x
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Orthonormal basis for `{v : M v ≈ 0}` as the columns of a `cols × d` matrix.
///
/// Gauss-Jordan elimination with partial pivoting reduces `m` to reduced
/// row-echelon form; columns whose best pivot is at most `tol · max|m|` are
/// free. Each free column yields one kernel vector by back-substitution, and
/// the set is orthonormalized in free-column order.
pub fn nullspace(m: &Matrix, tol: f64) -> Result<Matrix> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if m.rows == 0 || m.cols == 0 {
        return Err(Error::InvalidArgument("nullspace of an empty matrix".into()));
    }
    m.check_finite()?;

    let (rows, cols) = (m.rows, m.cols);
    let thresh = tol * m.max_abs();
    let mut w = m.clone();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let p = (r..rows)
            .max_by(|&x, &y| w[(x, c)].abs().total_cmp(&w[(y, c)].abs()))
            .unwrap();
        let pivot = w[(p, c)];
        if pivot.abs() <= thresh || pivot == 0.0 {
            continue;
        }
        w.swap_rows(p, r);
        w.scale_row(r, 1.0 / pivot);
        for i in 0..rows {
            let f = w[(i, c)];
            if i != r && f != 0.0 {
                w.sub_scaled_row(i, r, f);
            }
        }
        pivots.push(c);
        r += 1;
    }

    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let kernel: Vec<Vec<f64>> = (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![0.0; cols];
            v[f] = 1.0;
            for (k, &pc) in pivots.iter().enumerate() {
                v[pc] = -w[(k, f)];
            }
            v
        })
        .collect();
    Ok(orthonormalize(&Matrix::from_columns(cols, &kernel)?))
}

/// Numerical rank at threshold `tol`, i.e. `cols − dim nullspace`.
pub fn rank(m: &Matrix, tol: f64) -> Result<usize> {
    Ok(m.cols - nullspace(m, tol)?.cols)
}

/// Modified Gram-Schmidt over the columns of `v`, in column order.
///
/// Each column is swept twice against the accepted vectors and dropped when
/// what remains is below `1e-12` of its starting norm. An all-zero input
/// yields a `rows × 0` matrix.
pub fn orthonormalize(v: &Matrix) -> Matrix {
    let mut accepted: Vec<Vec<f64>> = Vec::new();
    for mut w in v.columns() {
        let initial = norm(&w);
        if initial == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &accepted {
                let proj = dot(q, &w);
                axpy(-proj, q, &mut w);
            }
        }
        let residual = norm(&w);
        if residual < DROP_RATIO * initial {
            continue;
        }
        w.iter_mut().for_each(|x| *x /= residual);
        accepted.push(w);
    }
    Matrix::from_columns(v.rows, &accepted).expect("columns share the input row count")
}

/// Orthogonal projector `Q Qᵀ` onto the span of orthonormal columns `q`.
pub fn projector(q: &Matrix) -> Matrix {
    q * &q.transpose()
}
