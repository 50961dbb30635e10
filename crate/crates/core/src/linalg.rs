//! Dense complex matrices and the handful of operations the rest of the crate
//! needs: adjoints, products, Kronecker products, tolerance comparisons and the
//! Hermitian / unitary predicates.

use std::fmt;

use thiserror::Error;

pub use num_complex::Complex64 as Complex;

/// The default comparison threshold used wherever a tolerance is optional.
pub const DEFAULT_EPS: f64 = 1e-9;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const I: Complex = Complex::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyShape { rows: usize, cols: usize },
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {actual}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        actual: usize,
    },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: cannot multiply {lhs:?} by {rhs:?}")]
    DimensionMismatch {
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("expected a 2x2 matrix, got {rows}x{cols}")]
    Not2x2 { rows: usize, cols: usize },
    #[error("ragged rows: row {row} has {len} entries, expected {expected}")]
    Ragged {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("matrix is singular")]
    Singular,
    #[error("tolerance must lie in (0, 1), got {0}")]
    BadTolerance(f64),
}

/// Strictly positive comparison threshold below one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(eps: f64) -> Result<Self, LinalgError> {
        if eps.is_finite() && eps > 0.0 && eps < 1.0 {
            Ok(Tolerance(eps))
        } else {
            Err(LinalgError::BadTolerance(eps))
        }
    }

    pub fn eps(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(DEFAULT_EPS)
    }
}

/// Dense row-major complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyShape { rows, cols });
        }
        if entries.len() != rows * cols {
            return Err(LinalgError::EntryCount {
                rows,
                cols,
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        if let Some(k) = entries.iter().position(|c| !c.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(ComplexMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from a list of rows.
    pub fn from_rows<R: AsRef<[Complex]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(LinalgError::Ragged {
                    row: i,
                    len: row.len(),
                    expected: n_cols,
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(n_rows, n_cols, entries)
    }

    /// Builds a matrix from rows of real numbers.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let rows: Vec<Vec<Complex>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| Complex::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// A column vector.
    pub fn column(entries: Vec<Complex>) -> Result<Self, LinalgError> {
        let n = entries.len();
        Self::new(n, 1, entries)
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity of order zero");
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            entries[i * n + i] = ONE;
        }
        ComplexMatrix {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "zero-sized matrix");
        ComplexMatrix {
            rows,
            cols,
            entries: vec![ZERO; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[Complex] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column_vec(&self, col: usize) -> Vec<Complex> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Entrywise sum. Panics on shape mismatch.
    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in add");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }

    /// Largest entrywise modulus of `self - other`; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> Option<f64> {
        if self.shape() != other.shape() {
            return None;
        }
        Some(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        )
    }

    /// Matrix-vector product. Panics when `v.len() != self.cols()`.
    pub fn apply(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

pub fn conjugate_transpose(m: &ComplexMatrix) -> ComplexMatrix {
    let mut entries = Vec::with_capacity(m.entries.len());
    for c in 0..m.cols {
        for r in 0..m.rows {
            entries.push(m.get(r, c).conj());
        }
    }
    ComplexMatrix {
        rows: m.cols,
        cols: m.rows,
        entries,
    }
}

pub fn mat_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if a.cols != b.rows {
        return Err(LinalgError::DimensionMismatch {
            lhs: a.shape(),
            rhs: b.shape(),
        });
    }
    let mut entries = vec![ZERO; a.rows * b.cols];
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.get(i, k);
            if aik == ZERO {
                continue;
            }
            for j in 0..b.cols {
                entries[i * b.cols + j] += aik * b.get(k, j);
            }
        }
    }
    Ok(ComplexMatrix {
        rows: a.rows,
        cols: b.cols,
        entries,
    })
}

/// Kronecker product; `result[i*p + k][j*q + l] = a[i][j] * b[k][l]` for `b` of shape `p x q`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = b.shape();
    let rows = a.rows * p;
    let cols = a.cols * q;
    let mut entries = vec![ZERO; rows * cols];
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a.get(i, j);
            for k in 0..p {
                for l in 0..q {
                    entries[(i * p + k) * cols + (j * q + l)] = aij * b.get(k, l);
                }
            }
        }
    }
    ComplexMatrix {
        rows,
        cols,
        entries,
    }
}

pub fn approx_equal(a: &ComplexMatrix, b: &ComplexMatrix, tol: Tolerance) -> bool {
    a.max_abs_diff(b).is_some_and(|d| d <= tol.eps())
}

pub fn is_hermitian(m: &ComplexMatrix, tol: Tolerance) -> bool {
    m.is_square() && approx_equal(m, &conjugate_transpose(m), tol)
}

pub fn is_unitary(m: &ComplexMatrix, tol: Tolerance) -> bool {
    if !m.is_square() {
        return false;
    }
    let adj = conjugate_transpose(m);
    let id = ComplexMatrix::identity(m.rows);
    // Shapes agree, so the products cannot fail.
    let left = mat_mul(m, &adj).expect("square product");
    let right = mat_mul(&adj, m).expect("square product");
    approx_equal(&left, &id, tol) && approx_equal(&right, &id, tol)
}

/// Roots of `λ² − tr(m)·λ + det(m)` by the quadratic formula.
///
/// The root taking `+√disc` (principal complex square root) comes first.
pub fn eigenvalues_2x2(m: &ComplexMatrix) -> Result<(Complex, Complex), LinalgError> {
    if m.shape() != (2, 2) {
        return Err(LinalgError::Not2x2 {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let trace = a + d;
    let det = a * d - b * c;
    let root = (trace * trace - 4.0 * det).sqrt();
    Ok(((trace + root) / 2.0, (trace - root) / 2.0))
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            lhs: m.shape(),
            rhs: m.shape(),
        });
    }
    let n = m.rows;
    let mut work = m.entries.clone();
    let mut inv = ComplexMatrix::identity(n).entries;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| {
                work[x * n + col]
                    .norm()
                    .total_cmp(&work[y * n + col].norm())
            })
            .expect("non-empty range");
        if work[pivot * n + col].norm() < 1e-12 {
            return Err(LinalgError::Singular);
        }
        if pivot != col {
            for j in 0..n {
                work.swap(pivot * n + j, col * n + j);
                inv.swap(pivot * n + j, col * n + j);
            }
        }
        let p = work[col * n + col];
        for j in 0..n {
            work[col * n + j] /= p;
            inv[col * n + j] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = work[r * n + col];
            if f == ZERO {
                continue;
            }
            for j in 0..n {
                let wc = work[col * n + j];
                let ic = inv[col * n + j];
                work[r * n + j] -= f * wc;
                inv[r * n + j] -= f * ic;
            }
        }
    }
    ComplexMatrix::new(n, n, inv)
}
