//! Dense row-major matrices sized for the small systems in this crate.

use std::fmt;
use std::ops::{Index, IndexMut};

use thiserror::Error;

/// Pivots with magnitude below this are treated as zero.
pub const SINGULAR_PIVOT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("shape mismatch: {left_rows}x{left_cols} against {right_rows}x{right_cols}")]
    Shape {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("expected {expected} entries for the given shape, got {actual}")]
    EntryCount { expected: usize, actual: usize },
    #[error("non-finite entry {value} at ({row}, {col})")]
    NonFinite { row: usize, col: usize, value: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("singular matrix: pivot {pivot:e} in column {col} is below {SINGULAR_PIVOT:e}")]
    Singular { col: usize, pivot: f64 },
    #[error("rank-deficient design: the Gram matrix inputs * inputs^T is singular")]
    RankDeficient,
    #[error("least squares needs a bias row of ones as the last input row")]
    MissingBiasRow,
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Row-major dense matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::Empty);
        }
        if data.len() != rows * cols {
            return Err(LinalgError::EntryCount {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: i / cols,
                col: i % cols,
                value: data[i],
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::EntryCount {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// A single-column matrix.
    pub fn column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    /// Largest absolute elementwise difference; shapes must agree.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(shape_err(self, other));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Writes `value` at (r, c); non-finite values are rejected.
    pub fn set(&mut self, r: usize, c: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(LinalgError::NonFinite { row: r, col: c, value });
        }
        self[(r, c)] = value;
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

// Callers writing through IndexMut are responsible for keeping entries finite.
impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}[", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

fn shape_err(a: &Matrix, b: &Matrix) -> LinalgError {
    LinalgError::Shape {
        left_rows: a.rows,
        left_cols: a.cols,
        right_rows: b.rows,
        right_cols: b.cols,
    }
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(shape_err(a, b));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc = 0.0;
            for k in 0..a.cols {
                acc += a[(i, k)] * b[(k, j)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

pub fn mat_add(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.shape() != b.shape() {
        return Err(shape_err(a, b));
    }
    let data = a.data.iter().zip(&b.data).map(|(x, y)| x + y).collect();
    Matrix::new(a.rows, a.cols, data)
}

/// Gauss-Jordan elimination with partial pivoting.
pub fn mat_inverse(a: &Matrix) -> Result<Matrix> {
    if a.rows != a.cols {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let mut work = a.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| work[(i, col)].abs().total_cmp(&work[(j, col)].abs()))
            .expect("non-empty pivot range");
        let pivot = work[(pivot_row, col)];
        if pivot.abs() < SINGULAR_PIVOT {
            return Err(LinalgError::Singular { col, pivot });
        }
        if pivot_row != col {
            swap_rows(&mut work, pivot_row, col);
            swap_rows(&mut inv, pivot_row, col);
        }
        for c in 0..n {
            work[(col, c)] /= pivot;
            inv[(col, c)] /= pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = work[(r, col)];
            if factor == 0.0 {
                continue;
            }
            for c in 0..n {
                work[(r, c)] -= factor * work[(col, c)];
                inv[(r, c)] -= factor * inv[(col, c)];
            }
        }
    }
    Ok(inv)
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    for c in 0..m.cols {
        m.data.swap(a * m.cols + c, b * m.cols + c);
    }
}

/// Least-squares weights via the normal equations,
/// `transpose(inverse(inputs * inputs^T) * (inputs * targets^T))`.
///
/// `inputs` is (k+1) x n with a final row of ones; `targets` is 1 x n.
/// Returns the 1 x (k+1) weight row.
pub fn least_squares(inputs: &Matrix, targets: &Matrix) -> Result<Matrix> {
    if targets.rows != 1 || targets.cols != inputs.cols {
        return Err(shape_err(inputs, targets));
    }
    if inputs.row(inputs.rows - 1).iter().any(|&v| v != 1.0) {
        return Err(LinalgError::MissingBiasRow);
    }
    let inputs_t = inputs.transpose();
    let gram = mat_mul(inputs, &inputs_t)?;
    let gram_inv = match mat_inverse(&gram) {
        Ok(m) => m,
        Err(LinalgError::Singular { .. }) => return Err(LinalgError::RankDeficient),
        Err(e) => return Err(e),
    };
    let moment = mat_mul(inputs, &targets.transpose())?;
    Ok(mat_mul(&gram_inv, &moment)?.transpose())
}
