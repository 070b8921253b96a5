use crate::error::{Error, Result};

/// Coefficients `C[i][j]` of the Goursat PDE on each data cell: the inner
/// product of the `i`-th increment of `x` with the `j`-th increment of `y`,
/// or its static-kernel analogue.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementGrid {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    max_abs: f64,
}

impl IncrementGrid {
    /// Row-major `rows x cols` values; every entry must be finite.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "increment grid must be non-empty, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} grid",
                values.len()
            )));
        }
        let mut max_abs = 0.0f64;
        for (k, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: k / cols,
                    col: k % cols,
                });
            }
            max_abs = max_abs.max(v.abs());
        }
        Ok(Self {
            rows,
            cols,
            values,
            max_abs,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    /// A single data cell with inner product `z`.
    pub fn single(z: f64) -> Result<Self> {
        Self::new(1, 1, vec![z])
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let values = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self::new(rows, cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    /// `sup |C[i][j]|`, the bound `M` on the PDE coefficient.
    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    pub fn transpose(&self) -> Self {
        let values = (0..self.rows * self.cols)
            .map(|k| {
                let (j, i) = (k / self.rows, k % self.rows);
                self.values[i * self.cols + j]
            })
            .collect();
        Self {
            rows: self.cols,
            cols: self.rows,
            values,
            max_abs: self.max_abs,
        }
    }
}
