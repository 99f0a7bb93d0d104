//! Observed samples `(X, T, Y)` and linear nuisance predictors.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{AceError, Result};

/// An observed sample: covariates `x` (n×p), treatment `t`, outcome `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub t: Array1<f64>,
    pub y: Array1<f64>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, t: Array1<f64>, y: Array1<f64>) -> Result<Self> {
        let n = x.nrows();
        if t.len() != n {
            return Err(AceError::DimensionMismatch { expected: n, got: t.len() });
        }
        if y.len() != n {
            return Err(AceError::DimensionMismatch { expected: n, got: y.len() });
        }
        Ok(Self { x, t, y })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Covariate dimension `p`.
    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Rows at the given indices, in the given order.
    pub fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(0), rows),
            t: self.t.select(Axis(0), rows),
            y: self.y.select(Axis(0), rows),
        }
    }

    /// Contiguous row range `[start, end)`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Dataset {
        Dataset {
            x: self.x.slice(s![start..end, ..]).to_owned(),
            t: self.t.slice(s![start..end]).to_owned(),
            y: self.y.slice(s![start..end]).to_owned(),
        }
    }
}

/// `x ↦ intercept + ⟨coefficients, x⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPredictor {
    pub intercept: f64,
    pub coefficients: Array1<f64>,
}

impl LinearPredictor {
    pub fn new(intercept: f64, coefficients: Array1<f64>) -> Self {
        Self { intercept, coefficients }
    }

    /// The identically-zero predictor on `p` covariates.
    pub fn zeros(p: usize) -> Self {
        Self::new(0.0, Array1::zeros(p))
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict_one(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.intercept + self.coefficients.dot(&x)
    }

    /// Predictions for each row of `x`.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        if x.ncols() != self.dim() {
            return Err(AceError::DimensionMismatch {
                expected: self.dim(),
                got: x.ncols(),
            });
        }
        Ok(x.dot(&self.coefficients) + self.intercept)
    }

    /// Same predictor shifted by a constant.
    pub fn shifted(&self, c: f64) -> Self {
        Self::new(self.intercept + c, self.coefficients.clone())
    }
}
