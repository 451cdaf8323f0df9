//! Matrix-free linear operator layer.
//!
//! Every matrix touched by the solver is reachable only through `apply`
//! (and, for rectangular matrices, `apply_transpose`) plus diagonal
//! extraction. Nothing here ever assembles a dense matrix.

mod bfgs;
mod csr;

pub use bfgs::BfgsOperator;
pub use csr::CsrMatrix;

use crate::error::{Error, Result};

/// A symmetric n-by-n linear operator accessed through products and its
/// diagonal.
pub trait SymmetricOperator {
    /// Operator dimension n.
    fn dim(&self) -> usize;

    /// y = op(x). `x` and `y` must both have length `dim()`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// The n diagonal entries, entry j equal to e_j' op(e_j).
    fn diagonal(&self) -> Vec<f64>;
}

/// Diagonal operator; holds D^{-1} factors, H_0 and similar.
#[derive(Debug, Clone)]
pub struct DiagonalOperator {
    entries: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("diagonal operator entries".into()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

impl SymmetricOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.entries.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.entries.len());
        assert_eq!(y.len(), self.entries.len());
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.entries) {
            *yi = di * xi;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.entries.clone()
    }
}

/// Fixed left-to-right dot product, so repeated calls are bit-identical.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        acc += a * b;
    }
    acc
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
