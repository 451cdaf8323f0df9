use std::cell::{OnceCell, RefCell};

use crate::error::{Error, Result};
use crate::linops::SymmetricOperator;

/// Compact quasi-Newton Hessian H = H_0 + U diag(W) U', applied in
/// factored form as H_0 x + U(W(U' x)). Never assembled.
///
/// U is stored column-major; the SQP driver appends two columns per
/// accepted update, so there U has 2k columns after k updates. The
/// intermediate buffer for U' x is preallocated so `apply` does not
/// allocate, and the diagonal is cached on first request (the Hessian is
/// constant within one QP solve).
#[derive(Debug)]
pub struct BfgsOperator {
    h0_diag: Vec<f64>,
    // column-major, len == n * num_columns
    columns: Vec<f64>,
    weights: Vec<f64>,
    scratch: RefCell<Vec<f64>>,
    cached_diag: OnceCell<Vec<f64>>,
}

impl Clone for BfgsOperator {
    fn clone(&self) -> Self {
        Self {
            h0_diag: self.h0_diag.clone(),
            columns: self.columns.clone(),
            weights: self.weights.clone(),
            scratch: RefCell::new(vec![0.0; self.weights.len()]),
            cached_diag: self.cached_diag.clone(),
        }
    }
}

impl BfgsOperator {
    /// Operator with no update columns: H = diag(h0_diag).
    pub fn identity_scaled(n: usize, scale: f64) -> Result<Self> {
        Self::new(vec![scale; n], Vec::new(), Vec::new())
    }

    /// `columns` holds `weights.len()` columns of length n, column-major.
    pub fn new(h0_diag: Vec<f64>, columns: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = h0_diag.len();
        if h0_diag.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidProblem(
                "BFGS h0 diagonal must be strictly positive and finite".into(),
            ));
        }
        if columns.len() != n * weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "BFGS column store has {} values, expected {}",
                columns.len(),
                n * weights.len()
            )));
        }
        if columns.iter().any(|v| !v.is_finite())
            || weights.iter().any(|&v| !v.is_finite() || v == 0.0)
        {
            return Err(Error::NonFinite(
                "BFGS columns must be finite and weights finite nonzero".into(),
            ));
        }
        let ncols = weights.len();
        Ok(Self {
            h0_diag,
            columns,
            weights,
            scratch: RefCell::new(vec![0.0; ncols]),
            cached_diag: OnceCell::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.h0_diag.len()
    }

    pub fn num_columns(&self) -> usize {
        self.weights.len()
    }

    /// Accepted update pairs; each contributes two columns.
    pub fn pair_count(&self) -> usize {
        self.weights.len() / 2
    }

    pub fn h0_diag(&self) -> &[f64] {
        &self.h0_diag
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn column(&self, k: usize) -> &[f64] {
        let n = self.n();
        &self.columns[k * n..(k + 1) * n]
    }

    /// New operator with two more columns appended (one update pair).
    pub fn with_pair(
        &self,
        col_a: &[f64],
        weight_a: f64,
        col_b: &[f64],
        weight_b: f64,
    ) -> Result<Self> {
        let n = self.n();
        if col_a.len() != n || col_b.len() != n {
            return Err(Error::DimensionMismatch("BFGS update column length".into()));
        }
        let mut columns = self.columns.clone();
        columns.extend_from_slice(col_a);
        columns.extend_from_slice(col_b);
        let mut weights = self.weights.clone();
        weights.push(weight_a);
        weights.push(weight_b);
        Self::new(self.h0_diag.clone(), columns, weights)
    }
}

impl SymmetricOperator for BfgsOperator {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n();
        assert_eq!(x.len(), n, "bfgs_apply: x length");
        assert_eq!(y.len(), n, "bfgs_apply: y length");
        // y = H0 x
        for i in 0..n {
            y[i] = self.h0_diag[i] * x[i];
        }
        if self.weights.is_empty() {
            return;
        }
        // t = W (U' x)
        let mut t = self.scratch.borrow_mut();
        for (k, tk) in t.iter_mut().enumerate() {
            let col = &self.columns[k * n..(k + 1) * n];
            let mut acc = 0.0;
            for i in 0..n {
                acc += col[i] * x[i];
            }
            *tk = self.weights[k] * acc;
        }
        // y += U t
        for (k, tk) in t.iter().enumerate() {
            let col = &self.columns[k * n..(k + 1) * n];
            for i in 0..n {
                y[i] += col[i] * tk;
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.cached_diag
            .get_or_init(|| {
                let n = self.n();
                let mut d = self.h0_diag.clone();
                for (k, &w) in self.weights.iter().enumerate() {
                    let col = &self.columns[k * n..(k + 1) * n];
                    for i in 0..n {
                        d[i] += w * col[i] * col[i];
                    }
                }
                d
            })
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_updates_is_h0() {
        let h = BfgsOperator::identity_scaled(3, 2.0).unwrap();
        let mut y = vec![0.0; 3];
        h.apply(&[1.0, -1.0, 0.5], &mut y);
        assert_eq!(y, vec![2.0, -2.0, 1.0]);
        assert_eq!(h.diagonal(), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn rank_one_hand_value() {
        // H = I + 2 e1 e1', x = (1, 1) -> (3, 1)
        let h = BfgsOperator::new(vec![1.0, 1.0], vec![1.0, 0.0], vec![2.0]).unwrap();
        let mut y = vec![0.0; 2];
        h.apply(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.0, 1.0]);
        assert_eq!(h.diagonal(), vec![3.0, 1.0]);
    }

    #[test]
    fn diagonal_is_cached_and_stable() {
        let h = BfgsOperator::new(vec![1.0, 1.0], vec![1.0, 0.0, 0.0, 1.0], vec![2.0, 3.0])
            .unwrap();
        assert_eq!(h.diagonal(), vec![3.0, 4.0]);
        assert_eq!(h.diagonal(), h.diagonal());
    }

    #[test]
    fn rejects_nonpositive_h0() {
        assert!(BfgsOperator::new(vec![1.0, 0.0], vec![], vec![]).is_err());
    }

    #[test]
    fn rejects_dimension_mismatch() {
        assert!(BfgsOperator::new(vec![1.0, 1.0], vec![1.0], vec![1.0]).is_err());
    }
}
