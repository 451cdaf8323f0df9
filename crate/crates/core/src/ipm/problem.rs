use crate::error::{Error, Result};
use crate::linops::{BfgsOperator, CsrMatrix, DiagonalOperator, SymmetricOperator};

/// Hessian of a QP, in one of the storage forms the solver accepts. All
/// forms are used strictly through the symmetric-operator contract.
#[derive(Debug, Clone)]
pub enum Hessian {
    Diag(DiagonalOperator),
    Csr(CsrMatrix),
    Bfgs(BfgsOperator),
}

impl SymmetricOperator for Hessian {
    fn dim(&self) -> usize {
        match self {
            Hessian::Diag(d) => d.dim(),
            Hessian::Csr(m) => m.dim(),
            Hessian::Bfgs(b) => b.dim(),
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Hessian::Diag(d) => d.apply(x, y),
            Hessian::Csr(m) => SymmetricOperator::apply(m, x, y),
            Hessian::Bfgs(b) => b.apply(x, y),
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        match self {
            Hessian::Diag(d) => d.diagonal(),
            Hessian::Csr(m) => SymmetricOperator::diagonal(m),
            Hessian::Bfgs(b) => b.diagonal(),
        }
    }
}

/// Immutable convex QP instance:
///
/// ```text
/// minimize   1/2 x' H x + p' x
/// subject to l <= A x <= u,  a <= x <= b
/// ```
///
/// Bound entries may be -inf / +inf; infinite bounds generate no slack,
/// multiplier or residual rows. The finite-bound index sets are fixed at
/// construction.
#[derive(Debug, Clone)]
pub struct QpProblem {
    pub hessian: Hessian,
    pub linear_term: Vec<f64>,
    pub constraints: CsrMatrix,
    pub lin_lower: Vec<f64>,
    pub lin_upper: Vec<f64>,
    pub var_lower: Vec<f64>,
    pub var_upper: Vec<f64>,
    // finite-bound index sets, ascending
    lin_lower_rows: Vec<usize>,
    lin_upper_rows: Vec<usize>,
    var_lower_idx: Vec<usize>,
    var_upper_idx: Vec<usize>,
}

impl QpProblem {
    pub fn new(
        hessian: Hessian,
        linear_term: Vec<f64>,
        constraints: CsrMatrix,
        lin_lower: Vec<f64>,
        lin_upper: Vec<f64>,
        var_lower: Vec<f64>,
        var_upper: Vec<f64>,
    ) -> Result<Self> {
        let n = hessian.dim();
        let m = constraints.nrows();
        if linear_term.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "linear term has length {}, expected {}",
                linear_term.len(),
                n
            )));
        }
        if constraints.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "constraint matrix has {} columns, expected {}",
                constraints.ncols(),
                n
            )));
        }
        if lin_lower.len() != m || lin_upper.len() != m {
            return Err(Error::DimensionMismatch(
                "linear bound vectors must have one entry per constraint row".into(),
            ));
        }
        if var_lower.len() != n || var_upper.len() != n {
            return Err(Error::DimensionMismatch(
                "variable bound vectors must have one entry per variable".into(),
            ));
        }
        if let Hessian::Csr(h) = &hessian {
            if !h.is_symmetric_exact() {
                return Err(Error::InvalidProblem(
                    "CSR Hessian is not exactly symmetric".into(),
                ));
            }
        }
        if linear_term.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linear term".into()));
        }
        for (i, (&l, &u)) in lin_lower.iter().zip(&lin_upper).enumerate() {
            if l.is_nan() || u.is_nan() {
                return Err(Error::NonFinite(format!("linear bound row {}", i)));
            }
            if l.is_finite() && u.is_finite() && l >= u {
                // equal bounds degenerate the slack formulation
                return Err(Error::InvalidProblem(format!(
                    "linear constraint row {}: lower bound {} must be strictly below upper bound {}",
                    i, l, u
                )));
            }
            if l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::InvalidProblem(format!(
                    "linear constraint row {}: infeasible bound orientation",
                    i
                )));
            }
        }
        for (j, (&a, &b)) in var_lower.iter().zip(&var_upper).enumerate() {
            if a.is_nan() || b.is_nan() {
                return Err(Error::NonFinite(format!("variable bound {}", j)));
            }
            if a.is_finite() && b.is_finite() && a >= b {
                return Err(Error::InvalidProblem(format!(
                    "variable {}: lower bound {} must be strictly below upper bound {}",
                    j, a, b
                )));
            }
            if a == f64::INFINITY || b == f64::NEG_INFINITY {
                return Err(Error::InvalidProblem(format!(
                    "variable {}: infeasible bound orientation",
                    j
                )));
            }
        }

        let lin_lower_rows: Vec<usize> =
            (0..m).filter(|&i| lin_lower[i].is_finite()).collect();
        let lin_upper_rows: Vec<usize> =
            (0..m).filter(|&i| lin_upper[i].is_finite()).collect();
        let var_lower_idx: Vec<usize> =
            (0..n).filter(|&j| var_lower[j].is_finite()).collect();
        let var_upper_idx: Vec<usize> =
            (0..n).filter(|&j| var_upper[j].is_finite()).collect();

        if lin_lower_rows.is_empty()
            && lin_upper_rows.is_empty()
            && var_lower_idx.is_empty()
            && var_upper_idx.is_empty()
        {
            return Err(Error::InvalidProblem(
                "problem has no finite bound anywhere".into(),
            ));
        }

        Ok(Self {
            hessian,
            linear_term,
            constraints,
            lin_lower,
            lin_upper,
            var_lower,
            var_upper,
            lin_lower_rows,
            lin_upper_rows,
            var_lower_idx,
            var_upper_idx,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.linear_term.len()
    }

    pub fn num_lin_constraints(&self) -> usize {
        self.constraints.nrows()
    }

    /// Rows of A with a finite lower bound, ascending.
    pub fn lin_lower_rows(&self) -> &[usize] {
        &self.lin_lower_rows
    }

    /// Rows of A with a finite upper bound, ascending.
    pub fn lin_upper_rows(&self) -> &[usize] {
        &self.lin_upper_rows
    }

    /// Variables with a finite lower bound, ascending.
    pub fn var_lower_idx(&self) -> &[usize] {
        &self.var_lower_idx
    }

    /// Variables with a finite upper bound, ascending.
    pub fn var_upper_idx(&self) -> &[usize] {
        &self.var_upper_idx
    }

    /// Total finite bound count over all four families.
    pub fn total_bound_count(&self) -> usize {
        self.lin_lower_rows.len()
            + self.lin_upper_rows.len()
            + self.var_lower_idx.len()
            + self.var_upper_idx.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut hx = vec![0.0; x.len()];
        self.hessian.apply(x, &mut hx);
        0.5 * crate::linops::dot(x, &hx) + crate::linops::dot(&self.linear_term, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_problem(l: f64, u: f64) -> Result<QpProblem> {
        QpProblem::new(
            Hessian::Diag(DiagonalOperator::new(vec![1.0]).unwrap()),
            vec![-1.0],
            CsrMatrix::empty(1),
            vec![],
            vec![],
            vec![l],
            vec![u],
        )
    }

    #[test]
    fn bound_index_sets() {
        let p = diag_problem(0.0, f64::INFINITY).unwrap();
        assert_eq!(p.var_lower_idx(), &[0]);
        assert!(p.var_upper_idx().is_empty());
        assert_eq!(p.total_bound_count(), 1);
    }

    #[test]
    fn rejects_equal_bounds() {
        assert!(diag_problem(1.0, 1.0).is_err());
    }

    #[test]
    fn rejects_crossed_bounds() {
        assert!(diag_problem(2.0, 1.0).is_err());
    }

    #[test]
    fn rejects_fully_free_problem() {
        assert!(diag_problem(f64::NEG_INFINITY, f64::INFINITY).is_err());
    }

    #[test]
    fn objective_value() {
        let p = diag_problem(0.0, 10.0).unwrap();
        assert_eq!(p.objective(&[1.0]), -0.5);
    }
}
