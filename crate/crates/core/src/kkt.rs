//! Unassembled doubly augmented KKT operator.
//!
//! The reduced Newton system couples the primal block Q = H + diag terms
//! with the finite-bound rows of the constraint matrix, B = [A_L; -A_U],
//! and the diagonal D of per-row slack/multiplier ratios. The doubly
//! augmented form
//!
//! ```text
//! [ Q + 2 B' D^-1 B   B' ] [ dx   ]   [ r1 + 2 B' D^-1 r2 ]
//! [ B                 D  ] [ dlam ] = [ r2                ]
//! ```
//!
//! is symmetric positive definite at interior iterates and is applied
//! block by block; B, D^-1 B and the top-left block are never formed.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::ipm::{IterateState, QpProblem, ResidualSet};
use crate::linops::{CsrMatrix, SymmetricOperator};

/// Right-hand side of the reduced 2x2 system, split by bound family.
#[derive(Debug, Clone)]
pub struct ReducedRhs {
    pub r1: Vec<f64>,
    pub r2_lower: Vec<f64>,
    pub r2_upper: Vec<f64>,
}

#[derive(Debug)]
struct Scratch {
    // A vx, full m rows; computed once per apply and reused
    av: Vec<f64>,
    // accumulated weights scattered back through A'
    t_full: Vec<f64>,
    at_t: Vec<f64>,
}

/// Doubly augmented KKT operator over one interior iterate. The
/// constraint matrix is stored once; B = [A_L; -A_U] is implicit with
/// sign handling in the apply.
pub struct KktOperator<'a> {
    hessian: &'a dyn SymmetricOperator,
    a: &'a CsrMatrix,
    lin_lower_rows: &'a [usize],
    lin_upper_rows: &'a [usize],
    q_extra_diag: Vec<f64>,
    d_lower: Vec<f64>,
    d_upper: Vec<f64>,
    scratch: RefCell<Scratch>,
}

fn check_positive(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InteriorViolated(format!(
            "{} must be strictly positive and finite",
            name
        )));
    }
    Ok(())
}

fn check_nonnegative_finite(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InteriorViolated(format!(
            "{} must be nonnegative and finite",
            name
        )));
    }
    Ok(())
}

impl<'a> KktOperator<'a> {
    pub fn new(
        hessian: &'a dyn SymmetricOperator,
        a: &'a CsrMatrix,
        lin_lower_rows: &'a [usize],
        lin_upper_rows: &'a [usize],
        q_extra_diag: Vec<f64>,
        d_lower: Vec<f64>,
        d_upper: Vec<f64>,
    ) -> Result<Self> {
        let n = hessian.dim();
        if a.ncols() != n || q_extra_diag.len() != n {
            return Err(Error::DimensionMismatch(
                "KKT operator: Hessian, constraint matrix and extra diagonal disagree".into(),
            ));
        }
        if d_lower.len() != lin_lower_rows.len() || d_upper.len() != lin_upper_rows.len() {
            return Err(Error::DimensionMismatch(
                "KKT operator: D blocks must match finite-bound row counts".into(),
            ));
        }
        // q_extra can be zero when a variable has no finite bounds
        check_nonnegative_finite("Q extra diagonal", &q_extra_diag)?;
        check_positive("D lower block", &d_lower)?;
        check_positive("D upper block", &d_upper)?;
        let m = a.nrows();
        Ok(Self {
            hessian,
            a,
            lin_lower_rows,
            lin_upper_rows,
            q_extra_diag,
            d_lower,
            d_upper,
            scratch: RefCell::new(Scratch {
                av: vec![0.0; m],
                t_full: vec![0.0; m],
                at_t: vec![0.0; n],
            }),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.hessian.dim()
    }

    pub fn num_lower(&self) -> usize {
        self.d_lower.len()
    }

    pub fn num_upper(&self) -> usize {
        self.d_upper.len()
    }

    /// Swap in the diagonals of a new iterate. No other state changes.
    pub fn update_iterate_diagonals(
        &mut self,
        q_extra_diag: Vec<f64>,
        d_lower: Vec<f64>,
        d_upper: Vec<f64>,
    ) -> Result<()> {
        if q_extra_diag.len() != self.q_extra_diag.len()
            || d_lower.len() != self.d_lower.len()
            || d_upper.len() != self.d_upper.len()
        {
            return Err(Error::DimensionMismatch(
                "update_iterate_diagonals: lengths must match".into(),
            ));
        }
        check_nonnegative_finite("Q extra diagonal", &q_extra_diag)?;
        check_positive("D lower block", &d_lower)?;
        check_positive("D upper block", &d_upper)?;
        self.q_extra_diag = q_extra_diag;
        self.d_lower = d_lower;
        self.d_upper = d_upper;
        Ok(())
    }

    /// Diagonal of the doubly augmented matrix, for the Jacobi
    /// preconditioner. Entries are strictly positive at interior
    /// iterates; a nonpositive entry signals a solver bug.
    pub fn jacobi_diagonal(&self) -> Result<Vec<f64>> {
        let n = self.num_vars();
        let mut diag = Vec::with_capacity(n + self.num_lower() + self.num_upper());
        let hdiag = self.hessian.diagonal();
        // full-row weights 2/d, summed over families sharing a row
        let mut w_full = vec![0.0; self.a.nrows()];
        for (k, &row) in self.lin_lower_rows.iter().enumerate() {
            w_full[row] += 2.0 / self.d_lower[k];
        }
        for (k, &row) in self.lin_upper_rows.iter().enumerate() {
            w_full[row] += 2.0 / self.d_upper[k];
        }
        for j in 0..n {
            let mut v = hdiag[j] + self.q_extra_diag[j];
            for (i, aij) in self.a.column_entries(j) {
                v += w_full[i] * aij * aij;
            }
            diag.push(v);
        }
        diag.extend_from_slice(&self.d_lower);
        diag.extend_from_slice(&self.d_upper);
        if diag.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InteriorViolated(
                "Jacobi diagonal has a nonpositive entry".into(),
            ));
        }
        Ok(diag)
    }

    /// Augmented right-hand side (r1 + 2 B' D^-1 r2, r2) as one vector in
    /// operator ordering.
    pub fn aug_rhs(&self, rhs: &ReducedRhs) -> Result<Vec<f64>> {
        let n = self.num_vars();
        let (ml, mu) = (self.num_lower(), self.num_upper());
        if rhs.r1.len() != n || rhs.r2_lower.len() != ml || rhs.r2_upper.len() != mu {
            return Err(Error::DimensionMismatch("aug_rhs: block lengths".into()));
        }
        let mut out = vec![0.0; n + ml + mu];
        {
            let mut s = self.scratch.borrow_mut();
            s.t_full.iter_mut().for_each(|v| *v = 0.0);
            for (k, &row) in self.lin_lower_rows.iter().enumerate() {
                s.t_full[row] += 2.0 * rhs.r2_lower[k] / self.d_lower[k];
            }
            for (k, &row) in self.lin_upper_rows.iter().enumerate() {
                s.t_full[row] -= 2.0 * rhs.r2_upper[k] / self.d_upper[k];
            }
            let Scratch { t_full, at_t, .. } = &mut *s;
            self.a.apply_transpose(t_full, at_t);
            for j in 0..n {
                out[j] = rhs.r1[j] + at_t[j];
            }
        }
        out[n..n + ml].copy_from_slice(&rhs.r2_lower);
        out[n + ml..].copy_from_slice(&rhs.r2_upper);
        Ok(out)
    }
}

impl SymmetricOperator for KktOperator<'_> {
    fn dim(&self) -> usize {
        self.num_vars() + self.num_lower() + self.num_upper()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.num_vars();
        let (ml, mu) = (self.num_lower(), self.num_upper());
        assert_eq!(v.len(), n + ml + mu, "kkt_apply: input length");
        assert_eq!(out.len(), n + ml + mu, "kkt_apply: output length");
        let (vx, vrest) = v.split_at(n);
        let (vl, vu) = vrest.split_at(ml);

        let (top, rest) = out.split_at_mut(n);
        let (midl, midu) = rest.split_at_mut(ml);

        // top = H vx + q_extra .* vx
        self.hessian.apply(vx, top);
        for j in 0..n {
            top[j] += self.q_extra_diag[j] * vx[j];
        }

        let mut s = self.scratch.borrow_mut();
        let Scratch { av, t_full, at_t } = &mut *s;
        // A vx once, reused by every term touching B
        self.a.apply(vx, av);
        t_full.iter_mut().for_each(|v| *v = 0.0);
        for (k, &row) in self.lin_lower_rows.iter().enumerate() {
            let w = av[row];
            t_full[row] += 2.0 * w / self.d_lower[k] + vl[k];
            midl[k] = w + self.d_lower[k] * vl[k];
        }
        for (k, &row) in self.lin_upper_rows.iter().enumerate() {
            let w = av[row];
            t_full[row] += 2.0 * w / self.d_upper[k] - vu[k];
            midu[k] = -w + self.d_upper[k] * vu[k];
        }
        self.a.apply_transpose(t_full, at_t);
        for j in 0..n {
            top[j] += at_t[j];
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.jacobi_diagonal().expect("interior iterate")
    }
}

/// Eliminate the slack and variable-bound multiplier rows of the full
/// Newton system, leaving the 2x2 reduced right-hand side. The formulas
/// are certified by back-substituting the recovered full step into the
/// assembled Newton system (see the `bench` oracles).
pub fn reduce_residuals(
    prob: &QpProblem,
    res: &ResidualSet,
    it: &IterateState,
) -> Result<ReducedRhs> {
    let n = prob.num_vars();
    let mut r1: Vec<f64> = res.r_h.iter().map(|v| -v).collect();
    for (k, &j) in prob.var_lower_idx().iter().enumerate() {
        let s = it.s_lx[k];
        if s == 0.0 {
            return Err(Error::InteriorViolated(format!(
                "zero lower-bound slack for variable {}",
                j
            )));
        }
        r1[j] -= (it.lam_lx[k] * res.r_lx[k] + res.rc_lx[k]) / s;
    }
    for (k, &j) in prob.var_upper_idx().iter().enumerate() {
        let s = it.s_ux[k];
        if s == 0.0 {
            return Err(Error::InteriorViolated(format!(
                "zero upper-bound slack for variable {}",
                j
            )));
        }
        r1[j] += (it.lam_ux[k] * res.r_ux[k] + res.rc_ux[k]) / s;
    }
    debug_assert_eq!(r1.len(), n);

    let mut r2_lower = Vec::with_capacity(prob.lin_lower_rows().len());
    for k in 0..prob.lin_lower_rows().len() {
        let lam = it.lam_la[k];
        if lam == 0.0 {
            return Err(Error::InteriorViolated(
                "zero lower-bound constraint multiplier".into(),
            ));
        }
        r2_lower.push(-res.r_la[k] - res.rc_la[k] / lam);
    }
    let mut r2_upper = Vec::with_capacity(prob.lin_upper_rows().len());
    for k in 0..prob.lin_upper_rows().len() {
        let lam = it.lam_ua[k];
        if lam == 0.0 {
            return Err(Error::InteriorViolated(
                "zero upper-bound constraint multiplier".into(),
            ));
        }
        r2_upper.push(-res.r_ua[k] - res.rc_ua[k] / lam);
    }

    Ok(ReducedRhs {
        r1,
        r2_lower,
        r2_upper,
    })
}

/// Build the KKT diagonals for an iterate: the variable-bound term
/// S_lx^-1 L_lx + S_ux^-1 L_ux scattered onto the n-vector, and the two
/// D blocks L^-1 S per linear-constraint family.
pub fn iterate_diagonals(
    prob: &QpProblem,
    it: &IterateState,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut q_extra = vec![0.0; prob.num_vars()];
    for (k, &j) in prob.var_lower_idx().iter().enumerate() {
        q_extra[j] += it.lam_lx[k] / it.s_lx[k];
    }
    for (k, &j) in prob.var_upper_idx().iter().enumerate() {
        q_extra[j] += it.lam_ux[k] / it.s_ux[k];
    }
    let d_lower: Vec<f64> = it
        .s_la
        .iter()
        .zip(&it.lam_la)
        .map(|(s, l)| s / l)
        .collect();
    let d_upper: Vec<f64> = it
        .s_ua
        .iter()
        .zip(&it.lam_ua)
        .map(|(s, l)| s / l)
        .collect();
    (q_extra, d_lower, d_upper)
}
