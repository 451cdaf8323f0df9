//! Dense reference implementations used to certify the matrix-free
//! solver: exhaustive active-set search for small QPs, a fully assembled
//! Newton system for back-substitution checks, and dense forms of the
//! reduced and doubly augmented systems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ipm::{
    ipm_solve_observed, IpmConfig, IterateState, QpProblem, ResidualSet, StepDirection,
};
use crate::kkt::ReducedRhs;
use crate::linops::{CsrMatrix, SymmetricOperator};

/// Globally optimal point of a small QP, found independently of the
/// interior point solver.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// multipliers of the active constraints, parallel to `active`
    pub multipliers: Vec<f64>,
    /// active candidates as (base constraint index, +1 lower / -1 upper)
    pub active: Vec<(usize, f64)>,
}

/// One solver iteration captured before the step is applied.
#[derive(Debug, Clone)]
pub struct InstrumentedIteration {
    pub iterate: IterateState,
    pub residuals: ResidualSet,
    pub step: StepDirection,
    pub pcg_relative_residual: f64,
}

/// Materialize any symmetric operator by applying it to unit vectors.
pub fn dense_from_operator(op: &dyn SymmetricOperator) -> DMatrix<f64> {
    let n = op.dim();
    let mut out = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            out[(i, j)] = col[i];
        }
    }
    out
}

pub fn dense_csr(m: &CsrMatrix) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    let (offs, cols, vals) = (m.row_offsets(), m.col_indices(), m.values());
    for i in 0..m.nrows() {
        for k in offs[i]..offs[i + 1] {
            out[(i, cols[k])] = vals[k];
        }
    }
    out
}

struct Candidate {
    /// lin row i -> i, variable j -> m + j; lower and upper of the same
    /// base cannot be active together
    base: usize,
    sigma: f64,
    coeffs: DVector<f64>,
    bound: f64,
}

fn candidates(prob: &QpProblem) -> Vec<Candidate> {
    let n = prob.num_vars();
    let m = prob.num_lin_constraints();
    let a = dense_csr(&prob.constraints);
    let mut out = Vec::new();
    for &i in prob.lin_lower_rows() {
        out.push(Candidate {
            base: i,
            sigma: 1.0,
            coeffs: a.row(i).transpose(),
            bound: prob.lin_lower[i],
        });
    }
    for &i in prob.lin_upper_rows() {
        out.push(Candidate {
            base: i,
            sigma: -1.0,
            coeffs: a.row(i).transpose(),
            bound: prob.lin_upper[i],
        });
    }
    for &j in prob.var_lower_idx() {
        let mut c = DVector::zeros(n);
        c[j] = 1.0;
        out.push(Candidate {
            base: m + j,
            sigma: 1.0,
            coeffs: c,
            bound: prob.var_lower[j],
        });
    }
    for &j in prob.var_upper_idx() {
        let mut c = DVector::zeros(n);
        c[j] = 1.0;
        out.push(Candidate {
            base: m + j,
            sigma: -1.0,
            coeffs: c,
            bound: prob.var_upper[j],
        });
    }
    out
}

/// Exhaustive active-set search. Every subset of candidate constraints
/// of size at most n is tried as the active set; the first subset whose
/// equality-constrained solution satisfies the KKT conditions is the
/// global optimum by convexity. Intended for small problems only.
pub fn active_set_oracle(prob: &QpProblem) -> Result<OracleSolution> {
    let n = prob.num_vars();
    let cands = candidates(prob);
    let t = cands.len();
    if t > 20 {
        return Err(Error::Oracle(format!(
            "active-set enumeration over {} candidates is too large",
            t
        )));
    }

    let h = dense_from_operator(&prob.hessian);
    let p = DVector::from_column_slice(&prob.linear_term);
    let scale = 1.0
        + cands
            .iter()
            .map(|c| c.bound.abs())
            .fold(0.0f64, f64::max)
        + p.amax();
    let feas_tol = 1e-7 * scale;
    let kkt_tol = 1e-8 * scale;

    // enumerate by increasing active-set size; optima of well-scaled
    // problems activate few constraints, so the search ends early
    for k in 0..=n.min(t) {
        let mut sel: Vec<usize> = (0..k).collect();
        loop {
            if let Some(found) = try_active_set(prob, &cands, &sel, &h, &p, scale, feas_tol, kkt_tol)
            {
                return Ok(found);
            }
            if !next_combination(&mut sel, t) {
                break;
            }
        }
    }
    Err(Error::Oracle(
        "no active set satisfied the KKT conditions".into(),
    ))
}

/// Advance to the next lexicographic k-combination of 0..t; false when
/// exhausted.
fn next_combination(sel: &mut [usize], t: usize) -> bool {
    let k = sel.len();
    for i in (0..k).rev() {
        if sel[i] < i + t - k {
            sel[i] += 1;
            for j in i + 1..k {
                sel[j] = sel[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn try_active_set(
    prob: &QpProblem,
    cands: &[Candidate],
    sel: &[usize],
    h: &DMatrix<f64>,
    p: &DVector<f64>,
    scale: f64,
    feas_tol: f64,
    kkt_tol: f64,
) -> Option<OracleSolution> {
    let n = prob.num_vars();
    let k = sel.len();
    // lower and upper of the same constraint cannot both be tight
    let mut bases: Vec<usize> = sel.iter().map(|&i| cands[i].base).collect();
    bases.sort_unstable();
    if bases.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }

    // [ H   -sigma C' ] [x  ]   [-p]
    // [ C    0        ] [lam] = [ d]
    let dim = n + k;
    let mut sys = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    sys.view_mut((0, 0), (n, n)).copy_from(h);
    for i in 0..n {
        rhs[i] = -p[i];
    }
    for (col, &ci) in sel.iter().enumerate() {
        let c = &cands[ci];
        for i in 0..n {
            sys[(i, n + col)] = -c.sigma * c.coeffs[i];
            sys[(n + col, i)] = c.coeffs[i];
        }
        rhs[n + col] = c.bound;
    }
    let sol = sys.clone().lu().solve(&rhs)?;
    // singular-ish subsets can pass LU; reject via system residual
    if (&sys * &sol - &rhs).amax() > kkt_tol {
        return None;
    }
    let x = sol.rows(0, n).into_owned();
    let lam = sol.rows(n, k).into_owned();
    if lam.iter().any(|&v| v < -1e-9 * scale) {
        return None;
    }
    let feasible = cands.iter().all(|c| {
        let v = c.coeffs.dot(&x);
        c.sigma * (v - c.bound) >= -feas_tol
    });
    if !feasible {
        return None;
    }

    let xv: Vec<f64> = x.iter().copied().collect();
    let objective = prob.objective(&xv);
    Some(OracleSolution {
        x: xv,
        objective,
        multipliers: lam.iter().copied().collect(),
        active: sel.iter().map(|&i| (cands[i].base, cands[i].sigma)).collect(),
    })
}

fn offsets(prob: &QpProblem) -> (usize, usize, usize, usize, usize) {
    (
        prob.num_vars(),
        prob.lin_lower_rows().len(),
        prob.lin_upper_rows().len(),
        prob.var_lower_idx().len(),
        prob.var_upper_idx().len(),
    )
}

/// Assemble the full Newton system of the perturbed optimality
/// conditions at an iterate. Unknowns and equations are ordered
/// (x, lam_la, lam_ua, lam_lx, lam_ux, s_la, s_ua, s_lx, s_ux); the
/// right-hand side is the negated residual stack in the same order.
pub fn assemble_newton_system(
    prob: &QpProblem,
    it: &IterateState,
    res: &ResidualSet,
) -> (DMatrix<f64>, DVector<f64>) {
    let (n, ml, mu, nl, nu) = offsets(prob);
    let nb = ml + mu + nl + nu;
    let dim = n + 2 * nb;
    let a = dense_csr(&prob.constraints);
    let h = dense_from_operator(&prob.hessian);

    let o_lla = n;
    let o_lua = n + ml;
    let o_llx = n + ml + mu;
    let o_lux = n + ml + mu + nl;
    let o_sla = n + nb;
    let o_sua = o_sla + ml;
    let o_slx = o_sua + mu;
    let o_sux = o_slx + nl;

    let mut sys = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);

    // stationarity rows
    sys.view_mut((0, 0), (n, n)).copy_from(&h);
    for (k, &row) in prob.lin_lower_rows().iter().enumerate() {
        for j in 0..n {
            sys[(j, o_lla + k)] = -a[(row, j)];
        }
    }
    for (k, &row) in prob.lin_upper_rows().iter().enumerate() {
        for j in 0..n {
            sys[(j, o_lua + k)] = a[(row, j)];
        }
    }
    for (k, &j) in prob.var_lower_idx().iter().enumerate() {
        sys[(j, o_llx + k)] = -1.0;
    }
    for (k, &j) in prob.var_upper_idx().iter().enumerate() {
        sys[(j, o_lux + k)] = 1.0;
    }
    for j in 0..n {
        rhs[j] = -res.r_h[j];
    }

    // primal bound rows: d(bound residual) = 0
    for (k, &row) in prob.lin_lower_rows().iter().enumerate() {
        for j in 0..n {
            sys[(o_lla + k, j)] = a[(row, j)];
        }
        sys[(o_lla + k, o_sla + k)] = -1.0;
        rhs[o_lla + k] = -res.r_la[k];
    }
    for (k, &row) in prob.lin_upper_rows().iter().enumerate() {
        for j in 0..n {
            sys[(o_lua + k, j)] = -a[(row, j)];
        }
        sys[(o_lua + k, o_sua + k)] = -1.0;
        rhs[o_lua + k] = -res.r_ua[k];
    }
    for (k, &j) in prob.var_lower_idx().iter().enumerate() {
        sys[(o_llx + k, j)] = 1.0;
        sys[(o_llx + k, o_slx + k)] = -1.0;
        rhs[o_llx + k] = -res.r_lx[k];
    }
    for (k, &j) in prob.var_upper_idx().iter().enumerate() {
        sys[(o_lux + k, j)] = -1.0;
        sys[(o_lux + k, o_sux + k)] = -1.0;
        rhs[o_lux + k] = -res.r_ux[k];
    }

    // complementarity rows: S dlam + Lam ds = -rc
    let mut comp = |row0: usize, lam_col0: usize, s_col0: usize, s: &[f64], lam: &[f64], rc: &[f64]| {
        for k in 0..s.len() {
            sys[(row0 + k, lam_col0 + k)] = s[k];
            sys[(row0 + k, s_col0 + k)] = lam[k];
            rhs[row0 + k] = -rc[k];
        }
    };
    comp(o_sla, o_lla, o_sla, &it.s_la, &it.lam_la, &res.rc_la);
    comp(o_sua, o_lua, o_sua, &it.s_ua, &it.lam_ua, &res.rc_ua);
    comp(o_slx, o_llx, o_slx, &it.s_lx, &it.lam_lx, &res.rc_lx);
    comp(o_sux, o_lux, o_sux, &it.s_ux, &it.lam_ux, &res.rc_ux);

    (sys, rhs)
}

fn pack_step(prob: &QpProblem, step: &StepDirection) -> DVector<f64> {
    let (n, ml, mu, nl, nu) = offsets(prob);
    let dim = n + 2 * (ml + mu + nl + nu);
    let mut v = DVector::zeros(dim);
    let blocks: [&[f64]; 9] = [
        &step.dx,
        &step.dlam_la,
        &step.dlam_ua,
        &step.dlam_lx,
        &step.dlam_ux,
        &step.ds_la,
        &step.ds_ua,
        &step.ds_lx,
        &step.ds_ux,
    ];
    let mut off = 0;
    for b in blocks {
        for (i, &x) in b.iter().enumerate() {
            v[off + i] = x;
        }
        off += b.len();
    }
    v
}

fn unpack_step(prob: &QpProblem, v: &DVector<f64>) -> StepDirection {
    let (n, ml, mu, nl, nu) = offsets(prob);
    let mut off = 0;
    let mut take = |len: usize| {
        let out: Vec<f64> = (0..len).map(|i| v[off + i]).collect();
        off += len;
        out
    };
    StepDirection {
        dx: take(n),
        dlam_la: take(ml),
        dlam_ua: take(mu),
        dlam_lx: take(nl),
        dlam_ux: take(nu),
        ds_la: take(ml),
        ds_ua: take(mu),
        ds_lx: take(nl),
        ds_ux: take(nu),
    }
}

/// Exact Newton direction from the fully assembled system.
pub fn dense_newton_oracle(
    prob: &QpProblem,
    it: &IterateState,
    res: &ResidualSet,
) -> Result<StepDirection> {
    let (sys, rhs) = assemble_newton_system(prob, it, res);
    let sol = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Oracle("assembled Newton system is singular".into()))?;
    Ok(unpack_step(prob, &sol))
}

/// Infinity norm of the assembled Newton equations evaluated at a step,
/// relative to max(1, step magnitude). Certifies the block elimination
/// and recovery formulas.
pub fn newton_backsub_residual(
    prob: &QpProblem,
    it: &IterateState,
    res: &ResidualSet,
    step: &StepDirection,
) -> f64 {
    let (sys, rhs) = assemble_newton_system(prob, it, res);
    let d = pack_step(prob, step);
    let scale = 1.0f64.max(rhs.amax()).max(d.amax());
    (&sys * &d - &rhs).amax() / scale
}

/// Dense reduced system in its plain 2x2 form:
///
/// ```text
/// [ Q  -B' ] [ dx   ]   [ r1 ]
/// [ B   D  ] [ dlam ] = [ r2 ]
/// ```
pub fn assemble_reduced_matrix(prob: &QpProblem, it: &IterateState) -> DMatrix<f64> {
    let (n, ml, mu, _, _) = offsets(prob);
    let dim = n + ml + mu;
    let a = dense_csr(&prob.constraints);
    let (q_extra, d_lower, d_upper) = crate::kkt::iterate_diagonals(prob, it);
    let mut out = DMatrix::zeros(dim, dim);
    let h = dense_from_operator(&prob.hessian);
    out.view_mut((0, 0), (n, n)).copy_from(&h);
    for j in 0..n {
        out[(j, j)] += q_extra[j];
    }
    for (k, &row) in prob.lin_lower_rows().iter().enumerate() {
        for j in 0..n {
            out[(n + k, j)] = a[(row, j)];
            out[(j, n + k)] = -a[(row, j)];
        }
        out[(n + k, n + k)] = d_lower[k];
    }
    for (k, &row) in prob.lin_upper_rows().iter().enumerate() {
        for j in 0..n {
            out[(n + ml + k, j)] = -a[(row, j)];
            out[(j, n + ml + k)] = a[(row, j)];
        }
        out[(n + ml + k, n + ml + k)] = d_upper[k];
    }
    out
}

/// Dense doubly augmented system, assembled from its definition rather
/// than through the matrix-free operator:
///
/// ```text
/// [ Q + 2 B' D^-1 B   B' ] ,  B = [A_L; -A_U]
/// [ B                 D  ]
/// ```
pub fn assemble_aug_matrix(prob: &QpProblem, it: &IterateState) -> DMatrix<f64> {
    let (n, ml, mu, _, _) = offsets(prob);
    let reduced = assemble_reduced_matrix(prob, it);
    let t = ml + mu;
    let b = reduced.view((n, 0), (t, n)).into_owned();
    let d: Vec<f64> = (0..t).map(|k| reduced[(n + k, n + k)]).collect();
    let mut out = reduced;
    // top-left += 2 B' D^-1 B, accumulated once per unordered index pair
    // so the assembly is exactly symmetric; top-right flips sign to +B'
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for k in 0..t {
                acc += 2.0 * b[(k, i)] * b[(k, j)] / d[k];
            }
            out[(i, j)] += acc;
            if j != i {
                out[(j, i)] += acc;
            }
        }
        for k in 0..t {
            out[(i, n + k)] = -out[(i, n + k)];
        }
    }
    out
}

/// Reduced right-hand side as one dense vector in operator ordering.
pub fn reduced_rhs_vectors(rhs: &ReducedRhs) -> DVector<f64> {
    let mut v = Vec::with_capacity(rhs.r1.len() + rhs.r2_lower.len() + rhs.r2_upper.len());
    v.extend_from_slice(&rhs.r1);
    v.extend_from_slice(&rhs.r2_lower);
    v.extend_from_slice(&rhs.r2_upper);
    DVector::from_vec(v)
}

/// Run the solver and capture every iteration before its step is
/// applied.
pub fn sample_iterates(
    prob: &QpProblem,
    cfg: &IpmConfig,
) -> Result<Vec<InstrumentedIteration>> {
    let mut out = Vec::new();
    ipm_solve_observed(prob, cfg, &mut |obs| {
        out.push(InstrumentedIteration {
            iterate: obs.iterate.clone(),
            residuals: obs.residuals.clone(),
            step: StepDirection {
                dx: obs.step.dx.clone(),
                dlam_la: obs.step.dlam_la.clone(),
                dlam_ua: obs.step.dlam_ua.clone(),
                dlam_lx: obs.step.dlam_lx.clone(),
                dlam_ux: obs.step.dlam_ux.clone(),
                ds_la: obs.step.ds_la.clone(),
                ds_ua: obs.step.ds_ua.clone(),
                ds_lx: obs.step.ds_lx.clone(),
                ds_ux: obs.step.ds_ux.clone(),
            },
            pcg_relative_residual: obs.pcg_relative_residual,
        });
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ipm::{compute_residuals, initial_point, Hessian};
    use crate::linops::DiagonalOperator;

    fn small_qp() -> QpProblem {
        // min 1/2 (x0^2 + 2 x1^2) + x0 - x1,  0 <= x <= 2, x0 + x1 >= 1
        QpProblem::new(
            Hessian::Diag(DiagonalOperator::new(vec![1.0, 2.0]).unwrap()),
            vec![1.0, -1.0],
            CsrMatrix::new(1, 2, vec![0, 2], vec![0, 1], vec![1.0, 1.0]).unwrap(),
            vec![1.0],
            vec![f64::INFINITY],
            vec![0.0, 0.0],
            vec![2.0, 2.0],
        )
        .unwrap()
    }

    #[test]
    fn oracle_active_bound() {
        // min 1/2 x^2 + x, x >= 0: x* = 0, lambda* = 1
        let prob = QpProblem::new(
            Hessian::Diag(DiagonalOperator::new(vec![1.0]).unwrap()),
            vec![1.0],
            CsrMatrix::empty(1),
            vec![],
            vec![],
            vec![0.0],
            vec![f64::INFINITY],
        )
        .unwrap();
        let sol = active_set_oracle(&prob).unwrap();
        assert!(sol.x[0].abs() < 1e-12);
        assert!((sol.multipliers[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_interior_minimum() {
        // min 1/2 x^2 - x on [0, 10]: x* = 1, empty active set
        let prob = QpProblem::new(
            Hessian::Diag(DiagonalOperator::new(vec![1.0]).unwrap()),
            vec![-1.0],
            CsrMatrix::empty(1),
            vec![],
            vec![],
            vec![0.0],
            vec![10.0],
        )
        .unwrap();
        let sol = active_set_oracle(&prob).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
        assert!(sol.active.is_empty());
    }

    #[test]
    fn oracle_linear_constraint_active() {
        // unconstrained min of small_qp is (-1, 1/2), violating
        // x0 + x1 >= 1; the constraint is active at the optimum
        let sol = active_set_oracle(&small_qp()).unwrap();
        let viol = sol.x[0] + sol.x[1] - 1.0;
        assert!(viol.abs() < 1e-10);
        assert!(sol.multipliers.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn newton_oracle_matches_recovery() {
        let prob = small_qp();
        let it = initial_point(&prob, &IpmConfig::default());
        let res = compute_residuals(&prob, &it);
        let exact = dense_newton_oracle(&prob, &it, &res).unwrap();
        let r = newton_backsub_residual(&prob, &it, &res, &exact);
        assert!(r < 1e-12, "backsub residual {}", r);
    }

    #[test]
    fn reduced_and_aug_share_solution() {
        let prob = small_qp();
        let it = initial_point(&prob, &IpmConfig::default());
        let res = compute_residuals(&prob, &it);
        let rhs = crate::kkt::reduce_residuals(&prob, &res, &it).unwrap();
        let rvec = reduced_rhs_vectors(&rhs);
        let red = assemble_reduced_matrix(&prob, &it);
        let x_red = red.lu().solve(&rvec).unwrap();

        let n = prob.num_vars();
        let t = rhs.r2_lower.len() + rhs.r2_upper.len();
        let aug = assemble_aug_matrix(&prob, &it);
        let mut aug_rhs = rvec.clone();
        // top block gains 2 B' D^-1 r2
        let b = assemble_reduced_matrix(&prob, &it)
            .view((n, 0), (t, n))
            .into_owned();
        for k in 0..t {
            let d = assemble_reduced_matrix(&prob, &it)[(n + k, n + k)];
            for j in 0..n {
                aug_rhs[j] += 2.0 * b[(k, j)] * rvec[n + k] / d;
            }
        }
        let x_aug = aug.clone().lu().solve(&aug_rhs).unwrap();
        assert!((x_red - x_aug).amax() < 1e-10);
        // the augmented matrix is symmetric positive definite here
        assert!((aug.clone() - aug.transpose()).amax() < 1e-12);
        assert!(aug.cholesky().is_some());
    }

    #[test]
    fn sample_iterates_capture_trajectory() {
        let prob = small_qp();
        let iters = sample_iterates(&prob, &IpmConfig::default()).unwrap();
        assert!(!iters.is_empty());
        assert!(iters.iter().all(|s| s.iterate.is_interior()));
    }
}
