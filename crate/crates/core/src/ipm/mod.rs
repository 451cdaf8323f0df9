//! Primal-dual interior point method on the reduced KKT system, solved
//! matrix-free with Jacobi-preconditioned CG on the doubly augmented
//! form.

mod problem;
mod state;

pub use problem::{Hessian, QpProblem};
pub use state::{IterateState, ResidualSet, StepDirection};

use std::time::Instant;

use crate::error::{Error, Result};
use crate::kkt::{iterate_diagonals, reduce_residuals, KktOperator};
use crate::linops::SymmetricOperator;
use crate::pcg::{pcg_solve, PcgConfig};

/// Tuning for the inner CG solves. When `rel_tol_override` is unset the
/// tolerance follows an inexact-Newton schedule tied to the barrier
/// parameter: min(1e-2, 0.1 mu), floored at 1e-10.
#[derive(Debug, Clone)]
pub struct PcgTuning {
    pub rel_tol_override: Option<f64>,
    pub abs_tolerance: f64,
    /// max CG iterations = factor * system dimension
    pub max_iter_factor: usize,
    /// start CG from the previous direction instead of zero
    pub warm_start: bool,
}

impl Default for PcgTuning {
    fn default() -> Self {
        Self {
            rel_tol_override: None,
            abs_tolerance: 1e-12,
            max_iter_factor: 10,
            warm_start: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IpmConfig {
    pub mu0_scale: f64,
    pub mu_tol: f64,
    pub mu_divisor: f64,
    /// fraction-to-boundary factor, 0 < tau < 1
    pub tau: f64,
    pub max_iterations: usize,
    pub pcg: PcgTuning,
}

impl Default for IpmConfig {
    fn default() -> Self {
        Self {
            mu0_scale: 0.1,
            mu_tol: 1e-8,
            mu_divisor: 10.0,
            tau: 0.995,
            max_iterations: 100,
            pcg: PcgTuning::default(),
        }
    }
}

impl IpmConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidProblem("tau must lie in (0, 1)".into()));
        }
        if !(self.mu_divisor > 1.0) {
            return Err(Error::InvalidProblem("mu divisor must exceed 1".into()));
        }
        if !(self.mu_tol > 0.0) || !(self.mu0_scale > 0.0) || self.max_iterations == 0 {
            return Err(Error::InvalidProblem("invalid IPM configuration".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    IterationLimit,
}

/// One per-iteration trace record.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub iteration: usize,
    pub mu: f64,
    pub residual_norm: f64,
    pub cg_iterations: usize,
    pub cg_relative_residual: f64,
    pub alpha_x: f64,
    pub alpha_lambda: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub ipm_iterations: usize,
    pub cg_iterations_total: usize,
    pub time_total_ms: f64,
    pub time_pcg_ms: f64,
    pub time_residual_ms: f64,
    pub traces: Vec<IterationTrace>,
}

#[derive(Debug, Clone)]
pub struct IpmSolution {
    pub status: SolveStatus,
    pub iterate: IterateState,
    pub residual_norm: f64,
    pub objective: f64,
    pub stats: SolveStats,
}

/// Snapshot handed to an instrumentation observer after each step
/// recovery, before the step is applied.
pub struct ObservedIteration<'a> {
    pub iterate: &'a IterateState,
    pub residuals: &'a ResidualSet,
    pub step: &'a StepDirection,
    pub pcg_relative_residual: f64,
}

/// Perturbed optimality residuals at an iterate.
pub fn compute_residuals(prob: &QpProblem, it: &IterateState) -> ResidualSet {
    let n = prob.num_vars();
    let m = prob.num_lin_constraints();
    let a = &prob.constraints;

    let mut ax = vec![0.0; m];
    a.apply(&it.x, &mut ax);

    // r_h = H x + p + A'(-lam_la scattered + lam_ua scattered)
    //       - lam_lx + lam_ux (scattered over finite bound indices)
    let mut r_h = vec![0.0; n];
    prob.hessian.apply(&it.x, &mut r_h);
    for j in 0..n {
        r_h[j] += prob.linear_term[j];
    }
    let mut t_full = vec![0.0; m];
    for (k, &row) in prob.lin_lower_rows().iter().enumerate() {
        t_full[row] -= it.lam_la[k];
    }
    for (k, &row) in prob.lin_upper_rows().iter().enumerate() {
        t_full[row] += it.lam_ua[k];
    }
    let mut at_t = vec![0.0; n];
    a.apply_transpose(&t_full, &mut at_t);
    for j in 0..n {
        r_h[j] += at_t[j];
    }
    for (k, &j) in prob.var_lower_idx().iter().enumerate() {
        r_h[j] -= it.lam_lx[k];
    }
    for (k, &j) in prob.var_upper_idx().iter().enumerate() {
        r_h[j] += it.lam_ux[k];
    }

    let r_la: Vec<f64> = prob
        .lin_lower_rows()
        .iter()
        .enumerate()
        .map(|(k, &row)| ax[row] - it.s_la[k] - prob.lin_lower[row])
        .collect();
    let r_ua: Vec<f64> = prob
        .lin_upper_rows()
        .iter()
        .enumerate()
        .map(|(k, &row)| prob.lin_upper[row] - ax[row] - it.s_ua[k])
        .collect();
    let r_lx: Vec<f64> = prob
        .var_lower_idx()
        .iter()
        .enumerate()
        .map(|(k, &j)| it.x[j] - it.s_lx[k] - prob.var_lower[j])
        .collect();
    let r_ux: Vec<f64> = prob
        .var_upper_idx()
        .iter()
        .enumerate()
        .map(|(k, &j)| prob.var_upper[j] - it.x[j] - it.s_ux[k])
        .collect();

    let comp = |lam: &[f64], s: &[f64]| -> Vec<f64> {
        lam.iter().zip(s).map(|(l, si)| l * si - it.mu).collect()
    };

    ResidualSet {
        r_h,
        r_la,
        r_ua,
        r_lx,
        r_ux,
        rc_la: comp(&it.lam_la, &it.s_la),
        rc_ua: comp(&it.lam_ua, &it.s_ua),
        rc_lx: comp(&it.lam_lx, &it.s_lx),
        rc_ux: comp(&it.lam_ux, &it.s_ux),
    }
}

/// Strictly interior starting point: x0 pushed inside the variable box,
/// unit multipliers, slacks covering the actual gaps, and mu0 scaled
/// from the initial complementarity.
pub fn initial_point(prob: &QpProblem, cfg: &IpmConfig) -> IterateState {
    let n = prob.num_vars();
    let mut x = vec![0.0; n];
    for j in 0..n {
        let a = prob.var_lower[j];
        let b = prob.var_upper[j];
        x[j] = match (a.is_finite(), b.is_finite()) {
            (true, true) => {
                let delta = 1.0f64.min((b - a) / 4.0);
                0.0f64.clamp(a + delta, b - delta)
            }
            (true, false) => 0.0f64.max(a + 1.0),
            (false, true) => 0.0f64.min(b - 1.0),
            (false, false) => 0.0,
        };
    }

    let m = prob.num_lin_constraints();
    let mut ax = vec![0.0; m];
    prob.constraints.apply(&x, &mut ax);

    let s_la: Vec<f64> = prob
        .lin_lower_rows()
        .iter()
        .map(|&row| (ax[row] - prob.lin_lower[row]).max(1.0))
        .collect();
    let s_ua: Vec<f64> = prob
        .lin_upper_rows()
        .iter()
        .map(|&row| (prob.lin_upper[row] - ax[row]).max(1.0))
        .collect();
    let s_lx: Vec<f64> = prob
        .var_lower_idx()
        .iter()
        .map(|&j| (x[j] - prob.var_lower[j]).max(1.0))
        .collect();
    let s_ux: Vec<f64> = prob
        .var_upper_idx()
        .iter()
        .map(|&j| (prob.var_upper[j] - x[j]).max(1.0))
        .collect();

    let total = prob.total_bound_count();
    let comp_sum: f64 = s_la.iter().chain(&s_ua).chain(&s_lx).chain(&s_ux).sum();
    let mu = cfg.mu0_scale * comp_sum / total.max(1) as f64;

    IterateState {
        x,
        lam_la: vec![1.0; s_la.len()],
        lam_ua: vec![1.0; s_ua.len()],
        lam_lx: vec![1.0; s_lx.len()],
        lam_ux: vec![1.0; s_ux.len()],
        s_la,
        s_ua,
        s_lx,
        s_ux,
        mu,
    }
}

/// Expand the reduced solve's (dx, dlam_A) into the full Newton
/// direction via the eliminated rows.
pub fn recover_step(
    prob: &QpProblem,
    dx: Vec<f64>,
    dlam_la: Vec<f64>,
    dlam_ua: Vec<f64>,
    res: &ResidualSet,
    it: &IterateState,
) -> Result<StepDirection> {
    let m = prob.num_lin_constraints();
    let mut adx = vec![0.0; m];
    prob.constraints.apply(&dx, &mut adx);

    let ds_la: Vec<f64> = prob
        .lin_lower_rows()
        .iter()
        .enumerate()
        .map(|(k, &row)| adx[row] + res.r_la[k])
        .collect();
    let ds_ua: Vec<f64> = prob
        .lin_upper_rows()
        .iter()
        .enumerate()
        .map(|(k, &row)| -adx[row] + res.r_ua[k])
        .collect();

    let nl = prob.var_lower_idx().len();
    let nu = prob.var_upper_idx().len();
    let mut ds_lx = Vec::with_capacity(nl);
    let mut dlam_lx = Vec::with_capacity(nl);
    for (k, &j) in prob.var_lower_idx().iter().enumerate() {
        let s = it.s_lx[k];
        if s == 0.0 {
            return Err(Error::InteriorViolated("zero slack in step recovery".into()));
        }
        let dsk = dx[j] + res.r_lx[k];
        ds_lx.push(dsk);
        dlam_lx.push(-(it.lam_lx[k] * dsk + res.rc_lx[k]) / s);
    }
    let mut ds_ux = Vec::with_capacity(nu);
    let mut dlam_ux = Vec::with_capacity(nu);
    for (k, &j) in prob.var_upper_idx().iter().enumerate() {
        let s = it.s_ux[k];
        if s == 0.0 {
            return Err(Error::InteriorViolated("zero slack in step recovery".into()));
        }
        let dsk = res.r_ux[k] - dx[j];
        ds_ux.push(dsk);
        dlam_ux.push(-(it.lam_ux[k] * dsk + res.rc_ux[k]) / s);
    }

    Ok(StepDirection {
        dx,
        dlam_la,
        dlam_ua,
        dlam_lx,
        dlam_ux,
        ds_la,
        ds_ua,
        ds_lx,
        ds_ux,
    })
}

/// Fraction-to-boundary step lengths: one alpha shared by x and all
/// slack families, one by all multiplier families.
pub fn step_lengths(it: &IterateState, dir: &StepDirection, tau: f64) -> (f64, f64) {
    fn max_ratio(cur: &[f64], delta: &[f64]) -> f64 {
        cur.iter()
            .zip(delta)
            .filter(|(_, &d)| d < 0.0)
            .map(|(&c, &d)| -c / d)
            .fold(f64::INFINITY, f64::min)
    }
    let slack_limit = [
        (&it.s_la, &dir.ds_la),
        (&it.s_ua, &dir.ds_ua),
        (&it.s_lx, &dir.ds_lx),
        (&it.s_ux, &dir.ds_ux),
    ]
    .iter()
    .map(|(c, d)| max_ratio(c, d))
    .fold(f64::INFINITY, f64::min);
    let lam_limit = [
        (&it.lam_la, &dir.dlam_la),
        (&it.lam_ua, &dir.dlam_ua),
        (&it.lam_lx, &dir.dlam_lx),
        (&it.lam_ux, &dir.dlam_ux),
    ]
    .iter()
    .map(|(c, d)| max_ratio(c, d))
    .fold(f64::INFINITY, f64::min);

    let alpha_x = 1.0f64.min(tau * slack_limit);
    let alpha_lam = 1.0f64.min(tau * lam_limit);
    (alpha_x, alpha_lam)
}

fn apply_step(it: &mut IterateState, dir: &StepDirection, alpha_x: f64, alpha_lam: f64) {
    crate::linops::axpy(alpha_x, &dir.dx, &mut it.x);
    crate::linops::axpy(alpha_x, &dir.ds_la, &mut it.s_la);
    crate::linops::axpy(alpha_x, &dir.ds_ua, &mut it.s_ua);
    crate::linops::axpy(alpha_x, &dir.ds_lx, &mut it.s_lx);
    crate::linops::axpy(alpha_x, &dir.ds_ux, &mut it.s_ux);
    crate::linops::axpy(alpha_lam, &dir.dlam_la, &mut it.lam_la);
    crate::linops::axpy(alpha_lam, &dir.dlam_ua, &mut it.lam_ua);
    crate::linops::axpy(alpha_lam, &dir.dlam_lx, &mut it.lam_lx);
    crate::linops::axpy(alpha_lam, &dir.dlam_ux, &mut it.lam_ux);
}

pub fn ipm_solve(prob: &QpProblem, cfg: &IpmConfig) -> Result<IpmSolution> {
    ipm_solve_observed(prob, cfg, &mut |_| {})
}

/// Same as [`ipm_solve`] but reports each recovered step to `observer`
/// before it is applied. Used by verification harnesses.
pub fn ipm_solve_observed(
    prob: &QpProblem,
    cfg: &IpmConfig,
    observer: &mut dyn FnMut(&ObservedIteration<'_>),
) -> Result<IpmSolution> {
    cfg.validate()?;
    let start = Instant::now();
    let mut stats = SolveStats::default();

    let mut it = initial_point(prob, cfg);
    let t_res = Instant::now();
    let mut res = compute_residuals(prob, &it);
    stats.time_residual_ms += t_res.elapsed().as_secs_f64() * 1e3;

    let (q_extra, d_lower, d_upper) = iterate_diagonals(prob, &it);
    let mut kkt = KktOperator::new(
        &prob.hessian,
        &prob.constraints,
        prob.lin_lower_rows(),
        prob.lin_upper_rows(),
        q_extra,
        d_lower,
        d_upper,
    )?;

    let dim = kkt.dim();
    let n = prob.num_vars();
    let ml = prob.lin_lower_rows().len();
    let mut warm = vec![0.0; dim];

    for iteration in 1..=cfg.max_iterations {
        let reduced = reduce_residuals(prob, &res, &it)?;
        let rhs = kkt.aug_rhs(&reduced)?;
        let precond = kkt.jacobi_diagonal()?;

        let rel_tol = cfg
            .pcg
            .rel_tol_override
            .unwrap_or_else(|| 1e-2f64.min(0.1 * it.mu).max(1e-10));
        let pcg_cfg = PcgConfig::new(
            rel_tol,
            cfg.pcg.abs_tolerance,
            cfg.pcg.max_iter_factor * dim,
        );
        let x0 = if cfg.pcg.warm_start {
            warm.clone()
        } else {
            vec![0.0; dim]
        };
        let t_pcg = Instant::now();
        let (sol, report) = pcg_solve(&kkt, &precond, &rhs, &x0, &pcg_cfg)?;
        stats.time_pcg_ms += t_pcg.elapsed().as_secs_f64() * 1e3;
        stats.cg_iterations_total += report.iterations;
        if cfg.pcg.warm_start {
            warm.copy_from_slice(&sol);
        }

        let dx = sol[..n].to_vec();
        let dlam_la = sol[n..n + ml].to_vec();
        let dlam_ua = sol[n + ml..].to_vec();
        let step = recover_step(prob, dx, dlam_la, dlam_ua, &res, &it)?;

        observer(&ObservedIteration {
            iterate: &it,
            residuals: &res,
            step: &step,
            pcg_relative_residual: report.final_relative_residual,
        });

        let (alpha_x, alpha_lam) = step_lengths(&it, &step, cfg.tau);
        apply_step(&mut it, &step, alpha_x, alpha_lam);
        if !it.is_interior() {
            return Err(Error::InteriorViolated(
                "step left the interior despite fraction-to-boundary".into(),
            ));
        }

        let (q_extra, d_lower, d_upper) = iterate_diagonals(prob, &it);
        kkt.update_iterate_diagonals(q_extra, d_lower, d_upper)?;

        let t_res = Instant::now();
        res = compute_residuals(prob, &it);
        stats.time_residual_ms += t_res.elapsed().as_secs_f64() * 1e3;
        if !res.is_finite() {
            return Err(Error::NonFinite("IPM residuals".into()));
        }
        let rnorm = res.norm_inf();

        stats.ipm_iterations = iteration;
        stats.traces.push(IterationTrace {
            iteration,
            mu: it.mu,
            residual_norm: rnorm,
            cg_iterations: report.iterations,
            cg_relative_residual: report.final_relative_residual,
            alpha_x,
            alpha_lambda: alpha_lam,
        });

        if rnorm < it.mu {
            if it.mu <= cfg.mu_tol {
                stats.time_total_ms = start.elapsed().as_secs_f64() * 1e3;
                let objective = prob.objective(&it.x);
                return Ok(IpmSolution {
                    status: SolveStatus::Converged,
                    residual_norm: rnorm,
                    objective,
                    iterate: it,
                    stats,
                });
            }
            it.mu /= cfg.mu_divisor;
            // complementarity residuals depend on mu
            res = compute_residuals(prob, &it);
        }
    }

    stats.time_total_ms = start.elapsed().as_secs_f64() * 1e3;
    let objective = prob.objective(&it.x);
    Ok(IpmSolution {
        status: SolveStatus::IterationLimit,
        residual_norm: res.norm_inf(),
        objective,
        iterate: it,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{CsrMatrix, DiagonalOperator};

    fn box_qp(p: f64, lo: f64, hi: f64) -> QpProblem {
        QpProblem::new(
            Hessian::Diag(DiagonalOperator::new(vec![1.0]).unwrap()),
            vec![p],
            CsrMatrix::empty(1),
            vec![],
            vec![],
            vec![lo],
            vec![hi],
        )
        .unwrap()
    }

    #[test]
    fn initial_point_hand_values() {
        // 0 <= x <= 10: delta = 1, x0 = 1, s_l = 1, s_u = 9, mu0 = 0.5
        let prob = box_qp(-1.0, 0.0, 10.0);
        let it = initial_point(&prob, &IpmConfig::default());
        assert_eq!(it.x, vec![1.0]);
        assert_eq!(it.s_lx, vec![1.0]);
        assert_eq!(it.s_ux, vec![9.0]);
        assert_eq!(it.lam_lx, vec![1.0]);
        assert_eq!(it.mu, 0.5);
    }

    #[test]
    fn initial_point_free_variable() {
        let prob = QpProblem::new(
            Hessian::Diag(DiagonalOperator::new(vec![1.0, 1.0]).unwrap()),
            vec![0.0, 0.0],
            CsrMatrix::empty(2),
            vec![],
            vec![],
            vec![0.0, f64::NEG_INFINITY],
            vec![f64::INFINITY, f64::INFINITY],
        )
        .unwrap();
        let it = initial_point(&prob, &IpmConfig::default());
        assert_eq!(it.x, vec![1.0, 0.0]);
        assert!(it.s_ux.is_empty());
        assert_eq!(it.s_lx.len(), 1);
    }

    #[test]
    fn residuals_at_barrier_solution() {
        // min 1/2 x^2 s.t. x >= 0 at mu = 1: x = 1, s = 1, lam = 1
        let prob = box_qp(0.0, 0.0, f64::INFINITY);
        let it = IterateState {
            x: vec![1.0],
            s_la: vec![],
            s_ua: vec![],
            s_lx: vec![1.0],
            s_ux: vec![],
            lam_la: vec![],
            lam_ua: vec![],
            lam_lx: vec![1.0],
            lam_ux: vec![],
            mu: 1.0,
        };
        let r = compute_residuals(&prob, &it);
        assert_eq!(r.r_h, vec![0.0]);
        assert_eq!(r.r_lx, vec![0.0]);
        assert_eq!(r.rc_lx, vec![0.0]);
    }

    #[test]
    fn complementarity_arithmetic() {
        let prob = box_qp(0.0, 0.0, f64::INFINITY);
        let it = IterateState {
            x: vec![3.0],
            s_la: vec![],
            s_ua: vec![],
            s_lx: vec![3.0],
            s_ux: vec![],
            lam_la: vec![],
            lam_ua: vec![],
            lam_lx: vec![2.0],
            lam_ux: vec![],
            mu: 1.0,
        };
        let r = compute_residuals(&prob, &it);
        assert_eq!(r.rc_lx, vec![5.0]);
    }

    #[test]
    fn step_lengths_empty_ratio_sets() {
        let prob = box_qp(-1.0, 0.0, 10.0);
        let it = initial_point(&prob, &IpmConfig::default());
        let mut dir = StepDirection::zeros(&prob);
        dir.ds_lx = vec![1.0];
        dir.ds_ux = vec![1.0];
        let (ax, al) = step_lengths(&it, &dir, 0.995);
        assert_eq!(ax, 1.0);
        assert_eq!(al, 1.0);
    }

    #[test]
    fn step_lengths_ratio_arithmetic() {
        let prob = box_qp(-1.0, 0.0, f64::INFINITY);
        let mut it = initial_point(&prob, &IpmConfig::default());
        it.s_lx = vec![1.0];
        let mut dir = StepDirection::zeros(&prob);
        dir.ds_lx = vec![-2.0];
        let (ax, _) = step_lengths(&it, &dir, 0.995);
        assert!((ax - 0.4975).abs() < 1e-15);
    }

    #[test]
    fn recover_step_zero_at_converged_point() {
        let prob = box_qp(0.0, 0.0, f64::INFINITY);
        let it = IterateState {
            x: vec![1.0],
            s_la: vec![],
            s_ua: vec![],
            s_lx: vec![1.0],
            s_ux: vec![],
            lam_la: vec![],
            lam_ua: vec![],
            lam_lx: vec![1.0],
            lam_ux: vec![],
            mu: 1.0,
        };
        let res = compute_residuals(&prob, &it);
        let step = recover_step(&prob, vec![0.0], vec![], vec![], &res, &it).unwrap();
        assert_eq!(step.ds_lx, vec![0.0]);
        assert_eq!(step.dlam_lx, vec![0.0]);
    }

    #[test]
    fn solves_interior_minimum() {
        // min 1/2 x^2 - x on [0, 10]: x* = 1
        let prob = box_qp(-1.0, 0.0, 10.0);
        let sol = ipm_solve(&prob, &IpmConfig::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
        assert!((sol.iterate.x[0] - 1.0).abs() < 1e-6);
        assert!(sol.iterate.lam_lx[0] < 1e-6);
        assert!(sol.iterate.lam_ux[0] < 1e-6);
        assert!((sol.objective + 0.5).abs() < 1e-6);
    }

    #[test]
    fn solves_active_bound() {
        // min 1/2 x^2 + x, x >= 0: x* = 0, lambda* = 1
        let prob = box_qp(1.0, 0.0, f64::INFINITY);
        let sol = ipm_solve(&prob, &IpmConfig::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
        assert!(sol.iterate.x[0].abs() < 1e-6);
        assert!((sol.iterate.lam_lx[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn iteration_limit_reports_best_iterate() {
        let prob = box_qp(-1.0, 0.0, 10.0);
        let cfg = IpmConfig {
            max_iterations: 1,
            ..Default::default()
        };
        let sol = ipm_solve(&prob, &cfg).unwrap();
        assert_eq!(sol.status, SolveStatus::IterationLimit);
        assert_eq!(sol.stats.ipm_iterations, 1);
    }

    #[test]
    fn mu_schedule_and_interior_preserved() {
        let prob = box_qp(-1.0, 0.0, 10.0);
        let sol = ipm_solve(&prob, &IpmConfig::default()).unwrap();
        let mut prev_mu = f64::INFINITY;
        for t in &sol.stats.traces {
            assert!(t.mu <= prev_mu);
            if t.mu < prev_mu && prev_mu.is_finite() {
                assert!((prev_mu / t.mu - 10.0).abs() < 1e-12);
            }
            prev_mu = t.mu;
        }
        assert!(sol.iterate.min_interior() > 0.0);
        // convergence certificate
        assert!(sol.residual_norm < sol.iterate.mu);
        assert!(sol.iterate.mu <= 1e-8);
    }

    #[test]
    fn deterministic_trajectory() {
        let prob = box_qp(-1.0, 0.0, 10.0);
        let s1 = ipm_solve(&prob, &IpmConfig::default()).unwrap();
        let s2 = ipm_solve(&prob, &IpmConfig::default()).unwrap();
        assert_eq!(s1.iterate.x, s2.iterate.x);
        assert_eq!(s1.stats.cg_iterations_total, s2.stats.cg_iterations_total);
    }
}
