//! Sequential quadratic programming driver. Each outer iteration
//! linearizes the constraints, builds a convex QP subproblem whose
//! Hessian is the compact quasi-Newton approximation, and solves it with
//! the interior point method.

use crate::error::{Error, Result};
use crate::ipm::{ipm_solve, Hessian, IpmConfig, QpProblem, SolveStatus};
use crate::linops::{dot, norm_inf, BfgsOperator, CsrMatrix, SymmetricOperator};

/// Objective value and gradient at a point.
pub struct ObjectiveEval {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Constraint values g(x) (sense g(x) <= 0) and dense Jacobian rows.
pub struct ConstraintEval {
    pub values: Vec<f64>,
    /// one row of length n per constraint
    pub jacobian: Vec<Vec<f64>>,
}

/// Smooth inequality-constrained problem supplied through evaluation
/// callbacks, plus a variable box.
pub struct NlpProblem {
    pub num_vars: usize,
    pub num_constraints: usize,
    pub objective: Box<dyn Fn(&[f64]) -> Result<ObjectiveEval>>,
    pub constraints: Box<dyn Fn(&[f64]) -> Result<ConstraintEval>>,
    pub var_lower: Vec<f64>,
    pub var_upper: Vec<f64>,
}

impl NlpProblem {
    /// Problem without nonlinear constraints.
    pub fn unconstrained(
        num_vars: usize,
        objective: Box<dyn Fn(&[f64]) -> Result<ObjectiveEval>>,
        var_lower: Vec<f64>,
        var_upper: Vec<f64>,
    ) -> Self {
        Self {
            num_vars,
            num_constraints: 0,
            objective,
            constraints: Box::new(|_| {
                Ok(ConstraintEval {
                    values: vec![],
                    jacobian: vec![],
                })
            }),
            var_lower,
            var_upper,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SqpConfig {
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub kkt_tolerance: f64,
    /// merit penalty stays at least this much above the multiplier norm
    pub penalty_margin: f64,
    pub armijo_c1: f64,
    pub max_line_search: usize,
    /// overrides the default identity scaling of H0
    pub initial_h0: Option<Vec<f64>>,
    pub qp: IpmConfig,
}

impl Default for SqpConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-9,
            kkt_tolerance: 1e-7,
            penalty_margin: 1.0,
            armijo_c1: 1e-4,
            max_line_search: 30,
            initial_h0: None,
            qp: IpmConfig::default(),
        }
    }
}

/// State carried across SQP iterations.
pub struct SqpState {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub bfgs: BfgsOperator,
    pub iteration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqpStatus {
    Converged,
    IterationLimit,
    SubproblemFailure,
}

#[derive(Debug, Clone, Default)]
pub struct SqpStats {
    pub iterations: usize,
    pub skipped_updates: usize,
    /// wall-clock time of each QP subproblem solve, ms
    pub subproblem_times_ms: Vec<f64>,
    pub subproblem_ipm_iterations: Vec<usize>,
    pub merit_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SqpSolution {
    pub status: SqpStatus,
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub stats: SqpStats,
}

fn dense_rows_to_csr(rows: &[Vec<f64>], ncols: usize) -> Result<CsrMatrix> {
    let mut offsets = Vec::with_capacity(rows.len() + 1);
    offsets.push(0usize);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for row in rows {
        if row.len() != ncols {
            return Err(Error::DimensionMismatch(
                "constraint Jacobian row length".into(),
            ));
        }
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                cols.push(j);
                vals.push(v);
            }
        }
        offsets.push(cols.len());
    }
    CsrMatrix::new(rows.len(), ncols, offsets, cols, vals)
}

/// QP subproblem in the step d at the current point: minimize the
/// quadratic model of the Lagrangian subject to linearized constraints
/// and the shifted variable box.
pub fn build_subproblem(
    state: &SqpState,
    obj: &ObjectiveEval,
    cons: &ConstraintEval,
    prob: &NlpProblem,
) -> Result<QpProblem> {
    let n = prob.num_vars;
    let m = prob.num_constraints;
    if obj.gradient.len() != n || cons.values.len() != m || cons.jacobian.len() != m {
        return Err(Error::DimensionMismatch("NLP callback output sizes".into()));
    }
    let a = dense_rows_to_csr(&cons.jacobian, n)?;
    let lin_upper: Vec<f64> = cons.values.iter().map(|g| -g).collect();
    let lin_lower = vec![f64::NEG_INFINITY; m];
    let var_lower: Vec<f64> = prob
        .var_lower
        .iter()
        .zip(&state.x)
        .map(|(a, x)| if a.is_finite() { a - x } else { *a })
        .collect();
    let var_upper: Vec<f64> = prob
        .var_upper
        .iter()
        .zip(&state.x)
        .map(|(b, x)| if b.is_finite() { b - x } else { *b })
        .collect();
    QpProblem::new(
        Hessian::Bfgs(state.bfgs.clone()),
        obj.gradient.clone(),
        a,
        lin_lower,
        lin_upper,
        var_lower,
        var_upper,
    )
}

/// Damped BFGS update in compact form. Appends the pair of columns
/// (H s, -1/(s'Hs)) and (y~, 1/(y~'s)), where y~ is the Powell-damped
/// gradient difference keeping y~'s >= 0.2 s'Hs, so definiteness is
/// preserved.
pub fn bfgs_update(bfgs: &BfgsOperator, s: &[f64], y: &[f64]) -> Result<BfgsOperator> {
    let n = bfgs.n();
    if s.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch("BFGS update vector lengths".into()));
    }
    if norm_inf(s) == 0.0 {
        return Err(Error::DegenerateUpdate("zero step".into()));
    }
    let mut hs = vec![0.0; n];
    bfgs.apply(s, &mut hs);
    let shs = dot(s, &hs);
    if !(shs > 0.0) {
        return Err(Error::DegenerateUpdate(format!(
            "curvature s'Hs = {} is not positive",
            shs
        )));
    }
    let sy = dot(s, y);
    let y_tilde: Vec<f64> = if sy >= 0.2 * shs {
        y.to_vec()
    } else {
        let theta = 0.8 * shs / (shs - sy);
        y.iter()
            .zip(&hs)
            .map(|(yi, hi)| theta * yi + (1.0 - theta) * hi)
            .collect()
    };
    let ys = dot(&y_tilde, s);
    if !(ys > 0.0) {
        return Err(Error::DegenerateUpdate(
            "damped curvature is not positive".into(),
        ));
    }
    bfgs.with_pair(&hs, -1.0 / shs, &y_tilde, 1.0 / ys)
}

fn l1_violation(g: &[f64]) -> f64 {
    g.iter().map(|v| v.max(0.0)).sum()
}

/// Gradient of the Lagrangian f + lambda' g in x (lambda are the
/// nonnegative multipliers of the linearized g <= 0 rows).
fn lagrangian_gradient(obj: &ObjectiveEval, cons: &ConstraintEval, lambda: &[f64]) -> Vec<f64> {
    let mut g = obj.gradient.clone();
    for (row, &lam) in cons.jacobian.iter().zip(lambda) {
        for (gj, &aj) in g.iter_mut().zip(row) {
            *gj += lam * aj;
        }
    }
    g
}

pub fn sqp_solve(prob: &NlpProblem, x0: &[f64], cfg: &SqpConfig) -> Result<SqpSolution> {
    sqp_solve_observed(prob, x0, cfg, &mut |_| {})
}

/// Same as [`sqp_solve`] but reports each QP subproblem to `observer`
/// before it is solved. Used by verification harnesses.
pub fn sqp_solve_observed(
    prob: &NlpProblem,
    x0: &[f64],
    cfg: &SqpConfig,
    observer: &mut dyn FnMut(&QpProblem),
) -> Result<SqpSolution> {
    let n = prob.num_vars;
    if x0.len() != n {
        return Err(Error::DimensionMismatch("x0 length".into()));
    }
    let mut x: Vec<f64> = x0
        .iter()
        .zip(prob.var_lower.iter().zip(&prob.var_upper))
        .map(|(&v, (&a, &b))| v.clamp(a.min(b), b.max(a)))
        .collect();
    let mut lambda = vec![0.0; prob.num_constraints];

    let first = (prob.objective)(&x)?;
    let h0 = match &cfg.initial_h0 {
        Some(d) => d.clone(),
        None => vec![1.0f64.max(first.value.abs()); n],
    };
    let mut bfgs = BfgsOperator::new(h0, vec![], vec![])?;

    let mut stats = SqpStats::default();
    let mut penalty = cfg.penalty_margin;
    let mut last_kkt = f64::INFINITY;

    for iteration in 1..=cfg.max_iterations {
        stats.iterations = iteration;
        let obj = (prob.objective)(&x)?;
        let cons = (prob.constraints)(&x)?;

        let state = SqpState {
            x: x.clone(),
            lambda: lambda.clone(),
            bfgs: bfgs.clone(),
            iteration,
        };
        let qp = build_subproblem(&state, &obj, &cons, prob)?;
        observer(&qp);
        let qp_sol = match ipm_solve(&qp, &cfg.qp) {
            Ok(s) => s,
            Err(_) => {
                return Ok(SqpSolution {
                    status: SqpStatus::SubproblemFailure,
                    objective: obj.value,
                    kkt_residual: last_kkt,
                    x,
                    lambda,
                    stats,
                });
            }
        };
        stats
            .subproblem_times_ms
            .push(qp_sol.stats.time_total_ms);
        stats
            .subproblem_ipm_iterations
            .push(qp_sol.stats.ipm_iterations);
        if qp_sol.status != SolveStatus::Converged {
            // direction is still usable; note nothing, the merit search guards it
        }

        let d = qp_sol.iterate.x.clone();
        // multipliers of the linearized rows (upper-bounded: A d <= -g)
        let mut lambda_new = vec![0.0; prob.num_constraints];
        for (k, &row) in qp.lin_upper_rows().iter().enumerate() {
            lambda_new[row] = qp_sol.iterate.lam_ua[k];
        }

        // NLP KKT residual at x with the fresh multiplier estimates
        let mut stat = lagrangian_gradient(&obj, &cons, &lambda_new);
        for (k, &j) in qp.var_lower_idx().iter().enumerate() {
            stat[j] -= qp_sol.iterate.lam_lx[k];
        }
        for (k, &j) in qp.var_upper_idx().iter().enumerate() {
            stat[j] += qp_sol.iterate.lam_ux[k];
        }
        let feas = cons.values.iter().fold(0.0f64, |m, v| m.max(v.max(0.0)));
        let comp = cons
            .values
            .iter()
            .zip(&lambda_new)
            .fold(0.0f64, |m, (g, l)| m.max((g * l).abs()));
        let kkt = norm_inf(&stat).max(feas).max(comp);
        last_kkt = kkt;

        if norm_inf(&d) <= cfg.step_tolerance && kkt <= cfg.kkt_tolerance {
            return Ok(SqpSolution {
                status: SqpStatus::Converged,
                objective: obj.value,
                kkt_residual: kkt,
                x,
                lambda: lambda_new,
                stats,
            });
        }

        // l1 merit line search
        penalty = penalty.max(norm_inf(&lambda_new) + cfg.penalty_margin);
        let viol0 = l1_violation(&cons.values);
        let merit0 = obj.value + penalty * viol0;
        let descent = dot(&obj.gradient, &d) - penalty * viol0;
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..cfg.max_line_search {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            let ot = (prob.objective)(&xt)?;
            let ct = (prob.constraints)(&xt)?;
            let merit_t = ot.value + penalty * l1_violation(&ct.values);
            let ok = if descent < 0.0 {
                merit_t <= merit0 + cfg.armijo_c1 * alpha * descent
            } else {
                merit_t < merit0
            };
            if ok {
                accepted = Some((alpha, xt, ot, ct));
                break;
            }
            alpha *= 0.5;
        }
        let (_alpha, x_new, obj_new, cons_new) = match accepted {
            Some(v) => v,
            None => {
                // no merit progress possible along d; report best iterate
                return Ok(SqpSolution {
                    status: if kkt <= cfg.kkt_tolerance {
                        SqpStatus::Converged
                    } else {
                        SqpStatus::IterationLimit
                    },
                    objective: obj.value,
                    kkt_residual: kkt,
                    x,
                    lambda: lambda_new,
                    stats,
                });
            }
        };
        stats
            .merit_history
            .push(obj_new.value + penalty * l1_violation(&cons_new.values));

        // quasi-Newton update from the actual step
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let g_l_new = lagrangian_gradient(&obj_new, &cons_new, &lambda_new);
        let g_l_old = lagrangian_gradient(&obj, &cons, &lambda_new);
        let y: Vec<f64> = g_l_new.iter().zip(&g_l_old).map(|(a, b)| a - b).collect();
        match bfgs_update(&bfgs, &s, &y) {
            Ok(updated) => bfgs = updated,
            Err(_) => stats.skipped_updates += 1,
        }

        x = x_new;
        lambda = lambda_new;
    }

    let obj = (prob.objective)(&x)?;
    Ok(SqpSolution {
        status: SqpStatus::IterationLimit,
        objective: obj.value,
        kkt_residual: last_kkt,
        x,
        lambda,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic_nlp() -> NlpProblem {
        // f(x) = 1/2 (x1^2 + 2 x2^2) - x1 - x2, box [-5, 5]^2
        NlpProblem::unconstrained(
            2,
            Box::new(|x| {
                Ok(ObjectiveEval {
                    value: 0.5 * (x[0] * x[0] + 2.0 * x[1] * x[1]) - x[0] - x[1],
                    gradient: vec![x[0] - 1.0, 2.0 * x[1] - 1.0],
                })
            }),
            vec![-5.0, -5.0],
            vec![5.0, 5.0],
        )
    }

    #[test]
    fn exact_hessian_takes_newton_step() {
        let prob = quadratic_nlp();
        let cfg = SqpConfig {
            initial_h0: Some(vec![1.0, 2.0]),
            ..Default::default()
        };
        let sol = sqp_solve(&prob, &[0.0, 0.0], &cfg).unwrap();
        assert_eq!(sol.status, SqpStatus::Converged);
        assert!(sol.stats.iterations <= 3);
        assert!((sol.x[0] - 1.0).abs() < 1e-6);
        assert!((sol.x[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn linear_constraint_linearization_is_exact() {
        // g(x) = x1 + x2 - 1 <= 0 at x = (2, 3): row (1, 1), upper 1 - 5 = -4
        let prob = NlpProblem {
            num_vars: 2,
            num_constraints: 1,
            objective: Box::new(|x| {
                Ok(ObjectiveEval {
                    value: 0.5 * dot(x, x),
                    gradient: x.to_vec(),
                })
            }),
            constraints: Box::new(|x| {
                Ok(ConstraintEval {
                    values: vec![x[0] + x[1] - 1.0],
                    jacobian: vec![vec![1.0, 1.0]],
                })
            }),
            var_lower: vec![f64::NEG_INFINITY; 2],
            var_upper: vec![f64::INFINITY; 2],
        };
        let state = SqpState {
            x: vec![2.0, 3.0],
            lambda: vec![0.0],
            bfgs: BfgsOperator::identity_scaled(2, 1.0).unwrap(),
            iteration: 1,
        };
        let obj = (prob.objective)(&state.x).unwrap();
        let cons = (prob.constraints)(&state.x).unwrap();
        let qp = build_subproblem(&state, &obj, &cons, &prob).unwrap();
        assert_eq!(qp.lin_upper, vec![-4.0]);
        assert_eq!(qp.constraints.values(), &[1.0, 1.0]);
    }

    #[test]
    fn secant_equation_holds_after_update() {
        // H = I, s = e1, y = 2 e1 -> H+ s = y
        let h = BfgsOperator::identity_scaled(3, 1.0).unwrap();
        let s = [1.0, 0.0, 0.0];
        let y = [2.0, 0.0, 0.0];
        let h2 = bfgs_update(&h, &s, &y).unwrap();
        let mut out = vec![0.0; 3];
        h2.apply(&s, &mut out);
        for (o, yi) in out.iter().zip(&y) {
            assert!((o - yi).abs() < 1e-14);
        }
        // off-step direction keeps the identity
        h2.apply(&[0.0, 1.0, 0.0], &mut out);
        assert!((out[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn consistent_y_leaves_operator_unchanged_on_s() {
        let h = BfgsOperator::identity_scaled(2, 3.0).unwrap();
        let s = [0.5, -0.25];
        let mut hs = vec![0.0; 2];
        h.apply(&s, &mut hs);
        let h2 = bfgs_update(&h, &s, &hs).unwrap();
        let mut out = vec![0.0; 2];
        h2.apply(&s, &mut out);
        for (o, e) in out.iter().zip(&hs) {
            assert!((o - e).abs() < 1e-13);
        }
    }

    #[test]
    fn update_rejects_zero_step() {
        let h = BfgsOperator::identity_scaled(2, 1.0).unwrap();
        assert!(bfgs_update(&h, &[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn rosenbrock_bounded() {
        let prob = NlpProblem::unconstrained(
            2,
            Box::new(|x| {
                let (a, b) = (x[0], x[1]);
                Ok(ObjectiveEval {
                    value: (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2),
                    gradient: vec![
                        -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                        200.0 * (b - a * a),
                    ],
                })
            }),
            vec![-5.0, -5.0],
            vec![5.0, 5.0],
        );
        let sol = sqp_solve(&prob, &[-1.2, 1.0], &SqpConfig::default()).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-5, "x = {:?}", sol.x);
        assert!((sol.x[1] - 1.0).abs() < 1e-5, "x = {:?}", sol.x);
        assert!(sol.objective < 1e-9);
    }

    #[test]
    fn active_nonlinear_constraint_has_positive_multiplier() {
        // minimize -(x1 + x2) inside the unit disc
        let prob = NlpProblem {
            num_vars: 2,
            num_constraints: 1,
            objective: Box::new(|x| {
                Ok(ObjectiveEval {
                    value: -(x[0] + x[1]),
                    gradient: vec![-1.0, -1.0],
                })
            }),
            constraints: Box::new(|x| {
                Ok(ConstraintEval {
                    values: vec![x[0] * x[0] + x[1] * x[1] - 1.0],
                    jacobian: vec![vec![2.0 * x[0], 2.0 * x[1]]],
                })
            }),
            var_lower: vec![-2.0, -2.0],
            var_upper: vec![2.0, 2.0],
        };
        let sol = sqp_solve(&prob, &[0.0, 0.0], &SqpConfig::default()).unwrap();
        let r = (sol.x[0] * sol.x[0] + sol.x[1] * sol.x[1]).sqrt();
        assert!((r - 1.0).abs() < 1e-5, "radius {}", r);
        assert!((sol.x[0] - sol.x[1]).abs() < 1e-4);
        assert!(sol.lambda[0] > 0.0);
    }

    #[test]
    fn merit_history_nonincreasing() {
        let prob = quadratic_nlp();
        let sol = sqp_solve(&prob, &[4.0, -4.0], &SqpConfig::default()).unwrap();
        for w in sol.stats.merit_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }
}
