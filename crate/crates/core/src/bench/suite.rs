//! Benchmark suite: oracle-verified smoke problems with median timings,
//! and a growth study over subproblems whose quasi-Newton Hessian gains
//! one curvature pair per outer iteration.

use std::time::Instant;

use crate::bench::generator::{generate, BoundPattern, GeneratorSpec, HessianKind};
use crate::bench::oracle::active_set_oracle;
use crate::error::{Error, Result};
use crate::ipm::{ipm_solve, IpmConfig, SolveStatus};

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub id: String,
    pub n: usize,
    pub m: usize,
    pub nnz: usize,
    pub ipm_iterations: usize,
    pub cg_iterations: usize,
    pub time_ms: f64,
    pub status: String,
    /// max |x - x_oracle| when an oracle check ran
    pub oracle_gap: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GrowthReport {
    pub n: usize,
    pub seeds: Vec<u64>,
    /// per outer iteration, median solve time over seeds
    pub median_ms: Vec<f64>,
    /// per outer iteration, median total CG iterations over seeds
    pub median_cg: Vec<f64>,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::IterationLimit => "iteration-limit",
    }
}

fn smoke_specs() -> Vec<(String, GeneratorSpec)> {
    let mut out = Vec::new();
    for (tag, hk) in [
        ("diag", HessianKind::Diag),
        ("csr", HessianKind::Csr),
        ("bfgs", HessianKind::Bfgs { pairs: 2 }),
    ] {
        for seed in [11u64, 12, 13] {
            let mut spec = GeneratorSpec::new(seed, 4, 2, hk.clone());
            spec.density = 0.5;
            out.push((format!("smoke-{}-{}", tag, seed), spec));
        }
    }
    let mut mixed = GeneratorSpec::new(21, 5, 3, HessianKind::Diag);
    mixed.density = 0.4;
    mixed.bounds = BoundPattern::Mixed {
        infinite_fraction: 0.3,
    };
    out.push(("smoke-mixed-21".into(), mixed));
    let mut lower = GeneratorSpec::new(22, 4, 2, HessianKind::Csr);
    lower.density = 0.5;
    lower.bounds = BoundPattern::LowerOnly;
    out.push(("smoke-lower-22".into(), lower));
    out
}

/// Solve a fixed set of small generated problems, verify each solution
/// against the exhaustive active-set search, and report the median of
/// five timed runs after one warmup.
pub fn run_smoke(cfg: &IpmConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for (id, spec) in smoke_specs() {
        let prob = generate(&spec)?;
        let sol = ipm_solve(&prob, cfg)?;
        if sol.status != SolveStatus::Converged {
            return Err(Error::Oracle(format!("{}: solver did not converge", id)));
        }
        let oracle = active_set_oracle(&prob)?;
        let gap = sol
            .iterate
            .x
            .iter()
            .zip(&oracle.x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if gap > 1e-5 {
            return Err(Error::Oracle(format!(
                "{}: solution differs from oracle by {}",
                id, gap
            )));
        }

        let mut times = Vec::with_capacity(5);
        for _ in 0..5 {
            let t = Instant::now();
            let _ = ipm_solve(&prob, cfg)?;
            times.push(t.elapsed().as_secs_f64() * 1e3);
        }
        rows.push(ReportRow {
            id,
            n: prob.num_vars(),
            m: prob.num_lin_constraints(),
            nnz: prob.constraints.nnz(),
            ipm_iterations: sol.stats.ipm_iterations,
            cg_iterations: sol.stats.cg_iterations_total,
            time_ms: median(&mut times),
            status: status_name(sol.status).into(),
            oracle_gap: Some(gap),
        });
    }
    Ok(rows)
}

/// Time bound-constrained subproblems whose compact quasi-Newton
/// Hessian carries `k` curvature pairs at outer iteration k, the shape
/// an SQP driver produces as its history grows. Reports per-iteration
/// medians over the seeds.
pub fn run_growth(
    n: usize,
    outer_iterations: usize,
    seeds: &[u64],
    cfg: &IpmConfig,
) -> Result<GrowthReport> {
    if outer_iterations == 0 || seeds.is_empty() {
        return Err(Error::InvalidProblem("growth study needs work to do".into()));
    }
    let mut median_ms = Vec::with_capacity(outer_iterations);
    let mut median_cg = Vec::with_capacity(outer_iterations);
    for k in 1..=outer_iterations {
        let mut times = Vec::with_capacity(seeds.len());
        let mut cgs = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut spec = GeneratorSpec::new(seed, n, 0, HessianKind::Bfgs { pairs: k });
            spec.density = 0.0;
            let prob = generate(&spec)?;
            let t = Instant::now();
            let sol = ipm_solve(&prob, cfg)?;
            times.push(t.elapsed().as_secs_f64() * 1e3);
            cgs.push(sol.stats.cg_iterations_total as f64);
        }
        median_ms.push(median(&mut times));
        median_cg.push(median(&mut cgs));
    }
    Ok(GrowthReport {
        n,
        seeds: seeds.to_vec(),
        median_ms,
        median_cg,
    })
}

/// Growth trend check robust to timer noise: the mean over the last
/// quarter of the series must exceed the mean over the first quarter.
pub fn trend_ok(series: &[f64]) -> bool {
    if series.len() < 4 {
        return false;
    }
    let q = series.len() / 4;
    let head: f64 = series[..q].iter().sum::<f64>() / q as f64;
    let tail: f64 = series[series.len() - q..].iter().sum::<f64>() / q as f64;
    tail > head
}

/// Tab-separated report, one row per problem with a header line.
pub fn render_table(rows: &[ReportRow]) -> String {
    let mut out = String::from("problem\tn\tm\tnnz\tipm-iters\tcg-iters\ttime-ms\tstatus\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{}\n",
            r.id, r.n, r.m, r.nnz, r.ipm_iterations, r.cg_iterations, r.time_ms, r.status
        ));
    }
    out
}
