//! Problem and solution serialization.
//!
//! Both formats are line-oriented, self-describing text: each line is a
//! key followed by whitespace-separated values. Floating point values
//! are written in shortest round-trip decimal, and infinite bounds use
//! the literal tokens `-inf` / `+inf`, so `parse(write(p))` reproduces
//! every value bit for bit. See `docs/format.md` for the field list.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ipm::{Hessian, IpmConfig, IpmSolution, QpProblem, SolveStatus};
use crate::linops::{BfgsOperator, CsrMatrix, DiagonalOperator};

pub const PROBLEM_MAGIC: &str = "augqp-problem";
pub const SOLUTION_MAGIC: &str = "augqp-solution";
pub const FORMAT_VERSION: u32 = 1;

fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{}", v)
    }
}

fn push_vec(out: &mut String, key: &str, vals: &[f64]) {
    out.push_str(key);
    for v in vals {
        let _ = write!(out, " {}", fmt_f64(*v));
    }
    out.push('\n');
}

fn push_usize_vec(out: &mut String, key: &str, vals: &[usize]) {
    out.push_str(key);
    for v in vals {
        let _ = write!(out, " {}", v);
    }
    out.push('\n');
}

/// Serialize a problem in the text format. Deterministic key order.
pub fn write_problem(prob: &QpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", PROBLEM_MAGIC, FORMAT_VERSION);
    let _ = writeln!(out, "vars {}", prob.num_vars());
    let _ = writeln!(out, "lin-constraints {}", prob.num_lin_constraints());
    match &prob.hessian {
        Hessian::Diag(d) => {
            push_vec(&mut out, "hessian-diag", d.entries());
        }
        Hessian::Csr(h) => {
            out.push_str("hessian-csr\n");
            push_usize_vec(&mut out, "hessian-row-offsets", h.row_offsets());
            push_usize_vec(&mut out, "hessian-col-indices", h.col_indices());
            push_vec(&mut out, "hessian-values", h.values());
        }
        Hessian::Bfgs(b) => {
            let _ = writeln!(out, "hessian-bfgs {}", b.num_columns());
            push_vec(&mut out, "bfgs-h0", b.h0_diag());
            for k in 0..b.num_columns() {
                push_vec(&mut out, "bfgs-column", b.column(k));
            }
            push_vec(&mut out, "bfgs-weights", b.weights());
        }
    }
    push_vec(&mut out, "linear-term", &prob.linear_term);
    push_usize_vec(
        &mut out,
        "constraint-row-offsets",
        prob.constraints.row_offsets(),
    );
    push_usize_vec(
        &mut out,
        "constraint-col-indices",
        prob.constraints.col_indices(),
    );
    push_vec(&mut out, "constraint-values", prob.constraints.values());
    push_vec(&mut out, "lin-lower", &prob.lin_lower);
    push_vec(&mut out, "lin-upper", &prob.lin_upper);
    push_vec(&mut out, "var-lower", &prob.var_lower);
    push_vec(&mut out, "var-upper", &prob.var_upper);
    out.push_str("end\n");
    out
}

struct LineReader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> LineReader<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().enumerate(),
        }
    }

    /// Next non-empty line as (1-based line number, tokens).
    fn next_tokens(&mut self) -> Result<(usize, Vec<&'a str>)> {
        for (idx, line) in self.lines.by_ref() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok((idx + 1, trimmed.split_whitespace().collect()));
        }
        Err(Error::Parse {
            line: 0,
            message: "unexpected end of input".into(),
        })
    }

    /// Expect a specific key; returns its value tokens.
    fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (line, tokens) = self.next_tokens()?;
        if tokens[0] != key {
            return Err(Error::Parse {
                line,
                message: format!("expected `{}`, found `{}`", key, tokens[0]),
            });
        }
        Ok((line, tokens[1..].to_vec()))
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "+inf" | "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid number `{}`", tok),
            })?;
            if v.is_nan() {
                return Err(Error::Parse {
                    line,
                    message: "NaN is not a valid value".into(),
                });
            }
            Ok(v)
        }
    }
}

fn parse_f64_vec(tokens: &[&str], line: usize, expected: usize, what: &str) -> Result<Vec<f64>> {
    if tokens.len() != expected {
        return Err(Error::Parse {
            line,
            message: format!(
                "{}: expected {} values, found {}",
                what,
                expected,
                tokens.len()
            ),
        });
    }
    tokens.iter().map(|t| parse_f64(t, line)).collect()
}

fn parse_usize_vec(tokens: &[&str], line: usize, what: &str) -> Result<Vec<usize>> {
    tokens
        .iter()
        .map(|t| {
            t.parse().map_err(|_| Error::Parse {
                line,
                message: format!("{}: invalid index `{}`", what, t),
            })
        })
        .collect()
}

fn parse_scalar_usize(tokens: &[&str], line: usize, what: &str) -> Result<usize> {
    if tokens.len() != 1 {
        return Err(Error::Parse {
            line,
            message: format!("{} expects a single value", what),
        });
    }
    tokens[0].parse().map_err(|_| Error::Parse {
        line,
        message: format!("{}: invalid count `{}`", what, tokens[0]),
    })
}

fn parse_csr(
    r: &mut LineReader<'_>,
    prefix: &str,
    nrows: usize,
    ncols: usize,
) -> Result<CsrMatrix> {
    let (line_o, toks) = r.expect(&format!("{}-row-offsets", prefix))?;
    let offsets = parse_usize_vec(&toks, line_o, "row offsets")?;
    let (line_c, toks) = r.expect(&format!("{}-col-indices", prefix))?;
    let cols = parse_usize_vec(&toks, line_c, "column indices")?;
    let (line_v, toks) = r.expect(&format!("{}-values", prefix))?;
    let vals: Result<Vec<f64>> = toks.iter().map(|t| parse_f64(t, line_v)).collect();
    CsrMatrix::new(nrows, ncols, offsets, cols, vals?).map_err(|e| Error::Parse {
        line: line_o,
        message: format!("{} matrix: {}", prefix, e),
    })
}

/// Parse a problem document; every problem invariant is validated.
pub fn parse_problem(text: &str) -> Result<QpProblem> {
    let mut r = LineReader::new(text);
    let (line, toks) = r.next_tokens()?;
    if toks.len() != 2 || toks[0] != PROBLEM_MAGIC {
        return Err(Error::Parse {
            line,
            message: format!("expected `{} <version>` header", PROBLEM_MAGIC),
        });
    }
    if toks[1] != "1" {
        return Err(Error::Parse {
            line,
            message: format!("unsupported format version `{}`", toks[1]),
        });
    }
    let (line, toks) = r.expect("vars")?;
    let n = parse_scalar_usize(&toks, line, "vars")?;
    let (line, toks) = r.expect("lin-constraints")?;
    let m = parse_scalar_usize(&toks, line, "lin-constraints")?;

    let (hline, htoks) = r.next_tokens()?;
    let hessian = match htoks[0] {
        "hessian-diag" => {
            let d = parse_f64_vec(&htoks[1..], hline, n, "hessian diagonal")?;
            Hessian::Diag(DiagonalOperator::new(d)?)
        }
        "hessian-csr" => Hessian::Csr(parse_csr(&mut r, "hessian", n, n)?),
        "hessian-bfgs" => {
            let ncols = parse_scalar_usize(&htoks[1..], hline, "hessian-bfgs")?;
            let (line, toks) = r.expect("bfgs-h0")?;
            let h0 = parse_f64_vec(&toks, line, n, "bfgs h0")?;
            let mut columns = Vec::with_capacity(n * ncols);
            for _ in 0..ncols {
                let (line, toks) = r.expect("bfgs-column")?;
                columns.extend(parse_f64_vec(&toks, line, n, "bfgs column")?);
            }
            let (line, toks) = r.expect("bfgs-weights")?;
            let weights = parse_f64_vec(&toks, line, ncols, "bfgs weights")?;
            Hessian::Bfgs(BfgsOperator::new(h0, columns, weights)?)
        }
        other => {
            return Err(Error::Parse {
                line: hline,
                message: format!("unknown hessian kind `{}`", other),
            })
        }
    };

    let (line, toks) = r.expect("linear-term")?;
    let p = parse_f64_vec(&toks, line, n, "linear term")?;
    let a = parse_csr(&mut r, "constraint", m, n)?;
    let (line, toks) = r.expect("lin-lower")?;
    let lin_lower = parse_f64_vec(&toks, line, m, "lin-lower")?;
    let (line, toks) = r.expect("lin-upper")?;
    let lin_upper = parse_f64_vec(&toks, line, m, "lin-upper")?;
    let (line, toks) = r.expect("var-lower")?;
    let var_lower = parse_f64_vec(&toks, line, n, "var-lower")?;
    let (line, toks) = r.expect("var-upper")?;
    let var_upper = parse_f64_vec(&toks, line, n, "var-upper")?;
    r.expect("end")?;

    QpProblem::new(hessian, p, a, lin_lower, lin_upper, var_lower, var_upper)
}

/// Serialize a solve result. Key order is fixed and timing fields are
/// opt-in, so identical runs produce byte-identical documents.
pub fn write_solution(sol: &IpmSolution, cfg: &IpmConfig, include_timings: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", SOLUTION_MAGIC, FORMAT_VERSION);
    let status = match sol.status {
        SolveStatus::Converged => "converged",
        SolveStatus::IterationLimit => "iteration-limit",
    };
    let _ = writeln!(out, "status {}", status);
    let _ = writeln!(out, "objective {}", fmt_f64(sol.objective));
    push_vec(&mut out, "x", &sol.iterate.x);
    let _ = writeln!(out, "mu {}", fmt_f64(sol.iterate.mu));
    let _ = writeln!(out, "residual-norm {}", fmt_f64(sol.residual_norm));
    let _ = writeln!(out, "ipm-iterations {}", sol.stats.ipm_iterations);
    let _ = writeln!(out, "cg-iterations {}", sol.stats.cg_iterations_total);
    push_vec(&mut out, "lambda-lin-lower", &sol.iterate.lam_la);
    push_vec(&mut out, "lambda-lin-upper", &sol.iterate.lam_ua);
    push_vec(&mut out, "lambda-var-lower", &sol.iterate.lam_lx);
    push_vec(&mut out, "lambda-var-upper", &sol.iterate.lam_ux);
    let pcg_rtol = match cfg.pcg.rel_tol_override {
        Some(v) => fmt_f64(v),
        None => "auto".to_string(),
    };
    let _ = writeln!(
        out,
        "config mu0-scale={} mu-tol={} mu-divisor={} tau={} max-iter={} pcg-rtol={} pcg-atol={}",
        fmt_f64(cfg.mu0_scale),
        fmt_f64(cfg.mu_tol),
        fmt_f64(cfg.mu_divisor),
        fmt_f64(cfg.tau),
        cfg.max_iterations,
        pcg_rtol,
        fmt_f64(cfg.pcg.abs_tolerance),
    );
    if include_timings {
        let _ = writeln!(out, "timing-total-ms {}", fmt_f64(sol.stats.time_total_ms));
        let _ = writeln!(out, "timing-pcg-ms {}", fmt_f64(sol.stats.time_pcg_ms));
        let _ = writeln!(
            out,
            "timing-residual-ms {}",
            fmt_f64(sol.stats.time_residual_ms)
        );
    }
    out.push_str("end\n");
    out
}
