use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ipm::{Hessian, QpProblem};
use crate::linops::{BfgsOperator, CsrMatrix, DiagonalOperator};
use crate::sqp::bfgs_update;

#[derive(Debug, Clone, PartialEq)]
pub enum HessianKind {
    Diag,
    Csr,
    Bfgs { pairs: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundPattern {
    /// finite lower and upper bounds everywhere
    TwoSided,
    /// finite lower bounds only
    LowerOnly,
    /// each bound independently infinite with the given probability
    Mixed { infinite_fraction: f64 },
    /// two-sided variable box; each linear row one-sided, lower with the
    /// given probability (dose-deposition-like workloads)
    OneSidedSplit { lower_fraction: f64 },
}

/// Everything that determines a generated problem. Generation is a pure
/// function of this value: identical specs produce identical problems
/// on every platform (ChaCha8 keyed by the seed, fixed draw order; see
/// docs/format.md).
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub density: f64,
    pub hessian: HessianKind,
    pub bounds: BoundPattern,
    /// nonnegative constraint coefficients (dose-deposition-like)
    pub nonneg_constraints: bool,
    /// log-uniform spread of diagonal Hessian entries in [1, spread]
    pub diag_spread: f64,
}

impl GeneratorSpec {
    pub fn new(seed: u64, n: usize, m: usize, hessian: HessianKind) -> Self {
        Self {
            seed,
            n,
            m,
            density: 0.2,
            hessian,
            bounds: BoundPattern::TwoSided,
            nonneg_constraints: false,
            diag_spread: 10.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidProblem("generator: n must be positive".into()));
        }
        if self.m > 0 && !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidProblem(
                "generator: density must lie in (0, 1]".into(),
            ));
        }
        if !(self.diag_spread >= 1.0) {
            return Err(Error::InvalidProblem(
                "generator: diag spread must be >= 1".into(),
            ));
        }
        if let BoundPattern::Mixed { infinite_fraction } = self.bounds {
            if !(0.0..=1.0).contains(&infinite_fraction) {
                return Err(Error::InvalidProblem(
                    "generator: infinite fraction must lie in [0, 1]".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Named presets reproducing the benchmark workload shapes: proton
/// problems are purely bound constrained, before (77373 variables) and
/// after (33531) spot filtering; the VMAT problem has 13425 variables
/// and 68618 sparse linear constraints.
pub fn preset(name: &str) -> Option<GeneratorSpec> {
    match name {
        "proton-hn-pre" => Some(GeneratorSpec {
            density: 0.0,
            bounds: BoundPattern::TwoSided,
            ..GeneratorSpec::new(1001, 77373, 0, HessianKind::Bfgs { pairs: 8 })
        }),
        "proton-hn-post" => Some(GeneratorSpec {
            density: 0.0,
            bounds: BoundPattern::TwoSided,
            ..GeneratorSpec::new(1002, 33531, 0, HessianKind::Bfgs { pairs: 8 })
        }),
        "vmat-hn" => Some(GeneratorSpec {
            density: 6.0 / 13425.0,
            bounds: BoundPattern::OneSidedSplit {
                lower_fraction: 15751.0 / 68618.0,
            },
            nonneg_constraints: true,
            ..GeneratorSpec::new(1003, 13425, 68618, HessianKind::Bfgs { pairs: 4 })
        }),
        _ => None,
    }
}

pub fn preset_names() -> &'static [&'static str] {
    &["proton-hn-pre", "proton-hn-post", "vmat-hn"]
}

fn gen_range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn gen_hessian(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<Hessian> {
    let n = spec.n;
    match &spec.hessian {
        HessianKind::Diag => {
            let log_spread = spec.diag_spread.ln();
            let entries: Vec<f64> = (0..n)
                .map(|_| (rng.gen_range(0.0..1.0) * log_spread).exp())
                .collect();
            Ok(Hessian::Diag(DiagonalOperator::new(entries)?))
        }
        HessianKind::Csr => Ok(Hessian::Csr(spd_csr(rng, n, spec.diag_spread, 0.2))),
        HessianKind::Bfgs { pairs } => {
            let h0: Vec<f64> = (0..n).map(|_| gen_range(rng, 0.5, 2.0)).collect();
            let mut op = BfgsOperator::new(h0, vec![], vec![])?;
            for _ in 0..*pairs {
                let s: Vec<f64> = (0..n).map(|_| gen_range(rng, -1.0, 1.0)).collect();
                let y: Vec<f64> = (0..n).map(|_| gen_range(rng, -2.0, 2.0)).collect();
                op = bfgs_update(&op, &s, &y)?;
            }
            Ok(Hessian::Bfgs(op))
        }
    }
}

/// Dense-assembled SPD matrix diag(d) + G'G in CSR form, with diagonal
/// entries log-uniform in [1, spread]. Used directly by preconditioner
/// studies and as a symmetric CSR Hessian.
pub fn spd_csr(rng: &mut ChaCha8Rng, n: usize, spread: f64, density: f64) -> CsrMatrix {
    let log_spread = spread.ln();
    let d: Vec<f64> = (0..n)
        .map(|_| (rng.gen_range(0.0..1.0) * log_spread).exp())
        .collect();
    let mut g = vec![0.0; n * n];
    for v in g.iter_mut() {
        if rng.gen_range(0.0..1.0) < density {
            *v = gen_range(rng, -1.0, 1.0);
        }
    }
    // M[i][j] = sum_k g[k][i] g[k][j]; commutative products keep the
    // assembly exactly symmetric
    let mut offsets = vec![0usize];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += g[k * n + i] * g[k * n + j];
            }
            if i == j {
                acc += d[i];
            }
            if acc != 0.0 {
                cols.push(j);
                vals.push(acc);
            }
        }
        offsets.push(cols.len());
    }
    CsrMatrix::new(n, n, offsets, cols, vals).expect("generated CSR is valid")
}

/// Ill-conditioned SPD test matrix with diagonal spread >= `spread`.
pub fn ill_conditioned_spd(seed: u64, n: usize, spread: f64) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    spd_csr(&mut rng, n, spread, 0.1)
}

/// Generate a convex QP shaped by the spec. Bounds are placed around a
/// random interior center so the feasible region has nonempty interior.
pub fn generate(spec: &GeneratorSpec) -> Result<QpProblem> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, m) = (spec.n, spec.m);

    let hessian = gen_hessian(spec, &mut rng)?;
    let linear_term: Vec<f64> = (0..n).map(|_| gen_range(&mut rng, -1.0, 1.0)).collect();

    let constraints = if m == 0 {
        CsrMatrix::empty(n)
    } else {
        let per_row = ((spec.density * n as f64).round() as usize).clamp(1, n);
        let mut offsets = vec![0usize];
        let mut cols = Vec::with_capacity(m * per_row);
        let mut vals = Vec::with_capacity(m * per_row);
        for _ in 0..m {
            let mut idx = sample(&mut rng, n, per_row).into_vec();
            idx.sort_unstable();
            for j in idx {
                cols.push(j);
                let v = if spec.nonneg_constraints {
                    gen_range(&mut rng, 0.1, 1.0)
                } else {
                    gen_range(&mut rng, -1.0, 1.0)
                };
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        CsrMatrix::new(m, n, offsets, cols, vals)?
    };

    let center: Vec<f64> = (0..n).map(|_| gen_range(&mut rng, -1.0, 1.0)).collect();
    let mut a_center = vec![0.0; m];
    constraints.apply(&center, &mut a_center);

    let mut var_lower = Vec::with_capacity(n);
    let mut var_upper = Vec::with_capacity(n);
    let mut lin_lower = Vec::with_capacity(m);
    let mut lin_upper = Vec::with_capacity(m);

    match &spec.bounds {
        BoundPattern::TwoSided => {
            for &c in &center {
                var_lower.push(c - gen_range(&mut rng, 0.5, 1.5));
                var_upper.push(c + gen_range(&mut rng, 0.5, 1.5));
            }
            for &ac in &a_center {
                lin_lower.push(ac - gen_range(&mut rng, 0.5, 1.5));
                lin_upper.push(ac + gen_range(&mut rng, 0.5, 1.5));
            }
        }
        BoundPattern::LowerOnly => {
            for &c in &center {
                var_lower.push(c - gen_range(&mut rng, 0.5, 1.5));
                var_upper.push(f64::INFINITY);
            }
            for &ac in &a_center {
                lin_lower.push(ac - gen_range(&mut rng, 0.5, 1.5));
                lin_upper.push(f64::INFINITY);
            }
        }
        BoundPattern::Mixed { infinite_fraction } => {
            let frac = *infinite_fraction;
            for &c in &center {
                let keep_l = gen_range(&mut rng, 0.0, 1.0) >= frac;
                let keep_u = gen_range(&mut rng, 0.0, 1.0) >= frac;
                var_lower.push(if keep_l {
                    c - gen_range(&mut rng, 0.5, 1.5)
                } else {
                    f64::NEG_INFINITY
                });
                var_upper.push(if keep_u {
                    c + gen_range(&mut rng, 0.5, 1.5)
                } else {
                    f64::INFINITY
                });
            }
            for &ac in &a_center {
                let keep_l = gen_range(&mut rng, 0.0, 1.0) >= frac;
                let keep_u = gen_range(&mut rng, 0.0, 1.0) >= frac;
                lin_lower.push(if keep_l {
                    ac - gen_range(&mut rng, 0.5, 1.5)
                } else {
                    f64::NEG_INFINITY
                });
                lin_upper.push(if keep_u {
                    ac + gen_range(&mut rng, 0.5, 1.5)
                } else {
                    f64::INFINITY
                });
            }
            // at least one finite bound must exist
            if var_lower.iter().all(|v| !v.is_finite())
                && var_upper.iter().all(|v| !v.is_finite())
                && lin_lower.iter().all(|v| !v.is_finite())
                && lin_upper.iter().all(|v| !v.is_finite())
            {
                var_lower[0] = center[0] - 1.0;
            }
        }
        BoundPattern::OneSidedSplit { lower_fraction } => {
            for &c in &center {
                var_lower.push(c - gen_range(&mut rng, 0.5, 1.5));
                var_upper.push(c + gen_range(&mut rng, 0.5, 1.5));
            }
            for &ac in &a_center {
                if gen_range(&mut rng, 0.0, 1.0) < *lower_fraction {
                    lin_lower.push(ac - gen_range(&mut rng, 0.5, 1.5));
                    lin_upper.push(f64::INFINITY);
                } else {
                    lin_lower.push(f64::NEG_INFINITY);
                    lin_upper.push(ac + gen_range(&mut rng, 0.5, 1.5));
                }
            }
        }
    }

    QpProblem::new(
        hessian,
        linear_term,
        constraints,
        lin_lower,
        lin_upper,
        var_lower,
        var_upper,
    )
}
