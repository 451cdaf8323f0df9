use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use augqp::bench::{
    self, generate, preset, preset_names, BoundPattern, GeneratorSpec, HessianKind,
};
use augqp::ipm::{ipm_solve, IpmConfig, SolveStatus};
use augqp::probio::{parse_problem, write_problem, write_solution};

const EXIT_INVALID: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Parser)]
#[command(name = "augqp", version, about = "Matrix-free interior point QP solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print or write the solution
    Solve(SolveArgs),
    /// Validate a problem file and print a summary
    Check { problem: PathBuf },
    /// Generate a synthetic problem file
    Gen(GenArgs),
    /// Run the benchmark suite
    Bench(BenchArgs),
    /// Solve a small problem with the exhaustive dense reference
    Oracle { problem: PathBuf },
}

#[derive(Args)]
struct SolveArgs {
    problem: PathBuf,
    /// write the solution here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    mu_tol: f64,
    #[arg(long, default_value_t = 0.995)]
    tau: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// fixed CG relative tolerance; default follows the barrier schedule
    #[arg(long)]
    pcg_rtol: Option<f64>,
    /// print one line per iteration to stderr
    #[arg(long)]
    trace: bool,
    /// include wall-clock timing lines in the solution output
    #[arg(long)]
    timings: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum HessianArg {
    Diag,
    Csr,
    Bfgs,
}

#[derive(Copy, Clone, ValueEnum)]
enum PatternArg {
    TwoSided,
    LowerOnly,
    Mixed,
}

#[derive(Args)]
struct GenArgs {
    /// named workload shape; overrides the shape flags below
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = 0.2)]
    density: f64,
    #[arg(long, value_enum, default_value_t = HessianArg::Diag)]
    hessian: HessianArg,
    /// curvature pairs for the quasi-Newton Hessian form
    #[arg(long, default_value_t = 4)]
    pairs: usize,
    #[arg(long, value_enum, default_value_t = PatternArg::TwoSided)]
    pattern: PatternArg,
    /// fraction of bounds left infinite under the mixed pattern
    #[arg(long, default_value_t = 0.3)]
    infinite_fraction: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(subcommand)]
    which: BenchCommand,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Oracle-verified small problems with median timings
    Smoke {
        /// write the TSV report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve time versus quasi-Newton history length
    Growth {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        iters: usize,
        #[arg(long, num_args = 1.., default_values_t = [1u64, 2, 3, 4, 5])]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_problem(path: &PathBuf) -> Result<augqp::QpProblem, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
    parse_problem(&text).map_err(|e| format!("{}: {}", path.display(), e))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {}", p.display(), e)),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn run_solve(args: SolveArgs) -> Result<u8, String> {
    let prob = read_problem(&args.problem)?;
    let mut cfg = IpmConfig {
        mu_tol: args.mu_tol,
        tau: args.tau,
        max_iterations: args.max_iter,
        ..Default::default()
    };
    cfg.pcg.rel_tol_override = args.pcg_rtol;
    let sol = match ipm_solve(&prob, &cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("solver failed: {}", e);
            return Ok(EXIT_SOLVER);
        }
    };
    if args.trace {
        for t in &sol.stats.traces {
            eprintln!(
                "iter {:3}  mu {:9.3e}  residual {:9.3e}  cg {:4}  alpha_x {:.4}  alpha_lam {:.4}",
                t.iteration, t.mu, t.residual_norm, t.cg_iterations, t.alpha_x, t.alpha_lambda
            );
        }
    }
    emit(&args.out, &write_solution(&sol, &cfg, args.timings))?;
    Ok(match sol.status {
        SolveStatus::Converged => 0,
        SolveStatus::IterationLimit => EXIT_SOLVER,
    })
}

fn run_check(path: PathBuf) -> Result<u8, String> {
    let prob = read_problem(&path)?;
    let bounded_vars = (0..prob.num_vars())
        .filter(|&j| prob.var_lower[j].is_finite() || prob.var_upper[j].is_finite())
        .count();
    println!("variables            {}", prob.num_vars());
    println!("linear constraints   {}", prob.num_lin_constraints());
    println!("constraint nonzeros  {}", prob.constraints.nnz());
    println!("bounded variables    {}", bounded_vars);
    println!("finite bound rows    {}", prob.total_bound_count());
    Ok(0)
}

fn run_gen(args: GenArgs) -> Result<u8, String> {
    let spec = match &args.preset {
        Some(name) => preset(name).ok_or_else(|| {
            format!("unknown preset {:?}; available: {}", name, preset_names().join(", "))
        })?,
        None => {
            let hessian = match args.hessian {
                HessianArg::Diag => HessianKind::Diag,
                HessianArg::Csr => HessianKind::Csr,
                HessianArg::Bfgs => HessianKind::Bfgs { pairs: args.pairs },
            };
            let mut spec = GeneratorSpec::new(args.seed, args.n, args.m, hessian);
            spec.density = args.density;
            spec.bounds = match args.pattern {
                PatternArg::TwoSided => BoundPattern::TwoSided,
                PatternArg::LowerOnly => BoundPattern::LowerOnly,
                PatternArg::Mixed => BoundPattern::Mixed {
                    infinite_fraction: args.infinite_fraction,
                },
            };
            spec
        }
    };
    let prob = generate(&spec).map_err(|e| e.to_string())?;
    fs::write(&args.out, write_problem(&prob))
        .map_err(|e| format!("{}: {}", args.out.display(), e))?;
    eprintln!(
        "wrote {} ({} variables, {} linear constraints)",
        args.out.display(),
        prob.num_vars(),
        prob.num_lin_constraints()
    );
    Ok(0)
}

fn run_bench(args: BenchArgs) -> Result<u8, String> {
    match args.which {
        BenchCommand::Smoke { out } => {
            let rows = bench::run_smoke(&IpmConfig::default()).map_err(|e| e.to_string())?;
            emit(&out, &bench::render_table(&rows))?;
            Ok(0)
        }
        BenchCommand::Growth { n, iters, seeds, out } => {
            let rep = bench::run_growth(n, iters, &seeds, &IpmConfig::default())
                .map_err(|e| e.to_string())?;
            let mut text = String::from("outer-iteration\tmedian-ms\tmedian-cg\n");
            for (i, (ms, cg)) in rep.median_ms.iter().zip(&rep.median_cg).enumerate() {
                text.push_str(&format!("{}\t{:.3}\t{:.1}\n", i + 1, ms, cg));
            }
            emit(&out, &text)?;
            Ok(0)
        }
    }
}

fn run_oracle(path: PathBuf) -> Result<u8, String> {
    let prob = read_problem(&path)?;
    let sol = bench::active_set_oracle(&prob).map_err(|e| e.to_string())?;
    println!("objective {}", sol.objective);
    print!("x");
    for v in &sol.x {
        print!(" {}", v);
    }
    println!();
    println!("active-constraints {}", sol.active.len());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Check { problem } => run_check(problem),
        Command::Gen(a) => run_gen(a),
        Command::Bench(a) => run_bench(a),
        Command::Oracle { problem } => run_oracle(problem),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(EXIT_INVALID)
        }
    }
}
