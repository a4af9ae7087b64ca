#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use cqk::bench::{run_bench, write_csv, BenchConfig, Budget, Precision, Suite, Variant};
use cqk::instances::{gen_blobs, gen_cqk, gen_simplex, gen_sparse_ls, Family, GeneratorSpec};
use cqk::io::{read_path, read_vector, write_path, write_vector, Format, InstanceFile};
use cqk::spg::{build_basis_pursuit_from, build_svm_dual_with, spg_solve, SpgResult, SvmProjector};
use cqk::{
    condat_multiplier, jacobi_project_simplex, jacobi_solve, newton_project_simplex, par_project_simplex,
    par_solve_cqk, solve_cqk, CqkError, CqkInstance, OutputKind, Real, Solution, SolverOptions, Status,
};

#[derive(Parser)]
#[command(name = "cqk", version, about = "Continuous quadratic knapsack and simplex projection solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Solve an instance and report the multiplier and iteration counts.
    Solve(SolveArgs),
    /// Run a benchmark suite and emit CSV.
    Bench(BenchArgs),
    /// Run projected gradient on an application problem and emit per-iteration CSV.
    Spg(SpgArgs),
}

#[derive(Args)]
struct Source {
    #[arg(long, value_name = "FILE", conflicts_with_all = ["family", "n", "seed"])]
    instance: Option<PathBuf>,
    #[arg(long, required_unless_present = "instance")]
    family: Option<Family>,
    #[arg(long, required_unless_present = "instance")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Level of generated simplex instances.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long)]
    binary: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Dense,
    Sparse,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "newton")]
    variant: Variant,
    #[arg(long, env = "CQK_WORKERS")]
    workers: Option<usize>,
    /// Estimate of the solution used to pick the starting multiplier.
    #[arg(long, value_name = "FILE")]
    warm: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dense")]
    output: OutputArg,
    #[arg(long, default_value = "64")]
    precision: Precision,
    /// Write the solution here (`i value` lines for sparse output).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    suite: Suite,
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    instances: usize,
    /// Repetition budget per instance as `RUNS:SECONDS`.
    #[arg(long, default_value = "10000:2", value_parser = parse_budget)]
    reps_budget: Budget,
    /// The first variant is the base for relative performance.
    #[arg(long, value_delimiter = ',', default_value = "newton")]
    variants: Vec<Variant>,
    #[arg(long, value_delimiter = ',', env = "CQK_WORKERS")]
    workers: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', default_value = "64")]
    precision: Vec<Precision>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum App {
    Svm,
    Bp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct SpgArgs {
    #[arg(long, value_enum)]
    app: App,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Kernel width (svm), default `1/dim`.
    #[arg(long)]
    gamma: Option<f64>,
    /// Box bound (svm).
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    /// ℓ1 radius (bp), default the ℓ1 norm of the planted solution.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, value_enum, default_value = "on")]
    warm: Switch,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, env = "CQK_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Point dimension (svm).
    #[arg(long, default_value_t = 20)]
    dim: usize,
    /// Distance between class centers (svm).
    #[arg(long, default_value_t = 3.0)]
    separation: f64,
    /// Rows of the sensing matrix (bp), default `0.08 n`.
    #[arg(long)]
    m: Option<usize>,
    /// Nonzeros of the planted solution (bp), default `0.003 n`.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1e-2)]
    density: f64,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

fn parse_budget(s: &str) -> Result<Budget, String> {
    let (runs, secs) = s.split_once(':').ok_or("expected RUNS:SECONDS")?;
    let max_runs: usize = runs.parse().map_err(|e| format!("runs: {e}"))?;
    let secs: f64 = secs.parse().map_err(|e| format!("seconds: {e}"))?;
    if max_runs == 0 || !(secs > 0.0) {
        return Err("budget must be positive".into());
    }
    Ok(Budget {
        max_runs,
        max_time: Duration::from_secs_f64(secs),
    })
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn gen(args: GenArgs) -> cqk::Result<()> {
    let spec = GeneratorSpec::new(args.family, args.n, args.seed);
    let inst: InstanceFile = if args.family.is_cqk() {
        gen_cqk(&spec)?.into()
    } else {
        gen_simplex(&spec, args.radius)?.into()
    };
    let format = if args.binary { Format::Binary } else { Format::Text };
    write_path(&inst, &args.out, format)
}

struct Report<T> {
    status: Status,
    lambda: T,
    iterations: usize,
    phi_evals: usize,
    x: Option<Solution<T>>,
    time: Duration,
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, Duration) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed())
}

fn solve_knapsack<T: Real>(
    inst: &CqkInstance<f64>,
    args: &SolveArgs,
    opts: &SolverOptions<T>,
    warm: Option<&[T]>,
    workers: usize,
) -> cqk::Result<Report<T>> {
    let inst = inst.cast::<T>()?;
    let (out, time) = match args.variant {
        Variant::Newton => timed(|| solve_cqk(&inst, opts, warm)),
        Variant::NewtonNofix => timed(|| solve_cqk(&inst, &opts.without_fixing(), warm)),
        Variant::Jacobi => timed(|| jacobi_solve(&inst, opts, workers)),
        Variant::Parallel => timed(|| par_solve_cqk(&inst, opts, workers, warm)),
        v => return Err(CqkError::Parse(format!("variant `{v}` does not apply to knapsack instances"))),
    };
    let out = out?;
    Ok(Report {
        status: out.status,
        lambda: out.lambda,
        iterations: out.iterations,
        phi_evals: out.phi_evals,
        x: out.x,
        time,
    })
}

fn solve_simplex<T: Real>(
    y: &[f64],
    r: f64,
    args: &SolveArgs,
    opts: &SolverOptions<T>,
    warm: Option<&[T]>,
    workers: usize,
) -> cqk::Result<Report<T>> {
    let y: Vec<T> = y.iter().map(|&v| T::lit(v)).collect();
    let r = T::lit(r);
    if args.variant == Variant::Condat {
        let (lambda, time) = timed(|| condat_multiplier(&y, r));
        let lambda = lambda?;
        let x: Vec<T> = y.iter().map(|&v| (v + lambda).max(T::zero())).collect();
        let x = match opts.output {
            OutputKind::Dense => Solution::Dense(x),
            OutputKind::Sparse => Solution::Sparse {
                n: x.len(),
                entries: x.iter().copied().enumerate().filter(|&(_, v)| v > T::zero()).collect(),
            },
        };
        return Ok(Report {
            status: Status::Solved,
            lambda,
            iterations: 0,
            phi_evals: 0,
            x: Some(x),
            time,
        });
    }
    let (out, time) = match args.variant {
        Variant::Newton => timed(|| newton_project_simplex(&y, r, opts, warm)),
        Variant::NewtonNofix => timed(|| newton_project_simplex(&y, r, &opts.without_fixing(), warm)),
        Variant::Jacobi => timed(|| jacobi_project_simplex(&y, r, opts, workers)),
        Variant::Parallel => timed(|| par_project_simplex(&y, r, opts, workers)),
        v => return Err(CqkError::Parse(format!("variant `{v}` is not a solve variant"))),
    };
    let out = out?;
    Ok(Report {
        status: out.status,
        lambda: out.lambda,
        iterations: out.iterations,
        phi_evals: out.phi_evals,
        x: out.x,
        time,
    })
}

fn run_solve<T: Real>(inst: &InstanceFile, args: &SolveArgs) -> cqk::Result<Status> {
    let workers = args.workers.unwrap_or_else(default_workers);
    let mut opts = SolverOptions::<T>::default();
    if let OutputArg::Sparse = args.output {
        opts = opts.sparse();
    }
    let warm: Option<Vec<T>> = match &args.warm {
        Some(p) => Some(read_vector(p)?.into_iter().map(T::lit).collect()),
        None => None,
    };
    if warm.is_some() && !matches!(args.variant, Variant::Newton | Variant::NewtonNofix | Variant::Parallel) {
        eprintln!("warning: --warm is ignored by variant `{}`", args.variant);
    }
    let report = match inst {
        InstanceFile::Cqk(c) => solve_knapsack(c, args, &opts, warm.as_deref(), workers)?,
        InstanceFile::Simplex(s) => {
            if warm.is_some() && args.variant == Variant::Parallel {
                eprintln!("warning: --warm is ignored by the parallel simplex variant");
            }
            solve_simplex(s.y(), s.r(), args, &opts, warm.as_deref(), workers)?
        }
    };
    if report.status == Status::Infeasible {
        println!("status: infeasible");
        eprintln!("infeasible");
        return Ok(Status::Infeasible);
    }
    println!("status: solved");
    println!("lambda: {:e}", report.lambda);
    println!("iterations: {}", report.iterations);
    println!("phi_evals: {}", report.phi_evals);
    println!("time_ms: {:.6}", report.time.as_secs_f64() * 1e3);
    if let (Some(path), Some(x)) = (&args.out, &report.x) {
        let mut w = BufWriter::new(File::create(path)?);
        match x {
            Solution::Dense(v) => {
                let v: Vec<f64> = v.iter().map(|e| e.to_f64_lossy()).collect();
                write_vector(&v, &mut w)?;
            }
            Solution::Sparse { entries, .. } => {
                for (i, v) in entries {
                    writeln!(w, "{i} {v}")?;
                }
            }
        }
        w.flush()?;
    }
    Ok(report.status)
}

fn solve(args: SolveArgs) -> cqk::Result<Status> {
    let inst = match &args.source.instance {
        Some(p) => read_path(p)?,
        None => {
            let (family, n) = (args.source.family.unwrap(), args.source.n.unwrap());
            let spec = GeneratorSpec::new(family, n, args.source.seed);
            if family.is_cqk() {
                gen_cqk(&spec)?.into()
            } else {
                gen_simplex(&spec, args.source.radius)?.into()
            }
        }
    };
    match args.precision {
        Precision::Double => run_solve::<f64>(&inst, &args),
        Precision::Single => run_solve::<f32>(&inst, &args),
    }
}

fn bench(args: BenchArgs) -> cqk::Result<()> {
    let mut cfg = BenchConfig::new(args.suite);
    cfg.sizes = args.sizes;
    cfg.instances = args.instances;
    cfg.budget = args.reps_budget;
    cfg.workers = args.workers.unwrap_or_else(|| vec![default_workers()]);
    cfg.precisions = args.precision;
    cfg.seed = args.seed;
    cfg.radius = args.radius;
    for v in args.variants.iter().filter(|v| !v.supports(args.suite)) {
        eprintln!("warning: variant `{v}` does not apply to suite `{}`", args.suite);
    }
    cfg.variants = args.variants;
    let rows = run_bench(&cfg)?;
    write_csv(&rows, output(args.csv.as_ref())?)
}

fn spg(args: SpgArgs) -> cqk::Result<()> {
    let warm = args.warm == Switch::On;
    let res: SpgResult = match args.app {
        App::Svm => {
            let (points, labels) = gen_blobs(args.n, args.dim, args.separation, args.seed)?;
            let gamma = args.gamma.unwrap_or(1.0 / args.dim as f64);
            let mut proj = SvmProjector::new(labels.clone(), args.c);
            proj.workers = args.workers;
            let mut p = build_svm_dual_with(&points, &labels, gamma, proj)?.with_warm_start(warm);
            spg_solve(&mut p, &vec![0.0; args.n], args.tol, args.max_iter)?
        }
        App::Bp => {
            let m = args.m.unwrap_or((args.n * 8 / 100).max(1));
            let k = args.k.unwrap_or((args.n * 3 / 1000).max(1));
            let ls = gen_sparse_ls(m, args.n, args.density, k, args.seed)?;
            let radius = args
                .radius
                .unwrap_or_else(|| ls.x_true.iter().map(|v| v.abs()).sum());
            let mut p = build_basis_pursuit_from(&ls, radius)?.with_warm_start(warm);
            spg_solve(&mut p, &vec![0.0; args.n], args.tol, args.max_iter)?
        }
    };
    let mut w = csv::Writer::from_writer(output(args.csv.as_ref())?);
    w.write_record(["iter", "inner_iterations", "warm", "objective", "reference", "step", "pg_norm"])
        .map_err(|e| CqkError::Parse(e.to_string()))?;
    for (i, h) in res.history.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            h.inner_iterations.to_string(),
            h.warm.to_string(),
            h.objective.to_string(),
            h.reference.to_string(),
            h.step.to_string(),
            h.pg_norm.to_string(),
        ])
        .map_err(|e| CqkError::Parse(e.to_string()))?;
    }
    w.flush()?;
    eprintln!(
        "{} after {} iterations, projected gradient norm {:e}",
        if res.converged { "converged" } else { "stopped" },
        res.iterations,
        res.pg_norm
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a).map(|_| Status::Solved),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a).map(|_| Status::Solved),
        Command::Spg(a) => spg(a).map(|_| Status::Solved),
    };
    match result {
        Ok(Status::Solved) => ExitCode::SUCCESS,
        Ok(Status::Infeasible) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
