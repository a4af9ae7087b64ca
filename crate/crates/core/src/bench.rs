//! Benchmark protocol: each instance is solved once untimed, then repeatedly
//! until a run or time budget is exhausted; its time is the minimum over the
//! repetitions and a cell reports the median of those minima.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{CqkError, Result};
use crate::instances::{gen_blobs, gen_cqk, gen_simplex_y, gen_sparse_ls, Family, GeneratorSpec};
use crate::newton::{solve_cqk, SolverOptions};
use crate::parallel::{jacobi_project_simplex, jacobi_solve, par_project_simplex, par_solve_cqk};
use crate::problem::CqkInstance;
use crate::real::Real;
use crate::simplex::{condat_multiplier, newton_project_simplex, project_l1_warm};
use crate::spg::{build_basis_pursuit, build_svm_dual, spg_solve};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_runs: usize,
    pub max_time: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_runs: 10_000,
            max_time: Duration::from_secs(2),
        }
    }
}

/// Minimum wall time of `f` under `budget`, after one untimed call. Returns
/// the minimum and the value produced by the untimed call.
pub fn min_runtime<R>(budget: Budget, mut f: impl FnMut() -> R) -> (Duration, R) {
    let first = f();
    let start = Instant::now();
    let mut best = Duration::MAX;
    let mut runs = 0;
    while runs < budget.max_runs.max(1) && (runs == 0 || start.elapsed() < budget.max_time) {
        let t = Instant::now();
        black_box(f());
        best = best.min(t.elapsed());
        runs += 1;
    }
    (best, first)
}

pub fn median(v: &mut [f64]) -> f64 {
    assert!(!v.is_empty());
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

macro_rules! named_enum {
    ($name:ident { $($var:ident => $s:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name { $($var),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$var),+];

            pub fn name(self) -> &'static str {
                match self { $($name::$var => $s),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                $name::ALL.iter().copied().find(|v| v.name() == s).ok_or_else(|| {
                    let names: Vec<_> = $name::ALL.iter().map(|v| v.name()).collect();
                    format!("unknown value `{s}` (expected one of {})", names.join(", "))
                })
            }
        }
    };
}

named_enum!(Suite {
    Cqk => "cqk",
    Simplex => "simplex",
    L1 => "l1",
    Svm => "svm",
    Bp => "bp",
});

named_enum!(Variant {
    Newton => "newton",
    NewtonNofix => "newton-nofix",
    NewtonWarm => "newton-warm",
    Condat => "condat",
    Jacobi => "jacobi",
    Parallel => "parallel",
});

named_enum!(Precision {
    Single => "32",
    Double => "64",
});

impl Variant {
    /// Whether the variant's worker count matters.
    pub fn is_parallel(self) -> bool {
        matches!(self, Variant::Jacobi | Variant::Parallel)
    }

    pub fn supports(self, suite: Suite) -> bool {
        use Variant::*;
        match suite {
            Suite::Cqk => matches!(self, Newton | NewtonNofix | Jacobi | Parallel),
            Suite::Simplex => matches!(self, Newton | NewtonNofix | Condat | Jacobi | Parallel),
            Suite::L1 => matches!(self, Newton | NewtonNofix | Condat),
            Suite::Svm | Suite::Bp => matches!(self, Newton | NewtonWarm),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub suite: Suite,
    pub sizes: Vec<usize>,
    pub instances: usize,
    pub budget: Budget,
    pub variants: Vec<Variant>,
    pub workers: Vec<usize>,
    pub precisions: Vec<Precision>,
    /// Seeds are `seed + k` for instance `k`.
    pub seed: u64,
    /// Simplex level or ℓ1 radius for the projection suites.
    pub radius: f64,
}

impl BenchConfig {
    pub fn new(suite: Suite) -> Self {
        BenchConfig {
            suite,
            sizes: vec![1000],
            instances: 20,
            budget: Budget::default(),
            variants: vec![Variant::Newton],
            workers: vec![1],
            precisions: vec![Precision::Double],
            seed: 0,
            radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub suite: String,
    pub family: String,
    pub n: usize,
    pub variant: String,
    pub workers: usize,
    pub precision: String,
    pub median_min_ms: f64,
    /// Mean multiplier updates per solve (per projection for SPG suites).
    pub mean_iters: f64,
    /// Median time of the base variant over this row's median time.
    pub relperf_vs_base: f64,
}

/// One timed configuration of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Config {
    variant: Variant,
    workers: usize,
}

fn configs(cfg: &BenchConfig) -> Vec<Config> {
    let mut out = Vec::new();
    for &variant in &cfg.variants {
        if !variant.supports(cfg.suite) {
            continue;
        }
        if variant.is_parallel() {
            for &workers in &cfg.workers {
                out.push(Config { variant, workers });
            }
        } else {
            out.push(Config { variant, workers: 1 });
        }
    }
    out
}

fn time_cqk<T: Real>(inst: &CqkInstance<f64>, c: Config, budget: Budget) -> Result<(Duration, usize)> {
    let inst = inst.cast::<T>()?;
    let opts = SolverOptions::<T>::default();
    let nofix = opts.without_fixing();
    let (t, it) = min_runtime(budget, || -> Result<usize> {
        let out = match c.variant {
            Variant::Newton => solve_cqk(&inst, &opts, None)?,
            Variant::NewtonNofix => solve_cqk(&inst, &nofix, None)?,
            Variant::Jacobi => jacobi_solve(&inst, &opts, c.workers)?,
            Variant::Parallel => par_solve_cqk(&inst, &opts, c.workers, None)?,
            _ => return Err(CqkError::ContractViolation("variant not available for this suite")),
        };
        Ok(out.iterations)
    });
    Ok((t, it?))
}

fn time_simplex<T: Real>(y: &[f64], r: f64, c: Config, budget: Budget) -> Result<(Duration, usize)> {
    let y: Vec<T> = y.iter().map(|&v| T::lit(v)).collect();
    let r = T::lit(r);
    let opts = SolverOptions::<T>::default();
    let nofix = opts.without_fixing();
    let (t, it) = min_runtime(budget, || -> Result<usize> {
        Ok(match c.variant {
            Variant::Newton => newton_project_simplex(&y, r, &opts, None)?.iterations,
            Variant::NewtonNofix => newton_project_simplex(&y, r, &nofix, None)?.iterations,
            Variant::Condat => {
                let lambda = condat_multiplier(&y, r)?;
                let x: Vec<T> = y.iter().map(|&v| (v + lambda).max(T::zero())).collect();
                black_box(x);
                0
            }
            Variant::Jacobi => jacobi_project_simplex(&y, r, &opts, c.workers)?.iterations,
            Variant::Parallel => par_project_simplex(&y, r, &opts, c.workers)?.iterations,
            _ => return Err(CqkError::ContractViolation("variant not available for this suite")),
        })
    });
    Ok((t, it?))
}

fn time_l1(y: &[f64], r: f64, c: Config, budget: Budget) -> Result<(Duration, usize)> {
    let opts = SolverOptions::default();
    let nofix = opts.without_fixing();
    let (t, it) = min_runtime(budget, || -> Result<usize> {
        Ok(match c.variant {
            Variant::Newton => project_l1_warm(y, r, &opts, None)?.iterations,
            Variant::NewtonNofix => project_l1_warm(y, r, &nofix, None)?.iterations,
            Variant::Condat => {
                let abs: Vec<f64> = y.iter().map(|v| v.abs()).collect();
                let norm: f64 = abs.iter().sum();
                let x: Vec<f64> = if norm <= r {
                    y.to_vec()
                } else {
                    let lambda = condat_multiplier(&abs, r)?;
                    y.iter()
                        .map(|&v| v.signum() * (v.abs() + lambda).max(0.0))
                        .collect()
                };
                black_box(x);
                0
            }
            _ => return Err(CqkError::ContractViolation("variant not available for this suite")),
        })
    });
    Ok((t, it?))
}

/// Mean inner iterations per projection of one SPG run.
fn spg_inner_mean(history: &[crate::spg::SpgIteration]) -> f64 {
    if history.is_empty() {
        return 0.0;
    }
    history.iter().map(|h| h.inner_iterations as f64).sum::<f64>() / history.len() as f64
}

const SPG_TOL: f64 = 1e-4;
const SPG_MAX_ITER: usize = 10_000;

fn time_svm(n: usize, seed: u64, c: Config, budget: Budget) -> Result<(Duration, f64)> {
    let (points, labels) = gen_blobs(n, 20, 3.0, seed)?;
    let warm = c.variant == Variant::NewtonWarm;
    let (t, it) = min_runtime(budget, || -> Result<f64> {
        let mut p = build_svm_dual(&points, &labels, 1.0 / 20.0, 1.0)?.with_warm_start(warm);
        let res = spg_solve(&mut p, &vec![0.0; n], SPG_TOL, SPG_MAX_ITER)?;
        Ok(spg_inner_mean(&res.history))
    });
    Ok((t, it?))
}

fn time_bp(n: usize, seed: u64, c: Config, budget: Budget) -> Result<(Duration, f64)> {
    let m = (n / 10).max(1);
    let k = (m / 25).max(1);
    let ls = gen_sparse_ls(m, n, 1e-2_f64.max(1.0 / m as f64), k, seed)?;
    let radius: f64 = ls.x_true.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let warm = c.variant == Variant::NewtonWarm;
    let (t, it) = min_runtime(budget, || -> Result<f64> {
        let mut p = build_basis_pursuit(&ls.a, &ls.b, radius)?.with_warm_start(warm);
        let res = spg_solve(&mut p, &vec![0.0; n], SPG_TOL, SPG_MAX_ITER)?;
        Ok(spg_inner_mean(&res.history))
    });
    Ok((t, it?))
}

/// Row label and generator family of each suite.
fn families(suite: Suite) -> Vec<(&'static str, Option<Family>)> {
    match suite {
        Suite::Cqk => Family::CQK.iter().map(|&f| (f.name(), Some(f))).collect(),
        Suite::Simplex | Suite::L1 => Family::SIMPLEX.iter().map(|&f| (f.name(), Some(f))).collect(),
        Suite::Svm => vec![("blobs", None)],
        Suite::Bp => vec![("sparse-ls", None)],
    }
}

/// Runs every `(family, size, precision, variant, workers)` cell of a suite.
/// Variants that do not apply to the suite are skipped.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.instances == 0 {
        return Err(CqkError::ContractViolation("need at least one instance per cell"));
    }
    let confs = configs(cfg);
    let mut rows = Vec::new();
    for (family, generator) in families(cfg.suite) {
        for &n in &cfg.sizes {
            for &prec in &cfg.precisions {
                if prec == Precision::Single && !matches!(cfg.suite, Suite::Cqk | Suite::Simplex) {
                    continue;
                }
                let mut times: Vec<Vec<f64>> = vec![Vec::new(); confs.len()];
                let mut iters: Vec<f64> = vec![0.0; confs.len()];
                for k in 0..cfg.instances {
                    let seed = cfg.seed + k as u64;
                    let cqk = if cfg.suite == Suite::Cqk {
                        Some(gen_cqk(&GeneratorSpec::new(generator.unwrap(), n, seed))?)
                    } else {
                        None
                    };
                    let y = if matches!(cfg.suite, Suite::Simplex | Suite::L1) {
                        Some(gen_simplex_y(&GeneratorSpec::new(generator.unwrap(), n, seed))?)
                    } else {
                        None
                    };
                    for (ci, &c) in confs.iter().enumerate() {
                        let (t, it) = match cfg.suite {
                            Suite::Cqk => {
                                let inst = cqk.as_ref().unwrap();
                                let (t, it) = match prec {
                                    Precision::Double => time_cqk::<f64>(inst, c, cfg.budget)?,
                                    Precision::Single => time_cqk::<f32>(inst, c, cfg.budget)?,
                                };
                                (t, it as f64)
                            }
                            Suite::Simplex => {
                                let y = y.as_deref().unwrap();
                                let (t, it) = match prec {
                                    Precision::Double => time_simplex::<f64>(y, cfg.radius, c, cfg.budget)?,
                                    Precision::Single => time_simplex::<f32>(y, cfg.radius, c, cfg.budget)?,
                                };
                                (t, it as f64)
                            }
                            Suite::L1 => {
                                let (t, it) = time_l1(y.as_deref().unwrap(), cfg.radius, c, cfg.budget)?;
                                (t, it as f64)
                            }
                            Suite::Svm => time_svm(n, seed, c, cfg.budget)?,
                            Suite::Bp => time_bp(n, seed, c, cfg.budget)?,
                        };
                        times[ci].push(t.as_secs_f64() * 1e3);
                        iters[ci] += it;
                    }
                }
                let medians: Vec<f64> = times.iter_mut().map(|t| median(t)).collect();
                let base = medians.first().copied().unwrap_or(f64::NAN);
                for (ci, c) in confs.iter().enumerate() {
                    rows.push(BenchRow {
                        suite: cfg.suite.to_string(),
                        family: family.to_string(),
                        n,
                        variant: c.variant.to_string(),
                        workers: c.workers,
                        precision: prec.to_string(),
                        median_min_ms: medians[ci],
                        mean_iters: iters[ci] / cfg.instances as f64,
                        relperf_vs_base: base / medians[ci],
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Writes rows as CSV with a header line.
pub fn write_csv(rows: &[BenchRow], w: impl std::io::Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(|e| CqkError::Parse(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> Budget {
        Budget {
            max_runs: 3,
            max_time: Duration::from_millis(50),
        }
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn min_runtime_respects_run_budget() {
        let mut calls = 0;
        let budget = Budget {
            max_runs: 5,
            max_time: Duration::from_secs(60),
        };
        min_runtime(budget, || calls += 1);
        assert_eq!(calls, 6);
    }

    #[test]
    fn names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), *v);
        }
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), *s);
        }
    }

    #[test]
    fn csv_schema() {
        let mut cfg = BenchConfig::new(Suite::Simplex);
        cfg.sizes = vec![200];
        cfg.instances = 2;
        cfg.budget = quick();
        cfg.variants = vec![Variant::Condat, Variant::Newton, Variant::Jacobi];
        cfg.workers = vec![1, 2];
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 3 * 4);
        assert!(rows.iter().filter(|r| r.variant == "condat").all(|r| r.relperf_vs_base == 1.0));
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "suite,family,n,variant,workers,precision,median_min_ms,mean_iters,relperf_vs_base\n"
        ));
    }

    #[test]
    fn cqk_single_precision_cell() {
        let mut cfg = BenchConfig::new(Suite::Cqk);
        cfg.sizes = vec![100];
        cfg.instances = 1;
        cfg.budget = quick();
        cfg.precisions = vec![Precision::Single];
        cfg.variants = vec![Variant::Newton, Variant::Condat];
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.precision == "32" && r.variant == "newton"));
    }
}
