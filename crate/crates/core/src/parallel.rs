//! Fork-join execution of the Newton methods.
//!
//! The variables are split into one contiguous chunk per worker. Each Newton
//! iteration maps every chunk to its partial sums (applying the chunk-local
//! fixing first), reduces them with a fixed pairwise tree and performs the
//! scalar multiplier update once. Results are therefore reproducible for a
//! given worker count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::chunk::{split_ranges, ChunkState, ChunkedSweeper, JacobiSweeper, Sweeper};
use crate::error::{CqkError, Result};
use crate::kernel::SimplexView;
use crate::newton::{finish, run_newton, SolveOutcome, SolverOptions, Status};
use crate::problem::{check_simplex, CqkInstance};
use crate::real::Real;
use crate::simplex::{init_impl, run_simplex_newton, simplex_solution, InitResult};

/// Shared thread pool with exactly `workers` threads, or `None` for one worker.
pub fn worker_pool(workers: usize) -> Option<Arc<ThreadPool>> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();
    if workers <= 1 {
        return None;
    }
    let mut pools = POOLS
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    let pool = pools.entry(workers).or_insert_with(|| {
        Arc::new(
            ThreadPoolBuilder::new()
                .num_threads(workers)
                .thread_name(|i| format!("cqk-worker-{i}"))
                .build()
                .expect("failed to start worker threads"),
        )
    });
    Some(pool.clone())
}

fn check_workers(workers: usize) -> Result<()> {
    if workers == 0 {
        Err(CqkError::ContractViolation("workers must be at least 1"))
    } else {
        Ok(())
    }
}

fn map_ranges<R: Send>(
    pool: &Option<Arc<ThreadPool>>,
    ranges: &[std::ops::Range<usize>],
    f: impl Fn(std::ops::Range<usize>) -> R + Sync + Send,
) -> Vec<R> {
    match pool {
        Some(p) if ranges.len() > 1 => p.install(|| ranges.par_iter().cloned().map(&f).collect()),
        _ => ranges.iter().cloned().map(f).collect(),
    }
}

fn pair_sum<T: Real>(mut v: Vec<(T, T)>) -> (T, T) {
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => (a.0 + b.0, a.1 + b.1),
                None => a,
            });
        }
        v = next;
    }
    v.pop().unwrap_or((T::zero(), T::zero()))
}

fn parallel_initial_multiplier<T: Real>(
    inst: &CqkInstance<T>,
    xbar: Option<&[T]>,
    pool: &Option<Arc<ThreadPool>>,
    ranges: &[std::ops::Range<usize>],
) -> Result<T> {
    if pool.is_none() {
        return inst.initial_multiplier(xbar);
    }
    if let Some(xb) = xbar {
        if xb.len() != inst.len() {
            return Err(CqkError::DimensionMismatch {
                expected: inst.len(),
                found: xb.len(),
            });
        }
    }
    let (s, q) = pair_sum(map_ranges(pool, ranges, |r| inst.multiplier_sums(r, xbar)));
    if q > T::zero() {
        return Ok((inst.r() - s) / q);
    }
    let (s, q) = pair_sum(map_ranges(pool, ranges, |r| inst.multiplier_sums(r, None)));
    Ok((inst.r() - s) / q)
}

/// Knapsack solve with one chunk per worker and chunk-local variable fixing.
pub fn par_solve_cqk<T: Real>(
    inst: &CqkInstance<T>,
    opts: &SolverOptions<T>,
    workers: usize,
    xbar: Option<&[T]>,
) -> Result<SolveOutcome<T>> {
    check_workers(workers)?;
    opts.check()?;
    let pool = worker_pool(workers);
    let ranges = split_ranges(inst.len(), workers);
    let lambda0 = parallel_initial_multiplier(inst, xbar, &pool, &ranges)?;
    let chunks = ranges.into_iter().map(ChunkState::from_range).collect();
    let mut sw = ChunkedSweeper::new(inst, chunks, pool, false);
    let run = run_newton(&mut sw, inst.r(), lambda0, opts, None)?;
    let fixed = sw.fixed_count();
    let mut out = finish(inst, run, 0, opts.output);
    out.fixed_count = fixed;
    Ok(out)
}

/// Fixing-free solve: every sweep maps all variables at the shared
/// multiplier and reduces, and the start is the all-variables formula.
pub fn jacobi_solve<T: Real>(
    inst: &CqkInstance<T>,
    opts: &SolverOptions<T>,
    workers: usize,
) -> Result<SolveOutcome<T>> {
    check_workers(workers)?;
    opts.check()?;
    let pool = worker_pool(workers);
    let ranges = split_ranges(inst.len(), workers);
    let lambda0 = parallel_initial_multiplier(inst, None, &pool, &ranges)?;
    let mut sw = JacobiSweeper::new(inst, ranges, pool);
    let opts = opts.without_fixing();
    let run = run_newton(&mut sw, inst.r(), lambda0, &opts, None)?;
    Ok(finish(inst, run, 0, opts.output))
}

fn chunk_inits<T: Real>(
    y: &[T],
    r: T,
    pool: &Option<Arc<ThreadPool>>,
    ranges: &[std::ops::Range<usize>],
) -> Vec<InitResult<T>> {
    map_ranges(pool, ranges, |range| init_impl(y, r, range, None, false))
}

fn merge_inits<T: Real>(r: T, parts: &[InitResult<T>]) -> InitResult<T> {
    let (sum, count) = pair_sum(
        parts
            .iter()
            .map(|p| (p.free_sum, T::lit(p.free.len() as f64)))
            .collect(),
    );
    InitResult {
        lambda0: (r - sum) / count,
        free: parts.iter().flat_map(|p| p.free.iter().copied()).collect(),
        undecided: Vec::new(),
        fixed: parts.iter().flat_map(|p| p.fixed.iter().copied()).collect(),
        free_sum: sum,
    }
}

/// Runs the Gauss-Seidel initializer independently on each worker's chunk
/// and combines the candidate sets. A variable fixed in a chunk is fixed in
/// the full problem, so the combined multiplier still bounds the root from
/// above.
pub fn par_simplex_init<T: Real>(y: &[T], r: T, workers: usize) -> Result<InitResult<T>> {
    check_workers(workers)?;
    check_simplex(y, r)?;
    let pool = worker_pool(workers);
    let ranges = split_ranges(y.len(), workers);
    if ranges.len() == 1 {
        return Ok(init_impl(y, r, 0..y.len(), None, false));
    }
    Ok(merge_inits(r, &chunk_inits(y, r, &pool, &ranges)))
}

/// Parallel simplex projection: chunked initializer followed by the
/// specialized Newton iteration with chunk-local fixing.
pub fn par_project_simplex<T: Real>(
    y: &[T],
    r: T,
    opts: &SolverOptions<T>,
    workers: usize,
) -> Result<SolveOutcome<T>> {
    check_workers(workers)?;
    check_simplex(y, r)?;
    opts.check()?;
    let pool = worker_pool(workers);
    let ranges = split_ranges(y.len(), workers);
    let parts = chunk_inits(y, r, &pool, &ranges);
    let (lambda0, init_fixed) = if parts.len() == 1 {
        (parts[0].lambda0, parts[0].fixed.len())
    } else {
        let m = merge_inits(r, &parts);
        (m.lambda0, m.fixed.len())
    };
    let chunks: Vec<ChunkState<T>> = if opts.variable_fixing {
        parts
            .into_iter()
            .map(|p| ChunkState::new(p.free))
            .collect()
    } else {
        ranges.into_iter().map(ChunkState::from_range).collect()
    };
    let view = SimplexView { y };
    let mut sw = ChunkedSweeper::new(&view, chunks, pool, false);
    let (lambda, iterations, phi_evals, stop) =
        run_simplex_newton(&mut sw, r, lambda0, opts, None)?;
    let fixed_count = sw.fixed_count() + if opts.variable_fixing { init_fixed } else { 0 };
    Ok(SolveOutcome {
        status: Status::Solved,
        lambda,
        x: Some(simplex_solution(y, sw.chunks(), lambda, opts.output)),
        iterations,
        phi_evals,
        fixed_count,
        stop,
    })
}

/// Fixing-free simplex projection started from `(r − Σy)/n`.
pub fn jacobi_project_simplex<T: Real>(
    y: &[T],
    r: T,
    opts: &SolverOptions<T>,
    workers: usize,
) -> Result<SolveOutcome<T>> {
    check_workers(workers)?;
    check_simplex(y, r)?;
    opts.check()?;
    let pool = worker_pool(workers);
    let ranges = split_ranges(y.len(), workers);
    let sums = map_ranges(&pool, &ranges, |rg| (y[rg].iter().copied().sum::<T>(), T::zero()));
    let lambda0 = (r - pair_sum(sums).0) / T::lit(y.len() as f64);
    let view = SimplexView { y };
    let mut sw = JacobiSweeper::new(&view, ranges.clone(), pool.clone());
    let opts = opts.without_fixing();
    let run = run_newton(&mut sw, r, lambda0, &opts, None)?;
    let lambda = run.lambda;
    let chunks: Vec<ChunkState<T>> = ranges.into_iter().map(ChunkState::from_range).collect();
    Ok(SolveOutcome {
        status: Status::Solved,
        lambda,
        x: Some(simplex_solution(y, &chunks, lambda, opts.output)),
        iterations: run.iterations,
        phi_evals: run.phi_evals,
        fixed_count: 0,
        stop: run.stop,
    })
}
