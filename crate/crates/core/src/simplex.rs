//! Projection onto the simplex `{x ≥ 0, Σx = r}` and the ℓ1-ball `‖x‖₁ ≤ r`.
//!
//! `λ_J = (r − Σ_{i∈J} yᵢ)/|J|` over any nonempty `J` bounds the optimal
//! multiplier from above, so every intermediate value of the Gauss-Seidel
//! initializer can be used to fix variables at zero.

use crate::chunk::{ChunkState, ChunkedSweeper, Fixing, Sweeper};
use crate::error::{CqkError, Result};
use crate::kernel::{DualElements, Side, SimplexView};
use crate::newton::{
    run_newton, Bracket, IterationRecord, OutputKind, Solution, SolveOutcome, SolverOptions,
    Status, StopReason,
};
use crate::problem::check_simplex;
use crate::real::Real;

/// Output of the multiplier initializer.
#[derive(Debug, Clone, PartialEq)]
pub struct InitResult<T> {
    pub lambda0: T,
    /// Indices of `J`, the candidate free set behind `lambda0`.
    pub free: Vec<usize>,
    /// Warm start only: indices outside the estimate's support that could
    /// not be fixed. They stay in the Newton sweeps.
    pub undecided: Vec<usize>,
    /// Indices proven to be zero at the solution.
    pub fixed: Vec<usize>,
    /// `Σ_{i∈J} yᵢ`
    pub free_sum: T,
}

impl<T> InitResult<T> {
    pub fn fixed_mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &i in &self.fixed {
            m[i] = true;
        }
        m
    }

    /// Variables that still take part in the Newton sweeps.
    pub fn active(&self) -> Vec<usize> {
        let mut a = Vec::with_capacity(self.free.len() + self.undecided.len());
        a.extend_from_slice(&self.free);
        a.extend_from_slice(&self.undecided);
        a
    }
}

/// Gauss-Seidel multiplier initializer over the indices `indices`.
///
/// With `xbar`, only indices where `x̄ᵢ > 0` update the multiplier; the first
/// index always seeds `J`. If no index of the support contributed, the
/// multiplier falls back to `max(r/n, −y_{i₁})`.
pub fn simplex_init_lambda<T: Real>(
    y: &[T],
    r: T,
    indices: &[usize],
    xbar: Option<&[T]>,
) -> Result<InitResult<T>> {
    if indices.is_empty() {
        return Err(CqkError::EmptyIndexSet);
    }
    check_simplex(y, r)?;
    check_xbar(y.len(), xbar)?;
    Ok(init_impl(y, r, indices.iter().copied(), xbar, false))
}

fn check_xbar<T: Real>(n: usize, xbar: Option<&[T]>) -> Result<()> {
    if let Some(xb) = xbar {
        if xb.len() != n {
            return Err(CqkError::DimensionMismatch {
                expected: n,
                found: xb.len(),
            });
        }
    }
    Ok(())
}

/// `sharp` replaces the participation test `yᵢ + λ > 0` by
/// `min(yᵢ, yᵢ + λ) > 0`, for data that are absolute values.
pub(crate) fn init_impl<T: Real>(
    y: &[T],
    r: T,
    mut indices: impl Iterator<Item = usize>,
    xbar: Option<&[T]>,
    sharp: bool,
) -> InitResult<T> {
    let zero = T::zero();
    let passes = |yi: T, lambda: T| {
        if sharp {
            yi.min(yi + lambda) > zero
        } else {
            yi + lambda > zero
        }
    };
    let in_support = |i: usize| xbar.is_none_or(|xb| xb[i] > zero);

    let mut fixed = Vec::new();
    let mut undecided = Vec::new();
    let mut spill: Vec<usize> = Vec::new();

    let first = indices.next().expect("nonempty index set");
    let mut free = vec![first];
    let mut sum = y[first];
    let mut lambda = r - sum;
    let mut contributed = in_support(first);

    for i in indices {
        let yi = y[i];
        if !passes(yi, lambda) {
            fixed.push(i);
            continue;
        }
        if !in_support(i) {
            undecided.push(i);
            continue;
        }
        contributed = true;
        let cand = (r - sum - yi) / T::lit((free.len() + 1) as f64);
        if cand < r - yi {
            free.push(i);
            sum = sum + yi;
            lambda = cand;
        } else {
            spill.append(&mut free);
            free.push(i);
            sum = yi;
            lambda = r - yi;
        }
    }

    for i in spill {
        let yi = y[i];
        if passes(yi, lambda) {
            sum = sum + yi;
            free.push(i);
            lambda = (r - sum) / T::lit(free.len() as f64);
        } else {
            fixed.push(i);
        }
    }

    if !contributed {
        lambda = (r / T::lit(y.len() as f64)).max(-y[first]);
    }

    InitResult {
        lambda0: lambda,
        free,
        undecided,
        fixed,
        free_sum: sum,
    }
}

/// Multiplier of the projection by Condat's method.
pub fn condat_multiplier<T: Real>(y: &[T], r: T) -> Result<T> {
    check_simplex(y, r)?;
    let init = init_impl(y, r, 0..y.len(), None, false);
    let mut free = init.free;
    let mut sum = init.free_sum;
    let mut lambda = init.lambda0;
    loop {
        let before = free.len();
        let mut k = 0;
        while k < free.len() {
            let yj = y[free[k]];
            if yj + lambda <= T::zero() {
                free.swap_remove(k);
                sum = sum - yj;
                // λ_{J∖{j}} = λ_J + (yⱼ + λ_J)/|J∖{j}|
                lambda = (r - sum) / T::lit(free.len() as f64);
            } else {
                k += 1;
            }
        }
        if free.len() == before {
            return Ok(lambda);
        }
    }
}

/// Condat's projection onto `{x ≥ 0, Σx = r}`.
pub fn condat_project<T: Real>(y: &[T], r: T) -> Result<Vec<T>> {
    let lambda = condat_multiplier(y, r)?;
    Ok(y.iter().map(|&v| (v + lambda).max(T::zero())).collect())
}

/// Specialized Newton iteration from `lambda0` (which must not lie below
/// `min(−yᵢ)`).
///
/// The first step uses the lateral derivative towards the root; from then
/// on the iterates decrease monotonically onto the root and stop once
/// `φ(λₖ) ≤ r`. Only the step-size and bracket tests guard the loop.
pub(crate) fn run_simplex_newton<T: Real, S: Sweeper<T>>(
    sw: &mut S,
    r: T,
    lambda0: T,
    opts: &SolverOptions<T>,
    mut trace: Option<&mut Vec<IterationRecord<T>>>,
) -> Result<(T, usize, usize, StopReason)> {
    let tau = opts.tolerance_scale;
    let mut br = Bracket::unbounded();
    let mut lambda = lambda0;
    let mut pending: Option<Fixing<T>> = None;
    let mut iterations = 0;
    let mut evals = 0;
    loop {
        let res = sw.sweep(pending.take(), lambda);
        evals += 1;
        let s = res.sums;
        let g = s.value - r;
        if let Some(t) = trace.as_deref_mut() {
            t.push(IterationRecord {
                lambda,
                phi: s.value,
                dminus: s.dminus,
                dplus: s.dplus,
                lo: br.lo,
                hi: br.hi,
            });
        }
        if g == T::zero() || (iterations > 0 && g < T::zero()) {
            return Ok((lambda, iterations, evals, StopReason::Residual));
        }
        let deriv = if g < T::zero() {
            br.lo = lambda;
            s.dplus
        } else {
            br.hi = lambda;
            if opts.variable_fixing {
                pending = Some(Fixing {
                    lambda,
                    side: Side::Lower,
                });
            }
            s.dminus
        };
        if br.collapsed(tau) {
            return Ok((lambda, iterations, evals, StopReason::Bracket));
        }
        if deriv <= T::zero() {
            // Only reachable from a start below every breakpoint; the
            // general driver handles the flat region.
            let run = run_newton(sw, r, lambda, opts, None)?;
            return Ok((run.lambda, iterations + run.iterations, evals + run.phi_evals, run.stop));
        }
        let step = -g / deriv;
        if step.abs() < tau {
            return Ok((lambda, iterations, evals, StopReason::NullStep));
        }
        let next = lambda + step;
        if next == lambda {
            return Ok((lambda, iterations, evals, StopReason::NullStep));
        }
        if iterations >= opts.max_iterations {
            return Err(CqkError::MaxIterations {
                iterations,
                lambda: lambda.to_f64_lossy(),
                residual: g.to_f64_lossy(),
            });
        }
        lambda = next;
        iterations += 1;
    }
}

/// Builds the primal output from the chunks' active lists; every other
/// variable was fixed at zero.
pub(crate) fn simplex_solution<T: Real>(
    y: &[T],
    chunks: &[ChunkState<T>],
    lambda: T,
    kind: OutputKind,
) -> Solution<T> {
    let view = SimplexView { y };
    match kind {
        OutputKind::Dense => {
            let mut x = vec![T::zero(); y.len()];
            for c in chunks {
                for &i in c.active() {
                    x[i] = view.primal(i, lambda);
                }
            }
            Solution::Dense(x)
        }
        OutputKind::Sparse => {
            let mut entries: Vec<(usize, T)> = chunks
                .iter()
                .flat_map(|c| c.active().iter().map(|&i| (i, view.primal(i, lambda))))
                .filter(|&(_, v)| v > T::zero())
                .collect();
            entries.sort_unstable_by_key(|e| e.0);
            Solution::Sparse {
                n: y.len(),
                entries,
            }
        }
    }
}

/// Projection onto the simplex by the specialized Newton method.
///
/// `xbar` is an optional nonnegative estimate of the projection; its support
/// selects the variables used to initialize the multiplier.
pub fn newton_project_simplex<T: Real>(
    y: &[T],
    r: T,
    opts: &SolverOptions<T>,
    xbar: Option<&[T]>,
) -> Result<SolveOutcome<T>> {
    check_simplex(y, r)?;
    check_xbar(y.len(), xbar)?;
    opts.check()?;
    let init = init_impl(y, r, 0..y.len(), xbar, false);
    newton_from_init(y, r, init, opts)
}

pub(crate) fn newton_from_init<T: Real>(
    y: &[T],
    r: T,
    init: InitResult<T>,
    opts: &SolverOptions<T>,
) -> Result<SolveOutcome<T>> {
    let view = SimplexView { y };
    let init_fixed = init.fixed.len();
    let active = if opts.variable_fixing {
        init.active()
    } else {
        (0..y.len()).collect()
    };
    let mut sw = ChunkedSweeper::new(&view, vec![ChunkState::new(active)], None, false);
    let (lambda, iterations, phi_evals, stop) =
        run_simplex_newton(&mut sw, r, init.lambda0, opts, None)?;
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

/// Runs the specialized iteration from an arbitrary `lambda0` over all
/// variables and records every iterate.
pub fn newton_simplex_from<T: Real>(
    y: &[T],
    r: T,
    lambda0: T,
    opts: &SolverOptions<T>,
    trace: &mut Vec<IterationRecord<T>>,
) -> Result<SolveOutcome<T>> {
    check_simplex(y, r)?;
    opts.check()?;
    let view = SimplexView { y };
    let mut sw = ChunkedSweeper::new(&view, vec![ChunkState::from_range(0..y.len())], None, false);
    let (lambda, iterations, phi_evals, stop) =
        run_simplex_newton(&mut sw, r, lambda0, opts, Some(trace))?;
    Ok(SolveOutcome {
        status: Status::Solved,
        lambda,
        x: Some(simplex_solution(y, sw.chunks(), lambda, opts.output)),
        iterations,
        phi_evals,
        fixed_count: sw.fixed_count(),
        stop,
    })
}

/// Result of an ℓ1-ball projection with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Projection<T> {
    pub x: Vec<T>,
    /// `None` when `y` already lies in the ball.
    pub lambda: Option<T>,
    pub iterations: usize,
    pub phi_evals: usize,
}

/// Euclidean projection onto `{‖x‖₁ ≤ r}`.
pub fn project_l1<T: Real>(y: &[T], r: T, opts: &SolverOptions<T>) -> Result<Vec<T>> {
    Ok(project_l1_warm(y, r, opts, None)?.x)
}

/// ℓ1-ball projection, optionally warm-started from a previous projection
/// `xbar` (signs are ignored, only its support is used).
pub fn project_l1_warm<T: Real>(
    y: &[T],
    r: T,
    opts: &SolverOptions<T>,
    xbar: Option<&[T]>,
) -> Result<L1Projection<T>> {
    check_simplex(y, r)?;
    check_xbar(y.len(), xbar)?;
    opts.check()?;
    let norm: T = y.iter().map(|v| v.abs()).sum();
    if norm <= r {
        return Ok(L1Projection {
            x: y.to_vec(),
            lambda: None,
            iterations: 0,
            phi_evals: 0,
        });
    }
    let abs: Vec<T> = y.iter().map(|v| v.abs()).collect();
    let support: Option<Vec<T>> = xbar.map(|xb| xb.iter().map(|v| v.abs()).collect());
    let zero = T::zero();
    // zeros of y are zero in the projection; seed with the first nonzero
    let nonzero = (0..abs.len()).filter(|&i| abs[i] > zero);
    let mut init = init_impl(&abs, r, nonzero, support.as_deref(), true);
    init.fixed.extend((0..abs.len()).filter(|&i| abs[i] == zero));
    let out = newton_from_init(
        &abs,
        r,
        init,
        &SolverOptions {
            output: OutputKind::Dense,
            ..*opts
        },
    )?;
    let lambda = out.lambda;
    let mut x = out.x.expect("simplex projection is always solved").into_dense();
    for (xi, yi) in x.iter_mut().zip(y) {
        if *yi < zero && *xi > zero {
            *xi = -*xi;
        }
    }
    Ok(L1Projection {
        x,
        lambda: Some(lambda),
        iterations: out.iterations,
        phi_evals: out.phi_evals,
    })
}
