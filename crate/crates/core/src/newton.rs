//! Globally convergent semismooth Newton method for `φ(λ) = r`.
//!
//! Each iteration evaluates `φ` and the lateral derivative pointing towards
//! the root. A Newton step that leaves the certified bracket `[λ̲, λ̄]` is
//! replaced by the secant step through the bracket ends, and a vanishing
//! derivative moves the iterate to the next breakpoint. When no breakpoint
//! exists in the required direction the problem is infeasible.
//!
//! Stopping tests (τ = `tolerance_scale`):
//!
//! 1. `|φ(λₖ) − r| < τ (Σ|bᵢxᵢ(λₖ)| + |r|)`
//! 2. `|(φ(λₖ) − r)/φ'(λₖ)| < τ` or `λₖ₋₁ = λₖ`
//! 3. `λ̄ − λ̲ < τ max(|λ̄|, |λ̲|)`

use crate::chunk::{ChunkState, ChunkedSweeper, Direction, Fixing, Sweeper};
use crate::error::{CqkError, Result};
use crate::kernel::{DualElements, Side};
use crate::problem::CqkInstance;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Dense,
    /// `(index, value)` pairs of the non-zero entries.
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    pub variable_fixing: bool,
    pub max_iterations: usize,
    pub tolerance_scale: T,
    pub output: OutputKind,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            variable_fixing: true,
            max_iterations: 100,
            tolerance_scale: T::default_tolerance(),
            output: OutputKind::Dense,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn without_fixing(mut self) -> Self {
        self.variable_fixing = false;
        self
    }

    pub fn sparse(mut self) -> Self {
        self.output = OutputKind::Sparse;
        self
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(CqkError::ContractViolation("max_iterations must be at least 1"));
        }
        if !(self.tolerance_scale > T::zero()) {
            return Err(CqkError::ContractViolation("tolerance_scale must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Solved,
    Infeasible,
}

/// Which test ended a successful solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `φ(λ) = r` exactly, or within the relative residual test.
    Residual,
    /// Numerically null step or repeated iterate.
    NullStep,
    /// Bracket collapsed.
    Bracket,
    Infeasible,
}

/// Primal solution in the representation requested by the caller.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution<T> {
    Dense(Vec<T>),
    Sparse { n: usize, entries: Vec<(usize, T)> },
}

impl<T: Real> Solution<T> {
    pub fn len(&self) -> usize {
        match self {
            Solution::Dense(x) => x.len(),
            Solution::Sparse { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_dense(&self) -> Vec<T> {
        match self {
            Solution::Dense(x) => x.clone(),
            Solution::Sparse { n, entries } => {
                let mut x = vec![T::zero(); *n];
                for &(i, v) in entries {
                    x[i] = v;
                }
                x
            }
        }
    }

    pub fn into_dense(self) -> Vec<T> {
        match self {
            Solution::Dense(x) => x,
            s => s.to_dense(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            Solution::Dense(x) => x.iter().filter(|v| **v != T::zero()).count(),
            Solution::Sparse { entries, .. } => entries.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome<T> {
    pub status: Status,
    /// Optimal multiplier when solved; last iterate otherwise.
    pub lambda: T,
    /// `None` for infeasible instances.
    pub x: Option<Solution<T>>,
    /// Number of multiplier updates.
    pub iterations: usize,
    pub phi_evals: usize,
    pub fixed_count: usize,
    pub stop: StopReason,
}

impl<T: Real> SolveOutcome<T> {
    pub fn is_solved(&self) -> bool {
        self.status == Status::Solved
    }

    /// Dense copy of the primal solution. Panics on infeasible outcomes.
    pub fn dense(&self) -> Vec<T> {
        self.x.as_ref().expect("infeasible outcome has no primal solution").to_dense()
    }
}

/// Zero of the affine interpolant through `(lo, phi_lo)` and `(hi, phi_hi)`.
pub fn secant_step<T: Real>(lo: T, phi_lo: T, hi: T, phi_hi: T, r: T) -> Result<T> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CqkError::ContractViolation("secant bracket must be finite with lo < hi"));
    }
    if !(phi_lo < r && r < phi_hi) {
        return Err(CqkError::ContractViolation("secant bracket must satisfy phi_lo < r < phi_hi"));
    }
    Ok(secant_unchecked(lo, phi_lo - r, hi, phi_hi - r))
}

#[inline]
fn secant_unchecked<T: Real>(lo: T, g_lo: T, hi: T, g_hi: T) -> T {
    let s = lo - g_lo * (hi - lo) / (g_hi - g_lo);
    s.max(lo).min(hi)
}

/// Scalar state of the multiplier iteration.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    /// `φ(λ̲) − r` and `φ(λ̄) − r`.
    pub g_lo: T,
    pub g_hi: T,
}

impl<T: Real> Bracket<T> {
    pub fn unbounded() -> Self {
        Bracket {
            lo: T::neg_infinity(),
            hi: T::infinity(),
            g_lo: T::nan(),
            g_hi: T::nan(),
        }
    }

    /// Stopping test 3.
    pub fn collapsed(&self, tau: T) -> bool {
        self.lo.is_finite()
            && self.hi.is_finite()
            && self.hi - self.lo < tau * self.hi.abs().max(self.lo.abs())
    }
}

/// One recorded iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    pub lambda: T,
    pub phi: T,
    pub dminus: T,
    pub dplus: T,
    pub lo: T,
    pub hi: T,
}

pub(crate) struct DriverResult<T> {
    pub status: Status,
    pub lambda: T,
    pub iterations: usize,
    pub phi_evals: usize,
    pub stop: StopReason,
}

/// Runs the safeguarded Newton iteration against any sweep engine.
pub(crate) fn run_newton<T: Real, S: Sweeper<T>>(
    sw: &mut S,
    r: T,
    lambda0: T,
    opts: &SolverOptions<T>,
    mut trace: Option<&mut Vec<IterationRecord<T>>>,
) -> Result<DriverResult<T>> {
    let tau = opts.tolerance_scale;
    let mut lambda = lambda0;
    let mut r_res = r;
    let mut fixed_abs = T::zero();
    let mut br = Bracket::unbounded();
    let mut pending: Option<Fixing<T>> = None;
    let mut iterations = 0;
    let mut phi_evals = 0;

    let done = |status, lambda, iterations, phi_evals, stop| {
        Ok(DriverResult {
            status,
            lambda,
            iterations,
            phi_evals,
            stop,
        })
    };

    loop {
        let res = sw.sweep(pending.take(), lambda);
        phi_evals += 1;
        r_res = r_res - res.fixed_value;
        fixed_abs = fixed_abs + res.fixed_abs;
        let g = res.sums.value - r_res;
        if let Some(t) = trace.as_deref_mut() {
            t.push(IterationRecord {
                lambda,
                phi: g + r,
                dminus: res.sums.dminus,
                dplus: res.sums.dplus,
                lo: br.lo,
                hi: br.hi,
            });
        }

        if g == T::zero() || g.abs() < tau * (res.sums.abs + fixed_abs + r.abs()) {
            return done(Status::Solved, lambda, iterations, phi_evals, StopReason::Residual);
        }

        let next = if g < T::zero() {
            br.lo = lambda;
            br.g_lo = g;
            if opts.variable_fixing {
                pending = Some(Fixing {
                    lambda,
                    side: Side::Upper,
                });
            }
            if br.collapsed(tau) {
                return done(Status::Solved, lambda, iterations, phi_evals, StopReason::Bracket);
            }
            if res.sums.dplus > T::zero() {
                let step = -g / res.sums.dplus;
                if step.abs() < tau {
                    return done(Status::Solved, lambda, iterations, phi_evals, StopReason::NullStep);
                }
                let cand = lambda + step;
                if cand < br.hi {
                    cand
                } else {
                    secant_unchecked(br.lo, br.g_lo, br.hi, br.g_hi)
                }
            } else {
                let (fixed, bp) = sw.nearest_breakpoint(pending.take(), br.lo, Direction::Right);
                r_res = r_res - fixed.fixed_value;
                fixed_abs = fixed_abs + fixed.fixed_abs;
                match bp {
                    Some(bp) => bp,
                    None => {
                        return done(
                            Status::Infeasible,
                            lambda,
                            iterations,
                            phi_evals,
                            StopReason::Infeasible,
                        )
                    }
                }
            }
        } else {
            br.hi = lambda;
            br.g_hi = g;
            if opts.variable_fixing {
                pending = Some(Fixing {
                    lambda,
                    side: Side::Lower,
                });
            }
            if br.collapsed(tau) {
                return done(Status::Solved, lambda, iterations, phi_evals, StopReason::Bracket);
            }
            if res.sums.dminus > T::zero() {
                let step = -g / res.sums.dminus;
                if step.abs() < tau {
                    return done(Status::Solved, lambda, iterations, phi_evals, StopReason::NullStep);
                }
                let cand = lambda + step;
                if cand > br.lo {
                    cand
                } else {
                    secant_unchecked(br.lo, br.g_lo, br.hi, br.g_hi)
                }
            } else {
                let (fixed, bp) = sw.nearest_breakpoint(pending.take(), br.hi, Direction::Left);
                r_res = r_res - fixed.fixed_value;
                fixed_abs = fixed_abs + fixed.fixed_abs;
                match bp {
                    Some(bp) => bp,
                    None => {
                        return done(
                            Status::Infeasible,
                            lambda,
                            iterations,
                            phi_evals,
                            StopReason::Infeasible,
                        )
                    }
                }
            }
        };

        if next == lambda {
            return done(Status::Solved, lambda, iterations, phi_evals, StopReason::NullStep);
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

/// Builds `x(λ)` for every variable. Fixed variables land on their bounds
/// because the final multiplier lies inside the bracket that fixed them.
pub(crate) fn primal_solution<T: Real, E: DualElements<T>>(
    e: &E,
    lambda: T,
    kind: OutputKind,
) -> Solution<T> {
    let n = e.len();
    match kind {
        OutputKind::Dense => Solution::Dense((0..n).map(|i| e.primal(i, lambda)).collect()),
        OutputKind::Sparse => Solution::Sparse {
            n,
            entries: (0..n)
                .map(|i| (i, e.primal(i, lambda)))
                .filter(|&(_, v)| v != T::zero())
                .collect(),
        },
    }
}

/// Solves a knapsack instance sequentially.
///
/// `xbar` is an optional primal estimate used to pick the variables that
/// enter the initial multiplier.
pub fn solve_cqk<T: Real>(
    inst: &CqkInstance<T>,
    opts: &SolverOptions<T>,
    xbar: Option<&[T]>,
) -> Result<SolveOutcome<T>> {
    opts.check()?;
    let lambda0 = inst.initial_multiplier(xbar)?;
    let chunks = vec![ChunkState::from_range(0..inst.len())];
    let mut sw = ChunkedSweeper::new(inst, chunks, None, false);
    let run = run_newton(&mut sw, inst.r(), lambda0, opts, None)?;
    Ok(finish(inst, run, sw.fixed_count(), opts.output))
}

/// Like [`solve_cqk`] but records every iterate.
pub fn solve_cqk_traced<T: Real>(
    inst: &CqkInstance<T>,
    opts: &SolverOptions<T>,
    xbar: Option<&[T]>,
    trace: &mut Vec<IterationRecord<T>>,
) -> Result<SolveOutcome<T>> {
    opts.check()?;
    let lambda0 = inst.initial_multiplier(xbar)?;
    let chunks = vec![ChunkState::from_range(0..inst.len())];
    let mut sw = ChunkedSweeper::new(inst, chunks, None, false);
    let run = run_newton(&mut sw, inst.r(), lambda0, opts, Some(trace))?;
    Ok(finish(inst, run, sw.fixed_count(), opts.output))
}

pub(crate) fn finish<T: Real>(
    inst: &CqkInstance<T>,
    run: DriverResult<T>,
    fixed_count: usize,
    kind: OutputKind,
) -> SolveOutcome<T> {
    let x = match run.status {
        Status::Solved => Some(primal_solution(inst, run.lambda, kind)),
        Status::Infeasible => None,
    };
    SolveOutcome {
        status: run.status,
        lambda: run.lambda,
        x,
        iterations: run.iterations,
        phi_evals: run.phi_evals,
        fixed_count,
        stop: run.stop,
    }
}

/// Sequential solver state exposed for step-by-step use.
///
/// `r_residual` is the right-hand side after removing the contributions of
/// fixed variables, so `φ` evaluated over `active()` is compared against it.
#[derive(Debug, Clone)]
pub struct SolveState<T> {
    chunk: ChunkState<T>,
    pub r_residual: T,
    pub bracket_lo: T,
    pub bracket_hi: T,
    pub lambda: T,
    pub last_lambda: Option<T>,
}

impl<T: Real> SolveState<T> {
    pub fn new(inst: &CqkInstance<T>, lambda: T) -> Self {
        SolveState {
            chunk: ChunkState::from_range(0..inst.len()),
            r_residual: inst.r(),
            bracket_lo: T::neg_infinity(),
            bracket_hi: T::infinity(),
            lambda,
            last_lambda: None,
        }
    }

    pub fn active(&self) -> &[usize] {
        self.chunk.active()
    }

    /// Fixed variables with the bound they were fixed at.
    pub fn fixed(&self) -> &[(usize, T)] {
        self.chunk.fixed()
    }

    /// `φ` restricted to the active variables.
    pub fn eval_phi(&self, inst: &CqkInstance<T>, lambda: T) -> crate::problem::PhiEval<T> {
        let mut s = crate::kernel::PhiSums::default();
        for &i in self.chunk.active() {
            inst.accumulate(i, lambda, &mut s);
        }
        s.into()
    }

    /// Removes every active variable that `φ(λ) ≠ r` proves to be at a bound.
    /// Returns the number of variables fixed.
    pub fn fix_variables(&mut self, inst: &CqkInstance<T>, lambda: T, phi_value: T, r: T) -> usize {
        let side = if phi_value > r {
            Side::Lower
        } else if phi_value < r {
            Side::Upper
        } else {
            return 0;
        };
        let res = self.chunk.apply_fixing(inst, Fixing { lambda, side }, true);
        self.r_residual = self.r_residual - res.fixed_value;
        res.newly_fixed
    }

    /// Closest active breakpoint strictly right of `bracket_lo` or strictly
    /// left of `bracket_hi`.
    pub fn nearest_breakpoint(&self, inst: &CqkInstance<T>, dir: Direction) -> Result<Option<T>> {
        let from = match dir {
            Direction::Right => self.bracket_lo,
            Direction::Left => self.bracket_hi,
        };
        if !from.is_finite() {
            return Err(CqkError::ContractViolation("bracket end must be finite"));
        }
        Ok(self.chunk.nearest_breakpoint(inst, from, dir))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::SimplexInstance;
    use approx::assert_relative_eq;

    fn box_pair(r: f64) -> CqkInstance<f64> {
        CqkInstance::new(
            vec![1.0, 2.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            r,
        )
        .unwrap()
    }

    #[test]
    fn solves_interior_box_pair() {
        for fixing in [true, false] {
            let opts = SolverOptions {
                variable_fixing: fixing,
                ..Default::default()
            };
            let out = solve_cqk(&box_pair(1.0), &opts, None).unwrap();
            assert_eq!(out.status, Status::Solved);
            assert_relative_eq!(out.lambda, 2.0 / 3.0, epsilon = 1e-14);
            let x = out.dense();
            assert_relative_eq!(x[0], 2.0 / 3.0, epsilon = 1e-14);
            assert_relative_eq!(x[1], 1.0 / 3.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn detects_infeasible_degenerate_box() {
        let inst =
            CqkInstance::new(vec![1.0; 2], vec![0.0; 2], vec![1.0; 2], vec![0.0; 2], vec![0.0; 2], 1.0)
                .unwrap();
        let out = solve_cqk(&inst, &SolverOptions::default(), None).unwrap();
        assert_eq!(out.status, Status::Infeasible);
        assert!(out.x.is_none());

        let inst = inst.with_rhs(-1.0).unwrap();
        let out = solve_cqk(&inst, &SolverOptions::default(), None).unwrap();
        assert_eq!(out.status, Status::Infeasible);
    }

    #[test]
    fn rhs_at_upper_sum_returns_upper_bounds() {
        let inst = box_pair(2.0);
        let out = solve_cqk(&inst, &SolverOptions::default(), None).unwrap();
        assert_eq!(out.status, Status::Solved);
        assert_eq!(out.dense(), vec![1.0, 1.0]);
    }

    #[test]
    fn secant_examples() {
        assert_eq!(secant_step(0.0, 0.0, 1.0, 2.0, 1.0).unwrap(), 0.5);
        assert_eq!(secant_step(0.0, 0.0, 1.0, 4.0, 1.0).unwrap(), 0.25);
        assert_eq!(secant_step(-1.0, -3.0, 3.0, 5.0, 1.0).unwrap(), 1.0);
        assert!(secant_step(1.0, 0.0, 0.0, 2.0, 1.0).is_err());
        assert!(secant_step(0.0, 2.0, 1.0, 3.0, 1.0).is_err());
        assert!(secant_step(f64::NEG_INFINITY, 0.0, 1.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn fixing_example_on_simplex_data() {
        let inst = SimplexInstance::new(vec![1.0, 2.0, 3.0], 1.0).unwrap().to_cqk();
        let mut st = SolveState::new(&inst, -1.5);
        let phi = st.eval_phi(&inst, -1.5).value;
        assert_eq!(phi, 2.0);
        assert_eq!(st.fix_variables(&inst, -1.5, phi, 1.0), 1);
        assert_eq!(st.fixed(), &[(0, 0.0)]);
        assert_eq!(st.r_residual, 1.0);
        // exact root: nothing to fix
        let mut st = SolveState::new(&inst, -2.0);
        assert_eq!(st.fix_variables(&inst, -2.0, 1.0, 1.0), 0);
        // φ < r with infinite upper bounds: nothing to fix
        assert_eq!(st.fix_variables(&inst, -10.0, 0.0, 1.0), 0);
    }

    #[test]
    fn nearest_breakpoint_from_state() {
        let inst =
            CqkInstance::new(vec![1.0; 3], vec![0.0, 0.0, -3.0], vec![1.0; 3], vec![0.0; 3], vec![f64::INFINITY; 3], 1.0)
                .unwrap();
        let mut st = SolveState::new(&inst, 0.0);
        assert!(st.nearest_breakpoint(&inst, Direction::Right).is_err());
        st.bracket_lo = 0.0;
        assert_eq!(st.nearest_breakpoint(&inst, Direction::Right).unwrap(), Some(3.0));
    }

    #[test]
    fn max_iterations_is_reported() {
        let opts = SolverOptions {
            max_iterations: 1,
            ..Default::default()
        };
        let inst = SimplexInstance::new((0..50).map(|i| (i as f64).sin()).collect(), 1.0)
            .unwrap()
            .to_cqk();
        match solve_cqk(&inst, &opts, None) {
            Err(CqkError::MaxIterations { .. }) => {}
            Ok(o) => assert!(o.iterations <= 1),
            Err(e) => panic!("{e}"),
        }
        let bad = SolverOptions::<f64> {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(solve_cqk(&inst, &bad, None).is_err());
    }

    #[test]
    fn single_variable() {
        let inst = CqkInstance::new(vec![2.0], vec![1.0], vec![3.0], vec![-1.0], vec![5.0], 6.0).unwrap();
        let out = solve_cqk(&inst, &SolverOptions::default(), None).unwrap();
        assert_relative_eq!(out.dense()[0], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn f32_solve() {
        let inst = box_pair(1.0).cast::<f32>().unwrap();
        let out = solve_cqk(&inst, &SolverOptions::default(), None).unwrap();
        assert!((out.lambda - 2.0 / 3.0).abs() < 1e-5);
    }
}
