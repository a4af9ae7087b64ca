//! Continuous quadratic knapsack, simplex and ℓ1-ball projection by a
//! safeguarded semismooth Newton method on the dual equation `φ(λ) = r`.

// NaN-rejecting `!(a > b)` guards are intentional
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
mod chunk;
mod error;
pub mod instances;
pub mod io;
mod kernel;
mod newton;
#[doc(hidden)]
pub mod oracle;
mod parallel;
mod problem;
mod real;
mod simplex;
pub mod spg;
pub mod sparse;

pub use chunk::{Direction, MERGE_THRESHOLD};
pub use error::{CqkError, Field, Result};
pub use kernel::{PhiSums, Side};
pub use newton::{
    secant_step, solve_cqk, solve_cqk_traced, IterationRecord, OutputKind, Solution, SolveOutcome,
    SolveState, SolverOptions, Status, StopReason,
};
pub use problem::{Breakpoints, CqkInstance, PhiEval, SimplexInstance};
pub use real::Real;
pub use simplex::{
    condat_multiplier, condat_project, newton_project_simplex, newton_simplex_from, project_l1,
    project_l1_warm, simplex_init_lambda, InitResult, L1Projection,
};
pub use parallel::{
    jacobi_project_simplex, jacobi_solve, par_project_simplex, par_simplex_init, par_solve_cqk,
    worker_pool,
};
