//! Chunked solves with variable fixing and the fixing-free Jacobi scheme.
//! Results do not depend on the worker count.

use std::time::Instant;

use cqk::instances::{gen_cqk, gen_simplex_y, Family, GeneratorSpec};
use cqk::{jacobi_solve, par_project_simplex, par_solve_cqk, solve_cqk, SolverOptions};

fn main() -> cqk::Result<()> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).max(2);
    let opts = SolverOptions::default();
    let inst = gen_cqk(&GeneratorSpec::new(Family::CqkCorrelated, 1_000_000, 3))?;

    let t = Instant::now();
    let seq = solve_cqk(&inst, &opts, None)?;
    println!("sequential         λ = {:.15e}  {:?}", seq.lambda, t.elapsed());
    let t = Instant::now();
    let par = par_solve_cqk(&inst, &opts, workers, None)?;
    println!("chunked ({workers} workers) λ = {:.15e}  {:?}", par.lambda, t.elapsed());
    for w in [1, workers] {
        let t = Instant::now();
        let jac = jacobi_solve(&inst, &opts, w)?;
        println!("jacobi ({w} workers)  λ = {:.15e}  {:?}", jac.lambda, t.elapsed());
    }

    let y = gen_simplex_y(&GeneratorSpec::new(Family::SimplexU01, 1_000_000, 3))?;
    let out = par_project_simplex(&y, 1.0, &opts, workers)?;
    println!("simplex ({workers} workers): λ = {:.15e}, {} updates", out.lambda, out.iterations);
    Ok(())
}
