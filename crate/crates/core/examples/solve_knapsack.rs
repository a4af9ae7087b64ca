//! Solve a small continuous quadratic knapsack and inspect the solver report.

use cqk::{solve_cqk, solve_cqk_traced, CqkInstance, SolverOptions};

fn main() -> cqk::Result<()> {
    // min ½ Σ dᵢxᵢ² − aᵢxᵢ  s.t.  Σ bᵢxᵢ = r,  l ≤ x ≤ u
    let inst = CqkInstance::new(
        vec![1.0, 2.0, 0.5, 4.0],
        vec![1.0, -1.0, 0.3, 2.0],
        vec![1.0, 1.0, 2.0, 0.5],
        vec![0.0, 0.0, -1.0, 0.0],
        vec![1.0, 2.0, 1.0, f64::INFINITY],
        2.5,
    )?;

    let out = solve_cqk(&inst, &SolverOptions::default(), None)?;
    let x = out.dense();
    println!("lambda = {:.12}", out.lambda);
    println!("x      = {x:?}");
    println!("Σbx    = {}", x.iter().zip(inst.b()).map(|(x, b)| x * b).sum::<f64>());
    println!("{} updates, {} φ evaluations, stop: {:?}", out.iterations, out.phi_evals, out.stop);

    let mut trace = Vec::new();
    solve_cqk_traced(&inst, &SolverOptions::default(), None, &mut trace)?;
    for (k, t) in trace.iter().enumerate() {
        println!("  {k}: λ = {:+.6e}  φ(λ) = {:.6}  bracket [{:.3e}, {:.3e}]", t.lambda, t.phi, t.lo, t.hi);
    }

    // Σx = 10 with x ∈ [0,1]² has no solution
    let bad = CqkInstance::new(vec![1.0; 2], vec![0.0; 2], vec![1.0; 2], vec![0.0; 2], vec![1.0; 2], 10.0)?;
    println!("r = 10 on the unit box: {:?}", solve_cqk(&bad, &SolverOptions::default(), None)?.status);
    Ok(())
}
