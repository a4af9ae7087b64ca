//! Project onto the simplex `{x ≥ 0, Σx = r}` with Newton and with the
//! sort-free baseline, then warm start from a nearby projection.

use cqk::instances::{gen_simplex_y, Family, GeneratorSpec};
use cqk::{condat_project, newton_project_simplex, SolverOptions};

fn main() -> cqk::Result<()> {
    let y = vec![3.0, 1.0, 0.5, 0.2];
    let out = newton_project_simplex(&y, 1.0, &SolverOptions::default(), None)?;
    println!("P({y:?}) = {:?}, λ = {}", out.dense(), out.lambda);

    let y = gen_simplex_y(&GeneratorSpec::new(Family::SimplexN01, 1_000_000, 1))?;
    let opts = SolverOptions::default();
    let newton = newton_project_simplex(&y, 1.0, &opts, None)?;
    let baseline = condat_project(&y, 1.0)?;
    let x = newton.dense();
    let gap = x.iter().zip(&baseline).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let support = x.iter().filter(|&&v| v > 0.0).count();
    println!(
        "n = 10⁶: {} updates, {support} positive entries, max gap to baseline {gap:.1e}",
        newton.iterations
    );

    // a slightly perturbed point has almost the same support
    let moved: Vec<f64> = y.iter().enumerate().map(|(i, v)| v + 1e-4 * ((i % 7) as f64 - 3.0)).collect();
    let cold = newton_project_simplex(&moved, 1.0, &opts, None)?;
    let warm = newton_project_simplex(&moved, 1.0, &opts, Some(&x))?;
    println!("perturbed: cold {} updates, warm {} updates", cold.iterations, warm.iterations);

    // single precision
    let y32: Vec<f32> = y.iter().map(|&v| v as f32).collect();
    let out32 = newton_project_simplex(&y32, 1.0f32, &SolverOptions::default(), None)?;
    println!("f32: λ = {} (f64 gives {})", out32.lambda, newton.lambda);
    Ok(())
}
