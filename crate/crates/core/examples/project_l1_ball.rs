//! Euclidean projection onto the ℓ1 ball `{‖x‖₁ ≤ r}`.

use cqk::{project_l1, project_l1_warm, SolverOptions};

fn main() -> cqk::Result<()> {
    let opts = SolverOptions::default();
    let y = vec![3.0, -2.5, 0.5, -0.2, 0.0];
    let x = project_l1(&y, 2.0, &opts)?;
    println!("P({y:?}) = {x:?}");
    println!("‖x‖₁ = {}", x.iter().map(|v: &f64| v.abs()).sum::<f64>());

    // inside the ball: returned unchanged, no solve
    let inside = project_l1_warm(&[0.1, -0.2], 1.0, &opts, None)?;
    println!("inside: x = {:?}, λ = {:?}", inside.x, inside.lambda);

    // warm start from the previous projection's support
    let y2: Vec<f64> = y.iter().map(|v| v * 1.01).collect();
    let warm = project_l1_warm(&y2, 2.0, &opts, Some(&x))?;
    println!("warm: x = {:?} in {} updates", warm.x, warm.iterations);
    Ok(())
}
