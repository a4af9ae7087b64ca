//! Recover a sparse vector from few random measurements by least squares over
//! an ℓ1 ball.

use cqk::instances::gen_sparse_ls;
use cqk::spg::{build_basis_pursuit_from, spg_solve};

fn main() -> cqk::Result<()> {
    let (m, n, k) = (400, 4000, 15);
    let ls = gen_sparse_ls(m, n, 2e-2, k, 11)?;
    let radius: f64 = ls.x_true.iter().map(|v| v.abs()).sum();
    for warm in [false, true] {
        let mut p = build_basis_pursuit_from(&ls, radius)?.with_warm_start(warm);
        let res = spg_solve(&mut p, &vec![0.0; n], 1e-6, 10_000)?;
        let err = res.x.iter().zip(&ls.x_true).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let tail = &res.history[res.history.len().saturating_sub(50)..];
        let mean = tail.iter().map(|h| h.inner_iterations as f64).sum::<f64>() / tail.len().max(1) as f64;
        println!(
            "warm={warm}: {} iterations, max error {err:.2e}, {mean:.2} updates per projection over the last {}",
            res.iterations,
            tail.len()
        );
    }
    Ok(())
}
