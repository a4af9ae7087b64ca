//! Train a kernel SVM by projected gradient on its dual; every projection is
//! a knapsack solve, optionally warm started from the current iterate.

use cqk::instances::gen_blobs;
use cqk::spg::{build_svm_dual, spg_solve};

fn main() -> cqk::Result<()> {
    let (n, dim) = (400, 10);
    let (points, labels) = gen_blobs(n, dim, 2.0, 5)?;
    for warm in [false, true] {
        let mut p = build_svm_dual(&points, &labels, 1.0 / dim as f64, 1.0)?.with_warm_start(warm);
        let res = spg_solve(&mut p, &vec![0.0; n], 1e-4, 5000)?;
        let inner: usize = res.history.iter().map(|h| h.inner_iterations).sum();
        let support = res.x.iter().filter(|&&a| a > 1e-8).count();
        println!(
            "warm={warm}: {} SPG iterations, {:.2} projection updates each, {support} support vectors, f = {:.6}",
            res.iterations,
            inner as f64 / res.history.len().max(1) as f64,
            res.history.last().map_or(f64::NAN, |h| h.objective),
        );
    }
    Ok(())
}
