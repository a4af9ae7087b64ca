//! Run a small benchmark cell with the library's timing protocol and print
//! the CSV rows.

use std::time::Duration;

use cqk::bench::{run_bench, write_csv, BenchConfig, Budget, Precision, Suite, Variant};

fn main() -> cqk::Result<()> {
    let mut cfg = BenchConfig::new(Suite::Simplex);
    cfg.sizes = vec![10_000, 100_000];
    cfg.instances = 5;
    cfg.budget = Budget {
        max_runs: 200,
        max_time: Duration::from_millis(200),
    };
    cfg.variants = vec![Variant::Condat, Variant::Newton, Variant::NewtonNofix, Variant::Parallel];
    cfg.workers = vec![1, 2];
    cfg.precisions = vec![Precision::Double, Precision::Single];
    let rows = run_bench(&cfg)?;
    write_csv(&rows, std::io::stdout())
}
