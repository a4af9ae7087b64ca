use std::path::Path;
use std::process::{Command, Output};

fn cqk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqk"))
        .args(args)
        .env_remove("CQK_WORKERS")
        .output()
        .unwrap()
}

fn field(out: &Output, key: &str) -> String {
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{text}"))
        .to_string()
}

fn read_floats(p: &Path) -> Vec<f64> {
    std::fs::read_to_string(p).unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect()
}

#[test]
fn newton_and_condat_give_the_same_projection() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("newton.txt"), dir.path().join("condat.txt"));
    let base = ["solve", "--family", "simplex-u01", "--n", "1000", "--seed", "7"];
    for (variant, path) in [("newton", &a), ("condat", &b)] {
        let mut args = base.to_vec();
        args.extend(["--variant", variant, "--out", path.to_str().unwrap()]);
        let out = cqk(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(field(&out, "status"), "solved");
    }
    let (xa, xb) = (read_floats(&a), read_floats(&b));
    assert_eq!(xa.len(), 1000);
    assert!(xa.iter().zip(&xb).all(|(p, q)| (p - q).abs() <= 1e-10));
}

#[test]
fn jacobi_multiplier_does_not_depend_on_workers() {
    let lambda = |w: &str| -> f64 {
        let out = cqk(&["solve", "--family", "cqk-weak", "--n", "20000", "--seed", "3", "--variant", "jacobi", "--workers", w]);
        assert!(out.status.success());
        field(&out, "lambda").parse().unwrap()
    };
    let (one, eight) = (lambda("1"), lambda("8"));
    assert!((one - eight).abs() <= 1e-9 * one.abs().max(1.0));
}

#[test]
fn infeasible_instance_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    // Σx = 10 over the unit box
    std::fs::write(&path, "CQK1 2\n1 1\n0 0\n1 1\n0 0\n1 1\n10\n").unwrap();
    let out = cqk(&["solve", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn usage_and_domain_errors_exit_with_one() {
    assert_eq!(cqk(&["solve", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(cqk(&["solve", "--family", "nope", "--n", "3"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("neg.txt");
    std::fs::write(&path, "SPX1 2 -1\n0.5 0.5\n").unwrap();
    assert_eq!(cqk(&["solve", "--instance", path.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(cqk(&["solve", "--instance", "/nonexistent/file"]).status.code(), Some(1));
}

#[test]
fn worker_flag_beats_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_cqk"));
        c.args(["solve", "--family", "cqk-weak", "--n", "100", "--variant", "parallel"]);
        match env {
            Some(v) => c.env("CQK_WORKERS", v),
            None => c.env_remove("CQK_WORKERS"),
        };
        if let Some(f) = flag {
            c.args(["--workers", f]);
        }
        c.output().unwrap().status.code()
    };
    // zero workers is a domain error, so it shows which value was used
    assert_eq!(run(Some("0"), None), Some(1));
    assert_eq!(run(Some("0"), Some("2")), Some(0));
    assert_eq!(run(None, Some("0")), Some(1));
    assert_eq!(run(None, None), Some(0));
}

#[test]
fn generated_files_solve_like_in_memory_instances() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ["--family", "cqk-correlated", "--n", "3000", "--seed", "11"];
    let from_mem = cqk(&[&["solve"][..], &spec].concat());
    for binary in [false, true] {
        let path = dir.path().join(if binary { "i.bin" } else { "i.txt" });
        let mut args = vec!["gen"];
        args.extend(spec);
        args.extend(["--out", path.to_str().unwrap()]);
        if binary {
            args.push("--binary");
        }
        assert!(cqk(&args).status.success());
        let from_file = cqk(&["solve", "--instance", path.to_str().unwrap()]);
        assert_eq!(field(&from_file, "lambda"), field(&from_mem, "lambda"));
        assert_eq!(field(&from_file, "iterations"), field(&from_mem, "iterations"));
    }
}

#[test]
fn sparse_output_lists_positive_entries() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.txt");
    let out = cqk(&[
        "solve", "--family", "simplex-n01", "--n", "500", "--output", "sparse", "--precision", "32", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let total: f64 = text.lines().map(|l| l.split_whitespace().nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-5);
    assert!(text.lines().count() < 500);
}

#[test]
fn bench_writes_the_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let out = cqk(&[
        "bench", "--suite", "simplex", "--sizes", "100,200", "--instances", "2", "--reps-budget", "3:0.05",
        "--variants", "condat,newton,jacobi", "--workers", "1,2", "--csv", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "suite,family,n,variant,workers,precision,median_min_ms,mean_iters,relperf_vs_base"
    );
    // 3 families × 2 sizes × (condat, newton, jacobi×2)
    assert_eq!(lines.count(), 3 * 2 * 4);
}

#[test]
fn spg_emits_per_iteration_rows() {
    let out = cqk(&["spg", "--app", "svm", "--n", "120", "--seed", "2", "--warm", "on"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("iter,inner_iterations,warm,objective,reference,step,pg_norm\n"));
    assert!(text.lines().count() > 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("converged"));
}
