#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use cqk::CqkInstance;
use proptest::prelude::*;

pub const TAU: f64 = 1.8189894035458617e-12;

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `|φ(λ) − r|` and the scale of the residual test on the full instance.
pub fn residual(inst: &CqkInstance<f64>, lambda: f64) -> (f64, f64) {
    let x = inst.eval_x(lambda);
    let (mut value, mut abs) = (0.0, 0.0);
    for (xi, bi) in x.iter().zip(inst.b()) {
        value += bi * xi;
        abs += (bi * xi).abs();
    }
    ((value - inst.r()).abs(), abs + inst.r().abs())
}

/// Random box-constrained instance with some infinite bounds and ties.
pub fn cqk_instance(max_n: usize) -> impl Strategy<Value = CqkInstance<f64>> {
    (1..=max_n)
        .prop_flat_map(|n| {
            let elem = (
                0.1f64..10.0,
                -10.0f64..10.0,
                0.1f64..10.0,
                -5.0f64..5.0,
                0.0f64..5.0,
                0u8..8,
            );
            (proptest::collection::vec(elem, n), -1.0f64..1.0)
        })
        .prop_map(|(elems, t)| {
            let n = elems.len();
            let (mut d, mut a, mut b, mut l, mut u) = (
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
            );
            for (di, ai, bi, li, wi, kind) in elems {
                // small integers on some entries create coinciding breakpoints
                let (di, ai, bi) = if kind == 7 { (1.0, ai.round(), 1.0) } else { (di, ai, bi) };
                let (li, ui) = match kind {
                    0 => (f64::NEG_INFINITY, li + wi),
                    1 => (li, f64::INFINITY),
                    2 => (li, li),
                    _ => (li, li + wi),
                };
                d.push(di);
                a.push(ai);
                b.push(bi);
                l.push(li);
                u.push(ui);
            }
            // rhs spread over and slightly beyond the feasible range
            let lo: f64 = b.iter().zip(&l).map(|(b, l)| b * l).sum();
            let hi: f64 = b.iter().zip(&u).map(|(b, u)| b * u).sum();
            let r = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi) + t * 0.6 * (hi - lo),
                (true, false) => lo + 10.0 * (t + 0.9),
                (false, true) => hi - 10.0 * (t + 0.9),
                (false, false) => 10.0 * t,
            };
            CqkInstance::new(d, a, b, l, u, r).unwrap()
        })
}

/// Simplex data with occasional repeated values.
pub fn simplex_data(max_n: usize) -> impl Strategy<Value = (Vec<f64>, f64)> {
    (
        proptest::collection::vec((-5.0f64..5.0, 0u8..6), 1..=max_n),
        0.01f64..10.0,
    )
        .prop_map(|(v, r)| {
            let y = v.into_iter().map(|(x, k)| if k == 0 { x.round() } else { x }).collect();
            (y, r)
        })
}

/// Checks the descent properties of the simplex Newton iteration started at
/// `lambda0 ≥ min(−y)`. Returns a description of the first violation.
pub fn check_descent(y: &[f64], r: f64, lambda0: f64) -> Result<(), String> {
    use cqk::oracle::oracle_simplex;
    use cqk::{newton_simplex_from, SolverOptions};

    let (root, _) = oracle_simplex(y, r);
    let mut trace = Vec::new();
    newton_simplex_from(y, r, lambda0, &SolverOptions::default(), &mut trace).map_err(|e| e.to_string())?;
    let first = trace[0];
    if first.phi == r {
        return Ok(());
    }
    // (a) the first step uses a positive one-sided slope
    let slope = if first.phi < r { first.dplus } else { first.dminus };
    if !(slope > 0.0) {
        return Err(format!("first step slope {slope} at λ₀ = {lambda0}"));
    }
    // the root is only known up to rounding
    let slack = 1e-12 * inf_norm(y).max(r).max(1.0);
    let last = trace.len() - 1;
    for k in 1..trace.len() {
        let t = trace[k];
        // (b) monotone descent onto the root
        if k < last && trace[k + 1].lambda > t.lambda {
            return Err(format!("λ increased at step {k}"));
        }
        if t.lambda < root - slack {
            return Err(format!("λ_{k} = {} below the root {root}", t.lambda));
        }
        // (c) above the target until the final iterate
        if k < last && !(t.phi > r) {
            return Err(format!("φ(λ_{k}) = {} not above r = {r}", t.phi));
        }
        // (d) positive left slope
        if !(t.dminus > 0.0) {
            return Err(format!("left slope {} at step {k}", t.dminus));
        }
    }
    Ok(())
}
