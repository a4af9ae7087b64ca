mod common;

use common::{cqk_instance, inf_norm, max_diff, simplex_data};
use cqk::oracle::{oracle_lambda, oracle_simplex, CompensatedSum, OracleStatus};
use cqk::{CqkInstance, SimplexInstance};
use proptest::prelude::*;

/// Plain bisection on a direct evaluation of `bᵀx(λ)`; slow but shares
/// nothing with either the oracle or the solvers.
fn bisect(inst: &CqkInstance<f64>) -> Option<f64> {
    let phi = |t: f64| -> f64 {
        (0..inst.len())
            .map(|i| {
                let x = ((inst.b()[i] * t + inst.a()[i]) / inst.d()[i]).clamp(inst.l()[i], inst.u()[i]);
                inst.b()[i] * x
            })
            .sum()
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while phi(lo) > inst.r() {
        lo *= 2.0;
        if lo < -1e12 {
            return None;
        }
    }
    while phi(hi) < inst.r() {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < inst.r() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[test]
fn compensated_sum_recovers_cancelled_terms() {
    let s: CompensatedSum = [1e16, 1.0, -1e16, 1.0].into_iter().collect();
    assert_eq!(s.value(), 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn oracle_agrees_with_bisection(inst in cqk_instance(12)) {
        let o = oracle_lambda(&inst);
        match bisect(&inst) {
            None => prop_assert_eq!(o.status, OracleStatus::Infeasible),
            Some(t) => {
                prop_assert_eq!(o.status, OracleStatus::Solved);
                // λ can be non-unique on a plateau; compare primal points
                let x = inst.eval_x(t);
                prop_assert!(max_diff(&x, &o.x) <= 1e-7 * (1.0 + inf_norm(&o.x)));
            }
        }
    }

    #[test]
    fn oracle_primal_is_feasible(inst in cqk_instance(12)) {
        let o = oracle_lambda(&inst);
        if o.status == OracleStatus::Solved {
            let bx: f64 = o.x.iter().zip(inst.b()).map(|(x, b)| x * b).sum();
            let scale: f64 = o.x.iter().zip(inst.b()).map(|(x, b)| (x * b).abs()).sum::<f64>() + inst.r().abs();
            prop_assert!((bx - inst.r()).abs() <= 1e-12 * scale.max(1.0));
            for i in 0..inst.len() {
                prop_assert!(inst.l()[i] <= o.x[i] && o.x[i] <= inst.u()[i]);
            }
        }
    }

    #[test]
    fn oracle_simplex_kkt((y, r) in simplex_data(30)) {
        let (lambda, x) = oracle_simplex(&y, r);
        let scale = 1.0f64.max(inf_norm(&y)).max(r);
        let total: f64 = x.iter().sum();
        prop_assert!((total - r).abs() <= 1e-12 * scale * y.len() as f64);
        for (xi, yi) in x.iter().zip(&y) {
            if *xi > 0.0 {
                prop_assert_eq!(*xi, yi + lambda);
            } else {
                prop_assert!(yi + lambda <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn oracle_simplex_matches_knapsack_oracle((y, r) in simplex_data(30)) {
        let (lambda, x) = oracle_simplex(&y, r);
        let inst = SimplexInstance::new(y.clone(), r).unwrap().to_cqk();
        let o = oracle_lambda(&inst);
        prop_assert_eq!(o.status, OracleStatus::Solved);
        // both recover x from their own λ by the same map
        prop_assert_eq!(&inst.eval_x(lambda), &x);
        let scale = 1.0f64.max(inf_norm(&y));
        prop_assert!((o.lambda - lambda).abs() <= 1e-13 * scale * y.len() as f64);
        prop_assert!(max_diff(&inst.eval_x(o.lambda), &x) <= 1e-13 * scale * y.len() as f64);
    }
}
