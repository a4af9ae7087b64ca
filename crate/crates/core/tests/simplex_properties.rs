mod common;

use common::{check_descent, inf_norm, max_diff, simplex_data};
use cqk::oracle::oracle_simplex;
use cqk::{
    condat_project, jacobi_project_simplex, newton_project_simplex, project_l1, project_l1_warm,
    simplex_init_lambda, SolverOptions,
};
use proptest::prelude::*;

fn opts() -> SolverOptions<f64> {
    SolverOptions::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn descent_from_any_start_above_the_lowest_breakpoint(
        (y, r) in simplex_data(40),
        offset in 0.0f64..20.0,
    ) {
        let lowest = y.iter().map(|v| -v).fold(f64::INFINITY, f64::min);
        if let Err(e) = check_descent(&y, r, lowest + offset) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn methods_agree_with_the_oracle((y, r) in simplex_data(60), workers in 1usize..4) {
        let (_, xs) = oracle_simplex(&y, r);
        let tol = 1e-10 * inf_norm(&y).max(1.0);
        let newton = newton_project_simplex(&y, r, &opts(), None).unwrap().dense();
        prop_assert!(max_diff(&newton, &xs) <= tol);
        let nofix = newton_project_simplex(&y, r, &opts().without_fixing(), None).unwrap().dense();
        prop_assert!(max_diff(&nofix, &xs) <= tol);
        prop_assert!(max_diff(&condat_project(&y, r).unwrap(), &xs) <= tol);
        let jac = jacobi_project_simplex(&y, r, &opts(), workers).unwrap().dense();
        prop_assert!(max_diff(&jac, &xs) <= tol);
        let par = cqk::par_project_simplex(&y, r, &opts(), workers).unwrap().dense();
        prop_assert!(max_diff(&par, &xs) <= tol);
    }

    #[test]
    fn initializer_is_an_upper_bound((y, r) in simplex_data(60)) {
        let (root, _) = oracle_simplex(&y, r);
        let all: Vec<usize> = (0..y.len()).collect();
        let init = simplex_init_lambda(&y, r, &all, None).unwrap();
        prop_assert!(init.lambda0 >= root - 1e-12 * inf_norm(&y).max(r).max(1.0));
        // indices it fixes are zero at the solution
        let (_, xs) = oracle_simplex(&y, r);
        for &i in &init.fixed {
            prop_assert_eq!(xs[i], 0.0);
        }
    }

    #[test]
    fn warm_start_keeps_the_answer((y, r) in simplex_data(60), noise in proptest::collection::vec(-0.3f64..0.3, 60)) {
        let cold = newton_project_simplex(&y, r, &opts(), None).unwrap().dense();
        // any nonnegative estimate, good or bad
        let est: Vec<f64> = cold.iter().zip(&noise).map(|(x, e)| (x + e).max(0.0)).collect();
        let warm = newton_project_simplex(&y, r, &opts(), Some(&est)).unwrap().dense();
        prop_assert!(max_diff(&cold, &warm) <= 1e-10 * inf_norm(&y).max(1.0));
    }

    #[test]
    fn l1_projection_invariants(y in proptest::collection::vec(-5.0f64..5.0, 1..60), r in 0.01f64..20.0) {
        let x = project_l1(&y, r, &opts()).unwrap();
        let norm_y: f64 = y.iter().map(|v| v.abs()).sum();
        if norm_y <= r {
            prop_assert_eq!(&x, &y);
        } else {
            let norm_x: f64 = x.iter().map(|v| v.abs()).sum();
            prop_assert!((norm_x - r).abs() <= 1e-10 * r.max(1.0));
            for (xi, yi) in x.iter().zip(&y) {
                prop_assert!(*xi == 0.0 || xi.signum() == yi.signum());
                prop_assert!(xi.abs() <= yi.abs());
            }
            let abs: Vec<f64> = y.iter().map(|v| v.abs()).collect();
            let (_, xs) = oracle_simplex(&abs, r);
            let mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
            prop_assert!(max_diff(&mags, &xs) <= 1e-10 * inf_norm(&y).max(1.0));
        }
    }

    #[test]
    fn l1_warm_start_keeps_the_answer(y in proptest::collection::vec(-5.0f64..5.0, 1..60), r in 0.01f64..5.0) {
        let cold = project_l1(&y, r, &opts()).unwrap();
        let shifted: Vec<f64> = y.iter().map(|v| v * 1.05).collect();
        let warm = project_l1_warm(&y, r, &opts(), Some(&project_l1(&shifted, r, &opts()).unwrap())).unwrap();
        prop_assert!(max_diff(&cold, &warm.x) <= 1e-10 * inf_norm(&y).max(1.0));
    }
}

#[test]
fn l1_zero_entries_stay_zero() {
    let x = project_l1(&[0.0, 3.0, -0.0, 1.0], 1.0, &opts()).unwrap();
    assert_eq!(x, vec![0.0, 1.0, 0.0, 0.0]);
}
