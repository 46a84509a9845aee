mod common;

use common::{
    jacobi_max_eigenvalue, normal, oracle_lasso, oracle_slope, random_lambda, rng, Dense,
};
use rand::Rng;
use slope_core::linalg::estimate_lipschitz;
use slope_core::solver::{objective, solve_slope_with};
use slope_core::{
    lambda_bh, prox_sorted_l1, solve_slope, support, Dataset, DesignMatrix, SolverOptions,
    Tolerance,
};

fn dataset(x: &Dense, y: Vec<f64>) -> Dataset {
    Dataset::new(DesignMatrix::from_row_major(x.n, x.p, &x.rows).unwrap(), y).unwrap()
}

fn random_problem(seed: u64, n: usize, p: usize) -> (Dense, Vec<f64>) {
    let mut r = rng(seed);
    let x = Dense::random(&mut r, n, p, 1.0 / (n as f64).sqrt());
    let mut b0 = vec![0.0; p];
    for b in b0.iter_mut().take(p / 4 + 1) {
        *b = 3.0 * normal(&mut r);
    }
    let mut y = x.mul(&b0);
    y.iter_mut().for_each(|v| *v += 0.5 * normal(&mut r));
    (x, y)
}

#[test]
fn identity_design_is_one_prox() {
    let mut r = rng(10);
    for _ in 0..50 {
        let p = r.random_range(1..40);
        let y: Vec<f64> = (0..p).map(|_| 3.0 * normal(&mut r)).collect();
        let lam = random_lambda(&mut r, p, 3.0);
        let data = Dataset::new(DesignMatrix::identity(p), y.clone()).unwrap();
        let sol = solve_slope(&data, &lam, 1e-12, 1000).unwrap();
        assert!(sol.converged);
        let expected = prox_sorted_l1(&y, &lam).unwrap();
        // The objective is 1-strongly convex, so ½‖β - β*‖² is at most the gap.
        let dist: f64 = sol
            .beta
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let rounding = 1e-12 * (1.0 + sol.objective);
        assert!(dist.sqrt() <= (2.0 * (sol.duality_gap + rounding)).sqrt());
        assert!(dist.sqrt() < 2e-6);
    }
}

#[test]
fn zero_penalty_is_least_squares() {
    let mut r = rng(11);
    for _ in 0..20 {
        let n = r.random_range(2..8);
        let x = Dense::random(&mut r, n, n, 1.0);
        let y: Vec<f64> = (0..n).map(|_| normal(&mut r)).collect();
        let data = dataset(&x, y.clone());
        let sol = solve_slope(&data, &vec![0.0; n], 1e-9, 2_000_000).unwrap();
        assert!(sol.converged, "gap {}", sol.duality_gap);
        let f = x.mul(&sol.beta);
        let resid: Vec<f64> = y.iter().zip(&f).map(|(a, b)| a - b).collect();
        let corr = x.tr_mul(&resid);
        assert!(corr.iter().all(|c| c.abs() <= 1e-9));
    }
}

#[test]
fn matches_independent_proximal_gradient_oracle() {
    for seed in 0..5 {
        let (x, y) = random_problem(100 + seed, 50, 20);
        let mut r = rng(200 + seed);
        let lam = random_lambda(&mut r, 20, 1.5);
        let data = dataset(&x, y.clone());
        let sol = solve_slope(&data, &lam, 1e-11, 100_000).unwrap();
        assert!(sol.converged);
        let oracle = oracle_slope(&x, &y, &lam, 5_000);
        let f_oracle = x.objective(&y, &lam, &oracle);
        let f_sol = x.objective(&y, &lam, &sol.beta);
        assert!((f_sol - f_oracle).abs() <= 1e-6, "{f_sol} vs {f_oracle}");
        assert!((sol.objective - f_sol).abs() <= 1e-10);
    }
}

#[test]
fn constant_sequence_matches_coordinate_descent_lasso() {
    let mut r = rng(12);
    for trial in 0..100 {
        let n = r.random_range(5..=100);
        let p = r.random_range(1..=50);
        let (x, y) = random_problem(1000 + trial, n, p);
        let lam_value = r.random_range(0.05..1.5);
        let lam = vec![lam_value; p];
        let data = dataset(&x, y.clone());
        let sol = solve_slope(&data, &lam, 1e-10, 200_000).unwrap();
        assert!(sol.converged, "trial {trial}: gap {}", sol.duality_gap);
        let cd = oracle_lasso(&x, &y, lam_value);
        let f_cd = x.objective(&y, &lam, &cd);
        assert!(
            (sol.objective - f_cd).abs() <= 1e-6,
            "trial {trial}: {} vs {f_cd}",
            sol.objective
        );
    }
}

#[test]
fn reported_objective_and_certificate_are_consistent() {
    let (x, y) = random_problem(7, 30, 60);
    let lam = lambda_bh(60, 0.2, 0.0, 0.5).unwrap();
    let data = dataset(&x, y);
    let sol = solve_slope(&data, lam.values(), 1e-9, 50_000).unwrap();
    assert!(sol.converged);
    assert!(sol.duality_gap <= 1e-9);
    let recomputed = objective(&data, lam.values(), &sol.beta).unwrap();
    assert!((recomputed - sol.objective).abs() <= 1e-10 * (1.0 + recomputed));
}

#[test]
fn relative_tolerance_and_warm_start() {
    let (x, y) = random_problem(8, 40, 80);
    let lam = lambda_bh(80, 0.2, 0.0, 0.5).unwrap();
    let data = dataset(&x, y);
    let cold = solve_slope_with(&data, lam.values(), &SolverOptions::default()).unwrap();
    assert!(cold.converged);
    assert!(cold.duality_gap <= 1e-8 * (1.0 + cold.objective.abs()));
    let warm = solve_slope_with(
        &data,
        lam.values(),
        &SolverOptions {
            tol: Tolerance::Relative(1e-8),
            max_iter: 1000,
            initial: Some(cold.beta.clone()),
        },
    )
    .unwrap();
    assert!(warm.converged);
    assert!(warm.iterations <= 2);
}

#[test]
fn standardized_design_rescales_the_solution() {
    // With X̃ = √n X and b̃⁰ = b⁰/√n the response is unchanged, and for the
    // un-normalized loss ½‖y - X̃b̃‖² the solution is b̂/√n when λ̃ = √n λ.
    let n = 40;
    let (x, y) = random_problem(9, n, 25);
    let root_n = (n as f64).sqrt();
    let x_std = Dense {
        n: x.n,
        p: x.p,
        rows: x.rows.iter().map(|v| v * root_n).collect(),
    };
    let lam = lambda_bh(25, 0.2, 0.0, 0.5).unwrap();
    let lam_std: Vec<f64> = lam.values().iter().map(|l| l * root_n).collect();
    let a = solve_slope(&dataset(&x, y.clone()), lam.values(), 1e-13, 200_000).unwrap();
    let b = solve_slope(&dataset(&x_std, y), &lam_std, 1e-13, 200_000).unwrap();
    assert!(a.converged && b.converged);
    for (u, v) in a.beta.iter().zip(&b.beta) {
        assert!((u - v * root_n).abs() <= 1e-8, "{u} vs {}", v * root_n);
    }
}

#[test]
fn lipschitz_bounds_the_spectral_norm() {
    let mut r = rng(13);
    for _ in 0..20 {
        let x = Dense::random(&mut r, 50, 20, 1.0);
        let exact = jacobi_max_eigenvalue(x.gram());
        let l = estimate_lipschitz(&DesignMatrix::from_row_major(50, 20, &x.rows).unwrap());
        assert!(l >= 0.999 * exact, "{l} < 0.999 * {exact}");
        assert!(l <= 1.011 * exact);
    }
}

#[test]
fn prox_zeros_are_exact() {
    let mut r = rng(14);
    for _ in 0..1000 {
        let p = r.random_range(1..30);
        let v: Vec<f64> = (0..p).map(|_| normal(&mut r)).collect();
        let lam = random_lambda(&mut r, p, 2.0);
        let out = prox_sorted_l1(&v, &lam).unwrap();
        assert_eq!(support(&out, 0.0), support(&out, 1e-8));
    }
}

#[test]
fn non_finite_inputs_are_data_errors() {
    let x = DesignMatrix::from_row_major(2, 2, &[1.0, f64::NAN, 0.0, 1.0]).unwrap();
    assert!(Dataset::new(x, vec![1.0, 2.0]).is_err());
    let x = DesignMatrix::identity(2);
    assert!(Dataset::new(x, vec![1.0, f64::INFINITY]).is_err());
}
