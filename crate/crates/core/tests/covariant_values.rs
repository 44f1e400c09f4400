use std::time::Instant;

use prepost_core::covariant::{
    build_cd_parallel, build_cd_quadrature, exact_order, max_generalized_eigen, optimal_fidelity, Alignment,
    CovariantProblem, Representation,
};

fn top(problem: &CovariantProblem) -> f64 {
    max_generalized_eigen(&build_cd_quadrature::<f64>(problem).unwrap()).unwrap().0
}

#[test]
fn parallel_spins_reach_n_plus_one_over_n_plus_two() {
    for n in 1..=10 {
        let l = top(&CovariantProblem::standard(n, Alignment::Parallel).unwrap());
        let expected = (n as f64 + 1.0) / (n as f64 + 2.0);
        assert!((l - expected).abs() < 1e-9, "N = {n}: {l}");
        let (a, _) = max_generalized_eigen(&build_cd_parallel::<f64>(n).unwrap()).unwrap();
        assert!((a - expected).abs() < 1e-12);
    }
}

#[test]
fn antiparallel_spins_with_fixed_post_selection() {
    let no_post = [0.7887, 0.8848, 0.9235];
    for ((n, expected), baseline) in [(2, 0.7887), (4, 0.8873), (6, 0.9306)].into_iter().zip(no_post) {
        let start = Instant::now();
        let r = optimal_fidelity::<f64>(&CovariantProblem::standard(n, Alignment::Antiparallel).unwrap()).unwrap();
        assert!((r.fidelity - expected).abs() < 5e-4, "N = {n}: {}", r.fidelity);
        assert!(r.entry_delta < 1e-10, "N = {n}: order not converged");
        if n == 2 {
            assert!((r.fidelity - baseline).abs() < 5e-4);
        } else {
            assert!(r.fidelity > baseline);
        }
        assert!(start.elapsed().as_secs() < 60);
    }
}

#[test]
fn low_order_is_flagged_by_the_doubling_check() {
    let p = CovariantProblem::new(4, Alignment::Antiparallel, 3, Representation::Full).unwrap();
    let r = optimal_fidelity::<f64>(&p).unwrap();
    assert!(r.entry_delta > 1e-6);
    assert_eq!(exact_order(4), 12);
}

#[test]
fn single_precision_build() {
    let l = max_generalized_eigen(
        &build_cd_quadrature::<f32>(&CovariantProblem::standard(2, Alignment::Antiparallel).unwrap()).unwrap(),
    )
    .unwrap()
    .0;
    assert!((l - 0.7887).abs() < 5e-4);
}
