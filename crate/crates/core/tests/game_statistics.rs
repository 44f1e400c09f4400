use nalgebra::DVector;

use prepost_core::covariant::{covariant_design_povm, exact_order, Alignment};
use prepost_core::gamesim::{run_game, run_game_with_reference, GameConfig, SpinDirectionProblem};
use prepost_core::instruments::Instrument;
use prepost_core::scalar::Cx;
use prepost_core::scenarios::{
    prepost_inconclusive, use_prepost_instrument, use_problem, UseParams, INCONCLUSIVE, MINUS, PLUS,
};
use prepost_core::Scenario;

fn within(x: f64, target: f64, sigma: f64, k: f64) -> bool {
    (x - target).abs() <= k * sigma
}

#[test]
fn gated_frequencies_follow_the_conditional_rule() {
    let p = UseParams::from_alpha_sq(0.8f64, 0.1).unwrap();
    let problem = use_problem(&p, [1.0, 0.0]).unwrap();
    let k = use_prepost_instrument(&p).unwrap();
    let n = 100_000u64;
    let r = run_game(
        &problem,
        Instrument::Kraus(&k),
        &[PLUS, MINUS, INCONCLUSIVE],
        &GameConfig::new(n, 11, Scenario::PrePost),
    )
    .unwrap();

    let q = prepost_inconclusive(&p);
    let f = r.outcome_counts[INCONCLUSIVE] as f64 / n as f64;
    assert!(within(f, q, (q * (1.0 - q) / n as f64).sqrt(), 3.0), "{f} vs {q}");
    assert_eq!(r.outcome_counts[MINUS], 0);

    // before the gate, branch frequencies are the plain ‖A_k ψ‖² and differ
    let attempts: u64 = r.pre_gate_counts.iter().sum();
    let pre_gate = r.pre_gate_counts[INCONCLUSIVE] as f64 / attempts as f64;
    let sigma = (pre_gate * (1.0 - pre_gate) / attempts as f64).sqrt();
    assert!(!within(pre_gate, q, sigma, 3.0), "{pre_gate} vs {q}");

    // retries are geometric with the acceptance probability
    let e = p.ensemble(true);
    let acc: f64 = k.amplitudes(&e).unwrap().iter().map(|z| z.norm_sqr()).sum();
    let sigma = ((1.0 - acc) / (acc * acc) / n as f64).sqrt();
    assert!(within(r.mean_attempts, 1.0 / acc, sigma, 3.0), "{} vs {}", r.mean_attempts, 1.0 / acc);
}

#[test]
fn unambiguity_is_exact_in_simulation() {
    let p = UseParams::from_alpha_sq(0.8f64, 0.1).unwrap();
    let problem = use_problem(&p, [0.0, 1.0]).unwrap();
    let k = use_prepost_instrument(&p).unwrap();
    let r = run_game(
        &problem,
        Instrument::Kraus(&k),
        &[PLUS, MINUS, INCONCLUSIVE],
        &GameConfig::new(100_000, 12, Scenario::PrePost),
    )
    .unwrap();
    assert_eq!(r.outcome_counts[PLUS], 0);
    assert_eq!(r.pre_gate_counts[PLUS], 0);
}

#[test]
fn use_game_matches_analytic_merit_and_is_reproducible() {
    let p = UseParams::from_alpha_sq(0.8f64, 0.1).unwrap();
    let problem = use_problem(&p, [0.5, 0.5]).unwrap();
    let k = use_prepost_instrument(&p).unwrap();
    let cfg = GameConfig::new(100_000, 13, Scenario::PrePost);
    let est = [PLUS, MINUS, INCONCLUSIVE];
    let r = run_game_with_reference(&problem, Instrument::Kraus(&k), &est, &cfg).unwrap();
    let analytic = r.analytic_merit.unwrap();
    assert!((analytic - (1.0 - prepost_inconclusive(&p))).abs() < 1e-12);
    assert!(within(r.empirical_merit, analytic, r.standard_error, 3.0));
    let again = run_game_with_reference(&problem, Instrument::Kraus(&k), &est, &cfg).unwrap();
    assert_eq!(r, again);
}

#[test]
fn single_spin_direction_game_reaches_two_thirds() {
    let problem = SpinDirectionProblem::new(1, Alignment::Parallel, exact_order(1)).unwrap();
    let up = DVector::from_vec(vec![Cx::new(1.0f64, 0.0), Cx::new(0.0, 0.0)]);
    let (povm, guesses) = covariant_design_povm(1, &up, exact_order(1)).unwrap();
    let cfg = GameConfig::new(100_000, 14, Scenario::PreOnly);
    let r = run_game_with_reference(&problem, Instrument::Povm(&povm), &guesses, &cfg).unwrap();
    let analytic = r.analytic_merit.unwrap();
    assert!((analytic - 2.0 / 3.0).abs() < 1e-6, "{analytic}");
    assert!(within(r.empirical_merit, 2.0 / 3.0, r.standard_error, 3.0), "{}", r.empirical_merit);
}
