//! Unambiguous estimation of the pair ψ_± = α|0⟩ ± β|1⟩ with and without
//! the post-selected states φ_± = √(1-ε²)|0⟩ ± ε|1⟩.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamesim::DiscreteProblem;
use crate::instruments::{conditional_prob_prepost, KrausSet, NormMode, PrePostEnsemble};
use crate::qcore::{ComplexOperator, QuantumState};
use crate::scalar::{creal, Real};

/// Outcome labels of the pre/post instrument.
pub const PLUS: usize = 0;
pub const MINUS: usize = 1;
pub const INCONCLUSIVE: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UseParams<T> {
    pub alpha: T,
    pub beta: T,
    pub epsilon: T,
}

impl<T: Real> UseParams<T> {
    pub fn new(alpha: T, beta: T, epsilon: T) -> Result<Self> {
        if !(alpha > beta && beta > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "amplitudes must satisfy alpha > beta > 0, got alpha = {}, beta = {}",
                alpha.to_f64_lossy(),
                beta.to_f64_lossy()
            )));
        }
        let defect = (alpha * alpha + beta * beta - T::one()).abs();
        if defect > T::lit(T::NORM_TOL) {
            return Err(Error::NotNormalized { norm: (alpha * alpha + beta * beta).sqrt().to_f64_lossy() });
        }
        if !(epsilon >= T::zero() && epsilon < T::one()) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1), got {}", epsilon.to_f64_lossy())));
        }
        Ok(UseParams { alpha, beta, epsilon })
    }

    /// Parameters from α² alone, with β = √(1 - α²).
    pub fn from_alpha_sq(alpha_sq: T, epsilon: T) -> Result<Self> {
        if !(alpha_sq > T::lit(0.5) && alpha_sq < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "alpha^2 must lie in (0.5, 1), got {}",
                alpha_sq.to_f64_lossy()
            )));
        }
        Self::new(alpha_sq.sqrt(), (T::one() - alpha_sq).sqrt(), epsilon)
    }

    /// ψ_+ (sign = +1) or ψ_- (sign = -1).
    pub fn pre_state(&self, plus: bool) -> QuantumState<T> {
        let b = if plus { self.beta } else { -self.beta };
        QuantumState::from_reals(&[self.alpha, b]).expect("normalised by construction")
    }

    pub fn post_state(&self, plus: bool) -> QuantumState<T> {
        let e = if plus { self.epsilon } else { -self.epsilon };
        let c = (T::one() - self.epsilon * self.epsilon).sqrt();
        QuantumState::from_reals(&[c, e]).expect("normalised by construction")
    }

    pub fn ensemble(&self, plus: bool) -> PrePostEnsemble<T> {
        PrePostEnsemble::new(self.pre_state(plus), self.post_state(plus))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoPostOutcome<T> {
    pub success: T,
    pub inconclusive: T,
}

/// Optimal unambiguous estimation without post-selection:
/// P(success) = √(1 - (α² - β²)²(1 - 2ε²)²).
pub fn use_optimal_no_post<T: Real>(p: &UseParams<T>) -> NoPostOutcome<T> {
    let diff = p.alpha * p.alpha - p.beta * p.beta;
    let f = T::one() - T::lit(2.0) * p.epsilon * p.epsilon;
    let success = (T::one() - diff * diff * f * f).max(T::zero()).sqrt();
    NoPostOutcome { success, inconclusive: T::one() - success }
}

/// Kraus operators {A_+, A_-, A_0}:
/// A_± = |0⟩⟨ψ_∓^⊥| / √(2α²), A_0 = √(1 - β²/α²) |1⟩⟨0|,
/// with ψ_±^⊥ = β|0⟩ ∓ α|1⟩.
pub fn use_prepost_instrument<T: Real>(p: &UseParams<T>) -> Result<KrausSet<T>> {
    let (a, b) = (p.alpha, p.beta);
    let s = T::one() / (T::lit(2.0) * a * a).sqrt();
    // |0⟩⟨v| has v† as its first row
    let bra_row = |v0: T, v1: T| {
        ComplexOperator::from_row_slice(2, 2, &[creal(v0 * s), creal(v1 * s), creal(T::zero()), creal(T::zero())])
    };
    let plus = bra_row(b, a)?; // ψ_-^⊥ = β|0⟩ + α|1⟩
    let minus = bra_row(b, -a)?; // ψ_+^⊥ = β|0⟩ - α|1⟩
    let g = (T::one() - b * b / (a * a)).max(T::zero()).sqrt();
    let zero = ComplexOperator::from_real_rows(2, 2, &[T::zero(), T::zero(), g, T::zero()])?;
    KrausSet::new(vec![plus, minus, zero], NormMode::Exact)
}

/// P_A(0|±) = ε²α²(1 - β²/α²) / (ε²α²(1 - β²/α²) + 2β²(1 - ε²)).
pub fn prepost_inconclusive<T: Real>(p: &UseParams<T>) -> T {
    let e2 = p.epsilon * p.epsilon;
    let a2 = p.alpha * p.alpha;
    let b2 = p.beta * p.beta;
    let num = e2 * a2 * (T::one() - b2 / a2);
    num / (num + T::lit(2.0) * b2 * (T::one() - e2))
}

/// lim_{ε→0} P_A(0|+)/ε² = (α² - β²) / (2β²).
pub fn inconclusive_ratio_limit<T: Real>(p: &UseParams<T>) -> T {
    let a2 = p.alpha * p.alpha;
    let b2 = p.beta * p.beta;
    (a2 - b2) / (T::lit(2.0) * b2)
}

/// Two-hypothesis game for the pair: guesses +, - or inconclusive, merit 1
/// for a correct answer. `priors` weight (ψ_+, ψ_-).
pub fn use_problem<T: Real>(p: &UseParams<T>, priors: [T; 2]) -> Result<DiscreteProblem<T>> {
    let merit = DMatrix::from_row_slice(2, 3, &[T::one(), T::zero(), T::zero(), T::zero(), T::one(), T::zero()]);
    DiscreteProblem::new(
        priors.to_vec(),
        vec![p.pre_state(true), p.pre_state(false)],
        Some(vec![p.post_state(true), p.post_state(false)]),
        merit,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub epsilon: f64,
    /// Inconclusive probability without post-selection.
    pub p_m_inconclusive: f64,
    /// Inconclusive probability with the pre/post instrument, closed form.
    pub p_a_inconclusive: f64,
    /// Same, from the conditional rule applied to the instrument.
    pub p_a_inconclusive_numeric: f64,
    /// P_A(0|+)/ε²; absent at ε = 0 where the post-selected states coincide.
    pub ratio: Option<f64>,
}

/// One row per ε at fixed α².
pub fn use_gap_report<T: Real>(alpha_sq: T, epsilons: &[T]) -> Result<Vec<GapRow>> {
    epsilons
        .iter()
        .map(|&eps| {
            let p = UseParams::from_alpha_sq(alpha_sq, eps)?;
            let closed = prepost_inconclusive(&p);
            let numeric = conditional_prob_prepost(&use_prepost_instrument(&p)?, &p.ensemble(true))?[INCONCLUSIVE];
            let e2 = eps * eps;
            Ok(GapRow {
                epsilon: eps.to_f64_lossy(),
                p_m_inconclusive: use_optimal_no_post(&p).inconclusive.to_f64_lossy(),
                p_a_inconclusive: closed.to_f64_lossy(),
                p_a_inconclusive_numeric: numeric.to_f64_lossy(),
                ratio: (eps > T::zero()).then(|| (closed / e2).to_f64_lossy()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::dilate_and_simulate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameter_validation() {
        assert!(UseParams::new(0.6f64, 0.8, 0.1).is_err());
        assert!(UseParams::new(0.9f64, 0.1, 0.1).is_err());
        assert!(UseParams::from_alpha_sq(0.8f64, 1.0).is_err());
        assert!(UseParams::from_alpha_sq(0.5f64, 0.1).is_err());
        assert!(UseParams::from_alpha_sq(0.8f64, 0.0).is_ok());
    }

    #[test]
    fn no_post_examples() {
        let p = UseParams::from_alpha_sq(0.8f64, 0.0).unwrap();
        let r = use_optimal_no_post(&p);
        assert!((r.success - 0.8).abs() < 1e-12 && (r.inconclusive - 0.2).abs() < 1e-12);
        let p = UseParams::from_alpha_sq(0.8f64, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert!((use_optimal_no_post(&p).success - 1.0).abs() < 1e-15);
        let p = UseParams::from_alpha_sq(0.5f64 + 1e-9, 0.0).unwrap();
        assert!(use_optimal_no_post(&p).success > 1.0 - 1e-12);
    }

    #[test]
    fn instrument_is_exact_and_unambiguous() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..100 {
            let a2: f64 = rng.random_range(0.51..0.99);
            let p = UseParams::from_alpha_sq(a2, rng.random_range(0.0..0.6)).unwrap();
            let k = use_prepost_instrument(&p).unwrap();
            assert!(k.gram_sum().max_abs_diff(&ComplexOperator::identity(2)) < 1e-12);
            let plus = conditional_prob_prepost(&k, &p.ensemble(true)).unwrap_or(vec![0.0; 3]);
            let minus = conditional_prob_prepost(&k, &p.ensemble(false)).unwrap_or(vec![0.0; 3]);
            assert_eq!(plus[MINUS], 0.0);
            assert_eq!(minus[PLUS], 0.0);
        }
    }

    #[test]
    fn closed_form_matches_rule_and_dilation() {
        let p = UseParams::from_alpha_sq(0.8f64, 0.1).unwrap();
        let k = use_prepost_instrument(&p).unwrap();
        let rule = conditional_prob_prepost(&k, &p.ensemble(true)).unwrap();
        let dil = dilate_and_simulate(&k, &p.ensemble(true)).unwrap();
        let closed = prepost_inconclusive(&p);
        assert!((rule[INCONCLUSIVE] - closed).abs() < 1e-14);
        assert!((dil[INCONCLUSIVE] - closed).abs() < 1e-12);
        let minus = conditional_prob_prepost(&k, &p.ensemble(false)).unwrap();
        assert!((minus[INCONCLUSIVE] - closed).abs() < 1e-14);
    }

    #[test]
    fn gap_table() {
        let rows = use_gap_report(0.8f64, &[0.0, 0.025, 0.05, 0.1]).unwrap();
        assert_eq!(rows[0].ratio, None);
        assert_eq!(rows[0].p_a_inconclusive, 0.0);
        assert!((rows[0].p_m_inconclusive - 0.2).abs() < 1e-12);
        let (r1, r2) = (rows[1].ratio.unwrap(), rows[2].ratio.unwrap());
        assert!((r1 - r2).abs() / r1 < 0.05);
        let limit = inconclusive_ratio_limit(&UseParams::from_alpha_sq(0.8f64, 0.0).unwrap());
        assert!((r1 - limit).abs() / limit < 0.01);
        assert!(rows[3].p_a_inconclusive < rows[3].p_m_inconclusive / 10.0);
    }
}
