//! Estimation problems: parameter space, prior sampler, state encoders and
//! merit function.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;

use crate::covariant::{aligned_state, Alignment};
use crate::error::{Error, Result};
use crate::qcore::{Direction, QuantumState};
use crate::quadrature::SphereGrid;
use crate::scalar::Real;

/// θ ↦ (ψ_pre(θ), ψ_post(θ)) together with p(θ) and F(θ, θ̃).
pub trait EstimationProblem<T: Real>: Sync {
    type Param: Clone + fmt::Debug + Send + Sync;

    /// Draws θ from the prior.
    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Param;

    fn encode_pre(&self, theta: &Self::Param) -> Result<QuantumState<T>>;

    /// θ-dependent post-selected state, if any.
    fn encode_post(&self, _theta: &Self::Param) -> Result<Option<QuantumState<T>>> {
        Ok(None)
    }

    fn merit(&self, theta: &Self::Param, guess: &Self::Param) -> T;

    /// Weighted grid over the parameter space reproducing the prior.
    fn default_grid(&self) -> Vec<(Self::Param, T)>;
}

/// Finitely many hypotheses with explicit states and a merit table.
///
/// Parameters and guesses are indices. Row `i` of `merit` scores hypothesis
/// `i` against every guess label, so guesses may include labels (such as an
/// inconclusive answer) that are not hypotheses.
#[derive(Clone, Debug)]
pub struct DiscreteProblem<T: Real> {
    pub priors: Vec<T>,
    pub pre: Vec<QuantumState<T>>,
    pub post: Option<Vec<QuantumState<T>>>,
    pub merit: DMatrix<T>,
}

impl<T: Real> DiscreteProblem<T> {
    pub fn new(
        priors: Vec<T>,
        pre: Vec<QuantumState<T>>,
        post: Option<Vec<QuantumState<T>>>,
        merit: DMatrix<T>,
    ) -> Result<Self> {
        let n = priors.len();
        if n == 0 {
            return Err(Error::InvalidParameter("at least one hypothesis is required".into()));
        }
        if priors.iter().any(|&p| !(p >= T::zero())) {
            return Err(Error::InvalidParameter("priors must be non-negative".into()));
        }
        let total = priors.iter().fold(T::zero(), |s, &p| s + p);
        if (total - T::one()).abs() > T::lit(T::CHECK_TOL) {
            return Err(Error::InvalidParameter(format!("priors sum to {}, expected 1", total.to_f64_lossy())));
        }
        if pre.len() != n {
            return Err(Error::ShapeMismatch(format!("{} pre-selected states for {n} hypotheses", pre.len())));
        }
        if pre.iter().any(|s| s.dim() != pre[0].dim()) {
            return Err(Error::ShapeMismatch("pre-selected states differ in dimension".into()));
        }
        if let Some(post) = &post {
            if post.len() != n {
                return Err(Error::ShapeMismatch(format!("{} post-selected states for {n} hypotheses", post.len())));
            }
            if post.iter().any(|s| s.dim() != post[0].dim()) {
                return Err(Error::ShapeMismatch("post-selected states differ in dimension".into()));
            }
        }
        if merit.nrows() != n || merit.ncols() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "merit table is {}x{}, expected {n} rows",
                merit.nrows(),
                merit.ncols()
            )));
        }
        Ok(DiscreteProblem { priors, pre, post, merit })
    }

    pub fn hypotheses(&self) -> usize {
        self.priors.len()
    }

    pub fn guesses(&self) -> usize {
        self.merit.ncols()
    }

    /// Random problem for tests: random prior, states and merit in [0, 1].
    pub fn random<R: Rng + ?Sized>(rng: &mut R, hypotheses: usize, dim: usize, guesses: usize) -> Self {
        let raw: Vec<f64> = (0..hypotheses).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let priors = raw.iter().map(|&p| T::lit(p / total)).collect();
        let pre = (0..hypotheses).map(|_| crate::random::state(rng, dim)).collect();
        let merit = DMatrix::from_fn(hypotheses, guesses, |_, _| T::lit(rng.random_range(0.0..1.0)));
        DiscreteProblem::new(priors, pre, None, merit).expect("random problem is valid")
    }
}

impl<T: Real> EstimationProblem<T> for DiscreteProblem<T> {
    type Param = usize;

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = T::lit(rng.random::<f64>());
        let mut acc = T::zero();
        for (i, &p) in self.priors.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // roundoff at the top end: last hypothesis with nonzero weight
        self.priors.iter().rposition(|&p| p > T::zero()).unwrap_or(0)
    }

    fn encode_pre(&self, theta: &usize) -> Result<QuantumState<T>> {
        self.pre.get(*theta).cloned().ok_or_else(|| Error::InvalidParameter(format!("hypothesis {theta} out of range")))
    }

    fn encode_post(&self, theta: &usize) -> Result<Option<QuantumState<T>>> {
        match &self.post {
            None => Ok(None),
            Some(post) => post
                .get(*theta)
                .cloned()
                .map(Some)
                .ok_or_else(|| Error::InvalidParameter(format!("hypothesis {theta} out of range"))),
        }
    }

    fn merit(&self, theta: &usize, guess: &usize) -> T {
        self.merit[(*theta, *guess)]
    }

    fn default_grid(&self) -> Vec<(usize, T)> {
        self.priors.iter().enumerate().filter(|(_, &p)| p > T::zero()).map(|(i, &p)| (i, p)).collect()
    }
}

/// Direction on the sphere, uniform prior, encoded in N spins that are
/// parallel or antiparallel to it. Merit is the fidelity cos²(Φ/2).
#[derive(Clone, Debug)]
pub struct SpinDirectionProblem {
    pub spins: usize,
    pub alignment: Alignment,
    /// Gauss–Legendre order of the analytic sphere grid.
    pub grid_order: usize,
}

impl SpinDirectionProblem {
    pub fn new(spins: usize, alignment: Alignment, grid_order: usize) -> Result<Self> {
        if spins == 0 {
            return Err(Error::InvalidParameter("spin count must be at least 1".into()));
        }
        if alignment == Alignment::Antiparallel && spins % 2 == 1 {
            return Err(Error::InvalidParameter("antiparallel encoding needs an even spin count".into()));
        }
        if grid_order == 0 {
            return Err(Error::InvalidParameter("grid order must be positive".into()));
        }
        Ok(SpinDirectionProblem { spins, alignment, grid_order })
    }
}

impl<T: Real> EstimationProblem<T> for SpinDirectionProblem {
    type Param = Direction<T>;

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Direction<T> {
        crate::random::direction(rng)
    }

    fn encode_pre(&self, theta: &Direction<T>) -> Result<QuantumState<T>> {
        aligned_state(theta, self.spins, self.alignment)
    }

    fn merit(&self, theta: &Direction<T>, guess: &Direction<T>) -> T {
        theta.fidelity(guess)
    }

    fn default_grid(&self) -> Vec<(Direction<T>, T)> {
        SphereGrid::new(self.grid_order).expect("positive order").points
    }
}
