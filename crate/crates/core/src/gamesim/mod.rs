//! Monte Carlo simulation of the estimation game with a post-selection gate.
//!
//! Each trial draws θ from the prior and then repeats preparation,
//! measurement and post-selection with θ held fixed until the gate passes.
//! Only gated outcomes reach the estimator. Trials use independent
//! ChaCha8 streams: trial `i` runs on stream `i` of the generator seeded
//! with the run seed, so results do not depend on scheduling. Trials are
//! folded in fixed-size blocks that are merged in index order, which makes
//! every statistic bit-for-bit reproducible for any thread count.

mod problem;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instruments::{average_merit, Instrument, NormMode, Scenario};
use crate::qcore::{check_dim, QuantumState};
use crate::scalar::Real;

pub use problem::{DiscreteProblem, EstimationProblem, SpinDirectionProblem};

pub const DEFAULT_MAX_RETRIES: u64 = 1_000_000;

const BLOCK: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GameConfig {
    pub trials: u64,
    pub seed: u64,
    /// Attempts allowed per trial before giving up.
    pub max_retries: u64,
    pub scenario: Scenario,
}

impl GameConfig {
    pub fn new(trials: u64, seed: u64, scenario: Scenario) -> Self {
        GameConfig { trials, seed, max_retries: DEFAULT_MAX_RETRIES, scenario }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trial count must be positive".into()));
        }
        if self.max_retries == 0 {
            return Err(Error::InvalidParameter("max_retries must be positive".into()));
        }
        Ok(())
    }
}

/// Result of one gated trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord<T: Real, P> {
    pub theta: P,
    pub outcome: usize,
    pub merit: T,
    pub attempts: u64,
    /// Measurement branch of every attempt, gated or not.
    pub branches: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameReport {
    pub trials: u64,
    pub seed: u64,
    pub max_retries: u64,
    pub scenario: Scenario,
    pub empirical_merit: f64,
    pub standard_error: f64,
    pub analytic_merit: Option<f64>,
    /// Outcomes that passed the gate.
    pub outcome_counts: Vec<u64>,
    /// Measurement branches of every attempt, before the gate.
    pub pre_gate_counts: Vec<u64>,
    pub mean_attempts: f64,
    /// Number of trials needing each attempt count.
    pub retry_histogram: BTreeMap<u64, u64>,
}

/// Branch probabilities for a fixed θ: `weights[k]` is the chance that the
/// instrument lands in branch k, `pass[k]` the chance that branch k then
/// clears the post-selection. Whatever weight is missing is dumped.
struct Branches<T> {
    weights: Vec<T>,
    pass: Option<Vec<T>>,
}

fn check_compatible<T: Real>(instrument: Instrument<'_, T>, scenario: Scenario) -> Result<()> {
    match (scenario, instrument) {
        (Scenario::PrePost, Instrument::Povm(_)) => {
            Err(Error::ModeMismatch("pre- and post-selection needs Kraus operators, not POVM elements".into()))
        }
        (Scenario::PreOnly, i) if i.mode() != NormMode::Exact => {
            Err(Error::ModeMismatch("pre-selection only requires an exactly normalised instrument".into()))
        }
        _ => Ok(()),
    }
}

fn branches<T: Real>(
    instrument: Instrument<'_, T>,
    scenario: Scenario,
    pre: &QuantumState<T>,
    post: Option<&QuantumState<T>>,
) -> Result<Branches<T>> {
    check_dim(instrument.input_dim(), pre.dim())?;
    let outputs: Option<Vec<_>> = match instrument {
        Instrument::Povm(_) => None,
        Instrument::Kraus(k) => Some(k.apply_all(pre.amplitudes())),
    };
    let mut weights: Vec<T> = match (instrument, &outputs) {
        (Instrument::Povm(p), _) => p.elements().iter().map(|m| m.expectation(pre.amplitudes())).collect(),
        (_, Some(out)) => out.iter().map(|v| v.norm_squared()).collect(),
        _ => unreachable!(),
    };
    let renormalize = match scenario {
        Scenario::PreOnly => true,
        Scenario::FixedPost => instrument.mode() == NormMode::Exact,
        Scenario::PrePost => false,
    };
    if renormalize {
        let total = weights.iter().fold(T::zero(), |s, &w| s + w);
        weights.iter_mut().for_each(|w| *w /= total);
    }
    let pass = match scenario {
        Scenario::PrePost => {
            let post =
                post.ok_or_else(|| Error::ModeMismatch("pre- and post-selection needs a post-selected state".into()))?;
            let out = outputs.expect("Kraus instrument");
            let mut pass = Vec::with_capacity(out.len());
            for (v, &w) in out.iter().zip(&weights) {
                check_dim(v.len(), post.dim())?;
                pass.push(if w > T::zero() {
                    (post.amplitudes().dotc(v).norm_sqr() / w).min(T::one())
                } else {
                    T::zero()
                });
            }
            Some(pass)
        }
        _ => None,
    };
    Ok(Branches { weights, pass })
}

fn uniform<T: Real>(rng: &mut ChaCha8Rng) -> T {
    T::lit(rng.random::<f64>())
}

/// Runs trial `index` of the game on its own stream.
pub fn run_trial<T: Real, P: EstimationProblem<T>>(
    problem: &P,
    instrument: Instrument<'_, T>,
    estimator: &[P::Param],
    cfg: &GameConfig,
    index: u64,
) -> Result<TrialRecord<T, P::Param>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let theta = problem.sample_prior(&mut rng);
    let pre = problem.encode_pre(&theta)?;
    let post = problem.encode_post(&theta)?;
    let b = branches(instrument, cfg.scenario, &pre, post.as_ref())?;
    let mut visited = Vec::new();
    for attempt in 1..=cfg.max_retries {
        let u: T = uniform(&mut rng);
        let mut acc = T::zero();
        let Some(k) = b.weights.iter().position(|&w| {
            acc += w;
            u < acc
        }) else {
            continue;
        };
        visited.push(k);
        if let Some(pass) = &b.pass {
            let v: T = uniform(&mut rng);
            if !(v < pass[k]) {
                continue;
            }
        }
        return Ok(TrialRecord {
            merit: problem.merit(&theta, &estimator[k]),
            theta,
            outcome: k,
            attempts: attempt,
            branches: visited,
        });
    }
    Err(Error::RetryExhausted { retries: cfg.max_retries, theta: format!("{theta:?}") })
}

#[derive(Clone, Debug)]
struct Tally {
    n: u64,
    sum: f64,
    sum_sq: f64,
    counts: Vec<u64>,
    pre_gate: Vec<u64>,
    attempts: u64,
    retries: BTreeMap<u64, u64>,
}

impl Tally {
    fn new(outcomes: usize) -> Self {
        Tally {
            n: 0,
            sum: 0.0,
            sum_sq: 0.0,
            counts: vec![0; outcomes],
            pre_gate: vec![0; outcomes],
            attempts: 0,
            retries: BTreeMap::new(),
        }
    }

    fn push<T: Real, P>(&mut self, r: &TrialRecord<T, P>) {
        let m = r.merit.to_f64_lossy();
        self.n += 1;
        self.sum += m;
        self.sum_sq += m * m;
        self.counts[r.outcome] += 1;
        r.branches.iter().for_each(|&k| self.pre_gate[k] += 1);
        self.attempts += r.attempts;
        *self.retries.entry(r.attempts).or_default() += 1;
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        self.pre_gate.iter_mut().zip(&other.pre_gate).for_each(|(a, b)| *a += b);
        self.attempts += other.attempts;
        for (k, v) in other.retries {
            *self.retries.entry(k).or_default() += v;
        }
        self
    }
}

/// Plays `cfg.trials` rounds and reports the empirical merit.
pub fn run_game<T: Real, P: EstimationProblem<T>>(
    problem: &P,
    instrument: Instrument<'_, T>,
    estimator: &[P::Param],
    cfg: &GameConfig,
) -> Result<GameReport> {
    cfg.validate()?;
    check_compatible(instrument, cfg.scenario)?;
    let outcomes = instrument.outcomes();
    if estimator.len() != outcomes {
        return Err(Error::ShapeMismatch(format!("estimator has {} guesses for {outcomes} outcomes", estimator.len())));
    }
    let blocks = cfg.trials.div_ceil(BLOCK);
    let tallies: Vec<Result<Tally>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut t = Tally::new(outcomes);
            for i in b * BLOCK..((b + 1) * BLOCK).min(cfg.trials) {
                t.push(&run_trial(problem, instrument, estimator, cfg, i)?);
            }
            Ok(t)
        })
        .collect();
    let mut total = Tally::new(outcomes);
    for t in tallies {
        total = total.merge(t?);
    }

    let n = total.n as f64;
    let mean = total.sum / n;
    let var = if total.n > 1 { ((total.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(GameReport {
        trials: cfg.trials,
        seed: cfg.seed,
        max_retries: cfg.max_retries,
        scenario: cfg.scenario,
        empirical_merit: mean,
        standard_error: (var / n).sqrt(),
        analytic_merit: None,
        outcome_counts: total.counts,
        pre_gate_counts: total.pre_gate,
        mean_attempts: total.attempts as f64 / n,
        retry_histogram: total.retries,
    })
}

/// Analytic merit on a weighted grid; the counterpart of [`run_game`].
pub fn analytic_reference<T: Real, P: EstimationProblem<T>>(
    problem: &P,
    instrument: Instrument<'_, T>,
    estimator: &[P::Param],
    scenario: Scenario,
    grid: &[(P::Param, T)],
) -> Result<T> {
    average_merit(problem, instrument, estimator, scenario, grid)
}

/// [`run_game`] with the analytic merit on the problem's default grid attached.
pub fn run_game_with_reference<T: Real, P: EstimationProblem<T>>(
    problem: &P,
    instrument: Instrument<'_, T>,
    estimator: &[P::Param],
    cfg: &GameConfig,
) -> Result<GameReport> {
    let mut report = run_game(problem, instrument, estimator, cfg)?;
    let grid = problem.default_grid();
    let reference = analytic_reference(problem, instrument, estimator, cfg.scenario, &grid)?;
    report.analytic_merit = Some(reference.to_f64_lossy());
    Ok(report)
}
