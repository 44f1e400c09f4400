//! POVMs, Kraus instruments and the conditional probability rules for
//! pre-selected, fixed-post-selected and pre- and post-selected ensembles.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamesim::EstimationProblem;
use crate::qcore::{check_dim, ComplexOperator, QuantumState};
use crate::scalar::{cabs, creal, Cx, Real};

/// Normalisation of an instrument: equality with the identity, or bounded
/// by it when a fixed post-selected state may discard outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMode {
    Exact,
    Subnormalized,
}

impl NormMode {
    fn name(self) -> &'static str {
        match self {
            NormMode::Exact => "exact",
            NormMode::Subnormalized => "subnormalized",
        }
    }
}

/// Which conditional probability rule applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Plain Born rule, no post-selection.
    PreOnly,
    /// A θ-independent post-selected state lets the measurer discard runs.
    FixedPost,
    /// θ-dependent pre- and post-selected states.
    PrePost,
}

/// Checks `Σ ≈ 𝟙` (exact) or `𝟙 - Σ ⪰ 0` (subnormalised).
fn check_normalization<T: Real>(sum: &ComplexOperator<T>, mode: NormMode) -> Result<()> {
    let id = ComplexOperator::identity(sum.rows());
    let tol = T::lit(T::CHECK_TOL);
    let defect = match mode {
        NormMode::Exact => sum.max_abs_diff(&id),
        NormMode::Subnormalized => (-(&id - sum).min_eigenvalue()).max(T::zero()),
    };
    if defect > tol {
        return Err(Error::Normalization { mode: mode.name(), defect: defect.to_f64_lossy() });
    }
    Ok(())
}

/// Finite POVM. Elements are Hermitian positive semidefinite matrices of a
/// common dimension, summing to 𝟙 (exact) or to at most 𝟙.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm<T: Real> {
    elements: Vec<ComplexOperator<T>>,
    mode: NormMode,
}

impl<T: Real> Povm<T> {
    /// Validates and ingests the elements. Hermiticity defects up to
    /// `CHECK_TOL` are removed by symmetrising.
    pub fn new(elements: Vec<ComplexOperator<T>>, mode: NormMode) -> Result<Self> {
        let first = elements.first().ok_or(Error::EmptyInstrument)?;
        let dim = first.rows();
        let tol = T::lit(T::CHECK_TOL);
        let mut clean = Vec::with_capacity(elements.len());
        for (index, m) in elements.into_iter().enumerate() {
            if !m.is_square() || m.rows() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "POVM element {index} is {}x{}, expected {dim}x{dim}",
                    m.rows(),
                    m.cols()
                )));
            }
            let defect = m.hermitian_defect();
            if defect > tol {
                return Err(Error::NotHermitian { index, defect: defect.to_f64_lossy() });
            }
            let h = m.hermitian_part();
            let min = h.min_eigenvalue();
            if min < -tol {
                return Err(Error::NotPositive { index, min_eigenvalue: min.to_f64_lossy() });
            }
            clean.push(h);
        }
        let povm = Povm { elements: clean, mode };
        check_normalization(&povm.sum(), mode)?;
        Ok(povm)
    }

    /// Elements A_k†A_k of a Kraus set: the POVM seen by a fixed
    /// post-selection that ignores the output state.
    pub fn from_kraus(a: &KrausSet<T>) -> Result<Self> {
        let elements = a.operators.iter().map(|k| &k.adjoint() * k).collect();
        Povm::new(elements, a.mode)
    }

    pub fn elements(&self) -> &[ComplexOperator<T>] {
        &self.elements
    }

    pub fn mode(&self) -> NormMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn sum(&self) -> ComplexOperator<T> {
        let n = self.dim();
        self.elements.iter().fold(ComplexOperator::zeros(n, n), |acc, m| &acc + m)
    }

    /// Uniformly rescaled copy; `factor` in (0, 1] keeps it subnormalised.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        let mode = if factor == T::one() { self.mode } else { NormMode::Subnormalized };
        Povm::new(self.elements.iter().map(|m| m.scale(factor)).collect(), mode)
    }

    fn weights(&self, s: &QuantumState<T>) -> Result<Vec<T>> {
        check_dim(self.dim(), s.dim())?;
        Ok(self.elements.iter().map(|m| m.expectation(s.amplitudes())).collect())
    }
}

/// Kraus operators H^{d'} → H^{d} sharing one shape.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet<T: Real> {
    operators: Vec<ComplexOperator<T>>,
    mode: NormMode,
}

impl<T: Real> KrausSet<T> {
    pub fn new(operators: Vec<ComplexOperator<T>>, mode: NormMode) -> Result<Self> {
        let set = Self::new_unchecked(operators, mode)?;
        check_normalization(&set.gram_sum(), mode)?;
        Ok(set)
    }

    /// Shape-checked but with no normalisation check. Used for negative
    /// controls that deliberately break an instrument.
    #[doc(hidden)]
    pub fn new_unchecked(operators: Vec<ComplexOperator<T>>, mode: NormMode) -> Result<Self> {
        let first = operators.first().ok_or(Error::EmptyInstrument)?;
        let shape = (first.rows(), first.cols());
        if let Some((i, a)) = operators.iter().enumerate().find(|(_, a)| (a.rows(), a.cols()) != shape) {
            return Err(Error::ShapeMismatch(format!(
                "Kraus operator {i} is {}x{}, expected {}x{}",
                a.rows(),
                a.cols(),
                shape.0,
                shape.1
            )));
        }
        Ok(KrausSet { operators, mode })
    }

    pub fn operators(&self) -> &[ComplexOperator<T>] {
        &self.operators
    }

    pub fn mode(&self) -> NormMode {
        self.mode
    }

    /// Dimension d of the output (post-selected) space.
    pub fn output_dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// Dimension d' of the input (pre-selected) space.
    pub fn input_dim(&self) -> usize {
        self.operators[0].cols()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// Σ_k A_k†A_k.
    pub fn gram_sum(&self) -> ComplexOperator<T> {
        let n = self.input_dim();
        self.operators.iter().fold(ComplexOperator::zeros(n, n), |acc, a| &acc + &(&a.adjoint() * a))
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        let mode = if factor == T::one() { self.mode } else { NormMode::Subnormalized };
        KrausSet::new(self.operators.iter().map(|a| a.scale(factor)).collect(), mode)
    }

    /// ⟨post|A_k|pre⟩ for every k. Amplitudes below their own rounding
    /// error bound are returned as exact zeros.
    pub fn amplitudes(&self, e: &PrePostEnsemble<T>) -> Result<Vec<Cx<T>>> {
        check_dim(self.input_dim(), e.pre.dim())?;
        check_dim(self.output_dim(), e.post.dim())?;
        let post = e.post.amplitudes();
        let eps = T::default_epsilon() * T::lit((self.input_dim() + self.output_dim()) as f64);
        Ok(self
            .operators
            .iter()
            .map(|a| {
                let (v, scale) = apply_with_bound(a, e.pre.amplitudes());
                let amp = post.dotc(&v);
                let bound = post.iter().zip(scale.iter()).fold(T::zero(), |s, (p, &m)| s + cabs(*p) * m);
                if cabs(amp) <= eps * bound {
                    Cx::new(T::zero(), T::zero())
                } else {
                    amp
                }
            })
            .collect())
    }

    /// A_k|ψ⟩ for every k, entries below their rounding error bound
    /// flushed to zero.
    pub fn apply_all(&self, psi: &DVector<Cx<T>>) -> Vec<DVector<Cx<T>>> {
        let eps = T::default_epsilon() * T::lit(self.input_dim() as f64);
        self.operators
            .iter()
            .map(|a| {
                let (mut v, scale) = apply_with_bound(a, psi);
                v.iter_mut().zip(scale.iter()).for_each(|(z, &m)| {
                    if cabs(*z) <= eps * m {
                        *z = Cx::new(T::zero(), T::zero());
                    }
                });
                v
            })
            .collect()
    }
}

/// A|ψ⟩ together with Σ_j |A_ij||ψ_j| per row, which bounds the rounding
/// error of each entry up to a factor of the machine epsilon.
fn apply_with_bound<T: Real>(a: &ComplexOperator<T>, psi: &DVector<Cx<T>>) -> (DVector<Cx<T>>, DVector<T>) {
    let v = a.apply(psi);
    let scale =
        DVector::from_fn(a.rows(), |i, _| (0..a.cols()).fold(T::zero(), |s, j| s + cabs(a.0[(i, j)]) * cabs(psi[j])));
    (v, scale)
}

/// Two-time state ⟨post||pre⟩; the two spaces may differ in dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PrePostEnsemble<T: Real> {
    pub pre: QuantumState<T>,
    pub post: QuantumState<T>,
}

impl<T: Real> PrePostEnsemble<T> {
    pub fn new(pre: QuantumState<T>, post: QuantumState<T>) -> Self {
        PrePostEnsemble { pre, post }
    }
}

/// Borrowed instrument of either kind.
#[derive(Clone, Copy, Debug)]
pub enum Instrument<'a, T: Real> {
    Povm(&'a Povm<T>),
    Kraus(&'a KrausSet<T>),
}

impl<T: Real> Instrument<'_, T> {
    pub fn outcomes(&self) -> usize {
        match self {
            Instrument::Povm(p) => p.len(),
            Instrument::Kraus(k) => k.len(),
        }
    }

    pub fn mode(&self) -> NormMode {
        match self {
            Instrument::Povm(p) => p.mode(),
            Instrument::Kraus(k) => k.mode(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Instrument::Povm(p) => p.dim(),
            Instrument::Kraus(k) => k.input_dim(),
        }
    }
}

fn normalize_weights<T: Real>(w: Vec<T>) -> Result<Vec<T>> {
    let total = w.iter().fold(T::zero(), |s, &x| s + x);
    if !(total > T::lit(T::ZERO_ACCEPTANCE)) {
        return Err(Error::ZeroAcceptance { theta: None });
    }
    Ok(w.into_iter().map(|x| x / total).collect())
}

/// Born rule P(k) = ⟨s|M_k|s⟩ for an exactly normalised POVM.
pub fn born_probability<T: Real>(p: &Povm<T>, s: &QuantumState<T>) -> Result<Vec<T>> {
    if p.mode() != NormMode::Exact {
        return Err(Error::ModeMismatch("Born rule requires an exactly normalised POVM".into()));
    }
    p.weights(s)
}

/// P(k) = ⟨s|M_k|s⟩ / Σ_k' ⟨s|M_k'|s⟩.
pub fn conditional_prob_fixed_post<T: Real>(p: &Povm<T>, s: &QuantumState<T>) -> Result<Vec<T>> {
    normalize_weights(p.weights(s)?)
}

/// P(k) = |⟨post|A_k|pre⟩|² / Σ_k' |⟨post|A_k'|pre⟩|².
pub fn conditional_prob_prepost<T: Real>(a: &KrausSet<T>, e: &PrePostEnsemble<T>) -> Result<Vec<T>> {
    normalize_weights(a.amplitudes(e)?.into_iter().map(|z| z.norm_sqr()).collect())
}

/// Splits every element into rank-one pieces |m_kj⟩⟨m_kj| from its
/// eigendecomposition. Returns the refined POVM and, for each refined
/// outcome, the index of the element it came from.
pub fn refine_to_rank_one<T: Real>(p: &Povm<T>) -> Result<(Povm<T>, Vec<usize>)> {
    let cutoff = T::lit(T::RANK_CUTOFF);
    let mut elements = Vec::new();
    let mut parent = Vec::new();
    for (k, m) in p.elements().iter().enumerate() {
        let eig = m.hermitian_eigen();
        for (j, &lambda) in eig.values.iter().enumerate() {
            if lambda > cutoff {
                let v = eig.vector(j).map(|z| z * lambda.sqrt());
                elements.push(ComplexOperator::outer(&v, &v));
                parent.push(k);
            }
        }
    }
    Ok((Povm::new(elements, p.mode())?, parent))
}

/// Independent route to the pre/post rule through an explicit dilation.
///
/// The instrument is realised as the isometry
/// |ψ⟩ ↦ Σ_k (A_k|ψ⟩)|k⟩_R|0⟩_P + (√(𝟙 - ΣA†A)|ψ⟩)|0⟩_R|1⟩_P
/// on system ⊗ register ⊗ post-selection qubit. The system factor is padded
/// to max(d, d') so the deficit branch fits. The output is projected onto
/// ⟨post|⟨k|⟨0| for every k and the gated frequencies are renormalised.
pub fn dilate_and_simulate<T: Real>(a: &KrausSet<T>, e: &PrePostEnsemble<T>) -> Result<Vec<T>> {
    let d = a.output_dim();
    let dp = a.input_dim();
    check_dim(dp, e.pre.dim())?;
    check_dim(d, e.post.dim())?;
    let sys = d.max(dp);
    let reg = a.len();
    let idx = |i: usize, k: usize, x: usize| (i * reg + k) * 2 + x;

    let deficit = (&ComplexOperator::identity(dp) - &a.gram_sum()).psd_sqrt();
    let mut iso = ComplexOperator::<T>::zeros(sys * reg * 2, dp);
    for (k, op) in a.operators().iter().enumerate() {
        for i in 0..d {
            for j in 0..dp {
                iso.0[(idx(i, k, 0), j)] = op.0[(i, j)];
            }
        }
    }
    for i in 0..dp {
        for j in 0..dp {
            iso.0[(idx(i, 0, 1), j)] = deficit.0[(i, j)];
        }
    }
    debug_assert!(
        (&iso.adjoint() * &iso).max_abs_diff(&ComplexOperator::identity(dp)) <= T::lit(1e3 * T::CHECK_TOL),
        "dilation is not an isometry"
    );

    let out = iso.apply(e.pre.amplitudes());
    let weights = (0..reg)
        .map(|k| {
            let mut bra = DVector::<Cx<T>>::zeros(sys * reg * 2);
            for i in 0..d {
                bra[idx(i, k, 0)] = e.post.amplitudes()[i];
            }
            bra.dotc(&out).norm_sqr()
        })
        .collect();
    normalize_weights(weights)
}

/// Outcome distribution for one θ under the scenario's rule.
pub fn outcome_probabilities<T: Real>(
    instrument: Instrument<'_, T>,
    scenario: Scenario,
    pre: &QuantumState<T>,
    post: Option<&QuantumState<T>>,
) -> Result<Vec<T>> {
    match (scenario, instrument) {
        (Scenario::PreOnly, Instrument::Povm(p)) => born_probability(p, pre),
        (Scenario::PreOnly, Instrument::Kraus(k)) => {
            if k.mode() != NormMode::Exact {
                return Err(Error::ModeMismatch("pre-selection only requires an exactly normalised instrument".into()));
            }
            born_probability(&Povm::from_kraus(k)?, pre)
        }
        (Scenario::FixedPost, Instrument::Povm(p)) => conditional_prob_fixed_post(p, pre),
        (Scenario::FixedPost, Instrument::Kraus(k)) => conditional_prob_fixed_post(&Povm::from_kraus(k)?, pre),
        (Scenario::PrePost, Instrument::Kraus(k)) => {
            let post =
                post.ok_or_else(|| Error::ModeMismatch("pre- and post-selection needs a post-selected state".into()))?;
            conditional_prob_prepost(k, &PrePostEnsemble::new(pre.clone(), post.clone()))
        }
        (Scenario::PrePost, Instrument::Povm(_)) => {
            Err(Error::ModeMismatch("pre- and post-selection needs Kraus operators, not POVM elements".into()))
        }
    }
}

/// Expected merit Σ_θ w(θ) Σ_k P(k|θ) F(θ, θ̃(k)) over the caller's grid.
pub fn average_merit<T: Real, P: EstimationProblem<T>>(
    problem: &P,
    instrument: Instrument<'_, T>,
    estimator: &[P::Param],
    scenario: Scenario,
    grid: &[(P::Param, T)],
) -> Result<T> {
    if estimator.len() != instrument.outcomes() {
        return Err(Error::ShapeMismatch(format!(
            "estimator has {} guesses for {} outcomes",
            estimator.len(),
            instrument.outcomes()
        )));
    }
    let mut total = T::zero();
    for (theta, weight) in grid {
        let pre = problem.encode_pre(theta)?;
        let post = problem.encode_post(theta)?;
        let probs = outcome_probabilities(instrument, scenario, &pre, post.as_ref()).map_err(|e| match e {
            Error::ZeroAcceptance { .. } => Error::ZeroAcceptance { theta: Some(format!("{theta:?}")) },
            other => other,
        })?;
        let inner = probs.iter().zip(estimator).fold(T::zero(), |s, (&p, guess)| s + p * problem.merit(theta, guess));
        total += *weight * inner;
    }
    Ok(total)
}

/// |ψ⟩⟨ψ| for each state, as POVM elements (no normalisation check).
pub fn projectors<T: Real>(states: &[QuantumState<T>]) -> Vec<ComplexOperator<T>> {
    states.iter().map(|s| s.projector()).collect()
}

/// Projective measurement in the computational basis of dimension `dim`.
pub fn computational_basis_povm<T: Real>(dim: usize) -> Result<Povm<T>> {
    let elements = (0..dim)
        .map(|i| {
            let mut m = ComplexOperator::zeros(dim, dim);
            m.0[(i, i)] = creal(T::one());
            m
        })
        .collect();
    Povm::new(elements, NormMode::Exact)
}
