//! Mappings between rank-one POVMs on H^d ⊗ H^{d'} and Kraus instruments
//! H^{d'} → H^d that preserve every conditional probability:
//!
//! ```text
//! P_A(k | ⟨φ||ψ⟩) = P_M(k | φ̄ ⊗ ψ)
//! ```
//!
//! Coefficients are m^k_{αβ} = ⟨m_k|(|α⟩⊗|β⟩) with α indexing the post side
//! (dimension d) and β the pre side (dimension d'), so the flat index of
//! (α, β) is α·d' + β.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instruments::{
    conditional_prob_fixed_post, conditional_prob_prepost, KrausSet, NormMode, Povm, PrePostEnsemble,
};
use crate::qcore::{
    conjugate_in_basis, mixed_tensor_power, su2_rotation, ComplexOperator, Direction, QuantumState, Tensor,
};
use crate::random;
use crate::scalar::{creal, Cx, Real};

/// Dimensions of the post (d) and pre (d') spaces and the basis in which
/// conjugation is taken.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualityInstance {
    pub d: usize,
    pub d_prime: usize,
    pub conj_basis: String,
}

impl DualityInstance {
    pub fn new(d: usize, d_prime: usize) -> Result<Self> {
        if d == 0 || d_prime == 0 {
            return Err(Error::InvalidParameter("dimensions must be at least 1".into()));
        }
        Ok(DualityInstance { d, d_prime, conj_basis: "computational".into() })
    }

    pub fn joint_dim(&self) -> usize {
        self.d * self.d_prime
    }
}

/// Vector |m⟩ with M = |m⟩⟨m|, or `NonRankOne`. Zero elements give the zero
/// vector.
pub fn rank_one_vector<T: Real>(m: &ComplexOperator<T>, index: usize) -> Result<DVector<Cx<T>>> {
    let rank = m.numerical_rank();
    if rank > 1 {
        return Err(Error::NonRankOne { index, rank });
    }
    let eig = m.hermitian_eigen();
    let last = eig.values.len() - 1;
    let top = eig.values[last].max(T::zero());
    Ok(eig.vector(last) * creal(top.sqrt()))
}

/// A_{αβ} = conj(m[α·d' + β]) / √d.
pub fn element_to_kraus<T: Real>(m: &DVector<Cx<T>>, d: usize, d_prime: usize) -> ComplexOperator<T> {
    let s = T::one() / T::lit(d as f64).sqrt();
    ComplexOperator(DMatrix::from_fn(d, d_prime, |a, b| m[a * d_prime + b].conj() * creal(s)))
}

/// m[α·d' + β] = c · conj(A_{αβ}).
pub fn kraus_to_element<T: Real>(a: &ComplexOperator<T>, c: T) -> DVector<Cx<T>> {
    let (d, dp) = (a.rows(), a.cols());
    DVector::from_fn(d * dp, |i, _| a.0[(i / dp, i % dp)].conj() * creal(c))
}

/// Rank-one POVM → Kraus instrument with the same normalisation mode.
pub fn povm_to_kraus<T: Real>(p: &Povm<T>, inst: &DualityInstance) -> Result<KrausSet<T>> {
    if p.dim() != inst.joint_dim() {
        return Err(Error::DimensionMismatch { expected: inst.joint_dim(), found: p.dim() });
    }
    let ops = p
        .elements()
        .iter()
        .enumerate()
        .map(|(k, m)| Ok(element_to_kraus(&rank_one_vector(m, k)?, inst.d, inst.d_prime)))
        .collect::<Result<Vec<_>>>()?;
    KrausSet::new(ops, p.mode())
}

/// Kraus instrument → rank-one POVM, with the largest admissible scale c.
/// The result is exact only when the scaled elements happen to resolve
/// the identity.
pub fn kraus_to_povm<T: Real>(a: &KrausSet<T>, inst: &DualityInstance) -> Result<(Povm<T>, T)> {
    if a.output_dim() != inst.d || a.input_dim() != inst.d_prime {
        return Err(Error::ShapeMismatch(format!(
            "Kraus operators are {}x{}, instance expects {}x{}",
            a.output_dim(),
            a.input_dim(),
            inst.d,
            inst.d_prime
        )));
    }
    let vecs: Vec<_> = a.operators().iter().map(|op| kraus_to_element(op, T::one())).collect();
    let n = inst.joint_dim();
    let gram = vecs.iter().fold(ComplexOperator::zeros(n, n), |acc, v| &acc + &ComplexOperator::outer(v, v));
    let top = gram.max_eigenvalue();
    if !(top > T::lit(T::ZERO_ACCEPTANCE)) {
        return Err(Error::ZeroInstrument);
    }
    let c = T::one() / top.sqrt();
    let elements: Vec<_> = vecs.iter().map(|v| ComplexOperator::outer(v, v).scale(c * c)).collect();
    let exact = gram.scale(c * c).max_abs_diff(&ComplexOperator::identity(n)) <= T::lit(T::CHECK_TOL);
    let mode = if exact { NormMode::Exact } else { NormMode::Subnormalized };
    Ok((Povm::new(elements, mode)?, c))
}

/// Conjugate-pre-selected product state φ̄ ⊗ ψ.
pub fn dual_state<T: Real>(e: &PrePostEnsemble<T>) -> QuantumState<T> {
    conjugate_in_basis(&e.post).tensor(&e.pre)
}

/// Largest |P_A(k|⟨φ||ψ⟩) - P_M(k|φ̄⊗ψ)| over outcomes.
pub fn probability_deviation<T: Real>(a: &KrausSet<T>, p: &Povm<T>, e: &PrePostEnsemble<T>) -> Result<T> {
    let pa = conditional_prob_prepost(a, e)?;
    let pm = conditional_prob_fixed_post(p, &dual_state(e))?;
    if pa.len() != pm.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} outcomes", pa.len(), pm.len())));
    }
    Ok(pa.iter().zip(&pm).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs())))
}

/// Spin pattern of a covariant family: the pre-selected space holds
/// `pre_plain` spins along Ω and `pre_conj` conjugate spins, the
/// post-selected space `post_conj` and `post_plain`. The dual POVM acts on
/// post ⊗ pre.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Pattern {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub l: usize,
}

impl Pattern {
    pub fn new(n: usize, m: usize, k: usize, l: usize) -> Result<Self> {
        if k > m || l > n || n + m == 0 {
            return Err(Error::InvalidParameter(format!(
                "invalid spin pattern ({n}, {m}, {k}, {l}): need k <= m, l <= n, n + m >= 1"
            )));
        }
        Ok(Pattern { n, m, k, l })
    }

    /// Post-side dimension d = 2^{k+l}.
    pub fn d(&self) -> usize {
        1 << (self.k + self.l)
    }

    /// Pre-side dimension d' = 2^{(n-l)+(m-k)}.
    pub fn d_prime(&self) -> usize {
        1 << ((self.n - self.l) + (self.m - self.k))
    }

    /// (post rotation, pre rotation) acting on the Kraus operator as
    /// A ↦ L A R†.
    fn kraus_rotations<T: Real>(&self, u: &ComplexOperator<T>) -> (ComplexOperator<T>, ComplexOperator<T>) {
        (mixed_tensor_power(u, self.k, self.l), mixed_tensor_power(u, self.n - self.l, self.m - self.k))
    }

    /// Rotation of the dual POVM vector.
    fn povm_rotation<T: Real>(&self, u: &ComplexOperator<T>) -> ComplexOperator<T> {
        let (left, right) = self.kraus_rotations(u);
        left.conjugate().tensor(&right)
    }
}

/// Generator of a covariant family.
#[derive(Clone, Debug)]
pub enum CovariantSeed<T: Real> {
    /// Rank-one POVM element at +z.
    Povm(ComplexOperator<T>),
    /// Kraus operator at +z.
    Kraus(ComplexOperator<T>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovariantDualityReport {
    pub directions: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Maps the seed and rotates, then rotates and maps, for every direction,
/// and reports the largest discrepancy.
pub fn covariant_duality_check<T: Real>(
    seed: &CovariantSeed<T>,
    pattern: Pattern,
    directions: &[Direction<T>],
) -> Result<CovariantDualityReport> {
    let (d, dp) = (pattern.d(), pattern.d_prime());
    let mut worst = T::zero();
    match seed {
        CovariantSeed::Povm(m) => {
            if !m.is_square() || m.rows() != d * dp {
                return Err(Error::ShapeMismatch(format!(
                    "POVM seed is {}x{}, pattern needs {}x{}",
                    m.rows(),
                    m.cols(),
                    d * dp,
                    d * dp
                )));
            }
            let v = rank_one_vector(m, 0)?;
            let a = element_to_kraus(&v, d, dp);
            for dir in directions {
                let u = su2_rotation(dir);
                let (left, right) = pattern.kraus_rotations(&u);
                let rotated_then_mapped = element_to_kraus(&pattern.povm_rotation(&u).apply(&v), d, dp);
                let mapped_then_rotated = &(&left * &a) * &right.adjoint();
                worst = worst.max(rotated_then_mapped.max_abs_diff(&mapped_then_rotated));
            }
        }
        CovariantSeed::Kraus(a) => {
            if a.rows() != d || a.cols() != dp {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus seed is {}x{}, pattern needs {d}x{dp}",
                    a.rows(),
                    a.cols()
                )));
            }
            let norm =
                ComplexOperator::outer(&kraus_to_element(a, T::one()), &kraus_to_element(a, T::one())).max_eigenvalue();
            if !(norm > T::lit(T::ZERO_ACCEPTANCE)) {
                return Err(Error::ZeroInstrument);
            }
            let c = T::one() / norm.sqrt();
            let m = kraus_to_element(a, c);
            for dir in directions {
                let u = su2_rotation(dir);
                let (left, right) = pattern.kraus_rotations(&u);
                let rotated = &(&left * a) * &right.adjoint();
                let rotated_then_mapped = kraus_to_element(&rotated, c);
                let mapped_then_rotated = pattern.povm_rotation(&u).apply(&m);
                let diff = (rotated_then_mapped - mapped_then_rotated).map(|z| z.norm_sqr().sqrt()).max();
                worst = worst.max(diff);
            }
        }
    }
    let max_deviation = worst.to_f64_lossy();
    Ok(CovariantDualityReport { directions: directions.len(), max_deviation, passed: max_deviation <= T::CHECK_TOL })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntangledPostReport<T: Real> {
    pub direct: Vec<T>,
    pub entangled: Vec<T>,
    pub max_deviation: T,
}

/// Compares the pre/post rule with the equivalent pre-selection of φ̄ ⊗ ψ,
/// post-selection of the maximally entangled state and operators 𝟙 ⊗ A_k.
pub fn entangled_post_equivalence<T: Real>(e: &PrePostEnsemble<T>, a: &KrausSet<T>) -> Result<EntangledPostReport<T>> {
    let d = a.input_dim();
    if a.output_dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: a.output_dim() });
    }
    if e.pre.dim() != d || e.post.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: e.pre.dim().max(e.post.dim()) });
    }
    let direct = conditional_prob_prepost(a, e)?;
    let id = ComplexOperator::identity(d);
    let lifted = KrausSet::new(a.operators().iter().map(|op| id.tensor(op)).collect(), a.mode())?;
    let mut phi = DVector::zeros(d * d);
    for j in 0..d {
        phi[j * d + j] = creal(T::one());
    }
    let entangled_post = QuantumState::normalized(phi)?;
    let pre = conjugate_in_basis(&e.post).tensor(&e.pre);
    let entangled = conditional_prob_prepost(&lifted, &PrePostEnsemble::new(pre, entangled_post))?;
    let max_deviation = direct.iter().zip(&entangled).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
    Ok(EntangledPostReport { direct, entangled, max_deviation })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub instances: usize,
    pub max_dim: usize,
    /// Scales one mapped Kraus operator by 1.01 so the suite must fail.
    #[doc(hidden)]
    pub inject_fault: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, instances: 200, max_dim: 4, inject_fault: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub instances: usize,
    pub max_dim: usize,
    /// POVM → Kraus, per-outcome probability deviation.
    pub povm_to_kraus_deviation: f64,
    /// Kraus → POVM, per-outcome probability deviation.
    pub kraus_to_povm_deviation: f64,
    /// Kraus → POVM → Kraus, per-outcome probability deviation.
    pub round_trip_deviation: f64,
    /// Entangled post-selection against the direct rule.
    pub entangled_post_deviation: f64,
    /// Worst violation of 𝟙 - ΣM ⪰ 0 for mapped POVMs.
    pub normalization_violation: f64,
    pub modes_transported: bool,
    pub tolerance: f64,
    pub passed: bool,
}

impl SuiteReport {
    pub fn max_deviation(&self) -> f64 {
        [
            self.povm_to_kraus_deviation,
            self.kraus_to_povm_deviation,
            self.round_trip_deviation,
            self.entangled_post_deviation,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Default)]
struct InstanceResult {
    povm: f64,
    kraus: f64,
    round_trip: f64,
    entangled_post: f64,
    violation: f64,
    modes: bool,
}

fn run_instance(cfg: &SuiteConfig, index: usize) -> Result<InstanceResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let dim = |rng: &mut ChaCha8Rng| rng.random_range(1..=cfg.max_dim);
    let (d, dp) = (dim(&mut rng), dim(&mut rng));
    let inst = DualityInstance::new(d, dp)?;
    let joint = d * dp;
    let mut out = InstanceResult { modes: true, ..Default::default() };

    // POVM side: subnormalised and exact random rank-one POVMs
    let count = rng.random_range(joint.max(2)..=joint + 3);
    let sub = random::rank_one_povm::<f64, _>(&mut rng, joint, count, NormMode::Subnormalized);
    let mut a = povm_to_kraus(&sub, &inst)?;
    out.modes &= a.mode() == NormMode::Subnormalized;
    if cfg.inject_fault {
        let mut ops = a.operators().to_vec();
        ops[0] = ops[0].scale(1.01);
        a = KrausSet::new_unchecked(ops, a.mode())?;
    }
    let e = random::ensemble::<f64, _>(&mut rng, d, dp);
    out.povm = probability_deviation(&a, &sub, &e)?;
    let exact = random::rank_one_povm::<f64, _>(&mut rng, joint, count, NormMode::Exact);
    out.modes &= povm_to_kraus(&exact, &inst)?.mode() == NormMode::Exact;

    // Kraus side
    let n_ops = rng.random_range(2..=4);
    let k = random::kraus_set::<f64, _>(&mut rng, d, dp, n_ops, NormMode::Subnormalized);
    let (p, _) = kraus_to_povm(&k, &inst)?;
    out.violation = (-(&ComplexOperator::identity(joint) - &p.sum()).min_eigenvalue()).max(0.0);
    let e = random::ensemble::<f64, _>(&mut rng, d, dp);
    out.kraus = probability_deviation(&k, &p, &e)?;
    let back = povm_to_kraus(&p, &inst)?;
    let pk = conditional_prob_prepost(&k, &e)?;
    let pb = conditional_prob_prepost(&back, &e)?;
    out.round_trip = pk.iter().zip(&pb).fold(0.0, |m, (x, y)| m.max((x - y).abs()));

    // entangled post-selection on a square instrument
    let sq = random::kraus_set::<f64, _>(&mut rng, dp, dp, n_ops, NormMode::Subnormalized);
    let e = random::ensemble::<f64, _>(&mut rng, dp, dp);
    out.entangled_post = entangled_post_equivalence(&e, &sq)?.max_deviation;
    Ok(out)
}

/// Random-instance equivalence suite for both mapping directions.
pub fn run_duality_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.instances == 0 || cfg.max_dim == 0 {
        return Err(Error::InvalidParameter("instances and max_dim must be positive".into()));
    }
    let results = (0..cfg.instances).into_par_iter().map(|i| run_instance(cfg, i)).collect::<Vec<_>>();
    let mut r = SuiteReport {
        instances: cfg.instances,
        max_dim: cfg.max_dim,
        povm_to_kraus_deviation: 0.0,
        kraus_to_povm_deviation: 0.0,
        round_trip_deviation: 0.0,
        entangled_post_deviation: 0.0,
        normalization_violation: 0.0,
        modes_transported: true,
        tolerance: f64::CHECK_TOL,
        passed: false,
    };
    for res in results {
        let x = res?;
        r.povm_to_kraus_deviation = r.povm_to_kraus_deviation.max(x.povm);
        r.kraus_to_povm_deviation = r.kraus_to_povm_deviation.max(x.kraus);
        r.round_trip_deviation = r.round_trip_deviation.max(x.round_trip);
        r.entangled_post_deviation = r.entangled_post_deviation.max(x.entangled_post);
        r.normalization_violation = r.normalization_violation.max(x.violation);
        r.modes_transported &= x.modes;
    }
    r.passed = r.max_deviation() <= r.tolerance && r.normalization_violation <= r.tolerance && r.modes_transported;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn scalar_case() {
        let inst = DualityInstance::new(1, 1).unwrap();
        let p = Povm::<f64>::new(vec![ComplexOperator::identity(1)], NormMode::Exact).unwrap();
        let a = povm_to_kraus(&p, &inst).unwrap();
        assert!((a.operators()[0].0[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert_eq!(a.mode(), NormMode::Exact);
    }

    #[test]
    fn bell_element_maps_to_half_identity() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DVector::from_vec(vec![cx(h, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(h, 0.0)]);
        let m = ComplexOperator::outer(&bell, &bell);
        let p = Povm::new(vec![m], NormMode::Subnormalized).unwrap();
        let a = povm_to_kraus(&p, &DualityInstance::new(2, 2).unwrap()).unwrap();
        // A = e^{iχ} 𝟙/2 for an arbitrary eigenvector phase χ
        let op = &a.operators()[0];
        let phase = op.0[(0, 0)] / op.0[(0, 0)].norm();
        let expected = ComplexOperator::identity(2).scale(0.5);
        assert!(op.max_abs_diff(&ComplexOperator(expected.0.map(|z| z * phase))) < 1e-14);
    }

    #[test]
    fn identity_kraus_scale() {
        let a = KrausSet::<f64>::new(vec![ComplexOperator::identity(2)], NormMode::Exact).unwrap();
        let (p, c) = kraus_to_povm(&a, &DualityInstance::new(2, 2).unwrap()).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(p.len(), 1);
        assert_eq!(p.elements()[0].numerical_rank(), 1);
        assert_eq!(p.mode(), NormMode::Subnormalized);
    }

    #[test]
    fn errors() {
        let inst = DualityInstance::new(2, 2).unwrap();
        let p = Povm::<f64>::new(vec![ComplexOperator::identity(4)], NormMode::Exact).unwrap();
        assert!(matches!(povm_to_kraus(&p, &inst), Err(Error::NonRankOne { index: 0, rank: 4 })));
        let zero = KrausSet::<f64>::new(vec![ComplexOperator::zeros(2, 2)], NormMode::Subnormalized).unwrap();
        assert_eq!(kraus_to_povm(&zero, &inst).unwrap_err(), Error::ZeroInstrument);
        assert!(DualityInstance::new(0, 2).is_err());
    }

    #[test]
    fn scale_cancels_in_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let inst = DualityInstance::new(2, 3).unwrap();
        let k = random::kraus_set::<f64, _>(&mut rng, 2, 3, 3, NormMode::Exact);
        let (p, _) = kraus_to_povm(&k, &inst).unwrap();
        let half = p.scaled(0.25).unwrap();
        let e = random::ensemble::<f64, _>(&mut rng, 2, 3);
        let s = dual_state(&e);
        let a = conditional_prob_fixed_post(&p, &s).unwrap();
        let b = conditional_prob_fixed_post(&half, &s).unwrap();
        a.iter().zip(&b).for_each(|(x, y)| assert!((x - y).abs() < 1e-14));
    }

    #[test]
    fn covariant_single_spin() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let up = ComplexOperator::diagonal(&[1.0, 0.0]);
        let dirs: Vec<_> = (0..20).map(|_| random::direction::<f64, _>(&mut rng)).collect();
        let r = covariant_duality_check(&CovariantSeed::Povm(up.clone()), Pattern::new(1, 0, 0, 0).unwrap(), &dirs)
            .unwrap();
        assert!(r.passed, "{}", r.max_deviation);
        let r = covariant_duality_check(&CovariantSeed::Povm(up), Pattern::new(1, 0, 0, 0).unwrap(), &[Direction::z()])
            .unwrap();
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn covariant_mixed_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let dirs: Vec<_> = (0..20).map(|_| random::direction::<f64, _>(&mut rng)).collect();
        for (n, m, k, l) in [(2, 1, 1, 0), (1, 1, 0, 1), (2, 0, 0, 1), (0, 2, 1, 0)] {
            let pat = Pattern::new(n, m, k, l).unwrap();
            let v = random::state::<f64, _>(&mut rng, pat.d() * pat.d_prime());
            let r = covariant_duality_check(&CovariantSeed::Povm(v.projector()), pat, &dirs).unwrap();
            assert!(r.passed, "{pat:?} povm {}", r.max_deviation);
            let a = random::kraus_set::<f64, _>(&mut rng, pat.d(), pat.d_prime(), 1, NormMode::Subnormalized);
            let r = covariant_duality_check(&CovariantSeed::Kraus(a.operators()[0].clone()), pat, &dirs).unwrap();
            assert!(r.passed, "{pat:?} kraus {}", r.max_deviation);
        }
        assert!(Pattern::new(1, 0, 1, 0).is_err());
        let bad = ComplexOperator::identity(3);
        assert!(covariant_duality_check(&CovariantSeed::Povm(bad), Pattern::new(1, 0, 0, 0).unwrap(), &dirs).is_err());
    }

    #[test]
    fn entangled_post_examples() {
        let s = QuantumState::<f64>::basis(2, 0).unwrap();
        let id = KrausSet::new(vec![ComplexOperator::identity(2)], NormMode::Exact).unwrap();
        let r = entangled_post_equivalence(&PrePostEnsemble::new(s.clone(), s.clone()), &id).unwrap();
        assert_eq!(r.entangled.len(), 1);
        assert!((r.entangled[0] - 1.0).abs() < 1e-15);

        let proj = KrausSet::new(
            vec![ComplexOperator::diagonal(&[1.0, 0.0]), ComplexOperator::diagonal(&[0.0, 1.0])],
            NormMode::Exact,
        )
        .unwrap();
        let r = entangled_post_equivalence(&PrePostEnsemble::new(s.clone(), s.clone()), &proj).unwrap();
        assert!((r.entangled[0] - 1.0).abs() < 1e-15 && r.entangled[1].abs() < 1e-15);

        let rect =
            KrausSet::new(vec![ComplexOperator::from_real_rows(1, 2, &[1.0, 0.0]).unwrap()], NormMode::Subnormalized)
                .unwrap();
        let e = PrePostEnsemble::new(s.clone(), QuantumState::basis(1, 0).unwrap());
        assert!(matches!(entangled_post_equivalence(&e, &rect), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn suite_passes_and_fault_is_caught() {
        let r = run_duality_suite(&SuiteConfig { instances: 40, ..Default::default() }).unwrap();
        assert!(r.passed, "{r:?}");
        let r = run_duality_suite(&SuiteConfig { instances: 1, max_dim: 1, ..Default::default() }).unwrap();
        assert!(r.passed);
        let r = run_duality_suite(&SuiteConfig { instances: 40, inject_fault: true, ..Default::default() }).unwrap();
        assert!(!r.passed);
    }
}
