//! Covariant estimation of a direction encoded in N spin-1/2 particles.
//!
//! With the true direction fixed at +z, a covariant measurement generated
//! by the seed |m⟩ scores
//!
//! ```text
//! F = ⟨m|C|m⟩ / ⟨m|D|m⟩,   C = ∫dU U†|χ⟩⟨χ|U cos²(Φ/2),   D = ∫dU U†|χ⟩⟨χ|U
//! ```
//!
//! where |χ⟩ is the encoded reference state, Φ the angle between +z and
//! U(+z), and the ratio accounts for a fixed post-selection that may
//! discard outcomes. The best covariant measurement is the top
//! generalized eigenvector of (C, D).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instruments::{NormMode, Povm};
use crate::qcore::{binomial, su2_rotation, tensor_vectors, ComplexOperator, Direction, QuantumState, RawVector};
use crate::quadrature::{HaarGrid, HaarNode};
use crate::scalar::{creal, Cx, Real};

type CMatrix<T> = DMatrix<Cx<T>>;

/// Relative orientation of the encoded spins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alignment {
    /// |↑_Ω⟩^{⊗N}.
    Parallel,
    /// |↑_Ω⟩^{⊗N/2} ⊗ |↓_Ω⟩^{⊗N/2}.
    Antiparallel,
}

/// Hilbert space in which C and D are built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    /// Symmetric subspace, dimension N + 1, Dicke basis ordered by the
    /// number of spins down.
    Symmetric,
    /// Full product space, dimension 2^N, bit 1 = spin down, first spin
    /// most significant.
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariantProblem {
    pub spins: usize,
    pub alignment: Alignment,
    /// Nodes per Euler angle.
    pub order: usize,
    pub representation: Representation,
}

/// Quadrature order that integrates every covariant integrand exactly.
pub fn exact_order(spins: usize) -> usize {
    2 * spins + 4
}

impl CovariantProblem {
    pub fn new(spins: usize, alignment: Alignment, order: usize, representation: Representation) -> Result<Self> {
        if spins == 0 {
            return Err(Error::InvalidParameter("spin count must be at least 1".into()));
        }
        if alignment == Alignment::Antiparallel && spins % 2 == 1 {
            return Err(Error::InvalidParameter(format!(
                "antiparallel encoding needs an even spin count, got {spins}"
            )));
        }
        if alignment == Alignment::Antiparallel && representation == Representation::Symmetric {
            return Err(Error::InvalidParameter(
                "antiparallel states leave the symmetric subspace; use the full representation".into(),
            ));
        }
        if representation == Representation::Full && spins > 16 {
            return Err(Error::InvalidParameter(format!("full representation of {spins} spins is too large")));
        }
        if order == 0 {
            return Err(Error::InvalidParameter("quadrature order must be positive".into()));
        }
        Ok(CovariantProblem { spins, alignment, order, representation })
    }

    /// Problem at the exact quadrature order with the smallest adequate
    /// representation.
    pub fn standard(spins: usize, alignment: Alignment) -> Result<Self> {
        let rep = match alignment {
            Alignment::Parallel => Representation::Symmetric,
            Alignment::Antiparallel => Representation::Full,
        };
        Self::new(spins, alignment, exact_order(spins), rep)
    }

    pub fn dim(&self) -> usize {
        match self.representation {
            Representation::Symmetric => self.spins + 1,
            Representation::Full => 1 << self.spins,
        }
    }

    /// Spin-down flags of the reference state, first spin first.
    pub fn down_flags(&self) -> Vec<bool> {
        down_flags(self.spins, self.alignment)
    }
}

fn down_flags(spins: usize, alignment: Alignment) -> Vec<bool> {
    (0..spins).map(|i| alignment == Alignment::Antiparallel && i >= spins / 2).collect()
}

/// Encoded state along `dir` in the full product space.
pub fn aligned_state<T: Real>(dir: &Direction<T>, spins: usize, alignment: Alignment) -> Result<QuantumState<T>> {
    if spins == 0 {
        return Err(Error::InvalidParameter("spin count must be at least 1".into()));
    }
    let u = su2_rotation(dir);
    let up = u.0.column(0).into_owned();
    let down = u.0.column(1).into_owned();
    let factors: Vec<_> =
        down_flags(spins, alignment).into_iter().map(|d| if d { down.clone() } else { up.clone() }).collect();
    QuantumState::new(tensor_vectors(&factors))
}

/// Coefficients of |v⟩^{⊗N} in the Dicke basis.
fn symmetric_power<T: Real>(v: &DVector<Cx<T>>, n: usize) -> DVector<Cx<T>> {
    let mut up = vec![creal(T::one()); n + 1];
    let mut down = vec![creal(T::one()); n + 1];
    for j in 1..=n {
        up[j] = up[j - 1] * v[0];
        down[j] = down[j - 1] * v[1];
    }
    DVector::from_iterator(n + 1, (0..=n).map(|j| up[n - j] * down[j] * creal(binomial::<T>(n, j).sqrt())))
}

/// Applies `u` to every qubit of an N-qubit vector.
fn apply_each<T: Real>(u: &ComplexOperator<T>, spins: usize, v: &DVector<Cx<T>>) -> DVector<Cx<T>> {
    let mut out = v.clone();
    let (a, b, c, d) = (u.0[(0, 0)], u.0[(0, 1)], u.0[(1, 0)], u.0[(1, 1)]);
    for q in 0..spins {
        let stride = 1usize << (spins - 1 - q);
        for i in 0..out.len() {
            if i & stride == 0 {
                let (x, y) = (out[i], out[i | stride]);
                out[i] = a * x + b * y;
                out[i | stride] = c * x + d * y;
            }
        }
    }
    out
}

/// The pair (C, D) of the ratio objective.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelityPair<T: Real> {
    pub c: ComplexOperator<T>,
    pub d: ComplexOperator<T>,
}

impl<T: Real> FidelityPair<T> {
    pub fn new(c: ComplexOperator<T>, d: ComplexOperator<T>) -> Result<Self> {
        if !c.is_square() || c.rows() != d.rows() || c.cols() != d.cols() {
            return Err(Error::ShapeMismatch(format!(
                "C is {}x{}, D is {}x{}",
                c.rows(),
                c.cols(),
                d.rows(),
                d.cols()
            )));
        }
        Ok(FidelityPair { c, d })
    }

    pub fn dim(&self) -> usize {
        self.c.rows()
    }

    pub fn max_entry_diff(&self, other: &Self) -> T {
        self.c.max_abs_diff(&other.c).max(self.d.max_abs_diff(&other.d))
    }
}

/// Closed form for parallel spins in the symmetric subspace: C is diagonal
/// with entries (N - j + 1)/((N+1)(N+2)) for j spins down, D = 𝟙/(N+1).
pub fn build_cd_parallel<T: Real>(spins: usize) -> Result<FidelityPair<T>> {
    if spins == 0 {
        return Err(Error::InvalidParameter("spin count must be at least 1".into()));
    }
    let n = spins as f64;
    let diag: Vec<T> = (0..=spins).map(|j| T::lit((n - j as f64 + 1.0) / ((n + 1.0) * (n + 2.0)))).collect();
    let c = ComplexOperator::diagonal(&diag);
    let d = ComplexOperator::identity(spins + 1).scale(T::lit(1.0 / (n + 1.0)));
    FidelityPair::new(c, d)
}

/// C and D by Haar quadrature.
pub fn build_cd_quadrature<T: Real>(problem: &CovariantProblem) -> Result<FidelityPair<T>> {
    build_cd_in_frame(problem, &ComplexOperator::identity(2))
}

/// C and D with the whole problem rotated by `frame`: the reference state
/// becomes V^{⊗N}|χ⟩ and the score uses the angle between V(+z) and
/// U V(+z). The top generalized eigenvalue does not depend on `frame`.
pub fn build_cd_in_frame<T: Real>(problem: &CovariantProblem, frame: &ComplexOperator<T>) -> Result<FidelityPair<T>> {
    integrate_pair(problem, frame, false)
}

fn integrate_pair<T: Real>(
    problem: &CovariantProblem,
    frame: &ComplexOperator<T>,
    unit_weight: bool,
) -> Result<FidelityPair<T>> {
    if frame.rows() != 2 || !frame.is_unitary(T::lit(T::CHECK_TOL)) {
        return Err(Error::InvalidParameter("frame must be a 2x2 unitary".into()));
    }
    let grid = HaarGrid::<T>::new(problem.order)?;
    let kets: Vec<DVector<Cx<T>>> =
        problem.down_flags().into_iter().map(|d| frame.0.column(usize::from(d)).into_owned()).collect();
    let axis = frame.0.column(0).into_owned();
    let dim = problem.dim();
    let seed_image = |node: &HaarNode<T>| -> (DVector<Cx<T>>, T) {
        let u = node.rotation();
        let udag = u.adjoint();
        let w = if unit_weight { T::one() } else { axis.dotc(&u.apply(&axis)).norm_sqr() };
        let v = match problem.representation {
            Representation::Symmetric => symmetric_power(&udag.apply(&kets[0]), problem.spins),
            Representation::Full => {
                let rotated: Vec<_> = kets.iter().map(|k| udag.apply(k)).collect();
                tensor_vectors(&rotated)
            }
        };
        (v, w)
    };

    // fixed-size chunks summed in order keep the result independent of
    // thread scheduling
    let partial: Vec<(CMatrix<T>, CMatrix<T>)> = grid
        .nodes
        .par_chunks(256)
        .map(|chunk| {
            let mut c = DMatrix::zeros(dim, dim);
            let mut d = DMatrix::zeros(dim, dim);
            for node in chunk {
                let (v, w) = seed_image(node);
                let (wc, wd) = (node.weight * w, node.weight);
                for k in 0..dim {
                    let vk = v[k].conj();
                    for j in 0..=k {
                        let p = v[j] * vk;
                        c[(j, k)] += p * wc;
                        d[(j, k)] += p * wd;
                    }
                }
            }
            (c, d)
        })
        .collect();
    let (mut c, mut d) = (DMatrix::zeros(dim, dim), DMatrix::zeros(dim, dim));
    for (pc, pd) in partial {
        c += pc;
        d += pd;
    }
    FidelityPair::new(ComplexOperator(mirror_upper(c)), ComplexOperator(mirror_upper(d)))
}

/// Hermitian matrix from its upper triangle.
fn mirror_upper<T: Real>(mut m: CMatrix<T>) -> CMatrix<T> {
    for k in 0..m.ncols() {
        m[(k, k)].im = T::zero();
        for j in 0..k {
            m[(k, j)] = m[(j, k)].conj();
        }
    }
    m
}

/// Largest λ with det(C - λD) = 0 on the range of D, and its vector.
pub fn max_generalized_eigen<T: Real>(fp: &FidelityPair<T>) -> Result<(T, RawVector<T>)> {
    let eig = fp.d.hermitian_eigen();
    let top = eig.values.last().copied().unwrap_or_else(T::zero);
    if !(top > T::lit(T::ZERO_ACCEPTANCE)) {
        return Err(Error::SingularD);
    }
    let cut = top * T::lit(T::CHECK_TOL);
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] > cut).collect();
    let n = fp.dim();
    let mut w = DMatrix::<Cx<T>>::zeros(n, keep.len());
    for (col, &i) in keep.iter().enumerate() {
        w.set_column(col, &(eig.vector(i) * creal(T::one() / eig.values[i].sqrt())));
    }
    let reduced = ComplexOperator(w.adjoint() * &fp.c.0 * &w).hermitian_eigen();
    let last = reduced.values.len() - 1;
    let lambda = reduced.values[last];
    Ok((lambda, RawVector(&w * reduced.vector(last))))
}

/// ⟨m|C|m⟩ / ⟨m|D|m⟩.
pub fn rayleigh_quotient<T: Real>(fp: &FidelityPair<T>, m: &DVector<Cx<T>>) -> Result<T> {
    let den = fp.d.expectation(m);
    if !(den > T::lit(T::ZERO_ACCEPTANCE)) {
        return Err(Error::ZeroAcceptance { theta: None });
    }
    Ok(fp.c.expectation(m) / den)
}

/// Optimal covariant fidelity with diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalFidelity {
    pub fidelity: f64,
    /// Optimal seed, normalised to unit length.
    pub seed_re: Vec<f64>,
    pub seed_im: Vec<f64>,
    pub order: usize,
    pub doubled_order: usize,
    /// Largest entry change of C or D when the order is doubled.
    pub entry_delta: f64,
    /// Change of the fidelity when the order is doubled.
    pub fidelity_delta: f64,
    /// Factor s such that the covariant family s U|m⟩⟨m|U† sums to at
    /// most 𝟙 for the unit seed.
    pub normalization_scale: f64,
}

/// Haar average of U|m⟩⟨m|U† in the problem's representation.
pub fn haar_average<T: Real>(problem: &CovariantProblem, seed: &DVector<Cx<T>>) -> Result<ComplexOperator<T>> {
    let dim = problem.dim();
    if seed.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: seed.len() });
    }
    match problem.representation {
        // irreducible: Schur's lemma
        Representation::Symmetric => Ok(ComplexOperator::identity(dim).scale(seed.norm_squared() / T::lit(dim as f64))),
        Representation::Full => {
            let grid = HaarGrid::<T>::new(problem.order)?;
            let partial: Vec<DMatrix<Cx<T>>> = grid
                .nodes
                .par_chunks(256)
                .map(|chunk| {
                    let mut s = DMatrix::zeros(dim, dim);
                    for node in chunk {
                        let v = apply_each(&node.rotation(), problem.spins, seed);
                        s.gerc(creal(node.weight), &v, &v, creal(T::one()));
                    }
                    s
                })
                .collect();
            let s = partial.into_iter().fold(DMatrix::zeros(dim, dim), |a, b| a + b);
            Ok(ComplexOperator(s).hermitian_part())
        }
    }
}

pub fn optimal_fidelity<T: Real>(problem: &CovariantProblem) -> Result<OptimalFidelity> {
    let fp = build_cd_quadrature::<T>(problem)?;
    let (lambda, seed) = max_generalized_eigen(&fp)?;
    let doubled = CovariantProblem { order: 2 * problem.order, ..problem.clone() };
    let fp2 = build_cd_quadrature::<T>(&doubled)?;
    let (lambda2, _) = max_generalized_eigen(&fp2)?;
    let unit = seed.0.unscale(seed.norm());
    let avg = haar_average(problem, &unit)?;
    Ok(OptimalFidelity {
        fidelity: lambda.to_f64_lossy(),
        seed_re: unit.iter().map(|z| z.re.to_f64_lossy()).collect(),
        seed_im: unit.iter().map(|z| z.im.to_f64_lossy()).collect(),
        order: problem.order,
        doubled_order: doubled.order,
        entry_delta: fp.max_entry_diff(&fp2).to_f64_lossy(),
        fidelity_delta: (lambda2 - lambda).abs().to_f64_lossy(),
        normalization_scale: (T::one() / avg.max_eigenvalue()).to_f64_lossy(),
    })
}

/// Finite covariant POVM {s w_j U_j|m⟩⟨m|U_j†} on the full N-spin space
/// over the Haar nodes, with the guess U_j(+z) for element j. The scale s
/// makes the elements sum to at most 𝟙; the POVM is exact when the
/// family already resolves the identity.
pub fn covariant_design_povm<T: Real>(
    spins: usize,
    seed: &DVector<Cx<T>>,
    order: usize,
) -> Result<(Povm<T>, Vec<Direction<T>>)> {
    let dim = 1usize << spins;
    if seed.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: seed.len() });
    }
    let unit = QuantumState::normalized(seed.clone())?;
    let grid = HaarGrid::<T>::new(order)?;
    let mut elements = Vec::with_capacity(grid.len());
    let mut guesses = Vec::with_capacity(grid.len());
    for node in &grid.nodes {
        let v = apply_each(&node.rotation(), spins, unit.amplitudes());
        elements.push(ComplexOperator::outer(&v, &v).scale(node.weight));
        guesses.push(node.direction());
    }
    let sum = elements.iter().fold(ComplexOperator::zeros(dim, dim), |a, m| &a + m);
    let scale = T::one() / sum.max_eigenvalue();
    let elements: Vec<_> = elements.into_iter().map(|m| m.scale(scale)).collect();
    let exact = sum.scale(scale).max_abs_diff(&ComplexOperator::identity(dim)) <= T::lit(T::CHECK_TOL);
    let mode = if exact { NormMode::Exact } else { NormMode::Subnormalized };
    Ok((Povm::new(elements, mode)?, guesses))
}
