//! Complex linear-algebra foundation: pure states, operators, tensor
//! products, basis conjugation and the SU(2) machinery used by the covariant
//! estimation problems.
//!
//! Conjugation is always taken in the computational (S_z product) basis.
//! Single-qubit rotations use the convention
//!
//! ```text
//! U(θ, φ) = exp(-i θ (-sin φ σx + cos φ σy) / 2)
//!         = [[cos θ/2, -e^{-iφ} sin θ/2],
//!            [e^{iφ} sin θ/2, cos θ/2]]
//! ```
//!
//! i.e. the rotation by θ about the axis ẑ × Ω̂, which carries |↑_z⟩ to the
//! spin pointing along (θ, φ) with no extra phase.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cabs, creal, cx, polar, Cx, Real};

/// Unnormalised vector of amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct RawVector<T: Real>(pub DVector<Cx<T>>);

impl<T: Real> RawVector<T> {
    pub fn from_vec(v: Vec<Cx<T>>) -> Self {
        RawVector(DVector::from_vec(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> T {
        self.0.norm()
    }

    pub fn as_vector(&self) -> &DVector<Cx<T>> {
        &self.0
    }

    /// Outer product |v⟩⟨v|.
    pub fn projector(&self) -> ComplexOperator<T> {
        ComplexOperator(&self.0 * self.0.adjoint())
    }

    pub fn normalize(&self) -> Result<QuantumState<T>> {
        QuantumState::normalized(self.0.clone())
    }
}

/// Unit vector in a finite-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState<T: Real> {
    amplitudes: DVector<Cx<T>>,
}

impl<T: Real> QuantumState<T> {
    /// Wraps `amplitudes`, rejecting vectors whose norm differs from one by
    /// more than [`Real::NORM_TOL`].
    pub fn new(amplitudes: DVector<Cx<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::ZeroVector);
        }
        let norm = amplitudes.norm();
        if (norm - T::one()).abs() > T::lit(T::NORM_TOL) {
            return Err(Error::NotNormalized { norm: norm.to_f64_lossy() });
        }
        Ok(QuantumState { amplitudes })
    }

    pub fn from_vec(v: Vec<Cx<T>>) -> Result<Self> {
        Self::new(DVector::from_vec(v))
    }

    /// Real amplitudes, checked for unit norm.
    pub fn from_reals(v: &[T]) -> Result<Self> {
        Self::from_vec(v.iter().map(|&x| creal(x)).collect())
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(v: DVector<Cx<T>>) -> Result<Self> {
        let norm = v.norm();
        if v.is_empty() || norm <= T::lit(T::ZERO_ACCEPTANCE) {
            return Err(Error::ZeroVector);
        }
        Ok(QuantumState { amplitudes: v.unscale(norm) })
    }

    /// Computational basis vector |index⟩.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: index + 1 });
        }
        let mut v = DVector::zeros(dim);
        v[index] = Complex::new(T::one(), T::zero());
        Ok(QuantumState { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Cx<T>> {
        &self.amplitudes
    }

    pub fn into_raw(self) -> RawVector<T> {
        RawVector(self.amplitudes)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &QuantumState<T>) -> Result<Cx<T>> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn projector(&self) -> ComplexOperator<T> {
        ComplexOperator(&self.amplitudes * self.amplitudes.adjoint())
    }

    /// Bloch vector ⟨σ⟩ of a qubit state.
    pub fn bloch_vector(&self) -> Result<[T; 3]> {
        check_dim(2, self.dim())?;
        let a = self.amplitudes[0];
        let b = self.amplitudes[1];
        let ab = a.conj() * b;
        let two = T::lit(2.0);
        Ok([two * ab.re, two * ab.im, a.norm_sqr() - b.norm_sqr()])
    }

    /// Applies a unitary; the result is renormalised to absorb roundoff.
    pub fn evolve(&self, u: &ComplexOperator<T>) -> Result<QuantumState<T>> {
        check_dim(u.cols(), self.dim())?;
        QuantumState::normalized(&u.0 * &self.amplitudes)
    }
}

impl<T: Real> fmt::Display for QuantumState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", a.re, a.im)?;
        }
        write!(f, ")")
    }
}

/// Dense complex matrix. Hermiticity, positivity and unitarity are checked
/// by predicates rather than assumed.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOperator<T: Real>(pub DMatrix<Cx<T>>);

impl<T: Real> ComplexOperator<T> {
    pub fn identity(n: usize) -> Self {
        ComplexOperator(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexOperator(DMatrix::zeros(rows, cols))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[Cx<T>]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{} entries for a {rows}x{cols} matrix", entries.len())));
        }
        Ok(ComplexOperator(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_real_rows(rows: usize, cols: usize, entries: &[T]) -> Result<Self> {
        let c: Vec<_> = entries.iter().map(|&x| creal(x)).collect();
        Self::from_row_slice(rows, cols, &c)
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let d = DVector::from_iterator(entries.len(), entries.iter().map(|&x| creal(x)));
        ComplexOperator(DMatrix::from_diagonal(&d))
    }

    /// |ket⟩⟨bra|.
    pub fn outer(ket: &DVector<Cx<T>>, bra: &DVector<Cx<T>>) -> Self {
        ComplexOperator(ket * bra.adjoint())
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn matrix(&self) -> &DMatrix<Cx<T>> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        ComplexOperator(self.0.adjoint())
    }

    pub fn conjugate(&self) -> Self {
        ComplexOperator(self.0.conjugate())
    }

    pub fn scale(&self, s: T) -> Self {
        ComplexOperator(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> Cx<T> {
        self.0.trace()
    }

    pub fn apply(&self, v: &DVector<Cx<T>>) -> DVector<Cx<T>> {
        &self.0 * v
    }

    /// ⟨v|self|v⟩ (real part; exact for Hermitian operators).
    pub fn expectation(&self, v: &DVector<Cx<T>>) -> T {
        v.dotc(&(&self.0 * v)).re
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, z| m.max(cabs(*z)))
    }

    /// max |self - other| entrywise; shapes must agree.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch in max_abs_diff");
        self.0.iter().zip(other.0.iter()).fold(T::zero(), |m, (a, b)| m.max(cabs(a - b)))
    }

    /// max |A - A†| entrywise.
    pub fn hermitian_defect(&self) -> T {
        if !self.is_square() {
            return T::max_value().unwrap_or_else(T::one);
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.hermitian_defect() <= tol
    }

    /// (A + A†)/2.
    pub fn hermitian_part(&self) -> Self {
        ComplexOperator((&self.0 + self.0.adjoint()).map(|z| z * T::lit(0.5)))
    }

    /// max |U†U - 𝟙| entrywise.
    pub fn unitarity_defect(&self) -> T {
        if !self.is_square() {
            return T::max_value().unwrap_or_else(T::one);
        }
        let g = ComplexOperator(self.0.adjoint() * &self.0);
        g.max_abs_diff(&Self::identity(self.rows()))
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn determinant(&self) -> Cx<T> {
        self.0.clone().determinant()
    }

    /// Eigendecomposition of the Hermitian part, eigenvalues ascending.
    pub fn hermitian_eigen(&self) -> HermitianEigen<T> {
        HermitianEigen::new(&self.hermitian_part())
    }

    pub fn min_eigenvalue(&self) -> T {
        self.hermitian_eigen().values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max_eigenvalue(&self) -> T {
        self.hermitian_eigen().values.last().copied().unwrap_or_else(T::zero)
    }

    /// Square root of a positive semidefinite operator; negative roundoff
    /// eigenvalues are clamped to zero.
    pub fn psd_sqrt(&self) -> Self {
        self.hermitian_eigen().map_values(|x| x.max(T::zero()).sqrt())
    }

    /// Number of eigenvalues above `RANK_CUTOFF` times the largest one.
    pub fn numerical_rank(&self) -> usize {
        let eig = self.hermitian_eigen();
        let top = eig.values.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        if top <= T::zero() {
            return 0;
        }
        let cut = top * T::lit(T::RANK_CUTOFF);
        eig.values.iter().filter(|&&x| x > cut).count()
    }
}

impl<T: Real> std::ops::Add for &ComplexOperator<T> {
    type Output = ComplexOperator<T>;
    fn add(self, rhs: Self) -> ComplexOperator<T> {
        ComplexOperator(&self.0 + &rhs.0)
    }
}

impl<T: Real> std::ops::Sub for &ComplexOperator<T> {
    type Output = ComplexOperator<T>;
    fn sub(self, rhs: Self) -> ComplexOperator<T> {
        ComplexOperator(&self.0 - &rhs.0)
    }
}

impl<T: Real> std::ops::Mul for &ComplexOperator<T> {
    type Output = ComplexOperator<T>;
    fn mul(self, rhs: Self) -> ComplexOperator<T> {
        ComplexOperator(&self.0 * &rhs.0)
    }
}

/// Sorted spectral decomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    /// Ascending.
    pub values: Vec<T>,
    /// Column `i` belongs to `values[i]`.
    pub vectors: DMatrix<Cx<T>>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn new(op: &ComplexOperator<T>) -> Self {
        let n = op.rows();
        let eig = SymmetricEigen::new(op.0.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order
            .sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        HermitianEigen { values, vectors }
    }

    pub fn vector(&self, i: usize) -> DVector<Cx<T>> {
        self.vectors.column(i).into_owned()
    }

    /// V f(Λ) V†.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> ComplexOperator<T> {
        let d = DVector::from_iterator(self.values.len(), self.values.iter().map(|&x| creal(f(x))));
        ComplexOperator(&self.vectors * DMatrix::from_diagonal(&d) * self.vectors.adjoint())
    }
}

/// Kronecker product.
pub trait Tensor<Rhs = Self> {
    type Output;
    fn tensor(&self, rhs: &Rhs) -> Self::Output;
}

impl<T: Real> Tensor for ComplexOperator<T> {
    type Output = ComplexOperator<T>;
    fn tensor(&self, rhs: &Self) -> ComplexOperator<T> {
        ComplexOperator(self.0.kronecker(&rhs.0))
    }
}

impl<T: Real> Tensor for QuantumState<T> {
    type Output = QuantumState<T>;
    fn tensor(&self, rhs: &Self) -> QuantumState<T> {
        QuantumState { amplitudes: self.amplitudes.kronecker(&rhs.amplitudes) }
    }
}

impl<T: Real> Tensor for RawVector<T> {
    type Output = RawVector<T>;
    fn tensor(&self, rhs: &Self) -> RawVector<T> {
        RawVector(self.0.kronecker(&rhs.0))
    }
}

/// Kronecker product of a list of factors, left to right. Returns the 1×1
/// identity for an empty list.
pub fn tensor_all<T: Real>(factors: &[ComplexOperator<T>]) -> ComplexOperator<T> {
    factors.iter().fold(ComplexOperator::identity(1), |acc, f| acc.tensor(f))
}

pub fn tensor_vectors<T: Real>(factors: &[DVector<Cx<T>>]) -> DVector<Cx<T>> {
    let one = DVector::from_element(1, creal(T::one()));
    factors.iter().fold(one, |acc, f| acc.kronecker(f))
}

/// Complex-conjugates every amplitude in the computational basis.
pub fn conjugate_in_basis<T: Real>(s: &QuantumState<T>) -> QuantumState<T> {
    QuantumState { amplitudes: s.amplitudes.conjugate() }
}

/// Point on the unit sphere, polar angle in [0, π], azimuth in [0, 2π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction<T> {
    pub theta: T,
    pub phi: T,
}

impl<T: Real> Direction<T> {
    /// Validates the angle ranges.
    pub fn new(theta: T, phi: T) -> Result<Self> {
        let two_pi = T::two_pi();
        if !(theta >= T::zero() && theta <= T::pi()) {
            return Err(Error::InvalidParameter(format!("polar angle {} outside [0, pi]", theta.to_f64_lossy())));
        }
        if !(phi >= T::zero() && phi < two_pi) {
            return Err(Error::InvalidParameter(format!("azimuth {} outside [0, 2pi)", phi.to_f64_lossy())));
        }
        Ok(Direction { theta, phi })
    }

    /// Reduces arbitrary angles into the canonical ranges.
    pub fn wrapped(theta: T, phi: T) -> Self {
        let two_pi = T::two_pi();
        let mut t = theta % two_pi;
        if t < T::zero() {
            t += two_pi;
        }
        let mut p = phi;
        if t > T::pi() {
            t = two_pi - t;
            p += T::pi();
        }
        let mut p = p % two_pi;
        if p < T::zero() {
            p += two_pi;
        }
        if p >= two_pi {
            p = T::zero();
        }
        Direction { theta: t, phi: p }
    }

    pub fn z() -> Self {
        Direction { theta: T::zero(), phi: T::zero() }
    }

    pub fn from_unit_vector(v: [T; 3]) -> Self {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let c = (v[2] / n).max(-T::one()).min(T::one());
        Self::wrapped(c.acos(), v[1].atan2(v[0]))
    }

    pub fn unit_vector(&self) -> [T; 3] {
        let s = self.theta.sin();
        [s * self.phi.cos(), s * self.phi.sin(), self.theta.cos()]
    }

    /// Angle between two directions.
    pub fn angle_to(&self, other: &Self) -> T {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        dot.max(-T::one()).min(T::one()).acos()
    }

    /// cos²(Φ/2) with Φ the angle between the directions.
    pub fn fidelity(&self, other: &Self) -> T {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        (T::one() + dot) * T::lit(0.5)
    }
}

/// SU(2) matrix carrying |↑_z⟩ to the spin-1/2 state pointing along `d`.
pub fn su2_rotation<T: Real>(d: &Direction<T>) -> ComplexOperator<T> {
    let half = d.theta * T::lit(0.5);
    let (s, c) = half.sin_cos();
    let (sp, cp) = d.phi.sin_cos();
    let e_pos = cx(cp * s, sp * s);
    let e_neg = cx(-cp * s, sp * s);
    ComplexOperator(DMatrix::from_row_slice(2, 2, &[creal(c), e_neg, e_pos, creal(c)]))
}

/// Rz(α) Ry(β) Rz(γ) in SU(2); the rotated z axis has polar angle β.
pub fn euler_rotation<T: Real>(alpha: T, beta: T, gamma: T) -> ComplexOperator<T> {
    let h = T::lit(0.5);
    let (sb, cb) = (beta * h).sin_cos();
    let phase = |t: T| polar(T::one(), t * h);
    let a = phase(-alpha);
    let g = phase(-gamma);
    // [[e^{-i(α+γ)/2} c, -e^{-i(α-γ)/2} s], [e^{i(α-γ)/2} s, e^{i(α+γ)/2} c]]
    let m00 = a * g * cb;
    let m01 = -(a / g) * sb;
    let m10 = (g / a) * sb;
    let m11 = creal(cb) / (a * g);
    ComplexOperator(DMatrix::from_row_slice(2, 2, &[m00, m01, m10, m11]))
}

/// (U_d)^{⊗n_plain} ⊗ (conj U_d)^{⊗n_conj}.
pub fn covariant_rotation<T: Real>(d: &Direction<T>, n_plain: usize, n_conj: usize) -> Result<ComplexOperator<T>> {
    if n_plain + n_conj == 0 {
        return Err(Error::InvalidParameter("covariant rotation needs at least one factor".into()));
    }
    let u = su2_rotation(d);
    Ok(mixed_tensor_power(&u, n_plain, n_conj))
}

/// U^{⊗n_plain} ⊗ Ū^{⊗n_conj} for an arbitrary 2×2 `u`.
pub fn mixed_tensor_power<T: Real>(u: &ComplexOperator<T>, n_plain: usize, n_conj: usize) -> ComplexOperator<T> {
    let ubar = u.conjugate();
    let factors: Vec<_> = std::iter::repeat_n(u.clone(), n_plain).chain(std::iter::repeat_n(ubar, n_conj)).collect();
    tensor_all(&factors)
}

/// Binomial coefficient as a real number.
pub(crate) fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    T::lit(acc.round())
}

/// Coefficients of an N-spin coherent state in the S_z basis of the
/// symmetric subspace.
///
/// Entry `j` corresponds to m = N/2 - j (so entry 0 is m = +N/2) and equals
///
/// ```text
/// cos^{N/2+m}(θ/2) sin^{N/2-m}(θ/2) e^{-i(N/2-m)φ} √binom(N, N/2-m)
/// ```
///
/// With the rotation convention of [`su2_rotation`] this is the basis
/// conjugate of (U_d)^{⊗N}|↑_z⟩^{⊗N} projected on the Dicke states, i.e. the
/// coherent state along (θ, -φ).
pub fn spin_coherent_expansion<T: Real>(n: usize, d: &Direction<T>) -> Result<RawVector<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("spin count must be at least 1".into()));
    }
    let half = d.theta * T::lit(0.5);
    let (s, c) = half.sin_cos();
    let v = (0..=n)
        .map(|down| {
            let up = n - down;
            let mag = c.powi(up as i32) * s.powi(down as i32) * binomial::<T>(n, down).sqrt();
            polar(mag, -(T::lit(down as f64) * d.phi))
        })
        .collect();
    Ok(RawVector::from_vec(v))
}

/// Isometric embedding of the symmetric subspace into (ℂ²)^{⊗N}: column `j`
/// is the normalised Dicke state with `j` spins down (bit 1 = down).
pub fn dicke_embedding<T: Real>(n: usize) -> DMatrix<Cx<T>> {
    let dim = 1usize << n;
    let mut e = DMatrix::zeros(dim, n + 1);
    for idx in 0..dim {
        let down = idx.count_ones() as usize;
        e[(idx, down)] = creal(T::one() / binomial::<T>(n, down).sqrt());
    }
    e
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
