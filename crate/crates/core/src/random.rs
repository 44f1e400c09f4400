//! Random states, isometries and instruments for tests and property checks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::instruments::{KrausSet, NormMode, Povm, PrePostEnsemble};
use crate::qcore::{ComplexOperator, Direction, QuantumState};
use crate::scalar::{cx, Cx, Real};

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Cx<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    cx(T::lit(re), T::lit(im))
}

fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Cx<T>> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Uniformly distributed pure state.
pub fn state<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> QuantumState<T> {
    loop {
        let v = gaussian_matrix::<T, R>(rng, dim, 1).column(0).into_owned();
        if let Ok(s) = QuantumState::normalized(v) {
            return s;
        }
    }
}

/// Direction drawn uniformly from the sphere.
pub fn direction<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Direction<T> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    Direction::wrapped(T::lit(z.acos()), T::lit(phi))
}

pub fn ensemble<T: Real, R: Rng + ?Sized>(rng: &mut R, post_dim: usize, pre_dim: usize) -> PrePostEnsemble<T> {
    let pre = state(rng, pre_dim);
    let post = state(rng, post_dim);
    PrePostEnsemble::new(pre, post)
}

/// `rows x cols` isometry (orthonormal columns), `rows >= cols`, from the QR
/// factorisation of a complex Gaussian matrix.
pub fn isometry<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexOperator<T> {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let qr = gaussian_matrix::<T, R>(rng, rows, cols).qr();
    let (q, r) = qr.unpack();
    // fix column phases so the distribution is Haar
    let mut q = q;
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm_sqr().sqrt();
        if n > T::zero() {
            let phase = d.unscale(n);
            let mut c = q.column_mut(j);
            c *= phase;
        }
    }
    ComplexOperator(q)
}

pub fn unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexOperator<T> {
    isometry(rng, dim, dim)
}

/// Rank-one POVM with `count >= dim` elements. Exact sets are whitened so
/// the elements sum to 𝟙; subnormalised ones are then rescaled elementwise.
pub fn rank_one_povm<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize, mode: NormMode) -> Povm<T> {
    assert!(count >= dim, "need at least dim elements to span the space");
    let v = isometry::<T, R>(rng, count, dim);
    let scales: Vec<T> = (0..count)
        .map(|_| match mode {
            NormMode::Exact => T::one(),
            NormMode::Subnormalized => T::lit(rng.random_range(0.3..=1.0)),
        })
        .collect();
    // rows of an isometry give a tight frame: Σ_k |v_k⟩⟨v_k| = 𝟙
    let elements = (0..count)
        .map(|k| {
            let ket = v.0.row(k).adjoint();
            ComplexOperator::outer(&ket, &ket).scale(scales[k])
        })
        .collect();
    Povm::new(elements, mode).expect("random POVM is valid")
}

/// Kraus operators `output_dim x input_dim` cut from a random isometry.
/// Exact sets need `output_dim * count >= input_dim`; subnormalised ones
/// are cut from a taller isometry when that fails.
pub fn kraus_set<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    output_dim: usize,
    input_dim: usize,
    count: usize,
    mode: NormMode,
) -> KrausSet<T> {
    let rows = output_dim * count;
    assert!(
        mode == NormMode::Subnormalized || rows >= input_dim,
        "exact Kraus set needs output_dim * count >= input_dim"
    );
    let v = isometry::<T, R>(rng, rows.max(input_dim), input_dim);
    let ops = (0..count)
        .map(|k| {
            let block = v.0.rows(k * output_dim, output_dim).into_owned();
            let s = match mode {
                NormMode::Exact => T::one(),
                NormMode::Subnormalized => T::lit(rng.random_range(0.3..=1.0)),
            };
            ComplexOperator(block).scale(s)
        })
        .collect();
    KrausSet::new(ops, mode).expect("random Kraus set is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn isometries_are_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = isometry::<f64, _>(&mut rng, 6, 3);
        let g = &v.adjoint() * &v;
        assert!(g.max_abs_diff(&ComplexOperator::identity(3)) < 1e-12);
        assert!(unitary::<f64, _>(&mut rng, 4).unitarity_defect() < 1e-12);
    }

    #[test]
    fn random_instruments_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = rank_one_povm::<f64, _>(&mut rng, 3, 7, NormMode::Exact);
        assert!(p.elements().iter().all(|m| m.numerical_rank() == 1));
        let k = kraus_set::<f64, _>(&mut rng, 2, 4, 3, NormMode::Subnormalized);
        assert_eq!((k.output_dim(), k.input_dim(), k.len()), (2, 4, 3));
        let s = state::<f32, _>(&mut rng, 5);
        assert_eq!(s.dim(), 5);
    }
}
