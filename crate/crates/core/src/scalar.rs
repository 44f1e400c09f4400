//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All linear algebra is carried out over `Complex<T>` with `T: Real`. The
//! trait bundles the `nalgebra` field machinery with the `num-traits`
//! conversions and pins the numerical tolerances appropriate to the
//! precision of `T`.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point type usable as the base field: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + FloatConst + Default + Send + Sync {
    /// Norm tolerance applied when constructing states and rotations.
    const NORM_TOL: f64;
    /// Tolerance for derived equalities: Hermiticity, positivity,
    /// normalisation of instruments.
    const CHECK_TOL: f64;
    /// A conditional-probability denominator below this is treated as an
    /// instrument that rejects every run.
    const ZERO_ACCEPTANCE: f64;
    /// Eigenvalues below this fraction of the largest one count as zero.
    const RANK_CUTOFF: f64;

    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const NORM_TOL: f64 = 1e-12;
    const CHECK_TOL: f64 = 1e-10;
    const ZERO_ACCEPTANCE: f64 = 1e-14;
    const RANK_CUTOFF: f64 = 1e-12;
}

impl Real for f32 {
    const NORM_TOL: f64 = 1e-5;
    const CHECK_TOL: f64 = 1e-4;
    const ZERO_ACCEPTANCE: f64 = 1e-10;
    const RANK_CUTOFF: f64 = 1e-5;
}

/// Complex scalar over `T`.
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn creal<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

/// Modulus |z|.
#[inline]
pub(crate) fn cabs<T: Real>(z: Cx<T>) -> T {
    z.norm_sqr().sqrt()
}

/// r e^{it}.
#[inline]
pub(crate) fn polar<T: Real>(r: T, t: T) -> Cx<T> {
    let (s, c) = t.sin_cos();
    Complex::new(r * c, r * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        assert_eq!(f64::lit(0.25), 0.25);
        assert_eq!(f32::lit(0.25), 0.25f32);
        assert!((f32::lit(0.1).to_f64_lossy() - 0.1).abs() < 1e-7);
    }
}
