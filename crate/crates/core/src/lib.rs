//! Estimation games with pre- and post-selected quantum ensembles.
//!
//! The crate is generic over the real scalar (`f32` or `f64`); the aliases
//! at the root fix it to `f64`, and the `single` module to `f32`.

// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covariant;
pub mod duality;
pub mod error;
pub mod gamesim;
pub mod instruments;
pub mod qcore;
pub mod quadrature;
pub mod random;
pub mod scalar;
pub mod scenarios;

pub use error::{Error, Result};
pub use instruments::{NormMode, Scenario};
pub use scalar::Real;

pub type ComplexOperator = qcore::ComplexOperator<f64>;
pub type QuantumState = qcore::QuantumState<f64>;
pub type RawVector = qcore::RawVector<f64>;
pub type Direction = qcore::Direction<f64>;
pub type Povm = instruments::Povm<f64>;
pub type KrausSet = instruments::KrausSet<f64>;
pub type PrePostEnsemble = instruments::PrePostEnsemble<f64>;
pub type FidelityPair = covariant::FidelityPair<f64>;
pub type UseParams = scenarios::UseParams<f64>;

/// Single-precision aliases.
pub mod single {
    pub type ComplexOperator = crate::qcore::ComplexOperator<f32>;
    pub type QuantumState = crate::qcore::QuantumState<f32>;
    pub type RawVector = crate::qcore::RawVector<f32>;
    pub type Direction = crate::qcore::Direction<f32>;
    pub type Povm = crate::instruments::Povm<f32>;
    pub type KrausSet = crate::instruments::KrausSet<f32>;
    pub type PrePostEnsemble = crate::instruments::PrePostEnsemble<f32>;
    pub type FidelityPair = crate::covariant::FidelityPair<f32>;
    pub type UseParams = crate::scenarios::UseParams<f32>;
}
