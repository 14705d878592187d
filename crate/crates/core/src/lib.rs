//! Finite-dimensional real spectral triples with multitwisted real
//! structures: construction, transformation and numerical certification.
//!
//! Everything is generic over the real scalar ([`Real`], implemented for
//! `f32` and `f64`); the aliases below fix `f64`, which is what the
//! tolerances in the documentation assume.

pub mod algebra;
pub mod constructions;
pub mod error;
pub mod examples;
pub mod numat;
pub mod scalar;
pub mod triple;

pub use error::{Error, Result};
pub use numat::Sign;
pub use scalar::{Real, C};
pub use triple::{AssertSet, ConditionEntry, ConditionReport};

pub type CMatrix = numat::Matrix<f64>;
pub type AntilinearOp = numat::Antilinear<f64>;
pub type StarAlgebraBasis = algebra::StarAlgebra<f64>;
pub type RealSpectralTriple = triple::Triple<f64>;
pub type MultitwistedTriple = triple::TwistedTriple<f64>;
pub type TwistSummand = triple::Summand<f64>;
