//! Regularized integrals, singular asymptotic expansions and push-forwards
//! of polyhomogeneous densities.
//!
//! The log-polynomial, index-set and quadrature layers are generic over the
//! real scalar (`f32` or `f64`); the aliases below fix the common choices.

pub mod acceptance;
pub mod asymfun;
pub mod error;
pub mod expr;
pub mod fit;
pub mod indexsets;
pub mod logpoly;
pub mod numdiff;
pub mod pushforward;
pub mod quadrature;
pub mod sal;
pub mod scalar;

pub use error::{Error, Result};

pub type LogPoly64 = logpoly::LogPoly<f64>;
pub type LogPoly32 = logpoly::LogPoly<f32>;
pub type IndexSet64 = indexsets::IndexSet<f64>;
pub type IndexSet32 = indexsets::IndexSet<f32>;
pub type IndexFamily64 = indexsets::IndexFamily<f64>;
pub type IndexFamily32 = indexsets::IndexFamily<f32>;
pub type Quadrature64 = quadrature::Quadrature<f64>;
pub type Quadrature32 = quadrature::Quadrature<f32>;
