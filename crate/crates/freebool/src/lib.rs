//! Distributions and conditional expectations of non-commutative polynomials
//! and rational expressions in free random variables.
//!
//! The pipeline: parse an expression ([`ncpoly`]), build a linearization of
//! its resolvent ([`linearize`]), solve the Boolean-cumulant matrix
//! fixed-point system as truncated power series ([`solver`], on top of
//! [`mps`]), then read off moments and conditional expectations
//! ([`condexp`]). [`cumulants`] holds the marginal distributions and a
//! brute-force freeness oracle that everything else is tested against.

pub mod condexp;
pub mod cumulants;
pub mod linearize;
pub mod matrix;
pub mod mps;
pub mod ncpoly;
pub mod ring;
pub mod scalar;
pub mod solver;

pub use matrix::Mat;
pub use ring::{Ring, ZPoly};
pub use scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("singular: {0}")]
    Singular(String),
    #[error("unknown variable {0:?}")]
    UnknownVar(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
