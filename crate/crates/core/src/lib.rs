//! Arbitrary-precision dilogarithm toolkit: function kernels, hypergeometric
//! series, algebraic roots, an expression language, quadrature, PSLQ,
//! ladder relations and a verification corpus runner.

pub mod algebra;
pub mod error;
pub mod expr;
pub mod harness;
pub mod hyper;
pub mod ladder;
pub mod numerics;
pub mod polylog;
pub mod quad;
pub mod relation;

pub use error::{Error, Result};
pub use numerics::{ConstantTag, PrecisionContext, C, R};
