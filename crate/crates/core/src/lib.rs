//! Exact algorithms and unbiased estimators for the matrix permanent.

pub mod accum;
pub mod continuous;
pub mod corpus;
pub mod error;
pub mod estimator;
pub mod exact;
pub mod grassmann;
pub mod hs;
pub mod linalg;
pub mod matrix;
pub mod roots;
pub mod scaled;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use estimator::{Estimator, EstimatorKind, EstimatorStream};
pub use exact::{per_exact, ExactAlgorithm, ExactOptions, ExactResult};
pub use matrix::{load_matrix, nonzeros, Matrix, Nonzero, NonzeroPattern, Scalar};
pub use scaled::ScaledValue;

// Compiles and runs the guide's code blocks as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/continuous.md")]
    mod continuous {}
    #[doc = include_str!("../../../book/src/grassmann.md")]
    mod grassmann {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
