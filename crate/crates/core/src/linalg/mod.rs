//! Factorizations consumed by the estimators: LUP with partial pivoting and a
//! one-sided Jacobi SVD for real matrices.

mod lup;
mod svd;

pub use lup::{determinant, lup_decompose, LupFactors};
pub use svd::{svd_decompose, SvdFactors, RANK_TOLERANCE};
