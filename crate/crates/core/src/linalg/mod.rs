//! Exact linear algebra over ℚ and ℚ(i).

pub mod dense;
pub mod echelon;
pub mod scalar;
pub mod sparse;

pub use dense::Dense;
pub use echelon::{
    image_basis, kernel_basis, quotient_dim, rank, rank_by_rref, solve, Echelon, Quotient, SubQuotient, Subspace,
};
pub use scalar::{q, GaussianRational, ParseRationalError, Rational, Scalar};
pub use sparse::{SparseMatrix, SparseVec, TripletEntry};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subspace is not contained in the ambient subspace")]
    NotContained,
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}
