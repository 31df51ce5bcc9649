//! Exact linear algebra over ℚ and F_p, and Smith forms over k[ħ].

mod matrix;
mod poly;
mod scalar;
mod snf;
mod subspace;

pub use matrix::{to_dense, to_sparse, Echelon, Matrix, SparseRow, Vector, DENSE_CUTOFF};
pub use poly::Poly;
pub use scalar::{Field, Scalar};
pub use snf::{smith_normal_form, PolyMatrix, SmithForm};
pub use subspace::{combine, unit, QuotientMap, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgError {
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("shape mismatch: {left:?} times {right:?}")]
    Shape {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("ambient dimensions differ: {0} vs {1}")]
    Ambient(usize, usize),
    #[error("matrix is {0}x{1}, not square")]
    NotSquare(usize, usize),
    #[error("map does not send the source subspace into the target subspace")]
    NotInduced,
}
