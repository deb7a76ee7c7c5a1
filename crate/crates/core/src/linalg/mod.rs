//! Linear algebra used by the reduced model and the full-model oracle.

mod dense;
mod small;
mod sparse;

pub use dense::{solve_real, DenseMatrix, Hessenberg};
pub use small::Mat2;
pub use sparse::CsrMatrix;
