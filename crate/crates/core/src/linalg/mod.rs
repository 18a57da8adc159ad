//! Small dense complex linear algebra and the exact eigensolver oracle.

mod eigen;
mod matrix;

pub use eigen::{eig_exact, EigenDecomposition, MAX_ORACLE_DIM, RESIDUAL_TOLERANCE};
pub use matrix::{
    hermitian_split, inner, match_pairs, norm, real_vector, two_nonzero_eigs_trace, ComplexMatrix,
    SymmetryClass, CLASS_TOLERANCE,
};
