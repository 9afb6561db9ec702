//! Dense symmetric linear algebra.

mod eigen;
mod matrix;
mod scaled;

pub use eigen::{
    project_topk, spectral_norm, sym_eigen, sym_eigenvalues, topk_coordinates,
    EigenDecomposition,
};
pub use matrix::{distance, dot, max_row_norm, norm2, squared_distance, Matrix, SymMatrix};
pub use scaled::{row_distance, scaled_power, ScaledMatrix, ScaledPower, ScaledValue};

/// Default residual tolerance for eigendecompositions.
pub const EIGEN_TOL: f64 = 1e-10;
