//! Simultaneous computation of several dominant poles of large sparse
//! descriptor systems.
//!
//! The solver works directly on the sparse Jacobian `J` of a system
//! `E·ẋ = J·x + B·u`, `y = Cᵀx + D·u` with `E = diag(1, …, 1, 0, …, 0)`, never
//! forming the dense state matrix. Two fixed-point iterations are provided:
//! one takes the full spectrum of a small projected matrix as the next shift
//! tuple, the other takes only its diagonal. A dense reference implementation
//! in [`oracle`] cross-checks both on small systems.

pub mod dense;
pub mod descriptor;
pub mod oracle;
pub mod solver;
pub mod sparse;

pub use num_complex::Complex64;

pub use dense::{dense_eig, DenseMatrix};
pub use descriptor::{DescriptorSystem, StateSpaceSystem};
pub use solver::{run, Method, PoleResult, RunReport, SolverConfig};
pub use sparse::{Factorization, SparseMatrix};
