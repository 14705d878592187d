//! Dense complex matrices and the handful of factorizations the rest of the
//! crate needs.

mod antilinear;
mod eigen;
mod lu;
mod matrix;

pub use antilinear::{al_compose_sign, Antilinear, Sign};
pub use eigen::{
    herm_eig, herm_eig_tol, herm_eigenvalues, herm_exp, herm_fn, hermitian_asymmetry, op_norm, principal_sqrt, HermEig,
};
pub use lu::{condition_number, inverse};
pub use matrix::{kron, kron_all, pauli, Matrix};
