//! Dense numerical kernels shared by the physics modules.

mod eigen;
mod expm;
mod matrix;
mod ode;
mod quadrature;
mod symmetric;

pub use eigen::{eig_dense, eigenvalues, schur, EigenDecomposition, RECONSTRUCTION_TOLERANCE};
pub use expm::{expm, expm_action};
pub use matrix::CMat;
pub use ode::{rk_integrate, rk_integrate_at, step_limit, Trajectory};
pub use quadrature::{gauss_hermite, integrate, simpson_weights, trapezoid_weights, QuadratureGrid};
pub use symmetric::{hermitian_eigenvalues, symmetric_eigen};
