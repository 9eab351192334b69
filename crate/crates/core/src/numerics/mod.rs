//! Numerical kernels shared by the spectral modules.

pub mod dense;
pub mod diff;
pub mod interp;
pub mod quadrature;
pub mod roots;
pub mod tridiag;

pub use dense::{dense_sym_eigenvalues, dense_sym_eigs, DenseSym};
pub use diff::{first_derivative, richardson, second_derivative};
pub use interp::{CubicHermite, CubicSpline};
pub use quadrature::{adaptive_simpson, QuadratureRule, RuleKind};
pub use roots::{bracket_root, brent_root, minimize_1d};
pub use tridiag::{tridiag_eigs, tridiag_eigs_with, EigenSystem, SymTridiag, TridiagOptions};
