//! Multiparameter perturbation of non-self-adjoint two-point boundary
//! eigenvalue problems for matrix differential operators.
//!
//! - [`problem`]: problem families, trace vectors, scalar product, Taylor data
//! - [`adjoint`]: concomitant matrix, boundary completion, adjoint problem
//! - [`perturbation`]: splitting of semi-simple and non-derogatory eigenvalues
//! - [`oracle`]: independent collocation solver and drift tracking
//! - [`models`]: rotating string, alpha^2-dynamo, Keldysh-chain fixture
//!
//! The numerical core is generic over [`Real`] (`f32`, `f64`); the aliases
//! below fix `f64`, which is what the closed-form models use.

pub mod adjoint;
pub mod chebyshev;
pub mod error;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod perturbation;
pub mod problem;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Real};

pub type Complex64 = num_complex::Complex<f64>;
pub type Family = problem::ProblemFamily<f64>;
pub type Point = problem::ParameterPoint<f64>;
pub type Direction = problem::ParameterDirection<f64>;
pub type Function = problem::Eigenfunction<f64>;
pub type Taylor = problem::TaylorData<f64>;
pub type Realization = adjoint::AdjointRealization<f64>;
