//! Matrix-free interior point solver for convex quadratic programs with
//! two-sided linear and variable bounds, plus a quasi-Newton SQP driver
//! for smooth nonlinear programs.
//!
//! The Newton systems arising in the interior point iteration are never
//! assembled. After eliminating slacks and bound multipliers, the
//! reduced saddle-point system is recast in a doubly augmented form that
//! is symmetric positive definite at interior iterates and solved with
//! Jacobi-preconditioned conjugate gradients; every product with the
//! system matrix is composed from operator applications.

pub mod bench;
pub mod error;
pub mod ipm;
pub mod kkt;
pub mod linops;
pub mod pcg;
pub mod probio;
pub mod sqp;

pub use error::{Error, Result};
pub use ipm::{
    ipm_solve, ipm_solve_observed, IpmConfig, IpmSolution, IterateState, QpProblem,
    SolveStatus,
};
pub use sqp::{sqp_solve, sqp_solve_observed, NlpProblem, SqpConfig, SqpSolution};
