//! Exact rational linear programming.
//!
//! The solver is a sparse revised primal simplex that runs either in `f64` or
//! in exact rationals over the same code. `solve_exact` normally solves in
//! floating point first and then finishes with exact pivots from the final
//! basis, so every reported optimum is exact and carries a dual certificate.

mod field;
mod fractional;
mod lpformat;
mod lu;
mod presolve;
mod problem;
pub mod rational;
mod simplex;
mod solve;

pub use fractional::{charnes_cooper, solve_fractional, BackMap, FractionalProgram, FractionalSolution};
pub use lpformat::{parse_lp, write_lp};
pub use problem::{dot, Constraint, LinearProgram, Relation, Sense, Solution, SolveStats, SparseRow, Status};
pub use rational::{format_rational, parse_rational, Rational};
pub use solve::{
    solve_exact, solve_exact_with, solve_float, verify_certificate, ExactMethod, FloatSolution,
    Verification,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("numerically unstable: residual {residual:e} exceeds tolerance {tol:e}")]
    NumericallyUnstable { residual: f64, tol: f64 },
    #[error("no normalizable point: the denominator cannot be made positive on the feasible set")]
    NoNormalizablePoint,
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
