//! Finite-difference discretization of `-Δ + λV + η` on a box and its
//! linear solvers.

mod field;
mod grid;
mod operator;
mod solver;

pub use field::ScalarField;
pub use grid::{BoundaryCondition, Coords, Grid, MAX_NODES};
pub use operator::{apply_hamiltonian, HamiltonianSpec};
pub use solver::{
    assemble_dense, cg_solve, cg_solve_with_stats, dense_solve_oracle, Preconditioner, SolveStats,
    SolverOptions, DEFAULT_TOL, DENSE_ORACLE_MAX_NODES,
};
