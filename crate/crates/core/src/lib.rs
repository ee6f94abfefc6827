//! Numerical laboratory for the random landscape function.
//!
//! The landscape `u` solves `-Δu + λVu = 1` with an Anderson-type potential
//! `V(x) = Σ_j ω_j φ(x - j)` built from iid site amplitudes `ω_j ∈ [0, 1]`.
//! This crate discretizes the regularized problem `-Δu_η + (λV + η)u_η = 1`
//! on finite boxes and provides the tools to study it by Monte Carlo:
//!
//! * [`disorder`]: site-keyed reproducible sampling of `ω` and assembly of `V`;
//! * [`lattice`]: grids, the stencil operator, preconditioned CG and a dense oracle;
//! * [`green`]: Green-function columns and the deterministic checks built on them;
//! * [`landscape`]: landscape solves, moments, `η ↓ 0` studies, energy estimate;
//! * [`statistics`]: decay curves, exponential fits, covariances;
//! * [`percolation`]: coarse-grained percolation, chemical distance, gap statistics.

pub mod disorder;
pub mod error;
pub mod green;
pub mod io;
pub mod landscape;
pub mod lattice;
pub mod model;
pub mod percolation;
pub mod statistics;

pub use disorder::{BumpProfile, DisorderLaw, OmegaField, SiteBox};
pub use error::{Error, ErrorKind, Result};
pub use model::DisorderModel;
pub use lattice::{
    BoundaryCondition, Grid, HamiltonianSpec, Preconditioner, ScalarField, SolverOptions,
};
