use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::field::{dot, ScalarField};
use super::grid::BoundaryCondition;
use super::operator::HamiltonianSpec;

/// Largest system the dense oracle will factorize.
pub const DENSE_ORACLE_MAX_NODES: usize = 10_000;

/// Relative residual used when nothing else is configured.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Preconditioner {
    /// Diagonal scaling.
    #[default]
    Jacobi,
    /// Exact tridiagonal solves along axis-0 lines (block Jacobi). The
    /// periodic wrap link is dropped from each block, which keeps the
    /// blocks strictly diagonally dominant. In one Dirichlet dimension this
    /// is the full operator and CG finishes in a single step.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once `|Af - rhs|_2 <= tol * |rhs|_2`.
    pub tol: f64,
    /// `None` selects `20 * nodes_per_side * dim`.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: None,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn line(tol: f64) -> Self {
        Self {
            tol,
            max_iter: None,
            preconditioner: Preconditioner::Line,
        }
    }
}

/// Diagnostics of a converged solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

enum Precond {
    Jacobi(Vec<f64>),
    Line(LineFactor),
}

impl Precond {
    fn build(h: &HamiltonianSpec, kind: Preconditioner) -> Self {
        match kind {
            Preconditioner::Jacobi => Precond::Jacobi(h.diagonal().iter().map(|d| 1.0 / d).collect()),
            Preconditioner::Line => Precond::Line(LineFactor::new(h)),
        }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Precond::Jacobi(inv) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(inv) {
                    *zi = ri * di;
                }
            }
            Precond::Line(f) => f.solve(r, z),
        }
    }
}

/// Thomas factorization of every axis-0 line. Lines are contiguous in
/// memory because axis 0 is the fastest index.
struct LineFactor {
    n: usize,
    off: f64,
    // per node: reciprocal of the modified pivot, and the modified
    // super-diagonal c'_i
    inv_pivot: Vec<f64>,
    c_prime: Vec<f64>,
}

impl LineFactor {
    fn new(h: &HamiltonianSpec) -> Self {
        let g = h.grid();
        let n = g.nodes_per_side();
        let diag = h.diagonal();
        let off = if n > 1 { -1.0 / g.spacing().powi(2) } else { 0.0 };
        let total = g.node_count();
        let mut inv_pivot = vec![0.0; total];
        let mut c_prime = vec![0.0; total];
        for start in (0..total).step_by(n) {
            let mut prev_c = 0.0;
            for k in 0..n {
                let i = start + k;
                let pivot = diag[i] - if k > 0 { off * prev_c } else { 0.0 };
                inv_pivot[i] = 1.0 / pivot;
                prev_c = if k + 1 < n { off / pivot } else { 0.0 };
                c_prime[i] = prev_c;
            }
        }
        Self {
            n,
            off,
            inv_pivot,
            c_prime,
        }
    }

    fn solve(&self, r: &[f64], z: &mut [f64]) {
        let n = self.n;
        for start in (0..r.len()).step_by(n) {
            let mut prev = 0.0;
            for k in 0..n {
                let i = start + k;
                prev = (r[i] - if k > 0 { self.off * prev } else { 0.0 }) * self.inv_pivot[i];
                z[i] = prev;
            }
            for k in (0..n.saturating_sub(1)).rev() {
                let i = start + k;
                z[i] -= self.c_prime[i] * z[i + 1];
            }
        }
    }
}

fn default_max_iter(h: &HamiltonianSpec) -> usize {
    let g = h.grid();
    (20 * g.nodes_per_side() * g.dim()).max(100)
}

/// Preconditioned conjugate gradients from a zero initial guess.
///
/// All reductions run sequentially in node order, so the result is
/// bit-identical across runs and independent of any outer parallelism.
pub fn cg_solve(h: &HamiltonianSpec, rhs: &ScalarField, opts: &SolverOptions) -> Result<ScalarField> {
    cg_solve_with_stats(h, rhs, opts).map(|(f, _)| f)
}

pub fn cg_solve_with_stats(
    h: &HamiltonianSpec,
    rhs: &ScalarField,
    opts: &SolverOptions,
) -> Result<(ScalarField, SolveStats)> {
    if rhs.grid() != h.grid() {
        return Err(Error::GridMismatch("rhs and operator live on different grids".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("solver tolerance must be positive (got {})", opts.tol)));
    }
    let n = rhs.len();
    let b = rhs.values();
    let b_norm = dot(b, b).sqrt();
    let grid = *h.grid();
    if b_norm == 0.0 {
        return Ok((
            ScalarField::zeros(grid),
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let max_iter = opts.max_iter.unwrap_or_else(|| default_max_iter(h));
    let precond = Precond::build(h, opts.preconditioner);
    let target = opts.tol * b_norm;

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    // The recursive residual drifts from the true one in long runs; verify
    // on exit and restart from the current iterate if needed.
    for _restart in 0..4 {
        precond.apply(&r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        let mut r_norm = dot(&r, &r).sqrt();
        while r_norm > target && iterations < max_iter {
            h.apply_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::Singular(format!(
                    "non-positive curvature p·Ap = {pap:e} at iteration {iterations}"
                )));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            precond.apply(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            r_norm = dot(&r, &r).sqrt();
            iterations += 1;
            history.push(r_norm / b_norm);
        }
        h.apply_into(&x, &mut ap);
        for i in 0..n {
            r[i] = b[i] - ap[i];
        }
        let true_norm = dot(&r, &r).sqrt();
        if true_norm <= target {
            return Ok((
                ScalarField::new(grid, x)?,
                SolveStats {
                    iterations,
                    relative_residual: true_norm / b_norm,
                },
            ));
        }
        if iterations >= max_iter {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations,
        residual_history: history,
    })
}

/// Assembled dense matrix of the operator (row-major in node order).
pub fn assemble_dense(h: &HamiltonianSpec) -> Result<DMatrix<f64>> {
    let g = h.grid();
    let n = g.node_count();
    if n > DENSE_ORACLE_MAX_NODES {
        return Err(Error::SizeGuard {
            nodes: n,
            limit: DENSE_ORACLE_MAX_NODES,
        });
    }
    let inv_h2 = 1.0 / g.spacing().powi(2);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] += h.mass_term(i);
        for axis in 0..g.dim() {
            for forward in [true, false] {
                a[(i, i)] += inv_h2;
                if let Some(j) = g.neighbor(i, axis, forward) {
                    a[(i, j)] -= inv_h2;
                }
            }
        }
    }
    Ok(a)
}

/// Direct LU solve of the assembled system. Test oracle only.
pub fn dense_solve_oracle(h: &HamiltonianSpec, rhs: &ScalarField) -> Result<ScalarField> {
    if rhs.grid() != h.grid() {
        return Err(Error::GridMismatch("rhs and operator live on different grids".into()));
    }
    if h.grid().bc() == BoundaryCondition::Periodic && h.eta() <= 0.0 {
        return Err(Error::Singular("periodic operator with zero mass".into()));
    }
    let a = assemble_dense(h)?;
    let b = DVector::from_column_slice(rhs.values());
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("LU factorization hit a zero pivot".into()))?;
    ScalarField::new(*h.grid(), x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{apply_hamiltonian, Grid};

    fn rel_err(a: &ScalarField, b: &ScalarField) -> f64 {
        let num: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = b.values().iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    fn pseudo_random(i: usize, salt: u64) -> f64 {
        let mut z = (i as u64).wrapping_add(salt).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z ^= z >> 31;
        z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z ^= z >> 29;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn constant_solution_periodic() {
        let g = Grid::new(2, 4, 4, BoundaryCondition::Periodic).unwrap();
        let h = HamiltonianSpec::free(g, 1.0).unwrap();
        for pc in [Preconditioner::Jacobi, Preconditioner::Line] {
            let opts = SolverOptions {
                preconditioner: pc,
                ..SolverOptions::default()
            };
            let f = cg_solve(&h, &ScalarField::constant(g, 1.0), &opts).unwrap();
            assert!(f.values().iter().all(|v| (v - 1.0).abs() < 1e-8));
        }
    }

    #[test]
    fn recovers_applied_vector() {
        let g = Grid::new(2, 5, 4, BoundaryCondition::Dirichlet).unwrap();
        let v = ScalarField::from_fn(g, |i| pseudo_random(i, 3)).unwrap();
        let h = HamiltonianSpec::new(v, 1.0, 0.05).unwrap();
        let truth = ScalarField::from_fn(g, |i| pseudo_random(i, 11) - 0.5).unwrap();
        let rhs = apply_hamiltonian(&h, &truth).unwrap();
        for pc in [Preconditioner::Jacobi, Preconditioner::Line] {
            let opts = SolverOptions {
                tol: 1e-12,
                max_iter: None,
                preconditioner: pc,
            };
            let f = cg_solve(&h, &rhs, &opts).unwrap();
            assert!(rel_err(&f, &truth) < 1e-8, "{pc:?}");
        }
    }

    #[test]
    fn matches_dense_lu_1d() {
        let g = Grid::new(1, 32, 1, BoundaryCondition::Dirichlet).unwrap();
        let v = ScalarField::from_fn(g, |i| pseudo_random(i, 5)).unwrap();
        let h = HamiltonianSpec::new(v, 1.0, 0.1).unwrap();
        let rhs = ScalarField::from_fn(g, |i| pseudo_random(i, 17)).unwrap();
        let f = cg_solve(&h, &rhs, &SolverOptions::with_tol(1e-10)).unwrap();
        let oracle = dense_solve_oracle(&h, &rhs).unwrap();
        assert!(rel_err(&f, &oracle) <= 1e-8);
    }

    #[test]
    fn line_preconditioner_is_exact_in_1d_dirichlet() {
        let g = Grid::new(1, 16, 20, BoundaryCondition::Dirichlet).unwrap();
        let v = ScalarField::from_fn(g, |i| pseudo_random(i, 1)).unwrap();
        let h = HamiltonianSpec::new(v, 1.0, 1e-6).unwrap();
        let (_, stats) =
            cg_solve_with_stats(&h, &ScalarField::constant(g, 1.0), &SolverOptions::line(1e-12)).unwrap();
        assert!(stats.iterations <= 2, "{stats:?}");
    }

    #[test]
    fn scalar_system() {
        // d = 1, one node, Dirichlet: A = 2/h^2 + λV + η
        let g = Grid::new(1, 1, 1, BoundaryCondition::Dirichlet).unwrap();
        let h = HamiltonianSpec::new(ScalarField::constant(g, 0.5), 2.0, 0.25).unwrap();
        let f = dense_solve_oracle(&h, &ScalarField::constant(g, 3.0)).unwrap();
        assert!((f.values()[0] - 3.0 / (2.0 + 1.0 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn dense_guard() {
        let g = Grid::new(2, 101, 1, BoundaryCondition::Dirichlet).unwrap();
        let h = HamiltonianSpec::free(g, 1.0).unwrap();
        assert!(matches!(
            dense_solve_oracle(&h, &ScalarField::zeros(g)),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn non_convergence_carries_history() {
        let g = Grid::new(1, 64, 4, BoundaryCondition::Dirichlet).unwrap();
        let h = HamiltonianSpec::free(g, 1e-6).unwrap();
        let opts = SolverOptions {
            tol: 1e-12,
            max_iter: Some(3),
            preconditioner: Preconditioner::Jacobi,
        };
        match cg_solve(&h, &ScalarField::constant(g, 1.0), &opts) {
            Err(Error::NonConvergence {
                iterations,
                residual_history,
            }) => {
                assert_eq!(iterations, 3);
                assert_eq!(residual_history.len(), 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = Grid::new(1, 4, 2, BoundaryCondition::Dirichlet).unwrap();
        let h = HamiltonianSpec::free(g, 1.0).unwrap();
        let f = cg_solve(&h, &ScalarField::zeros(g), &SolverOptions::default()).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }
}
