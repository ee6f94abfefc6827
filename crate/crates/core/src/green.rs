//! Green-function columns `y ↦ G_η(x₀, y)` and the deterministic
//! statements about them: domination by the massive Laplacian, the
//! rank-one perturbation identity, and the weighted (Agmon) energy
//! inequality.

use crate::disorder::{assemble_potential, OmegaField};
use crate::error::{Error, Result};
use crate::io::{Cell, Table};
use crate::lattice::{cg_solve, Coords, HamiltonianSpec, ScalarField, SolverOptions};
use crate::model::DisorderModel;

/// Solution of `(-Δ + λV + η) G(x₀, ·) = δ_{x₀}` with the discrete delta
/// of unit mass.
#[derive(Debug, Clone)]
pub struct GreenColumn {
    source: usize,
    field: ScalarField,
    spec: HamiltonianSpec,
}

impl GreenColumn {
    pub fn source(&self) -> usize {
        self.source
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn value(&self, node: usize) -> f64 {
        self.field.values()[node]
    }

    /// Midpoint-rule mass of every unit cell.
    pub fn cell_masses(&self) -> Vec<f64> {
        self.field.cell_integrals()
    }

    /// `(|x - x₀|_∞, G)` per node, for plotting.
    pub fn to_distance_table(&self) -> Table {
        let g = self.field.grid();
        let x0 = g.node_position(self.source);
        let mut t = Table::new(&["node", "distance", "value"]);
        for (i, &v) in self.field.values().iter().enumerate() {
            let x = g.node_position(i);
            let r = (0..g.dim()).map(|a| (x[a] - x0[a]).abs()).fold(0.0, f64::max);
            t.push(vec![Cell::from(i), Cell::from(r), Cell::from(v)]);
        }
        t
    }
}

pub fn green_column(h: &HamiltonianSpec, source: usize, opts: &SolverOptions) -> Result<GreenColumn> {
    let rhs = ScalarField::delta(*h.grid(), source)?;
    let field = cg_solve(h, &rhs, opts)?;
    let floor = -10.0 * opts.tol * field.max_abs();
    if field.min() < floor {
        return Err(Error::Consistency(format!(
            "Green column negative beyond tolerance: min {:e} < {floor:e}",
            field.min()
        )));
    }
    Ok(GreenColumn {
        source,
        field,
        spec: h.clone(),
    })
}

/// A-posteriori bound on the pointwise error of a Green column solved to
/// relative residual `tol`: `|G - G_exact| <= tol |δ|_2 |A^{-1}|_∞`, and
/// `|A^{-1}|_∞ <= sup ũ` where `ũ` solves the potential-free problem with
/// right-hand side 1 (the potential only lowers `A^{-1}` entrywise).
pub fn green_error_bound(h: &HamiltonianSpec, opts: &SolverOptions) -> Result<f64> {
    let grid = *h.grid();
    let free = HamiltonianSpec::free(grid, h.eta())?;
    let u_free = cg_solve(&free, &ScalarField::constant(grid, 1.0), opts)?;
    let delta_norm = 1.0 / grid.node_volume();
    Ok(opts.tol * delta_norm * u_free.max() * (1.0 + opts.tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    /// `max_y (G(x₀, y) - G̃(x₀, y))`; negative when strictly dominated.
    pub max_violation: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Checks `lower <= upper` node-wise for two columns from the same source,
/// up to twice the solver error bound of the larger operator's inverse.
pub fn compare_columns(lower: &GreenColumn, upper: &GreenColumn, opts: &SolverOptions) -> Result<DominationReport> {
    lower.field.check_same_grid(&upper.field)?;
    if lower.source != upper.source {
        return Err(Error::Config("columns have different sources".into()));
    }
    let max_violation = lower
        .field
        .values()
        .iter()
        .zip(upper.field.values())
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = 2.0 * green_error_bound(&upper.spec, opts)?;
    Ok(DominationReport {
        max_violation,
        threshold,
        pass: max_violation <= threshold,
    })
}

/// Checks `0 <= G_η(x₀, ·) <= G̃_η(x₀, ·)` where `G̃` is the Green function
/// of `-Δ + η` on the same grid. The threshold is twice the solver error
/// bound from [`green_error_bound`].
pub fn massive_domination_check(g: &GreenColumn, opts: &SolverOptions) -> Result<DominationReport> {
    let free = HamiltonianSpec::free(*g.spec.grid(), g.spec.eta())?;
    let reference = green_column(&free, g.source, opts)?;
    compare_columns(g, &reference, opts)
}

/// `∫_{Q(z)} G(x₀, y) dy` by the midpoint rule.
pub fn cube_mass(g: &GreenColumn, cell: &Coords) -> Result<f64> {
    let grid = g.field.grid();
    if !grid.contains_cell(cell) {
        return Err(Error::OutOfRange {
            index: cell.iter().map(|&c| c as i64).collect(),
            side: grid.cells(),
        });
    }
    let sum: f64 = grid.nodes_in_cell(cell).iter().map(|&i| g.field.values()[i]).sum();
    Ok(sum * grid.node_volume())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOneReport {
    /// `(G - G^{z,-})(x, origin)`
    pub lhs: f64,
    /// `λ h^d Σ_{x' ∈ Q(z)} G(x, x') (1 - ω_z) φ(x' - z) G^{z,-}(x', origin)`
    pub rhs: f64,
    pub relative_error: f64,
}

/// Verifies the resolvent identity for raising `ω_z` to 1. The origin is
/// the grid's centre node. Needs one column of each operator: `G^{z,-}`
/// from the origin, and `G` from `x` (by symmetry equal to `G(·, x)`).
pub fn rank_one_identity_check(
    omega: &OmegaField,
    z: &[i64],
    model: &DisorderModel,
    x: usize,
    opts: &SolverOptions,
) -> Result<RankOneReport> {
    let grid = model.grid;
    let raised = omega.with_site(z, 1.0)?;
    let v = assemble_potential(omega, &model.bump, &grid)?;
    let v_raised = assemble_potential(&raised, &model.bump, &grid)?;
    let h = HamiltonianSpec::new(v, model.lambda, model.eta)?;
    let h_raised = HamiltonianSpec::new(v_raised, model.lambda, model.eta)?;
    let origin = grid.center_node();

    let g_origin = green_column(&h, origin, opts)?;
    let g_raised_origin = green_column(&h_raised, origin, opts)?;
    let g_x = green_column(&h, x, opts)?;
    let lhs = g_origin.value(x) - g_raised_origin.value(x);

    let mut cell = [0; 3];
    for (c, &v) in cell.iter_mut().zip(z) {
        *c = v as usize;
    }
    let w = omega.get(&cell);
    let mut sum = 0.0;
    for node in grid.nodes_in_cell(&cell) {
        let pos = grid.node_position(node);
        let mut off = [0.0; 3];
        for a in 0..grid.dim() {
            off[a] = pos[a] - cell[a] as f64;
        }
        let phi = model.bump.evaluate(&off[..grid.dim()]);
        sum += g_x.value(node) * (1.0 - w) * phi * g_raised_origin.value(node);
    }
    let rhs = model.lambda * grid.node_volume() * sum;
    let floor = 1e-14 * g_origin.field.max_abs();
    let relative_error = (lhs - rhs).abs() / lhs.abs().max(floor);
    Ok(RankOneReport {
        lhs,
        rhs,
        relative_error,
    })
}

/// Weight and cutoff of the weighted energy inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgmonParams {
    /// Slope `μ` of `h(x) = μ min(|x|_∞, cap)`.
    pub mu: f64,
    pub cap: f64,
    /// `χ = 0` for `|x|_∞ <= inner`.
    pub inner: f64,
    /// `χ = 0` for `|x|_∞ >= outer`.
    pub outer: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgmonReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Evaluates both sides of
/// `½∫χ²e^{2h}|∇G|² + ∫χ²e^{2h}G²(λV - 4|∇h|²) <= 4∫|∇χ|²e^{2h}G²`
/// with forward differences and midpoint quadrature. `χ` is the
/// piecewise-linear function of `r = |x - x₀|_∞` given by
/// `clamp(min(r - inner, outer - r), 0, 1)`.
pub fn agmon_inequality_check(g: &GreenColumn, params: &AgmonParams) -> Result<AgmonReport> {
    let grid = *g.field.grid();
    if g.source != grid.center_node() {
        return Err(Error::Config("Agmon check needs the source at the grid centre".into()));
    }
    let AgmonParams { mu, cap, inner, outer } = *params;
    if !(mu >= 0.0 && cap >= 0.0) {
        return Err(Error::Config("Agmon weight needs mu >= 0 and cap >= 0".into()));
    }
    if inner < 0.5 || outer < inner {
        return Err(Error::Config(format!(
            "cutoff radii must satisfy 1/2 <= inner <= outer (got {inner}, {outer})"
        )));
    }
    let x0 = grid.node_position(g.source);
    let half_width = (0..grid.dim())
        .map(|a| (x0[a] + 0.5).min(grid.cells() as f64 - 0.5 - x0[a]))
        .fold(f64::INFINITY, f64::min);
    if outer >= half_width {
        return Err(Error::Config(format!(
            "outer cutoff {outer} must stay below the box half-width {half_width}"
        )));
    }

    let n = grid.node_count();
    let mut chi = Vec::with_capacity(n);
    let mut weight = Vec::with_capacity(n);
    for i in 0..n {
        let x = grid.node_position(i);
        let r = (0..grid.dim()).map(|a| (x[a] - x0[a]).abs()).fold(0.0, f64::max);
        chi.push((r - inner).min(outer - r).clamp(0.0, 1.0));
        weight.push(mu * r.min(cap));
    }
    let chi = ScalarField::new(grid, chi)?;
    let hfun = ScalarField::new(grid, weight)?;
    let grad_g = g.field.grad_sq();
    let grad_chi = chi.grad_sq();
    let grad_h = hfun.grad_sq();

    let lambda = g.spec.lambda();
    let pot = g.spec.potential().values();
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for i in 0..n {
        let gv = g.field.values()[i];
        let e2h = (2.0 * hfun.values()[i]).exp();
        let c2 = chi.values()[i].powi(2);
        lhs += 0.5 * c2 * e2h * grad_g[i] + c2 * e2h * gv * gv * (lambda * pot[i] - 4.0 * grad_h[i]);
        rhs += 4.0 * grad_chi[i] * e2h * gv * gv;
    }
    let vol = grid.node_volume();
    lhs *= vol;
    rhs *= vol;
    Ok(AgmonReport {
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + 1e-6) + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{sample_omega, BumpProfile, DisorderLaw, SiteBox};
    use crate::lattice::{dense_solve_oracle, BoundaryCondition, Grid, Preconditioner};

    fn model(dim: usize, cells: usize, lambda: f64, eta: f64) -> DisorderModel {
        DisorderModel {
            grid: Grid::new(dim, cells, 20, BoundaryCondition::Dirichlet).unwrap(),
            law: DisorderLaw::Bernoulli { q: 0.5 },
            bump: BumpProfile::default(),
            lambda,
            eta,
            master_seed: 17,
            solver: SolverOptions::line(1e-12),
        }
    }

    #[test]
    fn free_column_matches_dense_oracle() {
        let grid = Grid::new(1, 4, 16, BoundaryCondition::Dirichlet).unwrap();
        let h = HamiltonianSpec::free(grid, 1.0).unwrap();
        let g = green_column(&h, 20, &SolverOptions::with_tol(1e-12)).unwrap();
        let oracle = dense_solve_oracle(&h, &ScalarField::delta(grid, 20).unwrap()).unwrap();
        for (a, b) in g.field().values().iter().zip(oracle.values()) {
            assert!((a - b).abs() <= 1e-8 * oracle.max_abs());
        }
    }

    #[test]
    fn symmetric_in_source() {
        let m = model(1, 8, 1.0, 1e-3);
        let (_, h) = m.sample(0).unwrap();
        let opts = SolverOptions::with_tol(1e-12);
        let (a, b) = (37, 121);
        let ga = green_column(&h, a, &opts).unwrap();
        let gb = green_column(&h, b, &opts).unwrap();
        assert!((ga.value(b) - gb.value(a)).abs() <= 1e-8 * ga.value(b));
    }

    #[test]
    fn increasing_lambda_lowers_column() {
        let m = model(1, 8, 0.5, 1e-3);
        let (_, h) = m.sample(1).unwrap();
        let opts = SolverOptions::line(1e-12);
        let src = h.grid().center_node();
        let lo = green_column(&h, src, &opts).unwrap();
        let hi = green_column(&h.with_lambda(5.0).unwrap(), src, &opts).unwrap();
        let tol = 1e-9 * lo.field().max_abs();
        assert!(hi.field().values().iter().zip(lo.field().values()).all(|(a, b)| a <= &(b + tol)));
    }

    #[test]
    fn domination_without_potential_is_tight() {
        let grid = Grid::new(1, 8, 20, BoundaryCondition::Dirichlet).unwrap();
        let h = HamiltonianSpec::free(grid, 1e-2).unwrap();
        let opts = SolverOptions::line(1e-12);
        let g = green_column(&h, grid.center_node(), &opts).unwrap();
        let r = massive_domination_check(&g, &opts).unwrap();
        assert!(r.pass && r.max_violation.abs() <= r.threshold);
        // λ = 0 with a nonzero potential is the same operator
        let m = model(1, 8, 0.0, 1e-2);
        let (_, h0) = m.sample(3).unwrap();
        let g0 = green_column(&h0, grid.center_node(), &opts).unwrap();
        assert_eq!(g0.field().values(), g.field().values());
    }

    #[test]
    fn domination_holds_for_random_samples() {
        let m = model(1, 16, 1.0, 1e-4);
        let opts = SolverOptions::line(1e-12);
        for s in 0..10 {
            let (_, h) = m.sample(s).unwrap();
            let g = green_column(&h, m.grid.center_node(), &opts).unwrap();
            let r = massive_domination_check(&g, &opts).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(r.max_violation < 0.0);
        }
    }

    #[test]
    fn cube_mass_partition() {
        let m = model(2, 4, 1.0, 0.1);
        let (_, h) = m.sample(0).unwrap();
        let g = green_column(&h, m.grid.center_node(), &SolverOptions::with_tol(1e-10)).unwrap();
        let total: f64 = (0..m.grid.cell_count())
            .map(|c| cube_mass(&g, &m.grid.cell_coords(c)).unwrap())
            .sum();
        assert!((total - g.field().integral()).abs() < 1e-10 * total);
        assert!(cube_mass(&g, &[4, 0, 0]).is_err());
        let c = ScalarField::constant(m.grid, 2.5);
        let gc = GreenColumn {
            source: 0,
            field: c,
            spec: h,
        };
        assert!((cube_mass(&gc, &[1, 2, 0]).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rank_one_identity_is_exact() {
        let m = model(1, 32, 1.0, 1e-3);
        let opts = SolverOptions::line(1e-13);
        for s in 0..5 {
            let omega = m.omega(s).unwrap();
            let z = (0..32).find(|&j| omega.values()[j] == 0.0).unwrap() as i64;
            let x = m.grid.node_index(&[(z as usize) * 20 + 7, 0, 0]);
            let r = rank_one_identity_check(&omega, &[z], &m, x, &opts).unwrap();
            assert!(r.lhs > 0.0);
            assert!(r.relative_error <= 1e-6, "{r:?}");
        }
    }

    #[test]
    fn rank_one_trivial_when_already_raised() {
        let m = model(1, 8, 1.0, 1e-2);
        let sites = SiteBox::of_grid(&m.grid);
        let omega = OmegaField::from_values(sites, vec![1.0; 8], m.law.clone()).unwrap();
        let r = rank_one_identity_check(&omega, &[2], &m, 10, &SolverOptions::line(1e-12)).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert_eq!(r.relative_error, 0.0);
    }

    #[test]
    fn rank_one_rejects_coarse_mesh() {
        let mut m = model(1, 8, 1.0, 1e-2);
        m.grid = Grid::new(1, 8, 4, BoundaryCondition::Dirichlet).unwrap();
        let omega = sample_omega(&m.law, SiteBox::of_grid(&m.grid), 1, 0).unwrap();
        assert!(matches!(
            rank_one_identity_check(&omega, &[2], &m, 10, &SolverOptions::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn agmon_trivial_cutoff() {
        let m = model(1, 16, 1.0, 1e-3);
        let (_, h) = m.sample(0).unwrap();
        let g = green_column(&h, m.grid.center_node(), &SolverOptions::line(1e-12)).unwrap();
        let p = AgmonParams {
            mu: 0.3,
            cap: 4.0,
            inner: 3.0,
            outer: 3.0,
        };
        let r = agmon_inequality_check(&g, &p).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.pass);
        let bad = AgmonParams { inner: 0.2, ..p };
        assert!(agmon_inequality_check(&g, &bad).is_err());
        let wide = AgmonParams { outer: 9.0, ..p };
        assert!(agmon_inequality_check(&g, &wide).is_err());
    }

    #[test]
    fn agmon_holds_on_random_samples_2d() {
        let mut m = model(2, 12, 1.0, 0.0);
        m.solver = SolverOptions {
            tol: 1e-10,
            max_iter: None,
            preconditioner: Preconditioner::Line,
        };
        for s in 0..3 {
            let (_, h) = m.sample(s).unwrap();
            let g = green_column(&h, m.grid.center_node(), &m.solver).unwrap();
            for mu in [0.0, 0.1] {
                let p = AgmonParams {
                    mu,
                    cap: 3.0,
                    inner: 0.5,
                    outer: 5.0,
                };
                let r = agmon_inequality_check(&g, &p).unwrap();
                assert!(r.pass, "sample {s} mu {mu}: {r:?}");
            }
        }
    }
}
