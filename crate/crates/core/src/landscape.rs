//! The landscape `u_η`, solution of `(-Δ + λV + η) u_η = 1`, and the
//! quantities built from it.

use serde::{Deserialize, Serialize};

use crate::disorder::OmegaField;
use crate::error::{Error, Result};
use crate::io::{Cell, Table};
use crate::lattice::{cg_solve, BoundaryCondition, HamiltonianSpec, ScalarField, SolverOptions};
use crate::model::DisorderModel;
use crate::statistics::{bootstrap_half_widths, mean, std_error, BOUNDARY_MARGIN};

#[derive(Debug, Clone)]
pub struct LandscapeSolution {
    u: ScalarField,
    spec: HamiltonianSpec,
    sup_per_cell: Vec<f64>,
    floor: f64,
}

impl LandscapeSolution {
    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    /// Node maximum of `u` in every unit cell.
    pub fn sup_per_cell(&self) -> &[f64] {
        &self.sup_per_cell
    }

    /// Lower barrier for `u`: the solution with `V ≡ 1` on a periodic box,
    /// i.e. `1/(λ + η)`, valid because amplitudes and bump are at most 1.
    /// There is no positive barrier under Dirichlet conditions, so it is 0
    /// there.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Per-cell table: cell index, coordinates, sup of u.
    pub fn cell_table(&self) -> Table {
        let g = self.u.grid();
        let d = g.dim();
        let mut header = vec!["cell".to_string()];
        header.extend((0..d).map(|a| format!("z{a}")));
        header.push("sup_u".into());
        let mut t = Table::new(&header);
        for (i, &v) in self.sup_per_cell.iter().enumerate() {
            let c = g.cell_coords(i);
            let mut row = vec![Cell::from(i)];
            row.extend(c[..d].iter().map(|&x| Cell::from(x)));
            row.push(Cell::from(v));
            t.push(row);
        }
        t
    }
}

fn positivity_floor(h: &HamiltonianSpec) -> f64 {
    match h.grid().bc() {
        BoundaryCondition::Periodic => 1.0 / (h.lambda() + h.eta()),
        BoundaryCondition::Dirichlet => 0.0,
    }
}

pub fn solve_landscape(h: &HamiltonianSpec, opts: &SolverOptions) -> Result<LandscapeSolution> {
    let grid = *h.grid();
    let u = cg_solve(h, &ScalarField::constant(grid, 1.0), opts)?;
    let floor = positivity_floor(h);
    if !(u.min() > 0.0) {
        return Err(Error::Consistency(format!("landscape not positive: min {:e}", u.min())));
    }
    if floor > 0.0 {
        // |u - u_exact|_∞ <= tol |1|_2 sup ũ with ũ = 1/η on a periodic box
        let slack = opts.tol * (grid.node_count() as f64).sqrt() / h.eta() * (1.0 + opts.tol);
        if u.min() < floor - slack {
            return Err(Error::Consistency(format!(
                "landscape {:e} below the barrier {floor:e}",
                u.min()
            )));
        }
    }
    Ok(LandscapeSolution {
        sup_per_cell: u.cell_max(),
        u,
        spec: h.clone(),
        floor,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: f64,
    /// `E[sup_Q u^p]^{1/p}` over samples and window cells.
    pub moment: f64,
    pub ci: f64,
}

/// Minimum sample count for [`landscape_moments`].
pub const MIN_MOMENT_SAMPLES: usize = 30;

/// Estimates `E[sup_Q u^p]^{1/p}` by pooling the window cells of every
/// sample; the interval is a bootstrap over samples.
pub fn landscape_moments(samples: &[LandscapeSolution], p: f64, window: &[usize]) -> Result<MomentEstimate> {
    if samples.len() < MIN_MOMENT_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} samples, need at least {MIN_MOMENT_SAMPLES}",
            samples.len()
        )));
    }
    if window.is_empty() {
        return Err(Error::InsufficientData("empty cell window".into()));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Config(format!("moment order must be >= 1 (got {p})")));
    }
    let grid = *samples[0].u.grid();
    if samples.iter().any(|s| *s.u.grid() != grid) {
        return Err(Error::GridMismatch("samples live on different grids".into()));
    }
    if let Some(&c) = window.iter().find(|&&c| c >= grid.cell_count()) {
        return Err(Error::OutOfRange {
            index: vec![c as i64],
            side: grid.cells(),
        });
    }
    if grid.bc() == BoundaryCondition::Dirichlet {
        let interior = grid.interior_cells(BOUNDARY_MARGIN);
        if window.iter().any(|c| interior.binary_search(c).is_err()) {
            return Err(Error::Config(format!(
                "window must keep {BOUNDARY_MARGIN} cells away from a Dirichlet boundary"
            )));
        }
    }
    let per_sample: Vec<f64> = samples
        .iter()
        .map(|s| window.iter().map(|&c| s.sup_per_cell[c].powf(p)).sum::<f64>() / window.len() as f64)
        .collect();
    let estimate = |idx: &[usize]| vec![(idx.iter().map(|&i| per_sample[i]).sum::<f64>() / idx.len() as f64).powf(1.0 / p)];
    let all: Vec<usize> = (0..samples.len()).collect();
    let moment = estimate(&all)[0];
    let spread = per_sample.iter().fold(0.0, |m: f64, v| m.max((v - per_sample[0]).abs()));
    let ci = if spread == 0.0 {
        0.0
    } else {
        bootstrap_half_widths(all.len(), 1, p.to_bits(), estimate)[0]
    };
    Ok(MomentEstimate { p, moment, ci })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaConvergenceRow {
    pub eta: f64,
    /// `max |u_η - u_ref|` over interior nodes.
    pub sup_diff: f64,
    /// `max |∇u_η - ∇u_ref|` (forward differences) over interior nodes.
    pub grad_diff: f64,
}

impl EtaConvergenceRow {
    pub fn ratio(&self) -> f64 {
        self.sup_diff / self.eta
    }
}

/// Differences of `u_η` to the solution at the smallest `η` for one fixed
/// `ω`, measured over nodes of the interior window. The reference row is
/// not reported.
pub fn eta_convergence_study(model: &DisorderModel, omega: &OmegaField, etas: &[f64]) -> Result<Vec<EtaConvergenceRow>> {
    if etas.len() < 3 {
        return Err(Error::Config(format!("need at least 3 η values, got {}", etas.len())));
    }
    if etas.windows(2).any(|w| !(w[1] < w[0])) || etas.iter().any(|&e| !(e >= 0.0)) {
        return Err(Error::Config("η values must be non-negative and strictly decreasing".into()));
    }
    let grid = model.grid;
    let h = model.hamiltonian(omega)?;
    let margin = match grid.bc() {
        BoundaryCondition::Dirichlet => BOUNDARY_MARGIN,
        BoundaryCondition::Periodic => 0,
    };
    let interior = grid.interior_cells(margin);
    let nodes: Vec<usize> = (0..grid.node_count())
        .filter(|&i| interior.binary_search(&grid.cell_index(&grid.cell_of_node(i))).is_ok())
        .collect();
    if nodes.is_empty() {
        return Err(Error::InsufficientData("interior window is empty".into()));
    }
    let solve = |eta: f64| -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let u = solve_landscape(&h.with_eta(eta)?, &model.solver)?.u;
        let grads = (0..grid.dim()).map(|a| u.forward_difference(a)).collect();
        Ok((u.into_values(), grads))
    };
    let (u_ref, g_ref) = solve(*etas.last().unwrap())?;
    etas[..etas.len() - 1]
        .iter()
        .map(|&eta| {
            let (u, g) = solve(eta)?;
            let sup_diff = nodes.iter().map(|&i| (u[i] - u_ref[i]).abs()).fold(0.0, f64::max);
            let grad_diff = nodes
                .iter()
                .map(|&i| (0..grid.dim()).map(|a| (g[a][i] - g_ref[a][i]).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            Ok(EtaConvergenceRow {
                eta,
                sup_diff,
                grad_diff,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Sample average of `∫_Q |∇u|²` (averaged over all cells).
    pub lhs: f64,
    /// Sample average of `∫_Q u`.
    pub rhs: f64,
    /// Standard error of the per-sample difference `rhs - lhs`.
    pub diff_stderr: f64,
    /// `(rhs - lhs) / diff_stderr`; infinite when the difference is exact.
    pub margin_sigmas: f64,
    pub pass: bool,
}

/// Compares the per-cell Dirichlet energy with the per-cell mass of `u`
/// on periodic samples. PASS iff `lhs <= rhs` with a margin of at least
/// `min_sigmas` standard errors of the per-sample difference.
pub fn energy_estimate_check(samples: &[LandscapeSolution], min_sigmas: f64) -> Result<EnergyReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    if samples.iter().any(|s| s.u.grid().bc() != BoundaryCondition::Periodic) {
        return Err(Error::Config("the energy estimate needs periodic samples".into()));
    }
    let mut lhs = Vec::with_capacity(samples.len());
    let mut rhs = Vec::with_capacity(samples.len());
    for s in samples {
        let g = s.u.grid();
        let cells = g.cell_count() as f64;
        lhs.push(s.u.grad_sq().iter().sum::<f64>() * g.node_volume() / cells);
        rhs.push(s.u.integral() / cells);
    }
    let diffs: Vec<f64> = rhs.iter().zip(&lhs).map(|(r, l)| r - l).collect();
    let (lhs, rhs) = (mean(&lhs), mean(&rhs));
    let diff_stderr = std_error(&diffs);
    let gap = rhs - lhs;
    let margin_sigmas = if diff_stderr > 0.0 {
        gap / diff_stderr
    } else if gap >= 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    Ok(EnergyReport {
        lhs,
        rhs,
        diff_stderr,
        margin_sigmas,
        pass: gap >= 0.0 && margin_sigmas >= min_sigmas,
    })
}

#[derive(Debug, Clone)]
pub struct DerivedFields {
    pub inv_u: ScalarField,
    /// One component per axis: forward difference of `log u`, backward at
    /// the last node of a Dirichlet line.
    pub grad_log_u: Vec<ScalarField>,
}

pub fn derived_fields(sol: &LandscapeSolution) -> Result<DerivedFields> {
    let u = &sol.u;
    let grid = *u.grid();
    if !(u.min() > sol.floor.max(0.0) * (1.0 - 1e-6)) || !(u.min() > 0.0) {
        return Err(Error::Consistency(format!(
            "landscape minimum {:e} at or below the positivity floor {:e}",
            u.min(),
            sol.floor
        )));
    }
    let log_u: Vec<f64> = u.values().iter().map(|v| v.ln()).collect();
    let inv_h = 1.0 / grid.spacing();
    let grad_log_u = (0..grid.dim())
        .map(|axis| {
            ScalarField::from_fn(grid, |i| match grid.neighbor(i, axis, true) {
                Some(j) => (log_u[j] - log_u[i]) * inv_h,
                None => {
                    let j = grid.neighbor(i, axis, false).expect("at least two nodes per axis");
                    (log_u[i] - log_u[j]) * inv_h
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DerivedFields {
        inv_u: ScalarField::from_fn(grid, |i| 1.0 / u.values()[i])?,
        grad_log_u,
    })
}

impl DerivedFields {
    pub fn to_table(&self, u: &ScalarField) -> Table {
        let g = u.grid();
        let d = g.dim();
        let mut header = vec!["node".to_string()];
        header.extend((0..d).map(|a| format!("x{a}")));
        header.extend(["u".to_string(), "inv_u".to_string()]);
        header.extend((0..d).map(|a| format!("grad_log_u_{a}")));
        let mut t = Table::new(&header);
        for i in 0..u.len() {
            let x = g.node_position(i);
            let mut row = vec![Cell::from(i)];
            row.extend(x[..d].iter().map(|&c| Cell::from(c)));
            row.push(Cell::from(u.values()[i]));
            row.push(Cell::from(self.inv_u.values()[i]));
            row.extend(self.grad_log_u.iter().map(|f| Cell::from(f.values()[i])));
            t.push(row);
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{BumpProfile, DisorderLaw};
    use crate::lattice::{dense_solve_oracle, Grid};

    fn model(bc: BoundaryCondition, cells: usize, lambda: f64, eta: f64) -> DisorderModel {
        DisorderModel {
            grid: Grid::new(1, cells, 20, bc).unwrap(),
            law: DisorderLaw::Bernoulli { q: 0.5 },
            bump: BumpProfile::default(),
            lambda,
            eta,
            master_seed: 11,
            solver: SolverOptions::line(1e-12),
        }
    }

    #[test]
    fn constant_solution_without_potential() {
        let grid = Grid::new(2, 4, 3, BoundaryCondition::Periodic).unwrap();
        let h = HamiltonianSpec::free(grid, 0.25).unwrap();
        let sol = solve_landscape(&h, &SolverOptions::with_tol(1e-12)).unwrap();
        assert!(sol.u().values().iter().all(|v| (v - 4.0).abs() < 1e-10));
        assert!((sol.floor() - 4.0).abs() < 1e-12);
        let f = derived_fields(&sol).unwrap();
        assert!(f.inv_u.values().iter().all(|v| (v - 0.25).abs() < 1e-10));
        assert!(f.grad_log_u.iter().all(|g| g.max_abs() < 1e-8));
    }

    #[test]
    fn zero_lambda_ignores_potential() {
        let m = model(BoundaryCondition::Periodic, 8, 0.0, 0.5);
        let (_, h) = m.sample(0).unwrap();
        let sol = solve_landscape(&h, &m.solver).unwrap();
        assert!(sol.u().values().iter().all(|v| (v - 2.0).abs() < 1e-9));
    }

    #[test]
    fn random_sample_matches_dense_oracle() {
        let m = model(BoundaryCondition::Dirichlet, 16, 1.0, 1e-3);
        let (_, h) = m.sample(2).unwrap();
        let sol = solve_landscape(&h, &SolverOptions::with_tol(1e-12)).unwrap();
        let oracle = dense_solve_oracle(&h, &ScalarField::constant(m.grid, 1.0)).unwrap();
        let scale = oracle.max_abs();
        for (a, b) in sol.u().values().iter().zip(oracle.values()) {
            assert!((a - b).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn moments_of_deterministic_landscape() {
        let m = model(BoundaryCondition::Periodic, 8, 0.0, 0.5);
        let sols: Vec<_> = (0..30)
            .map(|s| solve_landscape(&m.sample(s).unwrap().1, &m.solver).unwrap())
            .collect();
        let w: Vec<usize> = (0..8).collect();
        let e = landscape_moments(&sols, 2.0, &w).unwrap();
        assert!((e.moment - 2.0).abs() < 1e-9);
        assert_eq!(e.ci, 0.0);
        assert!(landscape_moments(&sols[..29], 1.0, &w).is_err());
        assert!(landscape_moments(&sols, 1.0, &[]).is_err());
    }

    #[test]
    fn moments_are_ordered_in_p() {
        let m = model(BoundaryCondition::Dirichlet, 16, 1.0, 1e-3);
        let sols: Vec<_> = (0..30)
            .map(|s| solve_landscape(&m.sample(s).unwrap().1, &m.solver).unwrap())
            .collect();
        let w = m.grid.interior_cells(5);
        let e1 = landscape_moments(&sols, 1.0, &w).unwrap();
        let e4 = landscape_moments(&sols, 4.0, &w).unwrap();
        assert!(e1.moment <= e4.moment);
        assert!(e1.ci > 0.0);
        assert!(landscape_moments(&sols, 1.0, &[0, 8]).is_err());
    }

    #[test]
    fn eta_study_closed_form_without_potential() {
        let m = model(BoundaryCondition::Periodic, 8, 0.0, 1.0);
        let omega = m.omega(0).unwrap();
        let etas = [1e-1, 1e-2, 1e-3];
        let rows = eta_convergence_study(&m, &omega, &etas).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            let exact = (r.eta - 1e-3) / (r.eta * 1e-3);
            assert!((r.sup_diff - exact).abs() < 1e-6 * exact);
            assert!(r.grad_diff < 1e-6);
        }
        assert!(eta_convergence_study(&m, &omega, &[1e-2]).is_err());
        assert!(eta_convergence_study(&m, &omega, &[1e-3, 1e-2, 1e-4]).is_err());
    }

    #[test]
    fn energy_without_potential() {
        let m = model(BoundaryCondition::Periodic, 4, 0.0, 0.5);
        let sol = solve_landscape(&m.sample(0).unwrap().1, &m.solver).unwrap();
        let r = energy_estimate_check(std::slice::from_ref(&sol), 3.0).unwrap();
        assert!(r.lhs.abs() < 1e-12);
        assert!((r.rhs - 2.0).abs() < 1e-9);
        assert!(r.pass);
        let d = model(BoundaryCondition::Dirichlet, 4, 0.0, 0.5);
        let sol = solve_landscape(&d.sample(0).unwrap().1, &d.solver).unwrap();
        assert!(energy_estimate_check(&[sol], 3.0).is_err());
    }

    #[test]
    fn grad_log_u_reintegrates() {
        let m = model(BoundaryCondition::Dirichlet, 12, 1.0, 1e-3);
        let sol = solve_landscape(&m.sample(4).unwrap().1, &m.solver).unwrap();
        let f = derived_fields(&sol).unwrap();
        let u = sol.u().values();
        let h = m.grid.spacing();
        let mut log_u = u[0].ln();
        for i in 1..u.len() {
            log_u += f.grad_log_u[0].values()[i - 1] * h;
            assert!((log_u.exp() - u[i]).abs() <= 1e-6 * u[i]);
        }
    }

    #[test]
    fn grad_log_u_scale_invariant() {
        let m = model(BoundaryCondition::Periodic, 6, 0.0, 0.2);
        let (_, h) = m.sample(0).unwrap();
        let a = solve_landscape(&h, &m.solver).unwrap();
        let mut b = a.clone();
        b.u = ScalarField::from_fn(m.grid, |i| 3.0 * a.u.values()[i]).unwrap();
        let (fa, fb) = (derived_fields(&a).unwrap(), derived_fields(&b).unwrap());
        for (x, y) in fa.grad_log_u[0].values().iter().zip(fb.grad_log_u[0].values()) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
