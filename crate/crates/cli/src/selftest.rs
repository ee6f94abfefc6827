//! Fast built-in checks: closed-form cases and dense-oracle comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use landscape_core::disorder::{assemble_potential, OmegaField, SiteBox};
use landscape_core::green::{green_column, rank_one_identity_check};
use landscape_core::io::{Cell, Table};
use landscape_core::landscape::solve_landscape;
use landscape_core::lattice::{cg_solve, dense_solve_oracle};
use landscape_core::percolation::{
    anchoring_experiment_1d, chemical_distance, choose_k, gap_raw_moment, sites_per_axis, AnchorConfig, CoarseGraph,
    Status,
};
use landscape_core::statistics::{fit_exponential_decay, MomentCurve};
use landscape_core::{
    BoundaryCondition, BumpProfile, DisorderLaw, DisorderModel, Grid, HamiltonianSpec, ScalarField, SolverOptions,
};

use crate::experiments::{Predicate, Report};

type Check = fn() -> landscape_core::Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("zero_amplitudes", zero_amplitudes),
    ("single_bump", single_bump),
    ("constant_periodic_solution", constant_periodic_solution),
    ("cg_matches_dense_lu", cg_matches_dense_lu),
    ("green_symmetry", green_symmetry),
    ("landscape_is_green_mass", landscape_is_green_mass),
    ("rank_one_identity", rank_one_identity),
    ("choose_k_minimal", choose_k_minimal),
    ("trivial_chemical_distances", trivial_chemical_distances),
    ("bfs_matches_bellman_ford", bfs_matches_bellman_ford),
    ("gap_closed_form", gap_closed_form),
    ("exact_exponential_fit", exact_exponential_fit),
    ("small_sample_inconclusive", small_sample_inconclusive),
];

pub fn run() -> Report {
    let mut report = Report::default();
    let mut t = Table::new(&["check", "pass", "detail"]);
    for (name, check) in CHECKS {
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        t.push(vec![Cell::from(*name), Cell::from(pass), Cell::from(detail.replace(',', ";").as_str())]);
        report.predicates.push(Predicate::new(*name, pass, detail));
    }
    report.files.push(("selftest.csv".into(), t));
    report
}

fn model(dim: usize, cells: usize, bc: BoundaryCondition, eta: f64) -> landscape_core::Result<DisorderModel> {
    Ok(DisorderModel {
        grid: Grid::new(dim, cells, 20, bc)?,
        law: DisorderLaw::Bernoulli { q: 0.5 },
        bump: BumpProfile::default(),
        lambda: 1.0,
        eta,
        master_seed: 31,
        solver: SolverOptions::with_tol(1e-12),
    })
}

fn zero_amplitudes() -> landscape_core::Result<(bool, String)> {
    let grid = Grid::new(2, 4, 20, BoundaryCondition::Dirichlet)?;
    let sites = SiteBox::of_grid(&grid);
    let omega = OmegaField::from_values(sites, vec![0.0; sites.len()], DisorderLaw::Uniform01)?;
    let v = assemble_potential(&omega, &BumpProfile::default(), &grid)?;
    Ok((v.max_abs() == 0.0, format!("max |V| = {}", v.max_abs())))
}

fn single_bump() -> landscape_core::Result<(bool, String)> {
    let grid = Grid::new(1, 4, 20, BoundaryCondition::Dirichlet)?;
    let sites = SiteBox::of_grid(&grid);
    let mut values = vec![0.0; sites.len()];
    values[1] = 1.0;
    let bump = BumpProfile::default();
    let v = assemble_potential(&OmegaField::from_values(sites, values, DisorderLaw::Uniform01)?, &bump, &grid)?;
    let err = (0..grid.node_count())
        .map(|i| (v.values()[i] - bump.evaluate(&[grid.node_position(i)[0] - 1.0])).abs())
        .fold(0.0, f64::max);
    Ok((err <= 1e-12, format!("max deviation from φ(x - 1): {err:e}")))
}

fn constant_periodic_solution() -> landscape_core::Result<(bool, String)> {
    let grid = Grid::new(2, 3, 20, BoundaryCondition::Periodic)?;
    let h = HamiltonianSpec::free(grid, 0.5)?;
    let u = solve_landscape(&h, &SolverOptions::with_tol(1e-12))?;
    let err = u.u().values().iter().map(|v| (v - 2.0).abs()).fold(0.0, f64::max);
    Ok((err <= 1e-9, format!("max |u - 1/η| = {err:e}")))
}

fn cg_matches_dense_lu() -> landscape_core::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut systems = Vec::new();
    for (dim, cells, bc, eta) in [
        (1, 16, BoundaryCondition::Dirichlet, 1e-3),
        (1, 8, BoundaryCondition::Periodic, 0.1),
        (2, 2, BoundaryCondition::Dirichlet, 1e-3),
        (2, 2, BoundaryCondition::Periodic, 0.1),
    ] {
        systems.push(model(dim, cells, bc, eta)?.sample(0)?.1);
    }
    let grid = Grid::new(3, 3, 3, BoundaryCondition::Dirichlet)?;
    let v = ScalarField::new(grid, (0..grid.node_count()).map(|_| rng.random::<f64>()).collect())?;
    systems.push(HamiltonianSpec::new(v, 1.0, 1e-3)?);

    let opts = SolverOptions::with_tol(1e-12);
    let mut worst = 0.0f64;
    for h in &systems {
        let grid = *h.grid();
        for rhs in [ScalarField::constant(grid, 1.0), ScalarField::delta(grid, grid.center_node())?] {
            let exact = dense_solve_oracle(h, &rhs)?;
            let x = cg_solve(h, &rhs, &opts)?;
            let diff = x.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(diff / exact.max_abs());
        }
    }
    Ok((worst <= 1e-8, format!("{} systems, worst relative error {worst:.3e} (limit 1e-8)", systems.len())))
}

fn green_symmetry() -> landscape_core::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = Grid::new(2, 6, 4, BoundaryCondition::Dirichlet)?;
    let v = ScalarField::new(grid, (0..grid.node_count()).map(|_| rng.random::<f64>()).collect())?;
    let h = HamiltonianSpec::new(v, 2.0, 1e-3)?;
    let opts = SolverOptions::with_tol(1e-12);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (x, y) = (rng.random_range(0..grid.node_count()), rng.random_range(0..grid.node_count()));
        let (a, b) = (green_column(&h, x, &opts)?.value(y), green_column(&h, y, &opts)?.value(x));
        worst = worst.max((a - b).abs() / a.max(b));
    }
    Ok((worst <= 1e-8, format!("10 pairs, worst relative asymmetry {worst:.3e}")))
}

fn landscape_is_green_mass() -> landscape_core::Result<(bool, String)> {
    let m = model(1, 16, BoundaryCondition::Dirichlet, 1e-3)?;
    let (_, h) = m.sample(2)?;
    let u = solve_landscape(&h, &m.solver)?;
    let mut worst = 0.0f64;
    for x in [0, 77, m.grid.center_node(), m.grid.node_count() - 1] {
        let mass: f64 = green_column(&h, x, &m.solver)?.cell_masses().iter().sum();
        worst = worst.max((mass - u.u().values()[x]).abs() / u.u().values()[x]);
    }
    Ok((worst <= 1e-8, format!("worst relative gap {worst:.3e}")))
}

fn rank_one_identity() -> landscape_core::Result<(bool, String)> {
    let m = model(1, 12, BoundaryCondition::Dirichlet, 1e-3)?;
    let omega = m.omega(5)?;
    let Some(z) = (0..12).find(|&z| omega.values()[z] < 1.0) else {
        return Ok((true, "no site to raise".into()));
    };
    let x = z * 20 + 7;
    let r = rank_one_identity_check(&omega, &[z as i64], &m, x, &m.solver)?;
    Ok((r.relative_error <= 1e-6, format!("relative error {:.3e}", r.relative_error)))
}

fn choose_k_minimal() -> landscape_core::Result<(bool, String)> {
    let law = DisorderLaw::Bernoulli { q: 0.5 };
    let mut ok = true;
    let mut ks = Vec::new();
    for dim in 1..=3 {
        let k = choose_k(&law, 0.5, dim)?;
        let holds = |k: u32| 0.5f64.powi(sites_per_axis(k).pow(dim as u32) as i32) < 0.5;
        ok &= holds(k) && (k == 1 || !holds(k - 1));
        ks.push(k);
    }
    Ok((ok, format!("k for d = 1, 2, 3: {ks:?}")))
}

fn trivial_chemical_distances() -> landscape_core::Result<(bool, String)> {
    let closed = CoarseGraph::from_edges(2, 6, |_, _| false)?;
    let open = CoarseGraph::from_edges(2, 6, |_, _| true)?;
    let o = closed.center();
    let zero = chemical_distance(&closed, o)?.dist.iter().all(|&d| d == 0);
    let d = chemical_distance(&open, o)?;
    let oc = open.vertex_coords(o);
    let hops = (0..open.vertex_count()).all(|v| {
        let c = open.vertex_coords(v);
        d.dist[v] as usize == c[0].abs_diff(oc[0]) + c[1].abs_diff(oc[1])
    });
    Ok((zero && hops, format!("all closed gives 0: {zero}; all open gives hop count: {hops}")))
}

fn bellman_ford(g: &CoarseGraph, origin: usize) -> Vec<u32> {
    let mut d = vec![u32::MAX; g.vertex_count()];
    d[origin] = 0;
    for _ in 0..g.vertex_count() {
        for v in 0..g.vertex_count() {
            if d[v] == u32::MAX {
                continue;
            }
            for (u, open) in g.neighbors(v) {
                d[u] = d[u].min(d[v] + open as u32);
            }
        }
    }
    d
}

fn bfs_matches_bellman_ford() -> landscape_core::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    for _ in 0..50 {
        let marks: Vec<bool> = (0..50).map(|_| rng.random_bool(0.5)).collect();
        let g = CoarseGraph::from_edges(2, 5, |v, a| marks[v * 2 + a])?;
        let o = rng.random_range(0..25);
        bad += (chemical_distance(&g, o)?.dist != bellman_ford(&g, o)) as usize;
    }
    Ok((bad == 0, format!("50 random 5x5 graphs, {bad} mismatches")))
}

fn gap_closed_form() -> landscape_core::Result<(bool, String)> {
    let certain = (1..=4).all(|p| gap_raw_moment(1.0, p as f64) == 2f64.powi(p));
    let mean = gap_raw_moment(0.25, 1.0);
    let ok = certain && (mean - 8.0).abs() <= 1e-9;
    Ok((ok, format!("q = 1 gives gap 2: {certain}; E[gap] at q = 1/4 is {mean:.12}")))
}

fn exact_exponential_fit() -> landscape_core::Result<(bool, String)> {
    let distances: Vec<f64> = (0..30).map(f64::from).collect();
    let curve = MomentCurve {
        values: distances.iter().map(|r| (2.0 - 0.3 * r).exp()).collect(),
        ci: vec![0.0; distances.len()],
        cells: vec![1; distances.len()],
        distances,
        p: 1.0,
    };
    let f = fit_exponential_decay(&curve, 5.0, 25.0, 0.0)?;
    let err = (f.rate - 0.3).abs();
    Ok((err < 1e-10, format!("rate error {err:e}")))
}

fn small_sample_inconclusive() -> landscape_core::Result<(bool, String)> {
    let cfg = AnchorConfig::with_default_gamma(DisorderLaw::Bernoulli { q: 0.5 }, 256, 6);
    let (r, _) = anchoring_experiment_1d(&cfg, 10)?;
    Ok((r.status == Status::Inconclusive, format!("N = 10 status {:?}", r.status)))
}
