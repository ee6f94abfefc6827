use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use landscape_core::disorder::assemble_potential;
use landscape_core::green::green_column;
use landscape_core::landscape::solve_landscape;
use landscape_core::lattice::{apply_hamiltonian, cg_solve, dense_solve_oracle};
use landscape_core::{
    BoundaryCondition, BumpProfile, DisorderLaw, DisorderModel, Grid, HamiltonianSpec, ScalarField, SolverOptions,
};

fn random_field(grid: Grid, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> ScalarField {
    let v = (0..grid.node_count()).map(|_| rng.random_range(lo..hi)).collect();
    ScalarField::new(grid, v).unwrap()
}

/// Small random operator; periodic boxes always carry a mass term.
fn arb_operator() -> impl Strategy<Value = (HamiltonianSpec, u64)> {
    (1usize..=3, any::<bool>(), 0.0f64..10.0, 1e-3f64..1.0, any::<u64>()).prop_map(|(dim, periodic, lambda, eta, seed)| {
        let (cells, mesh) = match dim {
            1 => (5, 6),
            2 => (2, 5),
            _ => (2, 3),
        };
        let bc = if periodic { BoundaryCondition::Periodic } else { BoundaryCondition::Dirichlet };
        let grid = Grid::new(dim, cells, mesh, bc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_field(grid, &mut rng, 0.0, 1.0);
        (HamiltonianSpec::new(v, lambda, eta).unwrap(), seed)
    })
}

fn model_1d(law: DisorderLaw, lambda: f64, eta: f64) -> DisorderModel {
    DisorderModel {
        grid: Grid::new(1, 16, 20, BoundaryCondition::Dirichlet).unwrap(),
        law,
        bump: BumpProfile::default(),
        lambda,
        eta,
        master_seed: 99,
        solver: SolverOptions::line(1e-11),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operator_is_symmetric_and_positive((h, seed) in arb_operator()) {
        let grid = *h.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let f = random_field(grid, &mut rng, -1.0, 1.0);
        let g = random_field(grid, &mut rng, -1.0, 1.0);
        let af = apply_hamiltonian(&h, &f).unwrap();
        let ag = apply_hamiltonian(&h, &g).unwrap();
        let (lhs, rhs) = (af.inner(&g).unwrap(), f.inner(&ag).unwrap());
        let scale = af.values().iter().map(|x| x.abs()).sum::<f64>() * grid.node_volume();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0), "{lhs} vs {rhs}");
        prop_assert!(af.inner(&f).unwrap() > 0.0);
    }

    #[test]
    fn nonnegative_rhs_gives_nonnegative_solution((h, seed) in arb_operator()) {
        let grid = *h.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
        let rhs = random_field(grid, &mut rng, 0.0, 1.0);
        let opts = SolverOptions::with_tol(1e-10);
        let x = cg_solve(&h, &rhs, &opts).unwrap();
        prop_assert!(x.min() >= -10.0 * opts.tol * x.max_abs());
    }

    #[test]
    fn landscape_decreases_in_lambda_and_eta(
        sample in 0u64..1000,
        lambda in 0.1f64..20.0,
        factor in 1.0f64..4.0,
        eta in 1e-4f64..1e-1,
    ) {
        let m = model_1d(DisorderLaw::Uniform01, lambda, eta);
        let (_, h) = m.sample(sample).unwrap();
        let opts = m.solver;
        let base = solve_landscape(&h, &opts).unwrap();
        let more_lambda = solve_landscape(&h.with_lambda(lambda * factor).unwrap(), &opts).unwrap();
        let more_eta = solve_landscape(&h.with_eta(eta * factor).unwrap(), &opts).unwrap();
        prop_assert!(base.u().min() > 0.0);
        let slack = 2.0 * opts.tol * base.u().max_abs();
        for i in 0..base.u().len() {
            let u = base.u().values()[i];
            prop_assert!(more_lambda.u().values()[i] <= u + slack);
            prop_assert!(more_eta.u().values()[i] <= u + slack);
        }
    }

    #[test]
    fn potential_is_bounded_and_supported_near_sites(sample in 0u64..1000, dim in 1usize..=3) {
        let grid = Grid::new(dim, if dim == 3 { 2 } else { 4 }, 20, BoundaryCondition::Dirichlet).unwrap();
        let m = DisorderModel { grid, ..model_1d(DisorderLaw::Uniform01, 1.0, 1e-3) };
        let omega = m.omega(sample).unwrap();
        let v = assemble_potential(&omega, &m.bump, &grid).unwrap();
        let top = omega.values().iter().cloned().fold(0.0, f64::max);
        for (i, &vi) in v.values().iter().enumerate() {
            prop_assert!((0.0..=top).contains(&vi));
            let x = grid.node_position(i);
            let dist = x[..dim].iter().map(|c| (c - c.round()).powi(2)).sum::<f64>().sqrt();
            if dist >= 0.1 {
                prop_assert_eq!(vi, 0.0);
            }
        }
    }
}

#[test]
fn potential_histogram_is_translation_invariant() {
    // chi-square two-sample statistic on 10 bins of nonzero V values from two
    // disjoint windows; 27.9 is the 0.999 quantile with 9 degrees of freedom
    let grid = Grid::new(1, 32, 20, BoundaryCondition::Dirichlet).unwrap();
    let m = DisorderModel { grid, ..model_1d(DisorderLaw::Uniform01, 1.0, 1e-3) };
    let mut hist = [[0f64; 10]; 2];
    for s in 0..400 {
        let v = assemble_potential(&m.omega(s).unwrap(), &m.bump, &grid).unwrap();
        for (w, cells) in [(0usize, 2..10usize), (1, 20..28)] {
            for i in cells.start * 20..cells.end * 20 {
                let x = v.values()[i];
                if x > 0.0 {
                    hist[w][((x * 10.0) as usize).min(9)] += 1.0;
                }
            }
        }
    }
    let (na, nb): (f64, f64) = (hist[0].iter().sum(), hist[1].iter().sum());
    let chi2: f64 = (0..10)
        .filter(|&b| hist[0][b] + hist[1][b] > 0.0)
        .map(|b| {
            let (a, c) = (hist[0][b], hist[1][b]);
            let d = a * (nb / na).sqrt() - c * (na / nb).sqrt();
            d * d / (a + c)
        })
        .sum();
    assert!(chi2 < 27.9, "chi2 = {chi2:.2}, histograms {hist:?}");
}

#[test]
fn green_function_is_symmetric_over_random_pairs() {
    let grid = Grid::new(2, 6, 4, BoundaryCondition::Dirichlet).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let h = HamiltonianSpec::new(random_field(grid, &mut rng, 0.0, 1.0), 2.0, 1e-3).unwrap();
    let opts = SolverOptions::with_tol(1e-12);
    for _ in 0..20 {
        let x = rng.random_range(0..grid.node_count());
        let y = rng.random_range(0..grid.node_count());
        let gx = green_column(&h, x, &opts).unwrap();
        let gy = green_column(&h, y, &opts).unwrap();
        let (a, b) = (gx.value(y), gy.value(x));
        assert!((a - b).abs() <= 1e-8 * a.max(b), "G({x},{y}) = {a}, G({y},{x}) = {b}");
    }
}

#[test]
fn landscape_is_total_green_mass() {
    for (bc, eta) in [(BoundaryCondition::Dirichlet, 1e-3), (BoundaryCondition::Periodic, 0.2)] {
        let grid = Grid::new(2, 2, 20, bc).unwrap();
        let m = DisorderModel { grid, ..model_1d(DisorderLaw::Bernoulli { q: 0.5 }, 1.0, eta) };
        let (_, h) = m.sample(4).unwrap();
        let opts = SolverOptions::with_tol(1e-12);
        let oracle = dense_solve_oracle(&h, &ScalarField::constant(grid, 1.0)).unwrap();
        let u = solve_landscape(&h, &opts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x = rng.random_range(0..grid.node_count());
            let mass: f64 = green_column(&h, x, &opts).unwrap().cell_masses().iter().sum();
            let ux = u.u().values()[x];
            assert!((mass - ux).abs() <= 1e-8 * ux, "{bc:?}: mass {mass} vs u {ux}");
            assert!((oracle.values()[x] - ux).abs() <= 1e-8 * ux);
        }
    }
}
