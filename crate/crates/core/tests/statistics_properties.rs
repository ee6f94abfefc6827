use landscape_core::statistics::{
    covariance_samples, green_mass_samples, vertical_derivative_samples, Binning, Observable,
};
use landscape_core::{BoundaryCondition, BumpProfile, DisorderLaw, DisorderModel, Grid, SolverOptions};

fn model(cells: usize, lambda: f64, eta: f64) -> DisorderModel {
    DisorderModel {
        grid: Grid::new(1, cells, 20, BoundaryCondition::Dirichlet).unwrap(),
        law: DisorderLaw::Bernoulli { q: 0.5 },
        bump: BumpProfile::default(),
        lambda,
        eta,
        master_seed: 4242,
        solver: SolverOptions::line(1e-10),
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn doubling_samples_shrinks_intervals() {
    // half-widths averaged over independent replicates so one heavy-tailed
    // batch does not decide the ratio
    const REPLICATES: u64 = 6;
    let mean_ci = |n: usize, seed_base: u64| -> Vec<f64> {
        let mut acc = vec![0.0; 21];
        for rep in 0..REPLICATES {
            let m = DisorderModel { master_seed: seed_base + rep, ..model(64, 1.0, 1e-6) };
            let c = green_mass_samples(&m, n).unwrap().moment_curve(1.0, Binning::Unit, rep).unwrap();
            for r in 1..=20 {
                acc[r] += c.ci[r] / REPLICATES as f64;
            }
        }
        acc
    };
    let (a, b) = (mean_ci(200, 1000), mean_ci(400, 2000));
    let mut ratios: Vec<f64> = (1..=20).map(|r| b[r] / a[r]).collect();
    ratios.sort_by(f64::total_cmp);
    let median = (ratios[9] + ratios[10]) / 2.0;
    assert!((0.6..=0.85).contains(&median), "median shrink {median:.3}, ratios {ratios:?}");
}

#[test]
fn far_field_curve_is_monotone_at_doubled_distance() {
    let m = model(128, 1.0, 1e-6);
    let curve = green_mass_samples(&m, 100).unwrap().moment_curve(1.0, Binning::Unit, 1).unwrap();
    for r in 5..=29 {
        let (near, far) = (curve.value_at(r as f64).unwrap(), curve.value_at(2.0 * r as f64).unwrap());
        assert!(far <= near, "value({}) = {far} exceeds value({r}) = {near}", 2 * r);
    }
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let m = model(48, 1.0, 1e-4);
    let run = || {
        let cov = covariance_samples(&m, &[2, 5, 10], 24).unwrap();
        let vert = vertical_derivative_samples(&m, &[0, 1, 3], 12, 8).unwrap();
        let points: Vec<_> = Observable::ALL.iter().map(|&o| cov.points(o, 3)).collect();
        (
            cov.to_table().to_csv_string(),
            vert.to_table().to_csv_string(),
            format!("{points:?}"),
            vert.curve(3).unwrap().to_table().to_csv_string(),
        )
    };
    let one = in_pool(1, run);
    let many = in_pool(4, run);
    assert_eq!(one, many);
}
