//! One function per subcommand. Each builds its models first, so bad
//! configurations fail before any solve, then returns its data tables and
//! acceptance predicates.

use serde::Serialize;

use landscape_core::green::{agmon_inequality_check, green_column, rank_one_identity_check, AgmonParams};
use landscape_core::io::{Cell, Table};
use landscape_core::landscape::{
    derived_fields, energy_estimate_check, eta_convergence_study, landscape_moments, solve_landscape,
    MIN_MOMENT_SAMPLES,
};
use landscape_core::percolation::{anchoring_experiment_1d, cluster_tail_experiment, kesten_samples, Status};
use landscape_core::statistics::{
    covariance_samples, fit_exponential_decay, green_mass_samples, lambda_scaling_curve, run_samples,
    vertical_derivative_samples, Binning, DecayFit, MomentCurve, Observable, BOUNDARY_MARGIN,
};
use landscape_core::BoundaryCondition;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::selftest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Predicate {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl Predicate {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            verdict: Verdict::from_bool(pass),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Default)]
pub struct Report {
    /// File name (inside the output directory) and contents.
    pub files: Vec<(String, Table)>,
    pub predicates: Vec<Predicate>,
    /// Sample indices that entered the results.
    pub samples: Vec<u64>,
}

impl Report {
    fn file(&mut self, name: impl Into<String>, table: Table) {
        self.files.push((name.into(), table));
    }

    fn check(&mut self, p: Predicate) {
        self.predicates.push(p);
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    match cfg.experiment {
        Experiment::SolveLandscape => solve(cfg),
        Experiment::GreenDecay => green_decay(cfg),
        Experiment::LambdaScaling => lambda_scaling(cfg),
        Experiment::Covariance => covariance(cfg),
        Experiment::VerticalDerivative => vertical(cfg),
        Experiment::EtaConvergence => eta_convergence(cfg),
        Experiment::EnergyCheck => energy(cfg),
        Experiment::AgmonCheck => agmon(cfg),
        Experiment::RankOneCheck => rank_one(cfg),
        Experiment::FppKesten => kesten(cfg),
        Experiment::ClusterTail => cluster_tail(cfg),
        Experiment::Anchor1d => anchor(cfg),
        Experiment::Selftest => Ok(selftest::run()),
    }
}

fn fit_window(cfg: &ExperimentConfig) -> (f64, f64) {
    cfg.fit_window.map_or((5.0, 40.0), |[a, b]| (a, b))
}

fn fits_table(rows: &[(String, &DecayFit)]) -> Table {
    let mut t = Table::new(&["series", "rate", "rate_stderr", "log_prefactor", "r_min", "r_max", "r_squared", "n_points"]);
    for (name, f) in rows {
        t.push(vec![
            Cell::from(name.as_str()),
            Cell::from(f.rate),
            Cell::from(f.rate_stderr),
            Cell::from(f.log_prefactor),
            Cell::from(f.r_min),
            Cell::from(f.r_max),
            Cell::from(f.r_squared),
            Cell::from(f.n_points),
        ]);
    }
    t
}

fn interior_margin(bc: BoundaryCondition) -> usize {
    match bc {
        BoundaryCondition::Dirichlet => BOUNDARY_MARGIN,
        BoundaryCondition::Periodic => 0,
    }
}

fn solve(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.disorder_model()?;
    let sols = run_samples(cfg.n_samples, |s| solve_landscape(&model.sample(s)?.1, &model.solver))?;
    let mut r = Report {
        samples: sols.iter().map(|s| s.0).collect(),
        ..Report::default()
    };

    let mut cells = Table::new(&["sample", "cell", "sup_u", "integral_u"]);
    let mut min_u = f64::INFINITY;
    for (s, sol) in &sols {
        min_u = min_u.min(sol.u().min());
        for (c, (&sup, int)) in sol.sup_per_cell().iter().zip(sol.u().cell_integrals()).enumerate() {
            cells.push(vec![Cell::from(*s), Cell::from(c), Cell::from(sup), Cell::from(int)]);
        }
    }
    r.file("landscape_cells.csv", cells);
    let (first_index, first) = &sols[0];
    r.file(format!("fields_sample{first_index}.csv"), derived_fields(first)?.to_table(first.u()));
    r.check(Predicate::new("positivity", min_u > 0.0, format!("minimum of u over all samples {min_u:e}")));

    let window = model.grid.interior_cells(interior_margin(model.grid.bc()));
    if sols.len() >= MIN_MOMENT_SAMPLES && !window.is_empty() {
        let solutions: Vec<_> = sols.into_iter().map(|s| s.1).collect();
        let mut t = Table::new(&["p", "moment", "ci"]);
        for &p in &cfg.p {
            let m = landscape_moments(&solutions, p, &window)?;
            t.push(vec![Cell::from(m.p), Cell::from(m.moment), Cell::from(m.ci)]);
        }
        r.file("moments.csv", t);
    }
    Ok(r)
}

fn green_decay(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.disorder_model()?;
    let (lo, hi) = fit_window(cfg);
    let floor = cfg.fit_floor.unwrap_or(0.0);
    let samples = green_mass_samples(&model, cfg.n_samples)?;
    let mut r = Report {
        samples: samples.sample_indices.clone(),
        ..Report::default()
    };
    r.file("green_masses.csv", samples.to_table());

    let mut fits = Vec::new();
    for &p in &cfg.p {
        let curve = samples.moment_curve(p, Binning::Unit, model.master_seed)?;
        let fit = fit_exponential_decay(&curve, lo, hi, floor)?;
        r.file(format!("curve_p{p}.csv"), curve.to_table());
        fits.push((p, fit));
    }
    r.file("fits.csv", fits_table(&fits.iter().map(|(p, f)| (format!("p={p}"), f)).collect::<Vec<_>>()));

    let (p0, f0) = &fits[0];
    r.check(Predicate::new(
        format!("decay_p{p0}"),
        f0.rate > 0.0 && f0.r_squared >= 0.9,
        format!("rate {:.5} ± {:.5}, r² {:.5} on [{lo}, {hi}] (need rate > 0, r² >= 0.9)", f0.rate, f0.rate_stderr, f0.r_squared),
    ));
    for (p, f) in &fits[1..] {
        // rates may soften like 1/p
        let scale = p0 / p;
        let ci = 1.96 * ((scale * f0.rate_stderr).powi(2) + f.rate_stderr.powi(2)).sqrt();
        let bound = scale * f0.rate - ci;
        r.check(Predicate::new(
            format!("softening_p{p}"),
            f.rate >= bound,
            format!("rate {:.5} vs ({p0}/{p}) rate(p={p0}) - ci = {bound:.5}", f.rate),
        ));
    }
    Ok(r)
}

fn lambda_scaling(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let base = cfg.disorder_model()?;
    let lambdas = cfg.lambda.to_vec();
    if lambdas.iter().any(|&l| l <= 0.0) || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Validation("lambda: values must be positive and increasing".into()));
    }
    let (lo, hi) = fit_window(cfg);
    let rows = lambda_scaling_curve(&base, &lambdas, cfg.p[0], cfg.n_samples, (lo, hi), cfg.fit_floor.unwrap_or(0.0))?;
    let mut r = Report {
        samples: (0..cfg.n_samples as u64).collect(),
        ..Report::default()
    };
    let mut t = Table::new(&["lambda", "eta", "rate", "rate_stderr", "r_squared", "normalized_rate"]);
    for (i, row) in rows.iter().enumerate() {
        t.push(vec![
            Cell::from(row.lambda),
            Cell::from(row.eta),
            Cell::from(row.fit.rate),
            Cell::from(row.fit.rate_stderr),
            Cell::from(row.fit.r_squared),
            Cell::from(row.normalized),
        ]);
        r.file(format!("curve_lambda{i}.csv"), row.curve.to_table());
    }
    r.file("lambda_rates.csv", t);

    let positive = rows.iter().all(|row| row.fit.rate > 0.0);
    r.check(Predicate::new("positive_rates", positive, "every fitted rate must be > 0"));
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let step = b.lambda / a.lambda;
        if (step - 4.0).abs() < 1e-9 && b.lambda <= 1.0 {
            let q = b.fit.rate / a.fit.rate;
            r.check(Predicate::new(
                format!("sqrt_scaling_{}_{}", a.lambda, b.lambda),
                (1.4..=2.8).contains(&q),
                format!("rate({})/rate({}) = {q:.4}, corridor [1.4, 2.8]", b.lambda, a.lambda),
            ));
        }
        if a.lambda >= 10.0 {
            let q = a.fit.rate / b.fit.rate;
            r.check(Predicate::new(
                format!("saturation_{}_{}", a.lambda, b.lambda),
                (0.7..=1.4).contains(&q),
                format!("rate({})/rate({}) = {q:.4}, corridor [0.7, 1.4]", a.lambda, b.lambda),
            ));
        }
    }
    Ok(r)
}

fn covariance(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.disorder_model()?;
    let seps = cfg.separations.clone().unwrap_or_else(|| vec![3, 30]);
    let s = covariance_samples(&model, &seps, cfg.n_samples)?;
    let mut r = Report {
        samples: s.sample_indices.clone(),
        ..Report::default()
    };
    r.file("covariance_raw.csv", s.to_table());
    let mut t = Table::new(&["observable", "separation", "cov", "ci"]);
    for obs in Observable::ALL {
        let pts = s.points(obs, model.master_seed);
        for p in &pts {
            t.push(vec![Cell::from(obs.name()), Cell::from(p.separation), Cell::from(p.cov), Cell::from(p.ci)]);
        }
        if pts.len() >= 2 {
            let (near, far) = (&pts[0], &pts[pts.len() - 1]);
            let sigma = far.ci / 1.96;
            r.check(Predicate::new(
                format!("decorrelation_{}", obs.name()),
                far.cov.abs() <= 0.1 * near.cov.abs() || far.cov.abs() <= 3.0 * sigma,
                format!(
                    "|cov({})| = {:.4e} vs 0.1 |cov({})| = {:.4e} or 3σ = {:.4e}",
                    far.separation,
                    far.cov.abs(),
                    near.separation,
                    0.1 * near.cov.abs(),
                    3.0 * sigma
                ),
            ));
        }
    }
    r.file("covariance.csv", t);
    Ok(r)
}

fn vertical(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.disorder_model()?;
    let offsets = cfg.offsets.clone().unwrap_or_else(|| (0..=40).collect());
    let (lo, hi) = fit_window(cfg);
    let floor = cfg.fit_floor.unwrap_or(0.0);
    let vs = vertical_derivative_samples(&model, &offsets, cfg.n_samples, cfg.resample_seed.unwrap_or(1))?;
    let curve = vs.curve(model.master_seed)?;
    let green = green_mass_samples(&model, cfg.n_samples)?.moment_curve(1.0, Binning::Unit, model.master_seed)?;
    let fit = fit_exponential_decay(&curve, lo, hi, floor)?;
    let gfit = fit_exponential_decay(&green, lo, hi, floor)?;
    let mut r = Report {
        samples: vs.sample_indices.clone(),
        ..Report::default()
    };
    r.file("vertical_raw.csv", vs.to_table());
    r.file("vertical_curve.csv", curve.to_table());
    r.file("green_curve.csv", green.to_table());
    r.file("fits.csv", fits_table(&[("vertical".into(), &fit), ("green_mass".into(), &gfit)]));

    r.check(Predicate::new("decay", fit.rate > 0.0, format!("rate {:.5} ± {:.5}", fit.rate, fit.rate_stderr)));
    r.check(Predicate::new(
        "matches_green_rate",
        fit.rate >= gfit.rate / 2.0 && fit.rate <= 2.0 * gfit.rate,
        format!("rate {:.5} vs Green-mass rate {:.5}, allowed factor 2", fit.rate, gfit.rate),
    ));
    let peak = curve.values.iter().copied().fold(0.0, f64::max);
    if curve.distances.first() == Some(&0.0) {
        r.check(Predicate::new(
            "peak_at_own_cell",
            curve.values[0] >= peak,
            format!("value at offset 0 {:.4e}, maximum {:.4e}", curve.values[0], peak),
        ));
    }
    Ok(r)
}

fn eta_convergence(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.disorder_model()?;
    let etas = cfg.eta.to_vec();
    if etas.len() < 3 || etas.windows(2).any(|w| w[1] >= w[0]) || etas.iter().any(|&e| e <= 0.0) {
        return Err(CliError::Validation("eta: need at least 3 positive, strictly decreasing values".into()));
    }
    let rows = run_samples(cfg.n_samples, |s| eta_convergence_study(&model, &model.omega(s)?, &etas))?;
    let mut r = Report {
        samples: rows.iter().map(|x| x.0).collect(),
        ..Report::default()
    };
    let mut t = Table::new(&["sample", "eta", "sup_diff", "grad_diff"]);
    let mut ratios = Vec::new();
    for (s, study) in &rows {
        for row in study {
            t.push(vec![Cell::from(*s), Cell::from(row.eta), Cell::from(row.sup_diff), Cell::from(row.grad_diff)]);
        }
        ratios.push(study[0].sup_diff / study[1].sup_diff);
        ratios.push(study[0].grad_diff / study[1].grad_diff);
    }
    r.file("eta_convergence.csv", t);
    // linear convergence: differences shrink in proportion to η
    let step = etas[0] / etas[1];
    let (lo, hi) = (0.5 * step, 2.0 * step);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(0.0, f64::max);
    r.check(Predicate::new(
        "linear_convergence",
        min >= lo && max <= hi,
        format!("diff({})/diff({}) in [{min:.3}, {max:.3}], corridor [{lo}, {hi}]", etas[0], etas[1]),
    ));
    Ok(r)
}

fn energy(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    if cfg.bc != BoundaryCondition::Periodic {
        return Err(CliError::Validation("bc: the energy check needs a periodic box".into()));
    }
    let model = cfg.disorder_model()?;
    let sols = run_samples(cfg.n_samples, |s| solve_landscape(&model.sample(s)?.1, &model.solver))?;
    let mut r = Report {
        samples: sols.iter().map(|s| s.0).collect(),
        ..Report::default()
    };
    let mut t = Table::new(&["sample", "grad_energy_per_cell", "mass_per_cell"]);
    for (s, sol) in &sols {
        let g = sol.u().grid();
        let cells = g.cell_count() as f64;
        t.push(vec![
            Cell::from(*s),
            Cell::from(sol.u().grad_sq().iter().sum::<f64>() * g.node_volume() / cells),
            Cell::from(sol.u().integral() / cells),
        ]);
    }
    r.file("energy.csv", t);
    let min_sigmas = cfg.min_sigmas.unwrap_or(3.0);
    let solutions: Vec<_> = sols.into_iter().map(|s| s.1).collect();
    let rep = energy_estimate_check(&solutions, min_sigmas)?;
    r.check(Predicate::new(
        "energy_estimate",
        rep.pass,
        format!(
            "E∫|∇u|² = {:.6} <= E∫u = {:.6} with margin {:.2}σ (need {min_sigmas})",
            rep.lhs, rep.rhs, rep.margin_sigmas
        ),
    ));
    Ok(r)
}

fn agmon(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.disorder_model()?;
    let mus = cfg.agmon_mu.clone().unwrap_or_else(|| vec![0.0, 0.1 * model.lambda.sqrt()]);
    let base = AgmonParams {
        mu: 0.0,
        cap: cfg.agmon_cap.unwrap_or(100.0),
        inner: cfg.agmon_inner.unwrap_or(0.5),
        outer: cfg.agmon_outer.unwrap_or(5.0),
    };
    let source = model.grid.center_node();
    let rows = run_samples(cfg.n_samples, |s| {
        let g = green_column(&model.sample(s)?.1, source, &model.solver)?;
        mus.iter()
            .map(|&mu| agmon_inequality_check(&g, &AgmonParams { mu, ..base }))
            .collect::<landscape_core::Result<Vec<_>>>()
    })?;
    let mut r = Report {
        samples: rows.iter().map(|x| x.0).collect(),
        ..Report::default()
    };
    let mut t = Table::new(&["sample", "mu", "lhs", "rhs", "pass"]);
    let (mut ok, mut worst) = (true, 0.0f64);
    for (s, reps) in &rows {
        for (&mu, rep) in mus.iter().zip(reps) {
            t.push(vec![Cell::from(*s), Cell::from(mu), Cell::from(rep.lhs), Cell::from(rep.rhs), Cell::from(rep.pass)]);
            ok &= rep.pass;
            worst = worst.max(rep.lhs / rep.rhs);
        }
    }
    r.file("agmon.csv", t);
    r.check(Predicate::new(
        "weighted_energy_inequality",
        ok,
        format!("{} samples x {} weights, worst lhs/rhs {worst:.4}", rows.len(), mus.len()),
    ));
    Ok(r)
}

fn rank_one(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.disorder_model()?;
    let grid = model.grid;
    let centre = grid.center_cell();
    let opts = model.solver;
    let rows = run_samples(cfg.n_samples, |s| {
        let omega = model.omega(s)?;
        // nearest site to the centre (along axis 0) that can still be raised
        let z = [0i64, 1, -1, 2, -2, 3, -3].iter().find_map(|&o| {
            let mut z: Vec<i64> = centre[..grid.dim()].iter().map(|&c| c as i64).collect();
            z[0] += o;
            let cell = [z[0] as usize, *z.get(1).unwrap_or(&0) as usize, *z.get(2).unwrap_or(&0) as usize];
            ((0..grid.cells() as i64).contains(&z[0]) && omega.get(&cell) < 1.0).then_some(z)
        });
        let Some(z) = z else { return Ok(None) };
        let mut node = [0usize; 3];
        for (a, slot) in node.iter_mut().enumerate().take(grid.dim()) {
            *slot = z[a] as usize * grid.mesh() + grid.mesh() / 3;
        }
        let x = grid.node_index(&node);
        Ok(Some((z[0], x, rank_one_identity_check(&omega, &z, &model, x, &opts)?)))
    })?;
    let mut r = Report {
        samples: rows.iter().map(|x| x.0).collect(),
        ..Report::default()
    };
    let mut t = Table::new(&["sample", "site_axis0", "node", "lhs", "rhs", "relative_error"]);
    let mut worst = 0.0f64;
    for (s, row) in &rows {
        if let Some((z0, x, rep)) = row {
            t.push(vec![
                Cell::from(*s),
                Cell::from(*z0),
                Cell::from(*x),
                Cell::from(rep.lhs),
                Cell::from(rep.rhs),
                Cell::from(rep.relative_error),
            ]);
            worst = worst.max(rep.relative_error);
        }
    }
    let checked = t.rows.len();
    r.file("rank_one.csv", t);
    r.check(Predicate::new(
        "rank_one_identity",
        worst <= 1e-6,
        format!("{checked} samples checked, worst relative error {worst:.3e} (limit 1e-6)"),
    ));
    Ok(r)
}

fn kesten(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let radii = cfg.radii.clone().unwrap_or_else(|| vec![8, 16, 32]);
    let c_probe = cfg.c_probe.unwrap_or(0.1);
    if !(c_probe > 0.0 && c_probe < 1.0) {
        return Err(CliError::Validation(format!("c_probe: must lie in (0, 1) (got {c_probe})")));
    }
    let mut model = cfg.percolation_model()?;
    if cfg.coarse_side.is_none() {
        model.coarse_side = 2 * radii.iter().copied().max().unwrap_or(1) + 2;
    }
    let ks = kesten_samples(&model, &radii, cfg.n_samples)?;
    let tail = ks.tail(c_probe);
    let mut r = Report {
        samples: ks.sample_indices.clone(),
        ..Report::default()
    };
    r.file("kesten_raw.csv", ks.to_table());
    let mut t = Table::new(&["radius", "threshold", "hits", "trials", "frequency", "lo", "hi"]);
    for row in &tail {
        t.push(vec![
            Cell::from(row.radius),
            Cell::from(row.threshold),
            Cell::from(row.hits),
            Cell::from(row.trials),
            Cell::from(row.frequency),
            Cell::from(row.lo),
            Cell::from(row.hi),
        ]);
    }
    r.file("kesten_tail.csv", t);
    r.check(Predicate::new(
        "tail_non_increasing",
        tail.windows(2).all(|w| w[1].lo <= w[0].hi),
        format!(
            "k = {}, γ = {}, frequencies {:?}",
            model.k,
            model.gamma,
            tail.iter().map(|x| format!("R={}: {:.4}", x.radius, x.frequency)).collect::<Vec<_>>()
        ),
    ));
    Ok(r)
}

fn cluster_tail(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let n_max = cfg.n_max.unwrap_or(10);
    if n_max < 5 {
        return Err(CliError::Validation(format!("n_max: need at least 5 (got {n_max})")));
    }
    let model = cfg.percolation_model()?;
    let ct = cluster_tail_experiment(&model, n_max, cfg.n_samples)?;
    let mut r = Report {
        samples: (0..ct.per_sample.len() as u64).collect(),
        ..Report::default()
    };
    r.file("cluster_tail.csv", ct.to_table());
    let mut raw = Table::new(&["sample", "n", "tail"]);
    for (s, row) in ct.per_sample.iter().enumerate() {
        for (n, &v) in row.iter().enumerate() {
            raw.push(vec![Cell::from(s), Cell::from(n), Cell::from(v)]);
        }
    }
    r.file("cluster_tail_raw.csv", raw);

    let window: Vec<usize> = (2..=n_max).collect();
    let positive = window.iter().all(|&n| ct.tail[n] > 0.0);
    let decreasing = window.windows(2).all(|w| ct.tail[w[1]] < ct.tail[w[0]]);
    let curve = MomentCurve {
        distances: window.iter().map(|&n| n as f64).collect(),
        values: window.iter().map(|&n| ct.tail[n]).collect(),
        ci: window.iter().map(|&n| 1.96 * ct.stderr[n]).collect(),
        cells: vec![1; window.len()],
        p: 1.0,
    };
    let (fit_ok, fit_txt) = match fit_exponential_decay(&curve, 2.0, n_max as f64, 0.0) {
        Ok(f) => (f.rate > 0.0 && f.r_squared >= 0.9, format!("log-slope {:.4}, r² {:.4}", -f.rate, f.r_squared)),
        Err(e) => (false, format!("no fit: {e}")),
    };
    r.check(Predicate::new(
        "log_linear_decreasing",
        positive && decreasing && fit_ok,
        format!(
            "k = {}, largest open cluster fraction {:.3}, tail positive {positive}, strictly decreasing {decreasing}, {fit_txt}",
            model.k, ct.largest_fraction
        ),
    ));
    Ok(r)
}

fn anchor(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let ac = cfg.anchor_config();
    let (rep, gaps) = anchoring_experiment_1d(&ac, cfg.n_samples)?;
    let mut r = Report {
        samples: (0..gaps.len() as u64).collect(),
        ..Report::default()
    };
    let mut t = Table::new(&["sample", "gap", "censored"]);
    for (s, g) in gaps.iter().enumerate() {
        t.push(vec![Cell::from(s), Cell::from(g.gap), Cell::from(g.censored)]);
    }
    r.file("gaps.csv", t);
    let mut m = Table::new(&["p", "moment", "raw", "exact_raw", "z_score"]);
    for g in &rep.moments {
        m.push(vec![Cell::from(g.p), Cell::from(g.value), Cell::from(g.raw), Cell::from(g.exact_raw), Cell::from(g.z_score)]);
    }
    r.file("gap_moments.csv", m);

    let verdict = match rep.status {
        Status::Pass => Verdict::Pass,
        Status::Fail => Verdict::Fail,
        Status::Inconclusive => Verdict::Inconclusive,
    };
    let detail = format!(
        "max_p M(p)/(p M(1)) = {:.4} (limit 2), {} samples, censored {:.4}",
        rep.linear_growth_ratio, rep.samples, rep.censored_fraction
    );
    r.predicates.push(Predicate {
        name: "linear_growth".into(),
        verdict,
        detail,
    });
    let max_z = rep.moments.iter().map(|g| g.z_score.abs()).fold(0.0, f64::max);
    r.predicates.push(Predicate {
        name: "geometric_law".into(),
        verdict: if verdict == Verdict::Inconclusive { verdict } else { Verdict::from_bool(max_z <= 3.0) },
        detail: format!("P[ω >= γ] = {:.4}, max |z| = {max_z:.3} (limit 3)", rep.strong_probability),
    });
    Ok(r)
}
