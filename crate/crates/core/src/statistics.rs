//! Monte Carlo orchestration over disorder samples: distance-binned
//! moment curves of Green masses, log-linear decay fits, λ sweeps,
//! covariances of landscape observables and single-site sensitivities.
//!
//! Samples run in parallel on the current rayon pool. Results are
//! collected in sample-index order, so every reduction below sees the
//! same sequence of values whatever the thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::resample_site;
use crate::disorder::rng::{Purpose, StreamKey};
use crate::error::{Error, ErrorKind, Result};
use crate::green::green_column;
use crate::io::{Cell, Table};
use crate::landscape::solve_landscape;
use crate::lattice::{BoundaryCondition, Coords, Grid};
use crate::model::DisorderModel;

pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Share of failed samples an experiment tolerates before giving up.
pub const MAX_SKIP_FRACTION: f64 = 0.05;

/// Cells this close to a Dirichlet boundary are left out of averages.
pub const BOUNDARY_MARGIN: usize = 5;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Percentile-bootstrap half-widths of a vector-valued statistic of `n`
/// samples. `stat` receives resampled indices (with repetition) and must
/// return `outputs` values. The 95% interval `[q_2.5, q_97.5]` is reduced
/// to half its width.
pub fn bootstrap_half_widths<F>(n: usize, outputs: usize, seed: u64, stat: F) -> Vec<f64>
where
    F: Fn(&[usize]) -> Vec<f64>,
{
    if n < 2 {
        return vec![0.0; outputs];
    }
    let mut rng = StreamKey::new(seed, 0, Purpose::Bootstrap, 0).rng(0);
    let mut draws: Vec<Vec<f64>> = vec![Vec::with_capacity(BOOTSTRAP_RESAMPLES); outputs];
    let mut idx = vec![0; n];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        idx.iter_mut().for_each(|i| *i = rng.random_range(0..n));
        for (slot, v) in draws.iter_mut().zip(stat(&idx)) {
            slot.push(v);
        }
    }
    draws
        .into_iter()
        .map(|mut v| {
            v.sort_by(f64::total_cmp);
            let at = |q: f64| v[(q * (v.len() - 1) as f64).round() as usize];
            0.5 * (at(0.975) - at(0.025))
        })
        .collect()
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Runs `task` for every sample index, in parallel, keeping order.
/// Solver failures are logged and skipped; more than
/// [`MAX_SKIP_FRACTION`] of them aborts with [`Error::ExcessSkips`].
pub fn run_samples<T, F>(n_samples: usize, task: F) -> Result<Vec<(u64, T)>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if n_samples == 0 {
        return Err(Error::Config("at least one sample is required".into()));
    }
    let results: Vec<Result<T>> = (0..n_samples as u64).into_par_iter().map(&task).collect();
    let mut out = Vec::with_capacity(n_samples);
    let mut skipped = 0;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => out.push((i as u64, v)),
            Err(e) if e.kind() == ErrorKind::Solver => {
                log::warn!("sample {i} skipped: {e}");
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    if skipped as f64 > MAX_SKIP_FRACTION * n_samples as f64 {
        return Err(Error::ExcessSkips {
            skipped,
            total: n_samples,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binning {
    /// One bin per integer sup-norm cell distance.
    #[default]
    Unit,
    /// Bin 0 holds `r = 0`, bin `l + 1` holds `2^l <= r < 2^{l+1}`.
    Dyadic,
}

impl Binning {
    fn bin(self, r: usize) -> usize {
        match self {
            Binning::Unit => r,
            Binning::Dyadic if r == 0 => 0,
            Binning::Dyadic => r.ilog2() as usize + 1,
        }
    }
}

/// `E[X^p]^{1/p}` per distance bin with bootstrap half-widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCurve {
    /// Mean cell distance of each bin, strictly increasing.
    pub distances: Vec<f64>,
    pub values: Vec<f64>,
    pub ci: Vec<f64>,
    /// Cells (per sample) pooled in each bin.
    pub cells: Vec<usize>,
    pub p: f64,
}

impl MomentCurve {
    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn value_at(&self, distance: f64) -> Option<f64> {
        self.distances
            .iter()
            .position(|&d| (d - distance).abs() < 1e-9)
            .map(|i| self.values[i])
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["distance", "value", "ci", "cells", "p"]);
        for i in 0..self.len() {
            t.push(vec![
                Cell::from(self.distances[i]),
                Cell::from(self.values[i]),
                Cell::from(self.ci[i]),
                Cell::from(self.cells[i]),
                Cell::from(self.p),
            ]);
        }
        t
    }
}

/// Per-cell observable values for a batch of samples on a common grid,
/// measured relative to a reference cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSamples {
    pub grid: Grid,
    pub reference_cell: Coords,
    pub sample_indices: Vec<u64>,
    /// `values[s][c]` for sample `s` and cell index `c`.
    pub values: Vec<Vec<f64>>,
    pub skipped: usize,
}

impl CellSamples {
    /// `E[X^p]^{1/p}` per bin of cells in the interior window.
    pub fn moment_curve(&self, p: f64, binning: Binning, bootstrap_seed: u64) -> Result<MomentCurve> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("moment order must be >= 1 (got {p})")));
        }
        if self.values.is_empty() {
            return Err(Error::InsufficientData("no samples".into()));
        }
        let margin = match self.grid.bc() {
            BoundaryCondition::Dirichlet => BOUNDARY_MARGIN,
            BoundaryCondition::Periodic => 0,
        };
        let window = self.grid.interior_cells(margin);
        if window.is_empty() {
            return Err(Error::InsufficientData("interior window is empty".into()));
        }
        let bins: Vec<usize> = window
            .iter()
            .map(|&c| binning.bin(self.grid.cell_distance(&self.grid.cell_coords(c), &self.reference_cell)))
            .collect();
        let n_bins = bins.iter().max().unwrap() + 1;
        let mut cells = vec![0usize; n_bins];
        let mut dist_sum = vec![0.0; n_bins];
        for (&c, &b) in window.iter().zip(&bins) {
            cells[b] += 1;
            dist_sum[b] += self.grid.cell_distance(&self.grid.cell_coords(c), &self.reference_cell) as f64;
        }
        // per-sample sums of X^p in each bin
        let sums: Vec<Vec<f64>> = self
            .values
            .iter()
            .map(|row| {
                let mut s = vec![0.0; n_bins];
                for (&c, &b) in window.iter().zip(&bins) {
                    s[b] += row[c].abs().powf(p);
                }
                s
            })
            .collect();
        let occupied: Vec<usize> = (0..n_bins).filter(|&b| cells[b] > 0).collect();
        let estimate = |idx: &[usize]| -> Vec<f64> {
            occupied
                .iter()
                .map(|&b| {
                    let total: f64 = idx.iter().map(|&s| sums[s][b]).sum();
                    (total / (idx.len() * cells[b]) as f64).powf(1.0 / p)
                })
                .collect()
        };
        let all: Vec<usize> = (0..self.values.len()).collect();
        let values = estimate(&all);
        let ci = bootstrap_half_widths(all.len(), occupied.len(), bootstrap_seed, estimate);
        Ok(MomentCurve {
            distances: occupied.iter().map(|&b| dist_sum[b] / cells[b] as f64).collect(),
            values,
            ci,
            cells: occupied.iter().map(|&b| cells[b]).collect(),
            p,
        })
    }

    /// Long-format dump: sample, cell, distance to the reference cell, value.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["sample", "cell", "distance", "value"]);
        for (s, row) in self.sample_indices.iter().zip(&self.values) {
            for (c, &v) in row.iter().enumerate() {
                let r = self.grid.cell_distance(&self.grid.cell_coords(c), &self.reference_cell);
                t.push(vec![Cell::from(*s), Cell::from(c), Cell::from(r), Cell::from(v)]);
            }
        }
        t
    }
}

/// Cell masses of the Green column from the centre node, one row per
/// sample.
pub fn green_mass_samples(model: &DisorderModel, n_samples: usize) -> Result<CellSamples> {
    let grid = model.grid;
    let source = grid.center_node();
    let rows = run_samples(n_samples, |s| {
        let (_, h) = model.sample(s)?;
        Ok(green_column(&h, source, &model.solver)?.cell_masses())
    })?;
    Ok(CellSamples {
        grid,
        reference_cell: grid.center_cell(),
        skipped: n_samples - rows.len(),
        sample_indices: rows.iter().map(|r| r.0).collect(),
        values: rows.into_iter().map(|r| r.1).collect(),
    })
}

/// `E[(∫_Q G(x₀, y) dy)^p]^{1/p}` against the cell distance of `Q` to the
/// source cell.
pub fn green_decay_experiment(model: &DisorderModel, p: f64, n_samples: usize) -> Result<MomentCurve> {
    green_mass_samples(model, n_samples)?.moment_curve(p, Binning::Unit, model.master_seed)
}

/// Result of a weighted log-linear fit `log v = a - rate * r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub log_prefactor: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Standard error of `rate` from the weighted residuals.
    pub rate_stderr: f64,
}

/// Weighted least squares of `log(value)` on distance over bins with
/// `r_min <= distance <= r_max` and `value > floor`. Weights are
/// `1/σ²` with `σ = ci/value` clamped to `[0.01, 10]`.
pub fn fit_exponential_decay(curve: &MomentCurve, r_min: f64, r_max: f64, floor: f64) -> Result<DecayFit> {
    if !(r_min < r_max) {
        return Err(Error::Config(format!("fit window [{r_min}, {r_max}] is empty")));
    }
    let pts: Vec<(f64, f64, f64)> = (0..curve.len())
        .filter(|&i| {
            let r = curve.distances[i];
            r >= r_min && r <= r_max && curve.values[i] > floor && curve.values[i] > 0.0
        })
        .map(|i| {
            let sigma = (curve.ci[i] / curve.values[i]).clamp(0.01, 10.0);
            (curve.distances[i], curve.values[i].ln(), 1.0 / (sigma * sigma))
        })
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} usable bins in [{r_min}, {r_max}], need 4",
            pts.len()
        )));
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let xm = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ym = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - xm) * (p.1 - ym)).sum();
    let syy: f64 = pts.iter().map(|p| p.2 * (p.1 - ym).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = pts
        .iter()
        .map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy <= f64::EPSILON * sw * ym.abs().max(1.0) {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let dof = (pts.len() - 2) as f64;
    Ok(DecayFit {
        rate: -slope,
        log_prefactor: intercept,
        r_min,
        r_max,
        r_squared,
        n_points: pts.len(),
        rate_stderr: (ss_res / dof / sxx).sqrt(),
    })
}

/// Regularization used at a given λ in decay sweeps.
pub fn sweep_eta(lambda: f64) -> f64 {
    1e-6_f64.min(lambda * 1e-3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaScalingRow {
    pub lambda: f64,
    pub eta: f64,
    pub fit: DecayFit,
    /// `rate / √λ` for `λ <= 1`, `rate` otherwise.
    pub normalized: f64,
    pub curve: MomentCurve,
}

/// One decay experiment and fit per λ, with `η = min(1e-6, 1e-3 λ)`.
pub fn lambda_scaling_curve(
    base: &DisorderModel,
    lambdas: &[f64],
    p: f64,
    n_samples: usize,
    window: (f64, f64),
    floor: f64,
) -> Result<Vec<LambdaScalingRow>> {
    if lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::Config("λ values must be positive".into()));
    }
    lambdas
        .iter()
        .map(|&lambda| {
            let eta = sweep_eta(lambda);
            let model = base.with_lambda_eta(lambda, eta);
            let curve = green_decay_experiment(&model, p, n_samples)?;
            let fit = fit_exponential_decay(&curve, window.0, window.1, floor)?;
            let normalized = if lambda <= 1.0 { fit.rate / lambda.sqrt() } else { fit.rate };
            Ok(LambdaScalingRow {
                lambda,
                eta,
                fit,
                normalized,
                curve,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    U,
    InvU,
    GradLogU,
}

impl Observable {
    pub const ALL: [Observable; 3] = [Observable::U, Observable::InvU, Observable::GradLogU];

    pub fn name(self) -> &'static str {
        match self {
            Observable::U => "u",
            Observable::InvU => "inv_u",
            Observable::GradLogU => "grad_log_u",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariancePoint {
    pub separation: f64,
    pub cov: f64,
    pub ci: f64,
    pub observable: Observable,
}

/// Point observables at `x` (the centre node) and at `x + s e_0` for each
/// separation `s`, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSamples {
    pub separations: Vec<usize>,
    pub sample_indices: Vec<u64>,
    /// `rows[s][k]`: values at `x` (k = 0) then at each separation, each
    /// holding `[u, 1/u, ∂_0 log u, …, ∂_{d-1} log u]`.
    pub rows: Vec<Vec<Vec<f64>>>,
}

fn point_observables(u: &[f64], grid: &Grid, node: usize) -> Vec<f64> {
    let mut out = vec![u[node], 1.0 / u[node]];
    let inv_h = 1.0 / grid.spacing();
    for axis in 0..grid.dim() {
        let d = match grid.neighbor(node, axis, true) {
            Some(j) => (u[j].ln() - u[node].ln()) * inv_h,
            None => {
                let j = grid.neighbor(node, axis, false).expect("grid has two nodes per axis");
                (u[node].ln() - u[j].ln()) * inv_h
            }
        };
        out.push(d);
    }
    out
}

pub fn covariance_samples(model: &DisorderModel, separations: &[usize], n_samples: usize) -> Result<CovarianceSamples> {
    let grid = model.grid;
    let x = grid.center_node();
    let xc = grid.node_coords(x);
    let centre = grid.center_cell()[0];
    let margin = match grid.bc() {
        BoundaryCondition::Dirichlet => BOUNDARY_MARGIN,
        BoundaryCondition::Periodic => 0,
    };
    let mut nodes = vec![x];
    for &s in separations {
        if centre + s + margin >= grid.cells() || centre < margin {
            return Err(Error::Config(format!(
                "separation {s} leaves the interior window of a box with {} cells",
                grid.cells()
            )));
        }
        let mut c = xc;
        c[0] += s * grid.mesh();
        nodes.push(grid.node_index(&c));
    }
    let rows = run_samples(n_samples, |s| {
        let (_, h) = model.sample(s)?;
        let sol = solve_landscape(&h, &model.solver)?;
        let u = sol.u().values();
        Ok(nodes.iter().map(|&n| point_observables(u, &grid, n)).collect::<Vec<_>>())
    })?;
    Ok(CovarianceSamples {
        separations: separations.to_vec(),
        sample_indices: rows.iter().map(|r| r.0).collect(),
        rows: rows.into_iter().map(|r| r.1).collect(),
    })
}

fn covariance(a: &[f64], b: &[f64], idx: &[usize]) -> f64 {
    let n = idx.len() as f64;
    if idx.len() < 2 {
        return 0.0;
    }
    let ma = idx.iter().map(|&i| a[i]).sum::<f64>() / n;
    let mb = idx.iter().map(|&i| b[i]).sum::<f64>() / n;
    idx.iter().map(|&i| (a[i] - ma) * (b[i] - mb)).sum::<f64>() / (n - 1.0)
}

impl CovarianceSamples {
    /// Covariance of `obs(x)` and `obs(x + s e_0)` for every separation.
    /// For `∇log u` the largest absolute same-component covariance is
    /// reported.
    pub fn points(&self, obs: Observable, bootstrap_seed: u64) -> Vec<CovariancePoint> {
        let components: Vec<usize> = match obs {
            Observable::U => vec![0],
            Observable::InvU => vec![1],
            Observable::GradLogU => (2..self.rows.first().map_or(2, |r| r[0].len())).collect(),
        };
        let series = |k: usize, comp: usize| -> Vec<f64> { self.rows.iter().map(|r| r[k][comp]).collect() };
        let pairs: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..self.separations.len())
            .map(|j| components.iter().map(|&c| (series(0, c), series(j + 1, c))).collect())
            .collect();
        let estimate = |idx: &[usize]| -> Vec<f64> {
            pairs
                .iter()
                .map(|comps| {
                    let covs: Vec<f64> = comps.iter().map(|(a, b)| covariance(a, b, idx)).collect();
                    if obs == Observable::GradLogU {
                        covs.iter().fold(0.0, |m: f64, c| m.max(c.abs()))
                    } else {
                        covs[0]
                    }
                })
                .collect()
        };
        let all: Vec<usize> = (0..self.rows.len()).collect();
        let cov = estimate(&all);
        let ci = bootstrap_half_widths(all.len(), pairs.len(), bootstrap_seed, estimate);
        self.separations
            .iter()
            .enumerate()
            .map(|(j, &s)| CovariancePoint {
                separation: s as f64,
                cov: cov[j],
                ci: ci[j],
                observable: obs,
            })
            .collect()
    }

    pub fn to_table(&self) -> Table {
        let d = self.rows.first().map_or(0, |r| r[0].len() - 2);
        let mut header = vec!["sample".to_string(), "separation".into(), "u".into(), "inv_u".into()];
        header.extend((0..d).map(|a| format!("grad_log_u_{a}")));
        let mut t = Table::new(&header);
        for (s, row) in self.sample_indices.iter().zip(&self.rows) {
            for (k, vals) in row.iter().enumerate() {
                let sep = if k == 0 { 0 } else { self.separations[k - 1] };
                let mut r = vec![Cell::from(*s), Cell::from(sep)];
                r.extend(vals.iter().map(|&v| Cell::from(v)));
                t.push(r);
            }
        }
        t
    }
}

pub fn covariance_experiment(
    model: &DisorderModel,
    obs: Observable,
    separations: &[usize],
    n_samples: usize,
) -> Result<Vec<CovariancePoint>> {
    Ok(covariance_samples(model, separations, n_samples)?.points(obs, model.master_seed))
}

/// `δ_z u(x) = u(x) - u^z(x)` for each offset, one row per sample; `x` is
/// the centre node and `z = centre cell + offset e_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalSamples {
    pub offsets: Vec<i64>,
    pub sample_indices: Vec<u64>,
    pub deltas: Vec<Vec<f64>>,
}

impl VerticalSamples {
    /// `E[|δ_z u(x)|²]^{1/2}` against `|offset|`, pooling offsets of equal
    /// magnitude.
    pub fn curve(&self, bootstrap_seed: u64) -> Result<MomentCurve> {
        if self.deltas.is_empty() {
            return Err(Error::InsufficientData("no samples".into()));
        }
        let mut dists: Vec<u64> = self.offsets.iter().map(|o| o.unsigned_abs()).collect();
        dists.sort_unstable();
        dists.dedup();
        let groups: Vec<Vec<usize>> = dists
            .iter()
            .map(|&d| (0..self.offsets.len()).filter(|&j| self.offsets[j].unsigned_abs() == d).collect())
            .collect();
        let estimate = |idx: &[usize]| -> Vec<f64> {
            groups
                .iter()
                .map(|g| {
                    let s: f64 = idx.iter().map(|&i| g.iter().map(|&j| self.deltas[i][j].powi(2)).sum::<f64>()).sum();
                    (s / (idx.len() * g.len()) as f64).sqrt()
                })
                .collect()
        };
        let all: Vec<usize> = (0..self.deltas.len()).collect();
        Ok(MomentCurve {
            distances: dists.iter().map(|&d| d as f64).collect(),
            values: estimate(&all),
            ci: bootstrap_half_widths(all.len(), groups.len(), bootstrap_seed, estimate),
            cells: groups.iter().map(Vec::len).collect(),
            p: 2.0,
        })
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["sample", "offset", "delta_u"]);
        for (s, row) in self.sample_indices.iter().zip(&self.deltas) {
            for (&o, &d) in self.offsets.iter().zip(row) {
                t.push(vec![Cell::from(*s), Cell::from(o), Cell::from(d)]);
            }
        }
        t
    }
}

pub fn vertical_derivative_samples(
    model: &DisorderModel,
    offsets: &[i64],
    n_samples: usize,
    resample_seed: u64,
) -> Result<VerticalSamples> {
    let grid = model.grid;
    let x = grid.center_node();
    let centre = grid.center_cell();
    let sites: Vec<Vec<i64>> = offsets
        .iter()
        .map(|&o| {
            let mut z: Vec<i64> = centre[..grid.dim()].iter().map(|&c| c as i64).collect();
            z[0] += o;
            z
        })
        .collect();
    if let Some(z) = sites.iter().find(|z| !(0..grid.cells() as i64).contains(&z[0])) {
        return Err(Error::OutOfRange {
            index: z.clone(),
            side: grid.cells(),
        });
    }
    let rows = run_samples(n_samples, |s| {
        let omega = model.omega(s)?;
        let u = solve_landscape(&model.hamiltonian(&omega)?, &model.solver)?;
        sites
            .iter()
            .map(|z| {
                let resampled = resample_site(&omega, z, resample_seed)?;
                if resampled.values() == omega.values() {
                    return Ok(0.0);
                }
                let uz = solve_landscape(&model.hamiltonian(&resampled)?, &model.solver)?;
                Ok(u.u().values()[x] - uz.u().values()[x])
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok(VerticalSamples {
        offsets: offsets.to_vec(),
        sample_indices: rows.iter().map(|r| r.0).collect(),
        deltas: rows.into_iter().map(|r| r.1).collect(),
    })
}

pub fn vertical_derivative_decay(
    model: &DisorderModel,
    offsets: &[i64],
    n_samples: usize,
    resample_seed: u64,
) -> Result<MomentCurve> {
    vertical_derivative_samples(model, offsets, n_samples, resample_seed)?.curve(model.master_seed)
}
