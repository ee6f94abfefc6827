//! Coarse-grained percolation built from the site amplitudes, first-passage
//! (chemical) distances on it, cluster statistics, and the one-dimensional
//! gap between strong sites.
//!
//! Coarse vertex `i` sits at site `2^k i + 2^{k-1}` (the centre of its
//! block of `2^k` sites per axis), so every edge cube lies inside the
//! site box. The edge between
//! two neighbouring vertices is open (`ξ_e = 1`) iff some site in the open
//! cube of side `2^{k-1}` centred at the edge midpoint has `ω >= γ`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::disorder::{sample_omega, DisorderLaw, OmegaField, SiteBox};
use crate::error::{Error, Result};
use crate::io::{Cell, Table};
use crate::lattice::Coords;
use crate::statistics::{run_samples, wilson_interval};

/// Sites per axis in an edge cube at scale `k`.
pub fn sites_per_axis(k: u32) -> usize {
    if k <= 1 {
        1
    } else {
        (1usize << (k - 1)) - 1
    }
}

/// Smallest `k >= 1` with `P[ω < γ]^{C(k)} < 1/2`, where
/// `C(k) = sites_per_axis(k)^dim` is the number of sites in an edge cube.
pub fn choose_k(law: &DisorderLaw, gamma: f64, dim: usize) -> Result<u32> {
    law.validate()?;
    if !(1..=3).contains(&dim) {
        return Err(Error::Config(format!("dimension must be 1, 2 or 3 (got {dim})")));
    }
    if !(law.prob_at_least(gamma) > 0.0) {
        return Err(Error::Config(format!("P[ω >= {gamma}] = 0: no edge can ever be open")));
    }
    let below = law.prob_below(gamma);
    (1..=24)
        .find(|&k| below.powf(sites_per_axis(k).pow(dim as u32) as f64) < 0.5)
        .ok_or_else(|| Error::Config(format!("no scale k <= 24 makes edges open with probability > 1/2 at γ = {gamma}")))
}

/// Nearest-neighbour graph on an `n^d` block of coarse vertices with 0/1
/// edge marks.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGraph {
    dim: usize,
    side: usize,
    k: u32,
    gamma: f64,
    /// `xi[v * dim + axis]` marks the edge from `v` to `v + e_axis`;
    /// entries on the far face are unused and false.
    xi: Vec<bool>,
}

impl CoarseGraph {
    /// Graph with edge marks given by `open(vertex, axis)`; scale and
    /// threshold are recorded as 0.
    pub fn from_edges(dim: usize, side: usize, open: impl Fn(usize, usize) -> bool) -> Result<Self> {
        if !(1..=3).contains(&dim) || side == 0 {
            return Err(Error::Config(format!("invalid coarse box {side}^{dim}")));
        }
        let mut g = Self {
            dim,
            side,
            k: 0,
            gamma: 0.0,
            xi: vec![false; side.pow(dim as u32) * dim],
        };
        for v in 0..g.vertex_count() {
            for a in 0..dim {
                if g.step(v, a).is_some() {
                    g.xi[v * dim + a] = open(v, a);
                }
            }
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Vertices per axis.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn vertex_count(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn vertex_coords(&self, mut v: usize) -> Coords {
        let mut c = [0; 3];
        for slot in c.iter_mut().take(self.dim) {
            *slot = v % self.side;
            v /= self.side;
        }
        c
    }

    pub fn vertex_index(&self, c: &Coords) -> usize {
        (0..self.dim).rev().fold(0, |acc, a| acc * self.side + c[a])
    }

    pub fn center(&self) -> usize {
        let mut c = [0; 3];
        c.iter_mut().take(self.dim).for_each(|x| *x = self.side / 2);
        self.vertex_index(&c)
    }

    fn step(&self, v: usize, axis: usize) -> Option<usize> {
        let stride = self.side.pow(axis as u32);
        ((v / stride) % self.side + 1 < self.side).then_some(v + stride)
    }

    /// `Some(ξ)` for an edge from `v` along `+e_axis`, `None` on the far face.
    pub fn edge(&self, v: usize, axis: usize) -> Option<bool> {
        self.step(v, axis).map(|_| self.xi[v * self.dim + axis])
    }

    pub fn edge_count(&self) -> usize {
        self.dim * self.side.pow(self.dim as u32 - 1) * (self.side - 1)
    }

    pub fn open_edge_count(&self) -> usize {
        (0..self.vertex_count())
            .flat_map(|v| (0..self.dim).map(move |a| (v, a)))
            .filter(|&(v, a)| self.edge(v, a) == Some(true))
            .count()
    }

    /// Neighbours of `v` with the mark of the connecting edge.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, bool)> + '_ {
        (0..self.dim).flat_map(move |a| {
            let stride = self.side.pow(a as u32);
            let fwd = self.step(v, a).map(|u| (u, self.xi[v * self.dim + a]));
            let back = ((v / stride) % self.side > 0).then(|| (v - stride, self.xi[(v - stride) * self.dim + a]));
            fwd.into_iter().chain(back)
        })
    }

    /// `|x - y|_∞` in coarse units.
    pub fn sup_distance(&self, x: usize, y: usize) -> usize {
        let (a, b) = (self.vertex_coords(x), self.vertex_coords(y));
        (0..self.dim).map(|i| a[i].abs_diff(b[i])).max().unwrap_or(0)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["vertex", "axis", "xi"]);
        for v in 0..self.vertex_count() {
            for a in 0..self.dim {
                if let Some(x) = self.edge(v, a) {
                    t.push(vec![Cell::from(v), Cell::from(a), Cell::from(x as u8 as usize)]);
                }
            }
        }
        t
    }
}

/// Offsets of the sites in an edge cube around its (integer) centre.
fn cube_offsets(k: u32) -> std::ops::RangeInclusive<i64> {
    let r = (sites_per_axis(k) as i64 - 1) / 2;
    -r..=r
}

pub fn coarse_grain(omega: &OmegaField, k: u32, gamma: f64) -> Result<CoarseGraph> {
    let sites = omega.sites();
    if k == 0 || k > 20 {
        return Err(Error::Config(format!("coarse scale k = {k} outside 1..=20")));
    }
    let scale = 1usize << k;
    let side = sites.side / scale;
    if side < 4 {
        return Err(Error::Config(format!(
            "site box of side {} gives {side} coarse vertices per axis at k = {k}, need 4",
            sites.side
        )));
    }
    let dim = sites.dim;
    let offs: Vec<i64> = cube_offsets(k).collect();
    let mut g = CoarseGraph {
        dim,
        side,
        k,
        gamma,
        xi: vec![false; side.pow(dim as u32) * dim],
    };
    let mut site = [0usize; 3];
    for v in 0..g.vertex_count() {
        let c = g.vertex_coords(v);
        for a in 0..dim {
            if g.step(v, a).is_none() {
                continue;
            }
            let mut centre = [0i64; 3];
            for b in 0..dim {
                centre[b] = (c[b] * scale + scale / 2) as i64;
            }
            centre[a] += (scale / 2) as i64;
            let n = offs.len();
            let open = (0..n.pow(dim as u32)).any(|mut t| {
                for b in 0..dim {
                    site[b] = (centre[b] + offs[t % n]) as usize;
                    t /= n;
                }
                omega.get(&site) >= gamma
            });
            g.xi[v * dim + a] = open;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    /// Open-cluster id of every vertex; ids are numbered by first vertex.
    pub open_labels: Vec<usize>,
    pub open_sizes: Vec<usize>,
    /// Id of the largest open cluster, if any open edge exists.
    pub largest: Option<usize>,
    pub largest_fraction: f64,
    /// Closed-component id of every vertex outside the largest cluster.
    pub closed_labels: Vec<Option<usize>>,
    pub closed_component_sizes: Vec<usize>,
    /// Sup-norm extent (coarse units) of each closed component.
    pub closed_component_diameters: Vec<usize>,
}

impl ClusterReport {
    /// `P[diam C(y) >= n]` for `n = 0..=n_max`, with `y` a uniform vertex
    /// and `C(y)` empty when `y` belongs to the largest open cluster.
    pub fn diameter_tail(&self, n_max: usize) -> Vec<f64> {
        let total = self.open_labels.len() as f64;
        (0..=n_max)
            .map(|n| {
                self.closed_component_diameters
                    .iter()
                    .zip(&self.closed_component_sizes)
                    .filter(|(&d, _)| d >= n)
                    .map(|(_, &s)| s)
                    .sum::<usize>() as f64
                    / total
            })
            .collect()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

pub fn cluster_analysis(g: &CoarseGraph) -> ClusterReport {
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    for v in 0..n {
        for a in 0..g.dim {
            if g.edge(v, a) == Some(true) {
                let u = g.step(v, a).unwrap();
                let (rv, ru) = (find(&mut parent, v), find(&mut parent, u));
                if rv != ru {
                    parent[rv.max(ru)] = rv.min(ru);
                }
            }
        }
    }
    let mut id_of_root = vec![usize::MAX; n];
    let mut open_labels = vec![0; n];
    let mut open_sizes = Vec::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        if id_of_root[r] == usize::MAX {
            id_of_root[r] = open_sizes.len();
            open_sizes.push(0);
        }
        open_labels[v] = id_of_root[r];
        open_sizes[id_of_root[r]] += 1;
    }
    // first cluster of maximal size; a lone vertex has no open edge
    let largest = (0..open_sizes.len())
        .max_by(|&a, &b| open_sizes[a].cmp(&open_sizes[b]).then(b.cmp(&a)))
        .filter(|&c| open_sizes[c] > 1);
    let largest_fraction = largest.map_or(0.0, |c| open_sizes[c] as f64 / n as f64);

    let mut closed_labels = vec![None; n];
    let mut sizes = Vec::new();
    let mut diameters = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if Some(open_labels[start]) == largest || closed_labels[start].is_some() {
            continue;
        }
        let id = sizes.len();
        let (mut lo, mut hi) = ([usize::MAX; 3], [0usize; 3]);
        let mut size = 0;
        closed_labels[start] = Some(id);
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            size += 1;
            let c = g.vertex_coords(v);
            for a in 0..g.dim {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
            for (u, _) in g.neighbors(v) {
                if Some(open_labels[u]) != largest && closed_labels[u].is_none() {
                    closed_labels[u] = Some(id);
                    queue.push_back(u);
                }
            }
        }
        sizes.push(size);
        diameters.push((0..g.dim).map(|a| hi[a] - lo[a]).max().unwrap_or(0));
    }
    ClusterReport {
        open_labels,
        open_sizes,
        largest,
        largest_fraction,
        closed_labels,
        closed_component_sizes: sizes,
        closed_component_diameters: diameters,
    }
}

/// First-passage distance from `origin` where crossing an open edge costs
/// 1 and a closed edge costs 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ChemicalDistanceMap {
    pub origin: usize,
    pub dist: Vec<u32>,
}

impl ChemicalDistanceMap {
    /// Minimum distance over vertices at sup-distance exactly `radius`
    /// from the origin, or `None` if that shell leaves the box.
    pub fn shell_min(&self, g: &CoarseGraph, radius: usize) -> Option<u32> {
        let o = g.vertex_coords(self.origin);
        if (0..g.dim).any(|a| o[a] < radius || o[a] + radius >= g.side) {
            return None;
        }
        (0..g.vertex_count())
            .filter(|&v| g.sup_distance(v, self.origin) == radius)
            .map(|v| self.dist[v])
            .min()
    }
}

/// 0-1 breadth-first search.
pub fn chemical_distance(g: &CoarseGraph, origin: usize) -> Result<ChemicalDistanceMap> {
    let n = g.vertex_count();
    if origin >= n {
        return Err(Error::OutOfRange {
            index: vec![origin as i64],
            side: g.side,
        });
    }
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    dist[origin] = 0;
    queue.push_back(origin);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v];
        for (u, open) in g.neighbors(v) {
            let du = dv + open as u32;
            if du < dist[u] {
                dist[u] = du;
                if open {
                    queue.push_back(u);
                } else {
                    queue.push_front(u);
                }
            }
        }
    }
    Ok(ChemicalDistanceMap { origin, dist })
}

/// Ensemble of coarse graphs: sites are drawn on a box of side
/// `coarse_side * 2^k` and coarse-grained at threshold `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercolationModel {
    pub dim: usize,
    pub law: DisorderLaw,
    pub gamma: f64,
    pub k: u32,
    pub coarse_side: usize,
    pub master_seed: u64,
}

impl PercolationModel {
    pub fn graph(&self, sample_index: u64) -> Result<CoarseGraph> {
        let sites = SiteBox::new(self.dim, self.coarse_side << self.k)?;
        let omega = sample_omega(&self.law, sites, self.master_seed, sample_index)?;
        coarse_grain(&omega, self.k, self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub radius: usize,
    pub threshold: f64,
    pub hits: usize,
    pub trials: usize,
    pub frequency: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KestenSamples {
    pub radii: Vec<usize>,
    pub sample_indices: Vec<u64>,
    /// Minimum chemical distance from the centre to each shell.
    pub shell_mins: Vec<Vec<u32>>,
}

impl KestenSamples {
    /// Frequency of `min_{|x|_∞ = R} d_χ(0, x) <= c_probe R` with 95% Wilson
    /// intervals.
    pub fn tail(&self, c_probe: f64) -> Vec<TailRow> {
        self.radii
            .iter()
            .enumerate()
            .map(|(j, &r)| {
                let threshold = c_probe * r as f64;
                let hits = self.shell_mins.iter().filter(|m| m[j] as f64 <= threshold).count();
                let trials = self.shell_mins.len();
                let (lo, hi) = wilson_interval(hits, trials);
                TailRow {
                    radius: r,
                    threshold,
                    hits,
                    trials,
                    frequency: hits as f64 / trials as f64,
                    lo,
                    hi,
                }
            })
            .collect()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["sample", "radius", "min_distance"]);
        for (s, mins) in self.sample_indices.iter().zip(&self.shell_mins) {
            for (&r, &m) in self.radii.iter().zip(mins) {
                t.push(vec![Cell::from(*s), Cell::from(r), Cell::from(m as usize)]);
            }
        }
        t
    }
}

pub fn kesten_samples(model: &PercolationModel, radii: &[usize], n_samples: usize) -> Result<KestenSamples> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] == 0 {
        return Err(Error::Config("radii must be positive and strictly increasing".into()));
    }
    let last = *radii.last().unwrap();
    if model.coarse_side / 2 + last >= model.coarse_side {
        return Err(Error::Config(format!(
            "radius {last} does not fit in a coarse box of side {}",
            model.coarse_side
        )));
    }
    let rows = run_samples(n_samples, |s| {
        let g = model.graph(s)?;
        let d = chemical_distance(&g, g.center())?;
        Ok(radii.iter().map(|&r| d.shell_min(&g, r).expect("shell inside box")).collect::<Vec<u32>>())
    })?;
    Ok(KestenSamples {
        radii: radii.to_vec(),
        sample_indices: rows.iter().map(|r| r.0).collect(),
        shell_mins: rows.into_iter().map(|r| r.1).collect(),
    })
}

pub fn kesten_tail_experiment(
    model: &PercolationModel,
    radii: &[usize],
    c_probe: f64,
    n_samples: usize,
) -> Result<Vec<TailRow>> {
    if !(c_probe > 0.0 && c_probe < 1.0) {
        return Err(Error::Config(format!("probe constant must lie in (0, 1) (got {c_probe})")));
    }
    Ok(kesten_samples(model, radii, n_samples)?.tail(c_probe))
}

/// Closed-component diameter tails averaged over samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTail {
    /// `tail[n] = P[diam C(y) >= n]`.
    pub tail: Vec<f64>,
    /// Standard error of `tail[n]` across samples.
    pub stderr: Vec<f64>,
    pub largest_fraction: f64,
    pub per_sample: Vec<Vec<f64>>,
}

impl ClusterTail {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["n", "tail", "stderr"]);
        for (n, (&v, &e)) in self.tail.iter().zip(&self.stderr).enumerate() {
            t.push(vec![Cell::from(n), Cell::from(v), Cell::from(e)]);
        }
        t
    }
}

pub fn cluster_tail_experiment(model: &PercolationModel, n_max: usize, n_samples: usize) -> Result<ClusterTail> {
    let rows = run_samples(n_samples, |s| {
        let r = cluster_analysis(&model.graph(s)?);
        Ok((r.diameter_tail(n_max), r.largest_fraction))
    })?;
    let per_sample: Vec<Vec<f64>> = rows.iter().map(|r| r.1 .0.clone()).collect();
    let col = |n: usize| -> Vec<f64> { per_sample.iter().map(|t| t[n]).collect() };
    Ok(ClusterTail {
        tail: (0..=n_max).map(|n| crate::statistics::mean(&col(n))).collect(),
        stderr: (0..=n_max).map(|n| crate::statistics::std_error(&col(n))).collect(),
        largest_fraction: crate::statistics::mean(&rows.iter().map(|r| r.1 .1).collect::<Vec<_>>()),
        per_sample,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapSample {
    /// Distance between the nearest strong sites on either side.
    pub gap: usize,
    /// A scan reached the end of the box; `gap` then stops at the edge.
    pub censored: bool,
}

/// Nearest sites strictly left and right of `y_prime` with `ω >= γ`.
pub fn gap_statistic_1d(omega: &OmegaField, gamma: f64, y_prime: i64) -> Result<GapSample> {
    let sites = omega.sites();
    if sites.dim != 1 {
        return Err(Error::Config("the gap statistic is one-dimensional".into()));
    }
    if !sites.contains(&[y_prime]) {
        return Err(Error::OutOfRange {
            index: vec![y_prime],
            side: sites.side,
        });
    }
    let v = omega.values();
    let y = y_prime as usize;
    let right = (y + 1..v.len()).find(|&j| v[j] >= gamma);
    let left = (0..y).rev().find(|&j| v[j] >= gamma);
    let hi = right.unwrap_or(v.len() - 1);
    let lo = left.unwrap_or(0);
    Ok(GapSample {
        gap: hi - lo,
        censored: right.is_none() || left.is_none(),
    })
}

/// Law of the gap when each site is strong independently with
/// probability `q`: `P[gap = n] = (n - 1) q² (1 - q)^{n-2}`, `n >= 2`.
pub fn gap_raw_moment(q: f64, p: f64) -> f64 {
    if q >= 1.0 {
        return 2f64.powf(p);
    }
    let mut sum = 0.0;
    let mut n = 2u64;
    loop {
        let term = (n as f64).powf(p) * (n - 1) as f64 * q * q * (1.0 - q).powi(n as i32 - 2);
        sum += term;
        if (n as f64) * q > 10.0 + 2.0 * p && term < 1e-17 * sum {
            return sum;
        }
        n += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapMoment {
    pub p: f64,
    /// `E[gap^p]^{1/p}` over uncensored samples.
    pub value: f64,
    pub raw: f64,
    /// Closed-form `E[gap^p]`.
    pub exact_raw: f64,
    /// `(raw - exact_raw)` in units of the exact standard error.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorReport {
    pub gamma: f64,
    /// `P[ω >= γ]`.
    pub strong_probability: f64,
    pub moments: Vec<GapMoment>,
    pub censored_fraction: f64,
    pub samples: usize,
    /// `max_p E[gap^p]^{1/p} / (p E[gap])`.
    pub linear_growth_ratio: f64,
    pub status: Status,
}

pub const ANCHOR_ORDERS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

/// Fewer samples than this give an inconclusive anchoring verdict.
pub const MIN_ANCHOR_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorConfig {
    pub law: DisorderLaw,
    pub gamma: f64,
    pub sites: usize,
    pub master_seed: u64,
}

impl AnchorConfig {
    /// `γ` defaults to the upper quartile of the law.
    pub fn with_default_gamma(law: DisorderLaw, sites: usize, master_seed: u64) -> Self {
        Self {
            gamma: law.upper_quartile(),
            law,
            sites,
            master_seed,
        }
    }
}

pub fn gap_samples(cfg: &AnchorConfig, n_samples: usize) -> Result<Vec<GapSample>> {
    let sites = SiteBox::new(1, cfg.sites)?;
    let y = (cfg.sites / 2) as i64;
    Ok(run_samples(n_samples, |s| {
        let omega = sample_omega(&cfg.law, sites, cfg.master_seed, s)?;
        gap_statistic_1d(&omega, cfg.gamma, y)
    })?
    .into_iter()
    .map(|r| r.1)
    .collect())
}

/// PASS iff `E[gap^p]^{1/p} <= 2 p E[gap]` for every order in
/// [`ANCHOR_ORDERS`]. Inconclusive below [`MIN_ANCHOR_SAMPLES`] samples or
/// with more than 1% censored scans.
pub fn anchoring_experiment_1d(cfg: &AnchorConfig, n_samples: usize) -> Result<(AnchorReport, Vec<GapSample>)> {
    let gaps = gap_samples(cfg, n_samples)?;
    let q = cfg.law.prob_at_least(cfg.gamma);
    let censored = gaps.iter().filter(|g| g.censored).count();
    let usable: Vec<f64> = gaps.iter().filter(|g| !g.censored).map(|g| g.gap as f64).collect();
    let n = usable.len().max(1) as f64;
    let moments: Vec<GapMoment> = ANCHOR_ORDERS
        .iter()
        .map(|&p| {
            let raw = usable.iter().map(|g| g.powf(p)).sum::<f64>() / n;
            let exact_raw = gap_raw_moment(q, p);
            let var = (gap_raw_moment(q, 2.0 * p) - exact_raw * exact_raw).max(0.0);
            let se = (var / n).sqrt();
            let z_score = if se > 0.0 {
                (raw - exact_raw) / se
            } else if (raw - exact_raw).abs() <= 1e-12 * exact_raw {
                0.0
            } else {
                f64::INFINITY
            };
            GapMoment {
                p,
                value: raw.powf(1.0 / p),
                raw,
                exact_raw,
                z_score,
            }
        })
        .collect();
    let m1 = moments[0].value;
    let linear_growth_ratio = moments.iter().map(|m| m.value / (m.p * m1)).fold(0.0, f64::max);
    let censored_fraction = censored as f64 / gaps.len() as f64;
    let status = if gaps.len() < MIN_ANCHOR_SAMPLES || censored_fraction > 0.01 {
        Status::Inconclusive
    } else if linear_growth_ratio <= 2.0 {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok((
        AnchorReport {
            gamma: cfg.gamma,
            strong_probability: q,
            moments,
            censored_fraction,
            samples: gaps.len(),
            linear_growth_ratio,
            status,
        },
        gaps,
    ))
}
