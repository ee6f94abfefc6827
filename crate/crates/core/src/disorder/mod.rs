//! The random potential: site amplitudes `ω_j`, their law, the bump `φ`
//! and the assembled field `V(x) = Σ_j ω_j φ(x - j)`.

pub mod rng;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{Cell, Table};
use crate::lattice::{Coords, Grid, ScalarField};
use rng::{site_code, Purpose, StreamKey};

/// Smallest mesh (nodes per unit length) that resolves the bump: at least
/// four nodes across its diameter 1/5.
pub const MIN_BUMP_MESH: usize = 20;

/// Law of a single amplitude `ω ∈ [0, 1]`.
///
/// Admissible laws are not point masses and have 0 as the infimum of their
/// support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisorderLaw {
    /// `P[ω = 1] = q`, `P[ω = 0] = 1 - q`.
    Bernoulli { q: f64 },
    Uniform01,
    DiscreteAtoms { values: Vec<f64>, probs: Vec<f64> },
}

impl DisorderLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            DisorderLaw::Bernoulli { q } => {
                if !q.is_finite() || *q <= 0.0 || *q >= 1.0 {
                    return Err(Error::InvalidLaw(format!(
                        "law is a point mass: bernoulli requires 0 < q < 1 (got {q})"
                    )));
                }
            }
            DisorderLaw::Uniform01 => {}
            DisorderLaw::DiscreteAtoms { values, probs } => {
                if values.len() != probs.len() {
                    return Err(Error::InvalidLaw("values and probs differ in length".into()));
                }
                if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::InvalidLaw("atom values must lie in [0, 1]".into()));
                }
                if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(Error::InvalidLaw("probabilities must be non-negative".into()));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidLaw(format!("probabilities sum to {total}, not 1")));
                }
                let mut support: Vec<f64> = values
                    .iter()
                    .zip(probs)
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(&v, _)| v)
                    .collect();
                support.sort_by(f64::total_cmp);
                support.dedup();
                if support.len() < 2 {
                    return Err(Error::InvalidLaw("law is a point mass".into()));
                }
                if support[0] != 0.0 {
                    return Err(Error::InvalidLaw(
                        "infimum of the support must be 0 (an atom at 0 with positive mass)".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Inverse-CDF transform of a uniform `[0, 1)` draw.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            DisorderLaw::Bernoulli { q } => {
                if u < *q {
                    1.0
                } else {
                    0.0
                }
            }
            DisorderLaw::Uniform01 => u,
            DisorderLaw::DiscreteAtoms { values, probs } => {
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                // u within round-off of 1: last atom with positive mass
                values
                    .iter()
                    .zip(probs)
                    .rev()
                    .find(|(_, &p)| p > 0.0)
                    .map(|(&v, _)| v)
                    .unwrap_or(0.0)
            }
        }
    }

    /// `P[ω < t]`.
    pub fn prob_below(&self, t: f64) -> f64 {
        match self {
            DisorderLaw::Bernoulli { q } => {
                if t <= 0.0 {
                    0.0
                } else if t <= 1.0 {
                    1.0 - q
                } else {
                    1.0
                }
            }
            DisorderLaw::Uniform01 => t.clamp(0.0, 1.0),
            DisorderLaw::DiscreteAtoms { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(&v, _)| v < t)
                .map(|(_, p)| p)
                .sum(),
        }
    }

    /// `P[ω >= t]`.
    pub fn prob_at_least(&self, t: f64) -> f64 {
        1.0 - self.prob_below(t)
    }

    pub fn mean(&self) -> f64 {
        match self {
            DisorderLaw::Bernoulli { q } => *q,
            DisorderLaw::Uniform01 => 0.5,
            DisorderLaw::DiscreteAtoms { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| v * p).sum()
            }
        }
    }

    /// Default percolation threshold: the upper quartile
    /// `inf{t : F(t) >= 3/4}`, or the smallest positive atom when the
    /// quartile is 0. Guarantees `P[ω >= γ] >= 1/4` whenever possible.
    pub fn upper_quartile(&self) -> f64 {
        match self {
            DisorderLaw::Bernoulli { .. } => 1.0,
            DisorderLaw::Uniform01 => 0.75,
            DisorderLaw::DiscreteAtoms { values, probs } => {
                let mut atoms: Vec<(f64, f64)> =
                    values.iter().copied().zip(probs.iter().copied()).filter(|a| a.1 > 0.0).collect();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut acc = 0.0;
                let mut quartile = atoms.last().map(|a| a.0).unwrap_or(1.0);
                for &(v, p) in &atoms {
                    acc += p;
                    if acc >= 0.75 {
                        quartile = v;
                        break;
                    }
                }
                if quartile > 0.0 {
                    quartile
                } else {
                    atoms.iter().map(|a| a.0).find(|&v| v > 0.0).unwrap_or(1.0)
                }
            }
        }
    }
}

/// The index set `{0, ..., side - 1}^dim` of lattice sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteBox {
    pub dim: usize,
    pub side: usize,
}

impl SiteBox {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) || side == 0 {
            return Err(Error::Config(format!("invalid site box {side}^{dim}")));
        }
        if side >= 1 << 21 {
            return Err(Error::Config("site box side must be below 2^21".into()));
        }
        Ok(Self { dim, side })
    }

    /// The sites underlying the cells of a grid.
    pub fn of_grid(grid: &Grid) -> Self {
        Self {
            dim: grid.dim(),
            side: grid.cells(),
        }
    }

    pub fn len(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, site: &Coords) -> usize {
        (0..self.dim).rev().fold(0, |acc, a| acc * self.side + site[a])
    }

    pub fn coords(&self, mut index: usize) -> Coords {
        let mut c = [0; 3];
        for slot in c.iter_mut().take(self.dim) {
            *slot = index % self.side;
            index /= self.side;
        }
        c
    }

    pub fn contains(&self, site: &[i64]) -> bool {
        site.len() == self.dim && site.iter().all(|&c| c >= 0 && (c as usize) < self.side)
    }
}

/// One realization of the amplitudes on a box, with the provenance needed
/// to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaField {
    sites: SiteBox,
    values: Vec<f64>,
    law: DisorderLaw,
    master_seed: u64,
    sample_index: u64,
}

impl OmegaField {
    /// Explicit amplitudes (all in `[0, 1]`), e.g. deterministic test
    /// configurations. Provenance seeds are set to 0.
    pub fn from_values(sites: SiteBox, values: Vec<f64>, law: DisorderLaw) -> Result<Self> {
        if values.len() != sites.len() {
            return Err(Error::Config(format!(
                "{} amplitudes for a box of {} sites",
                values.len(),
                sites.len()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Config("amplitudes must lie in [0, 1]".into()));
        }
        Ok(Self {
            sites,
            values,
            law,
            master_seed: 0,
            sample_index: 0,
        })
    }

    pub fn sites(&self) -> SiteBox {
        self.sites
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn law(&self) -> &DisorderLaw {
        &self.law
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn sample_index(&self) -> u64 {
        self.sample_index
    }

    pub fn get(&self, site: &Coords) -> f64 {
        self.values[self.sites.index(site)]
    }

    /// Amplitudes replaced at a single site (deterministic override, used
    /// for `ω^{z,-}` with `ω_z = 1`).
    pub fn with_site(&self, site: &[i64], value: f64) -> Result<Self> {
        let idx = self.checked_index(site)?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Config("amplitudes must lie in [0, 1]".into()));
        }
        let mut out = self.clone();
        out.values[idx] = value;
        Ok(out)
    }

    fn checked_index(&self, site: &[i64]) -> Result<usize> {
        if !self.sites.contains(site) {
            return Err(Error::OutOfRange {
                index: site.to_vec(),
                side: self.sites.side,
            });
        }
        let mut c = [0; 3];
        for (slot, &v) in c.iter_mut().zip(site) {
            *slot = v as usize;
        }
        Ok(self.sites.index(&c))
    }

    /// CSV site dump: site index, coordinates, ω.
    pub fn to_table(&self) -> Table {
        let d = self.sites.dim;
        let mut header = vec!["site".to_string()];
        header.extend((0..d).map(|a| format!("j{a}")));
        header.push("omega".into());
        let mut t = Table::new(&header);
        for (i, &v) in self.values.iter().enumerate() {
            let c = self.sites.coords(i);
            let mut row = vec![Cell::from(i)];
            row.extend(c[..d].iter().map(|&x| Cell::from(x)));
            row.push(Cell::from(v));
            t.push(row);
        }
        t
    }
}

/// Draws `ω_j` for every site of `sites`. Site `j` uses its own stream
/// keyed by `(master_seed, sample_index, j)`.
pub fn sample_omega(
    law: &DisorderLaw,
    sites: SiteBox,
    master_seed: u64,
    sample_index: u64,
) -> Result<OmegaField> {
    law.validate()?;
    if sites.is_empty() {
        return Err(Error::Config("empty site box".into()));
    }
    let key = StreamKey::new(master_seed, sample_index, Purpose::Site, 0);
    let values = (0..sites.len())
        .map(|i| {
            let c = sites.coords(i);
            law.quantile(key.uniform(site_code(&c[..sites.dim])))
        })
        .collect();
    Ok(OmegaField {
        sites,
        values,
        law: law.clone(),
        master_seed,
        sample_index,
    })
}

/// `ω^z`: identical to `omega` except at `z`, where a fresh independent draw
/// from the same law is placed.
pub fn resample_site(omega: &OmegaField, z: &[i64], resample_seed: u64) -> Result<OmegaField> {
    let idx = omega.checked_index(z)?;
    let key = StreamKey::new(
        omega.master_seed,
        omega.sample_index,
        Purpose::Resample,
        resample_seed,
    );
    let c = omega.sites.coords(idx);
    let mut out = omega.clone();
    out.values[idx] = omega.law.quantile(key.uniform(site_code(&c[..omega.sites.dim])));
    Ok(out)
}

/// Radial bump supported in the open ball of radius `radius`:
/// `φ(x) = exp(1 - 1 / (1 - |x/radius|^2))`, so `φ(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub radius: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self { radius: 0.1 }
    }
}

impl BumpProfile {
    pub fn evaluate(&self, offset: &[f64]) -> f64 {
        let t = offset.iter().map(|x| x * x).sum::<f64>() / (self.radius * self.radius);
        if t < 1.0 {
            (1.0 - 1.0 / (1.0 - t)).exp()
        } else {
            0.0
        }
    }
}

/// Node samples of `V(x) = Σ_j ω_j φ(x - j)`. Because the bump radius is
/// below 1/2 only the site of the node's own cell contributes.
pub fn assemble_potential(omega: &OmegaField, bump: &BumpProfile, grid: &Grid) -> Result<ScalarField> {
    if SiteBox::of_grid(grid) != omega.sites {
        return Err(Error::GridMismatch(format!(
            "grid cells {}^{} do not match site box {}^{}",
            grid.cells(),
            grid.dim(),
            omega.sites.side,
            omega.sites.dim
        )));
    }
    if !(bump.radius > 0.0 && bump.radius < 0.5) {
        return Err(Error::Config(format!("bump radius {} must lie in (0, 1/2)", bump.radius)));
    }
    if grid.mesh() < MIN_BUMP_MESH {
        return Err(Error::Config(format!(
            "mesh {} too coarse to resolve the bump (need at least {MIN_BUMP_MESH} nodes per unit)",
            grid.mesh()
        )));
    }
    let d = grid.dim();
    let m = grid.mesh() as f64;
    // bump values depend only on the node's offset inside its cell
    let mut local = vec![0.0; grid.mesh().pow(d as u32)];
    for (k, slot) in local.iter_mut().enumerate() {
        let mut off = [0.0; 3];
        let mut rem = k;
        for o in off.iter_mut().take(d) {
            *o = ((rem % grid.mesh()) as f64 + 0.5) / m - 0.5;
            rem /= grid.mesh();
        }
        *slot = bump.evaluate(&off[..d]);
    }
    let values = (0..grid.node_count())
        .map(|i| {
            let c = grid.node_coords(i);
            let mut k = 0;
            for a in (0..d).rev() {
                k = k * grid.mesh() + c[a] % grid.mesh();
            }
            let w = omega.values[grid.cell_index(&grid.cell_of_node(i))];
            w * local[k]
        })
        .collect();
    ScalarField::new(*grid, values)
}
