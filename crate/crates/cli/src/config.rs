//! Experiment configuration file (TOML). Unknown keys are rejected.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use landscape_core::percolation::{choose_k, AnchorConfig, PercolationModel};
use landscape_core::{
    BoundaryCondition, BumpProfile, DisorderLaw, DisorderModel, Grid, Preconditioner, SolverOptions,
};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SolveLandscape,
    GreenDecay,
    LambdaScaling,
    Covariance,
    VerticalDerivative,
    EtaConvergence,
    EnergyCheck,
    AgmonCheck,
    RankOneCheck,
    FppKesten,
    ClusterTail,
    #[serde(rename = "anchor-1d")]
    #[value(name = "anchor-1d")]
    Anchor1d,
    Selftest,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SolveLandscape => "solve-landscape",
            Experiment::GreenDecay => "green-decay",
            Experiment::LambdaScaling => "lambda-scaling",
            Experiment::Covariance => "covariance",
            Experiment::VerticalDerivative => "vertical-derivative",
            Experiment::EtaConvergence => "eta-convergence",
            Experiment::EnergyCheck => "energy-check",
            Experiment::AgmonCheck => "agmon-check",
            Experiment::RankOneCheck => "rank-one-check",
            Experiment::FppKesten => "fpp-kesten",
            Experiment::ClusterTail => "cluster-tail",
            Experiment::Anchor1d => "anchor-1d",
            Experiment::Selftest => "selftest",
        }
    }

    fn uses_percolation(self) -> bool {
        matches!(self, Experiment::FppKesten | Experiment::ClusterTail | Experiment::Anchor1d)
    }
}

/// A single number or a list of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(f64),
    Many(Vec<f64>),
}

impl Values {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            Values::One(v) => vec![*v],
            Values::Many(v) => v.clone(),
        }
    }

    pub fn first(&self) -> Option<f64> {
        self.to_vec().first().copied()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    /// Defaults to `line` in one dimension and `jacobi` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preconditioner: Option<Preconditioner>,
}

fn default_dim() -> usize {
    1
}
fn default_cells() -> usize {
    128
}
fn default_mesh() -> usize {
    20
}
fn default_bc() -> BoundaryCondition {
    BoundaryCondition::Dirichlet
}
fn default_law() -> DisorderLaw {
    DisorderLaw::Bernoulli { q: 0.5 }
}
fn default_lambda() -> Values {
    Values::One(1.0)
}
fn default_eta() -> Values {
    Values::One(1e-6)
}
fn default_p() -> Vec<f64> {
    vec![1.0]
}
fn default_workers() -> usize {
    1
}

/// Every experiment reads the keys it needs and ignores the rest; the
/// optional keys below have per-experiment defaults documented in the
/// README.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Box side in unit cells.
    #[serde(default = "default_cells")]
    pub cells: usize,
    /// Nodes per unit length.
    #[serde(default = "default_mesh")]
    pub mesh: usize,
    #[serde(default = "default_bc")]
    pub bc: BoundaryCondition,
    #[serde(default = "default_law")]
    pub law: DisorderLaw,
    #[serde(default = "default_lambda")]
    pub lambda: Values,
    #[serde(default = "default_eta")]
    pub eta: Values,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    pub n_samples: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub solver: SolverSection,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separations: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resample_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_sigmas: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agmon_mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agmon_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agmon_inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agmon_outer: Option<f64>,
    /// Strong-site threshold for percolation and gap experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_side: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_probe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Sites of the one-dimensional gap experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Defaults used by `selftest` when no file is given.
    pub fn selftest_default() -> Self {
        Self::parse(
            "experiment = \"selftest\"\nn_samples = 1\nmaster_seed = 1\noutput_dir = \"landscape-selftest\"\n",
        )
        .expect("built-in config parses")
    }

    /// Checks that do not depend on the experiment kind.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if self.experiment != Experiment::Selftest && self.n_samples == 0 {
            return bad("n_samples: at least one sample is required".into());
        }
        if self.workers == 0 {
            return bad("workers: must be at least 1".into());
        }
        if self.lambda.to_vec().is_empty() || self.lambda.to_vec().iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return bad("lambda: values must be finite and non-negative".into());
        }
        if self.eta.to_vec().is_empty() || self.eta.to_vec().iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return bad("eta: values must be finite and non-negative".into());
        }
        if self.p.is_empty() || self.p.iter().any(|p| !(p.is_finite() && *p >= 1.0)) {
            return bad("p: moment orders must be finite and >= 1".into());
        }
        if let Some(tol) = self.solver.tol {
            if !(tol > 0.0 && tol < 1.0) {
                return bad(format!("solver.tol: must lie in (0, 1) (got {tol})"));
            }
        }
        if let Some([lo, hi]) = self.fit_window {
            if !(lo < hi) {
                return bad(format!("fit_window: [{lo}, {hi}] is empty"));
            }
        }
        self.law.validate().map_err(|e| CliError::Validation(format!("law: {e}")))?;
        if !self.experiment.uses_percolation() && self.experiment != Experiment::Selftest {
            self.grid()?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(self.dim, self.cells, self.mesh, self.bc)?)
    }

    pub fn solver_options(&self) -> SolverOptions {
        let preconditioner = self.solver.preconditioner.unwrap_or(if self.dim == 1 {
            Preconditioner::Line
        } else {
            Preconditioner::Jacobi
        });
        SolverOptions {
            tol: self.solver.tol.unwrap_or(SolverOptions::default().tol),
            max_iter: self.solver.max_iter,
            preconditioner,
        }
    }

    /// Model at the first λ and η of the config.
    pub fn disorder_model(&self) -> Result<DisorderModel, CliError> {
        let model = DisorderModel {
            grid: self.grid()?,
            law: self.law.clone(),
            bump: BumpProfile::default(),
            lambda: self.lambda.first().unwrap_or(1.0),
            eta: self.eta.first().unwrap_or(0.0),
            master_seed: self.master_seed,
            solver: self.solver_options(),
        };
        // surfaces operator-level errors (singular periodic box, coarse mesh)
        model.hamiltonian(&model.omega(0)?)?;
        Ok(model)
    }

    pub fn gamma_or_default(&self) -> f64 {
        self.gamma.unwrap_or_else(|| self.law.upper_quartile())
    }

    pub fn percolation_model(&self) -> Result<PercolationModel, CliError> {
        let gamma = self.gamma_or_default();
        let k = match self.k {
            Some(k) => k,
            None => choose_k(&self.law, gamma, self.dim)?,
        };
        let coarse_side = self.coarse_side.unwrap_or(64);
        if coarse_side < 4 {
            return Err(CliError::Validation(format!("coarse_side: need at least 4 (got {coarse_side})")));
        }
        Ok(PercolationModel {
            dim: self.dim,
            law: self.law.clone(),
            gamma,
            k,
            coarse_side,
            master_seed: self.master_seed,
        })
    }

    pub fn anchor_config(&self) -> AnchorConfig {
        AnchorConfig {
            law: self.law.clone(),
            gamma: self.gamma_or_default(),
            sites: self.sites.unwrap_or(256),
            master_seed: self.master_seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
experiment = "lambda-scaling"
dim = 1
cells = 64
mesh = 20
bc = "dirichlet"
lambda = [0.01, 0.04, 0.16]
eta = 1e-6
p = [1.0, 2.0]
n_samples = 20
master_seed = 7
output_dir = "out"
workers = 2
fit_window = [5.0, 20.0]
radii = [4, 8]

[law]
kind = "discrete_atoms"
values = [0.0, 0.5, 1.0]
probs = [0.5, 0.25, 0.25]

[solver]
tol = 1e-10
preconditioner = "line"
"#;

    #[test]
    fn round_trip_is_lossless() {
        let a = ExperimentConfig::parse(FULL).unwrap();
        let b = ExperimentConfig::parse(&a.to_toml()).unwrap();
        assert_eq!(a, b);
        let minimal = ExperimentConfig::selftest_default();
        assert_eq!(ExperimentConfig::parse(&minimal.to_toml()).unwrap(), minimal);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::parse(&format!("{FULL}\nlamda = 2.0\n")).unwrap_err();
        assert!(err.to_string().contains("lamda"), "{err}");
        let nested = FULL.replace("tol = 1e-10", "tolerance = 1e-10");
        assert!(ExperimentConfig::parse(&nested).is_err());
    }

    #[test]
    fn field_level_messages() {
        let mut c = ExperimentConfig::parse(FULL).unwrap();
        c.n_samples = 0;
        assert!(c.validate().unwrap_err().to_string().contains("n_samples"));
        let mut c = ExperimentConfig::parse(FULL).unwrap();
        c.law = DisorderLaw::Bernoulli { q: 1.0 };
        assert!(c.validate().unwrap_err().to_string().contains("law"));
    }

    #[test]
    fn scalar_or_list() {
        let c = ExperimentConfig::parse(FULL).unwrap();
        assert_eq!(c.lambda.to_vec(), vec![0.01, 0.04, 0.16]);
        assert_eq!(c.eta.to_vec(), vec![1e-6]);
    }
}
