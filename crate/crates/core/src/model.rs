use serde::{Deserialize, Serialize};

use crate::disorder::{assemble_potential, sample_omega, BumpProfile, DisorderLaw, OmegaField, SiteBox};
use crate::error::Result;
use crate::lattice::{Grid, HamiltonianSpec, SolverOptions};

/// Everything needed to turn a sample index into an operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderModel {
    pub grid: Grid,
    pub law: DisorderLaw,
    pub bump: BumpProfile,
    pub lambda: f64,
    pub eta: f64,
    pub master_seed: u64,
    pub solver: SolverOptions,
}

impl DisorderModel {
    pub fn sites(&self) -> SiteBox {
        SiteBox::of_grid(&self.grid)
    }

    pub fn omega(&self, sample_index: u64) -> Result<OmegaField> {
        sample_omega(&self.law, self.sites(), self.master_seed, sample_index)
    }

    pub fn hamiltonian(&self, omega: &OmegaField) -> Result<HamiltonianSpec> {
        let v = assemble_potential(omega, &self.bump, &self.grid)?;
        HamiltonianSpec::new(v, self.lambda, self.eta)
    }

    pub fn sample(&self, sample_index: u64) -> Result<(OmegaField, HamiltonianSpec)> {
        let omega = self.omega(sample_index)?;
        let h = self.hamiltonian(&omega)?;
        Ok((omega, h))
    }

    pub fn with_lambda_eta(&self, lambda: f64, eta: f64) -> Self {
        Self {
            lambda,
            eta,
            ..self.clone()
        }
    }
}
