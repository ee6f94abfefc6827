use crate::error::{Error, Result};

use super::field::ScalarField;
use super::grid::{BoundaryCondition, Grid};

/// The discrete operator `-Δ_h + λV + η` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    grid: Grid,
    potential: ScalarField,
    lambda: f64,
    eta: f64,
}

impl HamiltonianSpec {
    /// Validates `V >= 0`, `λ >= 0`, `η >= 0`, and `η > 0` on periodic grids
    /// (where the operator would otherwise annihilate constants).
    pub fn new(potential: ScalarField, lambda: f64, eta: f64) -> Result<Self> {
        let grid = *potential.grid();
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Config(format!("lambda must be finite and >= 0 (got {lambda})")));
        }
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::Config(format!("eta must be finite and >= 0 (got {eta})")));
        }
        if grid.bc() == BoundaryCondition::Periodic && eta <= 0.0 {
            return Err(Error::Singular(
                "periodic operator needs eta > 0 to be positive definite".into(),
            ));
        }
        if let Some(i) = potential.values().iter().position(|&v| v < 0.0) {
            return Err(Error::Config(format!("potential negative at node {i}")));
        }
        Ok(Self {
            grid,
            potential,
            lambda,
            eta,
        })
    }

    /// Massive Laplacian `-Δ_h + η` (zero potential).
    pub fn free(grid: Grid, eta: f64) -> Result<Self> {
        Self::new(ScalarField::zeros(grid), 0.0, eta)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Same potential with a different coupling.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.potential.clone(), lambda, self.eta)
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.potential.clone(), self.lambda, eta)
    }

    /// Node-wise zeroth-order coefficient `λV + η`.
    #[inline]
    pub fn mass_term(&self, node: usize) -> f64 {
        self.lambda * self.potential.values()[node] + self.eta
    }

    /// Matrix diagonal.
    pub fn diagonal(&self) -> Vec<f64> {
        let inv_h2 = 1.0 / self.grid.spacing().powi(2);
        (0..self.grid.node_count())
            .map(|i| {
                let mut d = self.mass_term(i);
                for axis in 0..self.grid.dim() {
                    for forward in [true, false] {
                        if self.grid.neighbor(i, axis, forward) != Some(i) {
                            d += inv_h2;
                        }
                    }
                }
                d
            })
            .collect()
    }

    pub(crate) fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        let g = &self.grid;
        let inv_h2 = 1.0 / g.spacing().powi(2);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.mass_term(i) * f[i];
        }
        let n = g.nodes_per_side();
        for axis in 0..g.dim() {
            let stride = g.stride(axis);
            for (i, o) in out.iter_mut().enumerate() {
                let c = (i / stride) % n;
                let fi = f[i];
                let fwd = if c + 1 < n {
                    f[i + stride]
                } else if g.bc() == BoundaryCondition::Periodic {
                    f[i + stride - n * stride]
                } else {
                    0.0
                };
                let bwd = if c > 0 {
                    f[i - stride]
                } else if g.bc() == BoundaryCondition::Periodic {
                    f[i + (n - 1) * stride]
                } else {
                    0.0
                };
                *o += (2.0 * fi - fwd - bwd) * inv_h2;
            }
        }
    }
}

/// `(Af)(x) = h^{-2} Σ_{y~x} (f(x) - f(y)) + (λV(x) + η) f(x)`.
pub fn apply_hamiltonian(h: &HamiltonianSpec, f: &ScalarField) -> Result<ScalarField> {
    if f.grid() != h.grid() {
        return Err(Error::GridMismatch("field and operator live on different grids".into()));
    }
    let mut out = vec![0.0; f.len()];
    h.apply_into(f.values(), &mut out);
    Ok(ScalarField::from_raw(*h.grid(), out))
}
