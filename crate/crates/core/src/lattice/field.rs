use crate::error::{Error, Result};
use crate::io::{Cell, Table};

use super::grid::Grid;

/// One finite real value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Consistency(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.node_count()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new(grid, (0..grid.node_count()).map(f).collect())
    }

    /// Discrete delta at `node` with unit integral (`h^{-d}` at one node).
    pub fn delta(grid: Grid, node: usize) -> Result<Self> {
        if node >= grid.node_count() {
            return Err(Error::Config(format!("source node {node} outside grid")));
        }
        let mut f = Self::zeros(grid);
        f.values[node] = 1.0 / grid.node_volume();
        Ok(f)
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `h^d * sum`, the midpoint-rule integral over the whole box.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.node_volume()
    }

    /// `L^2` inner product with quadrature weight `h^d`.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(dot(&self.values, &other.values) * self.grid.node_volume())
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// Per-cell maxima, indexed like [`Grid::cell_index`].
    pub fn cell_max(&self) -> Vec<f64> {
        self.fold_cells(f64::NEG_INFINITY, f64::max)
    }

    /// Per-cell midpoint-rule integrals over the unit cubes.
    pub fn cell_integrals(&self) -> Vec<f64> {
        let w = self.grid.node_volume();
        let mut out = self.fold_cells(0.0, |a, b| a + b);
        out.iter_mut().for_each(|v| *v *= w);
        out
    }

    fn fold_cells(&self, init: f64, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = vec![init; self.grid.cell_count()];
        for (i, &v) in self.values.iter().enumerate() {
            let c = self.grid.cell_index(&self.grid.cell_of_node(i));
            out[c] = f(out[c], v);
        }
        out
    }

    /// Forward difference `(f(x + h e_axis) - f(x)) / h` at every node;
    /// outside a Dirichlet box `f` is taken as 0.
    pub fn forward_difference(&self, axis: usize) -> Vec<f64> {
        let g = &self.grid;
        let inv_h = 1.0 / g.spacing();
        (0..self.values.len())
            .map(|i| {
                let next = g.neighbor(i, axis, true).map_or(0.0, |j| self.values[j]);
                (next - self.values[i]) * inv_h
            })
            .collect()
    }

    /// Node-wise `|∇f|^2` from forward differences summed over axes.
    pub fn grad_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.values.len()];
        for axis in 0..self.grid.dim() {
            for (o, d) in out.iter_mut().zip(self.forward_difference(axis)) {
                *o += d * d;
            }
        }
        out
    }

    /// CSV dump: node index, coordinates, value.
    pub fn to_table(&self) -> Table {
        let d = self.grid.dim();
        let mut header = vec!["node".to_string()];
        header.extend((0..d).map(|a| format!("x{a}")));
        header.push("value".into());
        let mut t = Table::new(&header);
        for (i, &v) in self.values.iter().enumerate() {
            let x = self.grid.node_position(i);
            let mut row = vec![Cell::from(i)];
            row.extend(x[..d].iter().map(|&c| Cell::from(c)));
            row.push(Cell::from(v));
            t.push(row);
        }
        t
    }
}

/// Sequential left-to-right dot product; the fixed order keeps solver
/// output bit-stable across runs.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoundaryCondition;

    #[test]
    fn delta_has_unit_integral() {
        let g = Grid::new(2, 4, 5, BoundaryCondition::Dirichlet).unwrap();
        let f = ScalarField::delta(g, 7).unwrap();
        assert!((f.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(1, 4, 1, BoundaryCondition::Dirichlet).unwrap();
        assert!(ScalarField::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(ScalarField::new(g, vec![0.0; 3]).is_err());
    }

    #[test]
    fn cell_integrals_partition_total() {
        let g = Grid::new(2, 4, 3, BoundaryCondition::Periodic).unwrap();
        let f = ScalarField::from_fn(g, |i| (i as f64).sin().abs()).unwrap();
        let total: f64 = f.cell_integrals().iter().sum();
        assert!((total - f.integral()).abs() < 1e-12);
    }
}
