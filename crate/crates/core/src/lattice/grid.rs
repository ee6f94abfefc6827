use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of nodes of a single grid (about 512 MiB per
/// field at f64).
pub const MAX_NODES: usize = 1 << 26;

/// Node or cell coordinates; axes beyond the grid dimension are zero.
pub type Coords = [usize; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Periodic,
}

/// Finite box of `cells^dim` unit cells, each resolved by `mesh^dim`
/// nodes at spacing `1 / mesh`.
///
/// Cell `z` is the unit cube `z + [-1/2, 1/2)^d` centred on the lattice
/// site `z`. Nodes sit at cell-relative midpoints, so node `n` along an
/// axis has coordinate `(n + 1/2) / mesh - 1/2`; summing `h^d` over the
/// nodes of a cell is the midpoint rule on that cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    cells: usize,
    mesh: usize,
    bc: BoundaryCondition,
}

impl Grid {
    pub fn new(dim: usize, cells: usize, mesh: usize, bc: BoundaryCondition) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3 (got {dim})")));
        }
        if cells == 0 || mesh == 0 {
            return Err(Error::Config("cells and mesh must be positive".into()));
        }
        let side = cells
            .checked_mul(mesh)
            .ok_or_else(|| Error::Config("node count overflows".into()))?;
        let nodes = (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(side));
        match nodes {
            Some(n) if n <= MAX_NODES => Ok(Self { dim, cells, mesh, bc }),
            _ => Err(Error::Config(format!(
                "grid with {side}^{dim} nodes exceeds the memory budget of {MAX_NODES} nodes"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Unit cells per side.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Nodes per unit length.
    pub fn mesh(&self) -> usize {
        self.mesh
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.mesh as f64
    }

    /// `h^d`, the quadrature weight of one node.
    pub fn node_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn nodes_per_side(&self) -> usize {
        self.cells * self.mesh
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_side().pow(self.dim as u32)
    }

    pub fn cell_count(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    /// Linear offset between nodes that differ by one along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.nodes_per_side().pow(axis as u32)
    }

    pub fn node_index(&self, coords: &Coords) -> usize {
        let n = self.nodes_per_side();
        (0..self.dim).rev().fold(0, |acc, a| acc * n + coords[a])
    }

    pub fn node_coords(&self, mut index: usize) -> Coords {
        let n = self.nodes_per_side();
        let mut c = [0; 3];
        for slot in c.iter_mut().take(self.dim) {
            *slot = index % n;
            index /= n;
        }
        c
    }

    /// Physical position of a node; lattice site `z` is at the integer point `z`.
    pub fn node_position(&self, index: usize) -> [f64; 3] {
        let c = self.node_coords(index);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = (c[a] as f64 + 0.5) * h - 0.5;
        }
        x
    }

    pub fn cell_index(&self, cell: &Coords) -> usize {
        (0..self.dim).rev().fold(0, |acc, a| acc * self.cells + cell[a])
    }

    pub fn cell_coords(&self, mut index: usize) -> Coords {
        let mut c = [0; 3];
        for slot in c.iter_mut().take(self.dim) {
            *slot = index % self.cells;
            index /= self.cells;
        }
        c
    }

    pub fn cell_of_node(&self, index: usize) -> Coords {
        let mut c = self.node_coords(index);
        for slot in c.iter_mut().take(self.dim) {
            *slot /= self.mesh;
        }
        c
    }

    pub fn contains_cell(&self, cell: &Coords) -> bool {
        (0..self.dim).all(|a| cell[a] < self.cells) && (self.dim..3).all(|a| cell[a] == 0)
    }

    /// Node indices of one unit cell.
    pub fn nodes_in_cell(&self, cell: &Coords) -> Vec<usize> {
        let m = self.mesh;
        let count = m.pow(self.dim as u32);
        (0..count)
            .map(|k| {
                let mut c = [0; 3];
                let mut rem = k;
                for a in 0..self.dim {
                    c[a] = cell[a] * m + rem % m;
                    rem /= m;
                }
                self.node_index(&c)
            })
            .collect()
    }

    pub fn center_cell(&self) -> Coords {
        let mut c = [0; 3];
        for slot in c.iter_mut().take(self.dim) {
            *slot = self.cells / 2;
        }
        c
    }

    /// The node of the centre cell closest to (and, for even `mesh`, just
    /// above) the lattice site at the cell centre. Used as the default source.
    pub fn center_node(&self) -> usize {
        let cell = self.center_cell();
        let mut c = [0; 3];
        for a in 0..self.dim {
            c[a] = cell[a] * self.mesh + self.mesh / 2;
        }
        self.node_index(&c)
    }

    /// Neighbour of `index` one step along `axis` in direction `forward`.
    /// `None` means the step leaves a Dirichlet box (value taken as 0).
    #[inline]
    pub fn neighbor(&self, index: usize, axis: usize, forward: bool) -> Option<usize> {
        let n = self.nodes_per_side();
        let stride = self.stride(axis);
        let c = (index / stride) % n;
        match (forward, self.bc) {
            (true, _) if c + 1 < n => Some(index + stride),
            (false, _) if c > 0 => Some(index - stride),
            (_, BoundaryCondition::Dirichlet) => None,
            (true, BoundaryCondition::Periodic) => Some(index + stride - n * stride),
            (false, BoundaryCondition::Periodic) => Some(index + (n - 1) * stride),
        }
    }

    /// Cell indices whose sup-norm distance to the box boundary is at least
    /// `margin` cells (all cells for periodic grids).
    pub fn interior_cells(&self, margin: usize) -> Vec<usize> {
        (0..self.cell_count())
            .filter(|&i| {
                let c = self.cell_coords(i);
                self.bc == BoundaryCondition::Periodic
                    || (0..self.dim).all(|a| c[a] >= margin && c[a] + margin < self.cells)
            })
            .collect()
    }

    /// Sup-norm distance in cell units between two cells, with wrap-around
    /// on periodic grids.
    pub fn cell_distance(&self, a: &Coords, b: &Coords) -> usize {
        (0..self.dim)
            .map(|ax| {
                let d = a[ax].abs_diff(b[ax]);
                match self.bc {
                    BoundaryCondition::Dirichlet => d,
                    BoundaryCondition::Periodic => d.min(self.cells - d),
                }
            })
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_2d() {
        let g = Grid::new(2, 3, 4, BoundaryCondition::Dirichlet).unwrap();
        for i in 0..g.node_count() {
            assert_eq!(g.node_index(&g.node_coords(i)), i);
        }
        assert_eq!(g.node_count(), 144);
        assert_eq!(g.nodes_in_cell(&[1, 2, 0]).len(), 16);
    }

    #[test]
    fn node_positions_are_cell_midpoints() {
        let g = Grid::new(1, 4, 2, BoundaryCondition::Dirichlet).unwrap();
        let xs: Vec<f64> = (0..g.node_count()).map(|i| g.node_position(i)[0]).collect();
        assert_eq!(xs, vec![-0.25, 0.25, 0.75, 1.25, 1.75, 2.25, 2.75, 3.25]);
        assert_eq!(g.cell_of_node(3), [1, 0, 0]);
    }

    #[test]
    fn neighbors_respect_boundary() {
        let d = Grid::new(1, 4, 1, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(d.neighbor(0, 0, false), None);
        assert_eq!(d.neighbor(3, 0, true), None);
        let p = Grid::new(2, 4, 1, BoundaryCondition::Periodic).unwrap();
        assert_eq!(p.neighbor(0, 0, false), Some(3));
        assert_eq!(p.neighbor(0, 1, false), Some(12));
        assert_eq!(p.neighbor(15, 1, true), Some(3));
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(Grid::new(4, 4, 1, BoundaryCondition::Dirichlet).is_err());
        assert!(Grid::new(3, 1 << 10, 1 << 10, BoundaryCondition::Dirichlet).is_err());
    }

    #[test]
    fn interior_window_excludes_margin() {
        let g = Grid::new(1, 20, 1, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(g.interior_cells(5), (5..15).collect::<Vec<_>>());
        let p = Grid::new(1, 20, 1, BoundaryCondition::Periodic).unwrap();
        assert_eq!(p.interior_cells(5).len(), 20);
        assert_eq!(p.cell_distance(&[0, 0, 0], &[19, 0, 0]), 1);
    }
}
