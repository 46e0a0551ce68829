//! Uniform bucket grid over the torus.

use crate::geometry::{Torus, TorusPoint};

use super::NodeId;

/// Partition of the torus into `cells_per_axis²` square cells.
///
/// Buckets are stored in CSR form; each bucket lists node ids in ascending
/// order, so the rank of a node inside its bucket is canonical.
#[derive(Clone, Debug)]
pub struct CellGrid {
    side: f64,
    cell_side: f64,
    cells_per_axis: usize,
    starts: Vec<u32>,
    members: Vec<NodeId>,
    cell_of: Vec<u32>,
}

impl CellGrid {
    /// Buckets `positions` (indexed by node id) into cells of side at least
    /// `cell_side_target`. A target larger than `side` gives a single cell.
    ///
    /// # Panics
    ///
    /// Panics if `cell_side_target` is not positive.
    pub fn build(positions: &[TorusPoint], side: f64, cell_side_target: f64) -> Self {
        assert!(cell_side_target > 0.0, "cell side target must be positive");
        let cells_per_axis = ((side / cell_side_target).floor() as usize).max(1);
        let cell_side = side / cells_per_axis as f64;
        let cell_count = cells_per_axis * cells_per_axis;

        let mut grid = Self {
            side,
            cell_side,
            cells_per_axis,
            starts: vec![0; cell_count + 1],
            members: Vec::new(),
            cell_of: Vec::with_capacity(positions.len()),
        };
        for &p in positions {
            let (cx, cy) = grid.coords_of(p);
            let cell = grid.index(cx, cy);
            grid.cell_of.push(cell as u32);
            grid.starts[cell + 1] += 1;
        }
        for c in 0..cell_count {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        grid.members = vec![0; positions.len()];
        // ids visited in ascending order keep every bucket sorted
        for (id, &cell) in grid.cell_of.iter().enumerate() {
            let slot = &mut fill[cell as usize];
            grid.members[*slot as usize] = id as NodeId;
            *slot += 1;
        }
        grid
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_axis * self.cells_per_axis
    }

    pub fn torus(&self) -> Torus {
        Torus::new(self.side)
    }

    /// Cell coordinates `(column, row)` containing `p`.
    pub fn coords_of(&self, p: TorusPoint) -> (usize, usize) {
        let last = self.cells_per_axis - 1;
        let cx = ((p.x / self.cell_side) as usize).min(last);
        let cy = ((p.y / self.cell_side) as usize).min(last);
        (cx, cy)
    }

    #[inline]
    pub fn index(&self, cx: usize, cy: usize) -> usize {
        cy * self.cells_per_axis + cx
    }

    #[inline]
    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.cells_per_axis, cell / self.cells_per_axis)
    }

    /// Cell holding node `id`.
    #[inline]
    pub fn cell_of_node(&self, id: NodeId) -> usize {
        self.cell_of[id as usize] as usize
    }

    #[inline]
    pub fn bucket(&self, cell: usize) -> &[NodeId] {
        &self.members[self.starts[cell] as usize..self.starts[cell + 1] as usize]
    }

    /// Distinct cells within `reach` steps of `cell` along each axis, wrapping.
    pub fn neighbourhood(&self, cell: usize, reach: usize) -> Vec<usize> {
        let c = self.cells_per_axis;
        let (cx, cy) = self.coords(cell);
        let span = (2 * reach + 1).min(c);
        let mut out = Vec::with_capacity(span * span);
        let offsets = |centre: usize| -> Vec<usize> {
            if 2 * reach + 1 >= c {
                (0..c).collect()
            } else {
                (0..span).map(|k| (centre + c + k - reach) % c).collect()
            }
        };
        let xs = offsets(cx);
        for y in offsets(cy) {
            for &x in &xs {
                out.push(self.index(x, y));
            }
        }
        out
    }

    /// Lower bound on the torus distance between any point of cell `a` and
    /// any point of cell `b`.
    pub fn min_cell_distance(&self, a: usize, b: usize) -> f64 {
        let (ax, ay) = self.coords(a);
        let (bx, by) = self.coords(b);
        let gap = |p: usize, q: usize| {
            let d = p.abs_diff(q);
            let d = d.min(self.cells_per_axis - d);
            d.saturating_sub(1) as f64 * self.cell_side
        };
        let gx = gap(ax, bx);
        let gy = gap(ay, by);
        (gx * gx + gy * gy).sqrt()
    }
}
