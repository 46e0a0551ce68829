use crate::error::GraphError;
use crate::geometry::{Torus, TorusPoint};

use super::grid::CellGrid;
use super::params::ModelParams;
use super::NodeId;

/// A node of the point process. Ids are dense, `0..N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub pos: TorusPoint,
}

/// Symmetric adjacency in compressed sparse row form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Adjacency {
    /// No edges on `node_count` nodes.
    pub fn empty(node_count: usize) -> Self {
        Self {
            offsets: vec![0; node_count + 1],
            targets: Vec::new(),
        }
    }

    /// Builds the symmetric closure of an undirected edge list. Each edge
    /// must appear once (in either orientation); duplicates and self-loops
    /// are rejected.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId)], kind: &'static str) -> Result<Self, GraphError> {
        let mut degree = vec![0usize; node_count + 1];
        for &(u, v) in edges {
            for w in [u, v] {
                if w as usize >= node_count {
                    return Err(GraphError::NodeOutOfRange(w));
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            degree[u as usize + 1] += 1;
            degree[v as usize + 1] += 1;
        }
        for k in 0..node_count {
            degree[k + 1] += degree[k];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut targets = vec![0; offsets[node_count]];
        for &(u, v) in edges {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for u in 0..node_count {
            let row = &mut targets[offsets[u]..offsets[u + 1]];
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = (u as NodeId, w[0]);
                return Err(GraphError::DuplicateEdge {
                    kind,
                    u: a.min(b),
                    v: a.max(b),
                });
            }
        }
        Ok(Self { offsets, targets })
    }

    /// Builds directly from per-node sorted neighbour rows that are already
    /// known to be symmetric.
    pub(crate) fn from_sorted_rows(offsets: Vec<usize>, targets: Vec<NodeId>) -> Self {
        debug_assert_eq!(*offsets.last().unwrap_or(&0), targets.len());
        Self { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    #[inline]
    pub fn neighbours(&self, u: NodeId) -> &[NodeId] {
        let u = u as usize;
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn contains(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbours(u).binary_search(&v).is_ok()
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.neighbours(u).len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Undirected edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count() as NodeId).flat_map(move |u| {
            self.neighbours(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.node_count() as NodeId).all(|u| self.neighbours(u).iter().all(|&v| self.contains(v, u)))
    }
}

/// An immutable realisation of the small-world model.
#[derive(Clone, Debug)]
pub struct Graph {
    params: ModelParams,
    nodes: Vec<Node>,
    local: Adjacency,
    shortcuts: Adjacency,
    grid: CellGrid,
}

impl Graph {
    pub(crate) fn from_validated(
        params: ModelParams,
        nodes: Vec<Node>,
        local: Adjacency,
        shortcuts: Adjacency,
        grid: CellGrid,
    ) -> Self {
        Self {
            params,
            nodes,
            local,
            shortcuts,
            grid,
        }
    }

    /// Assembles a graph from explicit positions and edge lists, checking
    /// every structural invariant. Useful for hand-built instances.
    pub fn from_parts(
        params: ModelParams,
        positions: Vec<TorusPoint>,
        local_edges: &[(NodeId, NodeId)],
        shortcut_edges: &[(NodeId, NodeId)],
    ) -> Result<Self, GraphError> {
        let count = positions.len();
        let local = Adjacency::from_edges(count, local_edges, "local")?;
        let shortcuts = Adjacency::from_edges(count, shortcut_edges, "shortcut")?;
        let nodes: Vec<Node> = positions
            .into_iter()
            .enumerate()
            .map(|(id, pos)| Node { id: id as NodeId, pos })
            .collect();
        let grid = CellGrid::build(
            &nodes.iter().map(|n| n.pos).collect::<Vec<_>>(),
            params.side(),
            params.local_radius(),
        );
        let graph = Self::from_validated(params, nodes, local, shortcuts, grid);
        graph.check_invariants()?;
        Ok(graph)
    }

    /// Verifies positions, symmetry and the edge-length constraints.
    pub fn check_invariants(&self) -> Result<(), GraphError> {
        let side = self.params.side();
        for n in &self.nodes {
            if !(0.0..side).contains(&n.pos.x) || !(0.0..side).contains(&n.pos.y) {
                return Err(GraphError::PositionOutOfRange {
                    id: n.id,
                    x: n.pos.x,
                    y: n.pos.y,
                });
            }
        }
        let r_n = self.params.local_radius();
        for (kind, adj) in [("local", &self.local), ("shortcut", &self.shortcuts)] {
            for u in 0..self.len() as NodeId {
                let row = adj.neighbours(u);
                for (k, &v) in row.iter().enumerate() {
                    if v == u {
                        return Err(GraphError::SelfLoop(u));
                    }
                    if k > 0 && row[k - 1] >= v {
                        return Err(GraphError::DuplicateEdge {
                            kind,
                            u: u.min(v),
                            v: u.max(v),
                        });
                    }
                    if !adj.contains(v, u) {
                        return Err(GraphError::Asymmetric { kind, u, v });
                    }
                    let length = self.distance(u, v);
                    let ok = if kind == "local" { length < r_n } else { length > r_n };
                    if !ok {
                        return Err(GraphError::EdgeLength {
                            kind,
                            u: u.min(v),
                            v: u.max(v),
                            length,
                            local_radius: r_n,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn torus(&self) -> Torus {
        self.params.torus()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    #[inline]
    pub fn position(&self, id: NodeId) -> TorusPoint {
        self.nodes[id as usize].pos
    }

    #[inline]
    pub fn distance(&self, u: NodeId, v: NodeId) -> f64 {
        self.torus().distance(self.position(u), self.position(v))
    }

    #[inline]
    pub fn local_contacts(&self, id: NodeId) -> &[NodeId] {
        self.local.neighbours(id)
    }

    #[inline]
    pub fn shortcut_neighbours(&self, id: NodeId) -> &[NodeId] {
        self.shortcuts.neighbours(id)
    }

    pub fn local_adjacency(&self) -> &Adjacency {
        &self.local
    }

    pub fn shortcut_adjacency(&self) -> &Adjacency {
        &self.shortcuts
    }

    /// True if `u` and `v` share a local edge or a shortcut.
    pub fn are_adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.local.contains(u, v) || self.shortcuts.contains(u, v)
    }

    /// Mean number of shortcuts incident to a node, `2 M / N`.
    pub fn mean_shortcut_degree(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            2.0 * self.shortcuts.edge_count() as f64 / self.len() as f64
        }
    }

    /// Calls `f` for every node within distance `radius` (inclusive) of `centre`.
    pub fn for_each_within(&self, centre: TorusPoint, radius: f64, mut f: impl FnMut(NodeId, f64)) {
        let torus = self.torus();
        let reach = (radius / self.grid.cell_side()).ceil() as usize;
        let (cx, cy) = self.grid.coords_of(centre);
        for cell in self.grid.neighbourhood(self.grid.index(cx, cy), reach) {
            for &v in self.grid.bucket(cell) {
                let d = torus.distance(centre, self.position(v));
                if d <= radius {
                    f(v, d);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(400, 4.0 / 400f64.ln(), 2.0, 1.0, 0).unwrap()
    }

    fn line() -> Vec<TorusPoint> {
        [(0.0, 0.0), (3.0, 0.0), (4.5, 0.0), (6.0, 0.0)]
            .iter()
            .map(|&(x, y)| TorusPoint::new(x, y))
            .collect()
    }

    #[test]
    fn hand_built_graph_is_valid() {
        let g = Graph::from_parts(params(), line(), &[(1, 2), (2, 3)], &[(0, 1)]).unwrap();
        assert_eq!(g.local_contacts(2), &[1, 3]);
        assert_eq!(g.shortcut_neighbours(1), &[0]);
        assert!(g.are_adjacent(0, 1));
        assert!(!g.are_adjacent(0, 3));
        assert!(g.local_adjacency().is_symmetric());
        assert_eq!(g.shortcut_adjacency().edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn rejects_bad_edges() {
        let p = params();
        assert!(matches!(
            Graph::from_parts(p.clone(), line(), &[(0, 1)], &[]),
            Err(GraphError::EdgeLength { kind: "local", .. })
        ));
        assert!(matches!(
            Graph::from_parts(p.clone(), line(), &[], &[(1, 2)]),
            Err(GraphError::EdgeLength { kind: "shortcut", .. })
        ));
        assert!(matches!(
            Graph::from_parts(p.clone(), line(), &[(1, 1)], &[]),
            Err(GraphError::SelfLoop(1))
        ));
        assert!(matches!(
            Graph::from_parts(p.clone(), line(), &[(1, 2), (2, 1)], &[]),
            Err(GraphError::DuplicateEdge { .. })
        ));
        assert!(matches!(
            Graph::from_parts(p, line(), &[(1, 9)], &[]),
            Err(GraphError::NodeOutOfRange(9))
        ));
    }

    #[test]
    fn within_query_matches_scan() {
        let p = params();
        let positions: Vec<TorusPoint> = (0..300)
            .map(|k| TorusPoint::new((k as f64 * 1.37) % 20.0, (k as f64 * 2.91) % 20.0))
            .collect();
        let g = Graph::from_parts(p, positions.clone(), &[], &[]).unwrap();
        let centre = TorusPoint::new(19.5, 0.5);
        for radius in [0.5, 2.0, 5.0, 9.9, 14.2] {
            let mut got = Vec::new();
            g.for_each_within(centre, radius, |v, _| got.push(v));
            got.sort();
            let want: Vec<NodeId> = (0..positions.len() as NodeId)
                .filter(|&v| g.torus().distance(centre, positions[v as usize]) <= radius)
                .collect();
            assert_eq!(got, want, "radius {radius}");
        }
    }

    #[test]
    fn empty_graph() {
        let g = Graph::from_parts(params(), Vec::new(), &[], &[]).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.mean_shortcut_degree(), 0.0);
    }
}
