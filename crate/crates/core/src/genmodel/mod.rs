//! Random graph model: Poisson nodes on the torus, local edges within
//! `r_n`, and power-law shortcuts calibrated to a target mean degree.

mod graph;
mod grid;
pub mod io;
mod pair_randomness;
mod params;
mod shortcuts;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Poisson};
use rand_pcg::Pcg64Mcg;

use crate::geometry::TorusPoint;

pub use graph::{Adjacency, Graph, Node};
pub use grid::CellGrid;
pub use pair_randomness::{CellPair, PairRandomness, PairStream};
pub use params::{compute_a_n, DegreeConvention, ModelParams};
pub use shortcuts::{sample_shortcuts_exact, sample_shortcuts_fast};

/// Dense node index.
pub type NodeId = u32;

const POINT_STREAM: u64 = 0x706f_696e_7473;
const SHORTCUT_STREAM: u64 = 0x7368_6f72_7463;

/// SplitMix64 finaliser; used to derive independent stream keys from a seed.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for an auxiliary stream derived from `seed` and a stream tag.
pub fn derived_rng(seed: u64, stream: u64) -> Pcg64Mcg {
    Pcg64Mcg::seed_from_u64(mix64(seed ^ mix64(stream)))
}

/// Draws `N ~ Poisson(n)` and `N` independent uniform positions, using the
/// point stream of `params.seed()`.
pub fn sample_points(params: &ModelParams) -> Vec<Node> {
    let mut rng = derived_rng(params.seed(), POINT_STREAM);
    sample_points_with(params, &mut rng)
}

pub fn sample_points_with<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Vec<Node> {
    let poisson = Poisson::new(params.n() as f64).expect("n >= 16 is a valid Poisson mean");
    let count = poisson.sample(rng) as usize;
    uniform_points(count, params.side(), rng)
}

/// `count` nodes placed uniformly on `[0, side)²`, ids in draw order.
pub fn uniform_points<R: Rng + ?Sized>(count: usize, side: f64, rng: &mut R) -> Vec<Node> {
    (0..count)
        .map(|id| {
            let x = rng.random::<f64>() * side;
            let y = rng.random::<f64>() * side;
            // x * side can round up to side
            let wrap = |v: f64| if v >= side { 0.0 } else { v };
            Node {
                id: id as NodeId,
                pos: TorusPoint::new(wrap(x), wrap(y)),
            }
        })
        .collect()
}

/// Connects every pair at torus distance strictly below `r_n`.
///
/// # Panics
///
/// Panics if the grid cells are narrower than `r_n`.
pub fn build_local_edges(nodes: &[Node], grid: &CellGrid, r_n: f64) -> Adjacency {
    assert!(
        grid.cell_side() >= r_n,
        "cell side {} is smaller than the local radius {r_n}",
        grid.cell_side()
    );
    let torus = grid.torus();
    let mut offsets = Vec::with_capacity(nodes.len() + 1);
    let mut targets = Vec::new();
    offsets.push(0);
    let mut neighbourhoods: Vec<Option<Vec<usize>>> = vec![None; grid.cell_count()];
    for node in nodes {
        let cell = grid.cell_of_node(node.id);
        let cells = neighbourhoods[cell].get_or_insert_with(|| grid.neighbourhood(cell, 1));
        let row_start = targets.len();
        for &c in cells.iter() {
            for &v in grid.bucket(c) {
                if v != node.id && torus.distance(node.pos, nodes[v as usize].pos) < r_n {
                    targets.push(v);
                }
            }
        }
        targets[row_start..].sort_unstable();
        offsets.push(targets.len());
    }
    Adjacency::from_sorted_rows(offsets, targets)
}

/// Generates one realisation: points, keying grid with cell side `r_n`,
/// local edges and shortcuts. Deterministic in `params`.
pub fn generate(params: &ModelParams) -> Graph {
    let nodes = sample_points(params);
    assemble(params.clone(), nodes)
}

/// Builds the edge sets on a fixed node set.
pub fn assemble(params: ModelParams, nodes: Vec<Node>) -> Graph {
    let positions: Vec<TorusPoint> = nodes.iter().map(|n| n.pos).collect();
    let grid = CellGrid::build(&positions, params.side(), params.local_radius());
    let local = build_local_edges(&nodes, &grid, params.local_radius());
    let randomness = PairRandomness::new(mix64(params.seed() ^ SHORTCUT_STREAM), &grid);
    let shortcuts = sample_shortcuts_fast(&nodes, &params, &randomness);
    let graph = Graph::from_validated(params, nodes, local, shortcuts, grid);
    debug_assert!(graph.check_invariants().is_ok());
    graph
}

/// Shortcuts of `nodes` computed with the `O(N²)` reference sampler, using
/// the same randomness as [`generate`].
pub fn reference_shortcuts(params: &ModelParams, nodes: &[Node]) -> Adjacency {
    let positions: Vec<TorusPoint> = nodes.iter().map(|n| n.pos).collect();
    let grid = CellGrid::build(&positions, params.side(), params.local_radius());
    let randomness = PairRandomness::new(mix64(params.seed() ^ SHORTCUT_STREAM), &grid);
    sample_shortcuts_exact(nodes, params, &randomness)
}
