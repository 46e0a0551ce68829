//! Shortcut sampling.
//!
//! Both samplers accept the pair `{i, j}` iff `u_ij < p(d_ij)` with `u_ij`
//! taken from [`PairRandomness`]; they differ only in which pairs they look
//! at, so their outputs are identical edge sets.

use super::graph::{Adjacency, Node};
use super::pair_randomness::{CellPair, PairRandomness};
use super::params::ModelParams;
use super::NodeId;

/// Evaluates every unordered node pair. `O(N²)`.
pub fn sample_shortcuts_exact(nodes: &[Node], params: &ModelParams, randomness: &PairRandomness<'_>) -> Adjacency {
    let torus = params.torus();
    let grid = randomness.grid();
    let mut edges = Vec::new();
    for lo in 0..grid.cell_count() {
        for hi in lo..grid.cell_count() {
            let pair = CellPair::new(lo, hi);
            for (position, u) in randomness.uniforms(pair).into_iter().enumerate() {
                let (i, j) = randomness.pair_at(pair, position);
                let d = torus.distance(nodes[i as usize].pos, nodes[j as usize].pos);
                if u < params.shortcut_probability(d) {
                    edges.push((i, j));
                }
            }
        }
    }
    finish(nodes.len(), edges)
}

/// Skips cell pairs that lie beyond the shortcut range and, inside the
/// rest, only inspects pairs whose uniform falls below the cell pair's
/// probability bound.
pub fn sample_shortcuts_fast(nodes: &[Node], params: &ModelParams, randomness: &PairRandomness<'_>) -> Adjacency {
    let torus = params.torus();
    let grid = randomness.grid();
    // absorbs rounding in bucket assignment and in powf
    let slack = 1e-9 * grid.cell_side();
    let mut edges = Vec::new();
    for lo in 0..grid.cell_count() {
        if grid.bucket(lo).is_empty() {
            continue;
        }
        for hi in lo..grid.cell_count() {
            if grid.bucket(hi).is_empty() || (lo == hi && grid.bucket(lo).len() < 2) {
                continue;
            }
            let d_min = (grid.min_cell_distance(lo, hi) - slack).max(0.0);
            let p_max = params.shortcut_probability_bound(d_min);
            if p_max == 0.0 {
                continue;
            }
            let p_max = (p_max * (1.0 + 1e-12)).min(1.0);
            let pair = CellPair::new(lo, hi);
            for (position, u) in randomness.stream(pair).below(p_max) {
                let (i, j) = randomness.pair_at(pair, position);
                let d = torus.distance(nodes[i as usize].pos, nodes[j as usize].pos);
                if u < params.shortcut_probability(d) {
                    edges.push((i, j));
                }
            }
        }
    }
    finish(nodes.len(), edges)
}

fn finish(node_count: usize, mut edges: Vec<(NodeId, NodeId)>) -> Adjacency {
    edges.sort_unstable();
    Adjacency::from_edges(node_count, &edges, "shortcut").expect("pair enumeration yields each pair once")
}
