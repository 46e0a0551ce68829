//! Deterministic uniforms for node pairs.
//!
//! Every unordered node pair `{i, j}` gets one uniform `u_ij` in `[0, 1)`.
//! Pairs are grouped into blocks by the unordered pair of keying-grid cells
//! that contain them. Inside a block of `K` pairs the `K` uniforms are
//! generated as ascending order statistics and dealt to canonical positions
//! through a uniformly random permutation, both drawn from one RNG stream
//! keyed by `(seed, cell pair)`. The result is `K` i.i.d. uniforms per
//! block, but a consumer that only needs the pairs with `u < p` can stop
//! after the first order statistic above `p`.
//!
//! Canonical position inside a block:
//! * two distinct cells `lo < hi`: `rank_lo(i) * |hi| + rank_hi(j)`;
//! * one cell of `m` nodes: row-major over `rank(i) < rank(j)`.
//!
//! Ranks are positions inside the id-sorted bucket.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

use super::grid::CellGrid;
use super::{mix64, NodeId};

/// Unordered pair of cells, normalised so that `lo <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellPair {
    pub lo: usize,
    pub hi: usize,
}

impl CellPair {
    pub fn new(a: usize, b: usize) -> Self {
        Self {
            lo: a.min(b),
            hi: a.max(b),
        }
    }
}

/// Per-pair randomness for one graph realisation.
#[derive(Clone, Debug)]
pub struct PairRandomness<'g> {
    seed: u64,
    grid: &'g CellGrid,
    rank: Vec<u32>,
}

impl<'g> PairRandomness<'g> {
    pub fn new(seed: u64, grid: &'g CellGrid) -> Self {
        let node_count: usize = (0..grid.cell_count()).map(|c| grid.bucket(c).len()).sum();
        let mut rank = vec![0u32; node_count];
        for c in 0..grid.cell_count() {
            for (r, &id) in grid.bucket(c).iter().enumerate() {
                rank[id as usize] = r as u32;
            }
        }
        Self { seed, grid, rank }
    }

    pub fn grid(&self) -> &CellGrid {
        self.grid
    }

    /// Number of node pairs in the block.
    pub fn block_len(&self, pair: CellPair) -> usize {
        let a = self.grid.bucket(pair.lo).len();
        if pair.lo == pair.hi {
            a * a.saturating_sub(1) / 2
        } else {
            a * self.grid.bucket(pair.hi).len()
        }
    }

    /// Block and canonical position of the pair `{i, j}`.
    pub fn position_of(&self, i: NodeId, j: NodeId) -> (CellPair, usize) {
        assert_ne!(i, j, "pair randomness is defined for distinct nodes");
        let (ci, cj) = (self.grid.cell_of_node(i), self.grid.cell_of_node(j));
        let (ri, rj) = (self.rank[i as usize] as usize, self.rank[j as usize] as usize);
        let pair = CellPair::new(ci, cj);
        let position = if ci == cj {
            let (a, b) = (ri.min(rj), ri.max(rj));
            let m = self.grid.bucket(ci).len();
            a * (2 * m - a - 1) / 2 + (b - a - 1)
        } else if ci < cj {
            ri * self.grid.bucket(cj).len() + rj
        } else {
            rj * self.grid.bucket(ci).len() + ri
        };
        (pair, position)
    }

    /// Node pair stored at `position` of the block, smaller id first.
    pub fn pair_at(&self, pair: CellPair, position: usize) -> (NodeId, NodeId) {
        let lo = self.grid.bucket(pair.lo);
        let (i, j) = if pair.lo == pair.hi {
            let m = lo.len();
            let mut a = 0;
            let mut rest = position;
            while rest >= m - 1 - a {
                rest -= m - 1 - a;
                a += 1;
            }
            (lo[a], lo[a + 1 + rest])
        } else {
            let hi = self.grid.bucket(pair.hi);
            (lo[position / hi.len()], hi[position % hi.len()])
        };
        (i.min(j), i.max(j))
    }

    /// Stream of the block's `(position, u)` in ascending order of `u`.
    pub fn stream(&self, pair: CellPair) -> PairStream {
        let key = mix64(self.seed ^ mix64(((pair.lo as u64) << 32) ^ pair.hi as u64 ^ 0x5157_9a1d));
        PairStream {
            rng: Pcg64Mcg::seed_from_u64(key),
            len: self.block_len(pair),
            rank: 0,
            last: 0.0,
            pending: None,
        }
    }

    /// All uniforms of the block, indexed by canonical position.
    pub fn uniforms(&self, pair: CellPair) -> Vec<f64> {
        let mut stream = self.stream(pair);
        let mut perm: Vec<u32> = (0..stream.len as u32).collect();
        let mut out = vec![0.0; stream.len];
        while let Some(u) = stream.peek() {
            let j = stream.take_slot();
            perm.swap(stream.rank - 1, j);
            out[perm[stream.rank - 1] as usize] = u;
        }
        out
    }

    /// `u_ij` for a single pair. Materialises the whole block; meant for
    /// tests and spot checks.
    pub fn uniform(&self, i: NodeId, j: NodeId) -> f64 {
        let (pair, position) = self.position_of(i, j);
        self.uniforms(pair)[position]
    }
}

/// Ascending order statistics of one block, dealt to positions lazily.
#[derive(Clone, Debug)]
pub struct PairStream {
    rng: Pcg64Mcg,
    len: usize,
    rank: usize,
    last: f64,
    pending: Option<f64>,
}

impl PairStream {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Next order statistic without consuming it.
    fn peek(&mut self) -> Option<f64> {
        if self.rank == self.len {
            return None;
        }
        if self.pending.is_none() {
            // v in (0, 1]; the minimum of m uniforms on (last, 1) is
            // last + (1 - last) * (1 - v^(1/m))
            let v = 1.0 - self.rng.random::<f64>();
            let m = (self.len - self.rank) as f64;
            let step = -(v.ln() / m).exp_m1();
            self.pending = Some((self.last + (1.0 - self.last) * step).min(1.0 - f64::EPSILON / 2.0));
        }
        self.pending
    }

    /// Consumes the pending value and draws its Fisher-Yates slot.
    fn take_slot(&mut self) -> usize {
        let u = self.pending.take().expect("peek before take_slot");
        self.last = u;
        let j = self.rng.random_range(self.rank..self.len);
        self.rank += 1;
        j
    }

    /// Returns every `(position, u)` with `u < threshold`, ascending in `u`.
    pub fn below(mut self, threshold: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let mut displaced: HashMap<usize, usize> = HashMap::new();
        while let Some(u) = self.peek() {
            if u >= threshold {
                break;
            }
            let r = self.rank;
            let j = self.take_slot();
            let at_r = displaced.get(&r).copied().unwrap_or(r);
            let at_j = displaced.get(&j).copied().unwrap_or(j);
            displaced.insert(j, at_r);
            out.push((at_j, u));
        }
        out
    }
}
