//! Estimators for the random quantities the routing analysis depends on.

use petgraph::unionfind::UnionFind;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::genmodel::{CellGrid, Graph, NodeId};
use crate::geometry::TorusPoint;
use crate::routing::check_property_pn;

/// Number of nodes in the annulus `A(t, r)`.
pub fn annulus_count(graph: &Graph, t: TorusPoint, r: f64) -> usize {
    let torus = graph.torus();
    let mut count = 0;
    graph.for_each_within(t, r / 2.0, |v, _| {
        if torus.in_annulus(t, r, graph.position(v)) {
            count += 1;
        }
    });
    count
}

/// Nodes `x` with `r/2 < d(x, t) <= r`, ascending by id.
pub fn nodes_in_bracket(graph: &Graph, t: TorusPoint, r: f64) -> Vec<NodeId> {
    let mut out = Vec::new();
    graph.for_each_within(t, r, |v, d| {
        if d > r / 2.0 {
            out.push(v);
        }
    });
    out.sort_unstable();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitEstimate {
    pub samples: usize,
    pub hits: usize,
    pub probability: f64,
    pub annulus_count: usize,
    /// `1 - (1 - 4 a_n / (9 r²))^{N_A}` at the realised `N_A`.
    pub lower_bound: f64,
}

/// Share of the sampled nodes in the bracket `(r/2, r]` around `t` that own
/// a shortcut into `A(t, r)`. Sample nodes outside the bracket are ignored.
pub fn estimate_hit_probability(
    graph: &Graph,
    t: TorusPoint,
    r: f64,
    sample_nodes: &[NodeId],
) -> Result<HitEstimate, AnalysisError> {
    let torus = graph.torus();
    let eligible: Vec<NodeId> = sample_nodes
        .iter()
        .copied()
        .filter(|&x| (x as usize) < graph.len())
        .filter(|&x| {
            let d = torus.distance(graph.position(x), t);
            r / 2.0 < d && d <= r
        })
        .collect();
    if eligible.is_empty() {
        return Err(AnalysisError::NoEligibleSamples);
    }
    let hits = eligible
        .iter()
        .filter(|&&x| {
            graph
                .shortcut_neighbours(x)
                .iter()
                .any(|&y| torus.in_annulus(t, r, graph.position(y)))
        })
        .count();
    let n_a = annulus_count(graph, t, r);
    let per_node = (4.0 * graph.params().a_n() / (9.0 * r * r)).min(1.0);
    Ok(HitEstimate {
        samples: eligible.len(),
        hits,
        probability: hits as f64 / eligible.len() as f64,
        annulus_count: n_a,
        lower_bound: 1.0 - (1.0 - per_node).powf(n_a as f64),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscHitEstimate {
    pub samples: usize,
    pub hits: usize,
    pub probability: f64,
    /// Nodes inside the disc `C(t, n^δ)`.
    pub disc_count: usize,
    /// `16 d̄ n^{(4δ + α - 2)/2}`.
    pub bound: f64,
}

/// Share of sampled nodes outside `C(t, n^δ)` with a shortcut into it.
pub fn estimate_cdelta_shortcut_probability(
    graph: &Graph,
    t: TorusPoint,
    delta: f64,
    sample_nodes: &[NodeId],
) -> Result<DiscHitEstimate, AnalysisError> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(AnalysisError::InvalidConfig(format!(
            "delta must lie in (0, 1/2), got {delta}"
        )));
    }
    let p = graph.params();
    let n = p.n() as f64;
    let radius = n.powf(delta);
    let torus = graph.torus();
    let eligible: Vec<NodeId> = sample_nodes
        .iter()
        .copied()
        .filter(|&x| (x as usize) < graph.len() && !torus.in_disc(t, radius, graph.position(x)))
        .collect();
    if eligible.is_empty() {
        return Err(AnalysisError::NoEligibleSamples);
    }
    let hits = eligible
        .iter()
        .filter(|&&x| {
            graph
                .shortcut_neighbours(x)
                .iter()
                .any(|&y| torus.in_disc(t, radius, graph.position(y)))
        })
        .count();
    let mut disc_count = 0;
    graph.for_each_within(t, radius, |_, _| disc_count += 1);
    Ok(DiscHitEstimate {
        samples: eligible.len(),
        hits,
        probability: hits as f64 / eligible.len() as f64,
        disc_count,
        bound: 16.0 * p.dbar() * n.powf((4.0 * delta + p.alpha() - 2.0) / 2.0),
    })
}

/// Empirical survival function of shortcut lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthSurvival {
    sorted: Vec<f64>,
}

impl LengthSurvival {
    pub fn from_lengths(mut lengths: Vec<f64>) -> Result<Self, AnalysisError> {
        if lengths.is_empty() {
            return Err(AnalysisError::NoShortcuts);
        }
        lengths.sort_by(f64::total_cmp);
        Ok(Self { sorted: lengths })
    }

    pub fn from_graph(graph: &Graph) -> Result<Self, AnalysisError> {
        Self::from_lengths(shortcut_lengths(graph))
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `P(length > r)`.
    pub fn survival(&self, r: f64) -> f64 {
        let at_most = self.sorted.partition_point(|&l| l <= r);
        (self.sorted.len() - at_most) as f64 / self.sorted.len() as f64
    }

    /// `(r, P(length > r))` on `points` log-spaced radii from `lo` to `hi`.
    pub fn log_grid(&self, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
        assert!(
            lo > 0.0 && hi > lo && points >= 2,
            "need 0 < lo < hi and at least 2 points"
        );
        (0..points)
            .map(|k| {
                let r = lo * (hi / lo).powf(k as f64 / (points - 1) as f64);
                (r, self.survival(r))
            })
            .collect()
    }

    /// Least-squares slope of `ln P(length > r)` against `ln r` over the
    /// grid; points with zero survival are dropped.
    pub fn tail_slope(&self, lo: f64, hi: f64, points: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .log_grid(lo, hi, points)
            .into_iter()
            .filter(|p| p.1 > 0.0)
            .map(|(r, s)| (r.ln(), s.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        Some(sxy / sxx)
    }
}

pub fn shortcut_lengths(graph: &Graph) -> Vec<f64> {
    graph
        .shortcut_adjacency()
        .edges()
        .map(|(u, v)| graph.distance(u, v))
        .collect()
}

/// Survival of shortcut lengths on `points` log-spaced radii across
/// `(r_n, R]`.
pub fn shortcut_length_survival(graph: &Graph, points: usize) -> Result<Vec<(f64, f64)>, AnalysisError> {
    let s = LengthSurvival::from_graph(graph)?;
    let p = graph.params();
    Ok(s.log_grid(p.local_radius(), p.shortcut_range(), points))
}

/// Radii `2^k r_n`, `k >= 1`, up to `R / 2`, so that every `[r, 2r)` lies
/// inside the shortcut range.
pub fn dyadic_radii(local_radius: f64, shortcut_range: f64) -> Vec<f64> {
    (1..)
        .map(|k| local_radius * 2f64.powi(k))
        .take_while(|&r| r <= shortcut_range / 2.0)
        .collect()
}

/// Mean number of incident shortcuts per node whose length lies in
/// `[r, 2r)`, for each `r`.
pub fn annulus_shortcut_profile(graph: &Graph, radii: &[f64]) -> Vec<f64> {
    let mut counts = vec![0usize; radii.len()];
    for (u, v) in graph.shortcut_adjacency().edges() {
        let d = graph.distance(u, v);
        for (k, &r) in radii.iter().enumerate() {
            if r <= d && d < 2.0 * r {
                counts[k] += 2;
            }
        }
    }
    let n = graph.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

/// Tessellates the torus into squares of side about `beta * r_n` (the same
/// floor rule as the keying grid) and returns `(total_cells, empty_cells)`.
///
/// # Panics
///
/// Panics unless `0 < beta <= 1`.
pub fn lemma1_cell_occupancy(graph: &Graph, beta: f64) -> (usize, usize) {
    assert!(beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1], got {beta}");
    let p = graph.params();
    let positions: Vec<TorusPoint> = graph.nodes().iter().map(|n| n.pos).collect();
    cell_occupancy(&positions, p.side(), beta * p.local_radius())
}

/// `(total_cells, empty_cells)` for a tessellation with cells of side about
/// `cell_side`.
pub fn cell_occupancy(positions: &[TorusPoint], side: f64, cell_side: f64) -> (usize, usize) {
    let grid = CellGrid::build(positions, side, cell_side);
    let empty = (0..grid.cell_count()).filter(|&c| grid.bucket(c).is_empty()).count();
    (grid.cell_count(), empty)
}

/// Expected number of empty cells, `n / (β² c ln n) · n^{-β² c}`.
pub fn expected_empty_cells(n: f64, c: f64, beta: f64) -> f64 {
    let k = beta * beta * c;
    n / (k * n.ln()) * n.powf(-k)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connectivity {
    pub is_connected: bool,
    pub components: usize,
    /// Largest component share of the nodes; 0 for an empty graph.
    pub giant_fraction: f64,
}

/// Connected components of the local-edge graph.
pub fn local_connectivity(graph: &Graph) -> Connectivity {
    let n = graph.len();
    if n == 0 {
        return Connectivity {
            is_connected: true,
            components: 0,
            giant_fraction: 0.0,
        };
    }
    let mut uf = UnionFind::<u32>::new(n);
    for (u, v) in graph.local_adjacency().edges() {
        uf.union(u, v);
    }
    let mut sizes = vec![0usize; n];
    for label in uf.into_labeling() {
        sizes[label as usize] += 1;
    }
    let components = sizes.iter().filter(|&&s| s > 0).count();
    let giant = sizes.iter().copied().max().unwrap_or(0);
    Connectivity {
        is_connected: components == 1,
        components,
        giant_fraction: giant as f64 / n as f64,
    }
}

/// Draws `samples` pairs of a uniform node `x` and a uniform point `t` at
/// distance at least `r_n` from it and returns `(checked, held)` for the
/// local progress property.
pub fn sample_property_pn<R: Rng + ?Sized>(graph: &Graph, samples: usize, rng: &mut R) -> (usize, usize) {
    if graph.is_empty() {
        return (0, 0);
    }
    let torus = graph.torus();
    let side = torus.side();
    let r_n = graph.params().local_radius();
    let mut held = 0;
    for _ in 0..samples {
        let x = rng.random_range(0..graph.len()) as NodeId;
        let t = loop {
            let t = torus.point(rng.random::<f64>() * side, rng.random::<f64>() * side);
            if torus.distance(graph.position(x), t) >= r_n {
                break t;
            }
        };
        if check_property_pn(graph, x, t).expect("t is drawn outside the local radius") {
            held += 1;
        }
    }
    (samples, held)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmodel::{assemble, derived_rng, generate, uniform_points, ModelParams, Node};
    use approx::assert_relative_eq;

    /// Side 20, local radius 2.
    fn params() -> ModelParams {
        ModelParams::new(400, 4.0 / 400f64.ln(), 2.0, 1.0, 0).unwrap()
    }

    fn graph(points: &[(f64, f64)], local: &[(NodeId, NodeId)], shortcuts: &[(NodeId, NodeId)]) -> Graph {
        let positions = points.iter().map(|&(x, y)| TorusPoint::new(x, y)).collect();
        Graph::from_parts(params(), positions, local, shortcuts).unwrap()
    }

    #[test]
    fn annulus_count_cases() {
        let empty = assemble(params(), Vec::new());
        assert_eq!(annulus_count(&empty, TorusPoint::new(1.0, 1.0), 8.0), 0);
        // A(t, 8) = (2, 4]: distances 1, 2, 3, 4, 5 -> two inside
        let g = graph(
            &[(11.0, 10.0), (12.0, 10.0), (13.0, 10.0), (14.0, 10.0), (15.0, 10.0)],
            &[],
            &[],
        );
        let t = TorusPoint::new(10.0, 10.0);
        assert_eq!(annulus_count(&g, t, 8.0), 2);
        assert_eq!(annulus_count(&g, t, 1.0), 0);
        assert_eq!(nodes_in_bracket(&g, t, 4.0), vec![2, 3]);
    }

    #[test]
    fn annulus_count_matches_brute_force() {
        let g = generate(&ModelParams::new(4096, 4.0, 2.0, 1.0, 3).unwrap());
        let torus = g.torus();
        for (t, r) in [(TorusPoint::new(3.0, 60.0), 40.0), (TorusPoint::new(32.0, 32.0), 17.0)] {
            let brute = g.nodes().iter().filter(|n| torus.in_annulus(t, r, n.pos)).count();
            assert_eq!(annulus_count(&g, t, r), brute);
        }
    }

    #[test]
    fn hit_probability_trivial_cases() {
        // t=(10,10), r=8: bracket (4, 8], annulus (2, 4]
        let g = graph(
            &[(10.0, 10.0), (16.0, 10.0), (13.0, 10.0), (10.0, 16.0)],
            &[],
            &[(1, 2)],
        );
        let t = TorusPoint::new(10.0, 10.0);
        let with = estimate_hit_probability(&g, t, 8.0, &[1]).unwrap();
        assert_eq!((with.samples, with.hits), (1, 1));
        assert_eq!(with.annulus_count, 1);
        let a_n = g.params().a_n();
        assert_relative_eq!(with.lower_bound, 4.0 * a_n / (9.0 * 64.0), max_relative = 1e-12);
        let without = estimate_hit_probability(&g, t, 8.0, &[3]).unwrap();
        assert_eq!((without.hits, without.probability), (0, 0.0));
        assert_eq!(
            estimate_hit_probability(&g, t, 8.0, &[0, 2]),
            Err(AnalysisError::NoEligibleSamples)
        );
    }

    #[test]
    fn cdelta_trivial_cases() {
        // n = 400, delta = 0.25: radius 400^0.25 = 4.47
        let g = graph(&[(10.0, 10.0), (10.0, 18.0), (10.0, 17.0)], &[], &[(0, 1)]);
        let t = TorusPoint::new(10.0, 10.0);
        let e = estimate_cdelta_shortcut_probability(&g, t, 0.25, &[1, 2]).unwrap();
        assert_eq!((e.samples, e.hits, e.disc_count), (2, 1, 1));
        // (4δ + α - 2)/2 = 1/2 at α = 2
        assert_relative_eq!(e.bound, 16.0 * 20.0, max_relative = 1e-12);
        // radius 400^0.01 ~ 1.06: the disc holds only the node at t, which
        // nobody links to when the shortcut is removed
        let g = graph(&[(10.0, 10.0), (10.0, 18.0)], &[], &[]);
        let e = estimate_cdelta_shortcut_probability(&g, t, 0.01, &[1]).unwrap();
        assert_eq!(e.probability, 0.0);
        assert!(estimate_cdelta_shortcut_probability(&g, t, 0.5, &[1]).is_err());
    }

    #[test]
    fn survival_single_shortcut() {
        let s = LengthSurvival::from_lengths(vec![10.0]).unwrap();
        assert_eq!(s.survival(5.0), 1.0);
        assert_eq!(s.survival(15.0), 0.0);
        assert!(LengthSurvival::from_lengths(Vec::new()).is_err());
        let g = graph(&[(1.0, 1.0), (5.0, 1.0)], &[], &[]);
        assert_eq!(shortcut_length_survival(&g, 5), Err(AnalysisError::NoShortcuts));
    }

    #[test]
    fn tail_slope_of_exact_pareto() {
        // P(L > r) = (r / 10)^-1.5 reproduced by quantiles
        let k = 20_000;
        let lengths = (0..k)
            .map(|i| 10.0 * (1.0 - (i as f64 + 0.5) / k as f64).powf(-1.0 / 1.5))
            .collect();
        let s = LengthSurvival::from_lengths(lengths).unwrap();
        let slope = s.tail_slope(12.0, 120.0, 15).unwrap();
        assert!((slope + 1.5).abs() < 0.02, "{slope}");
    }

    #[test]
    fn dyadic_radii_examples() {
        assert_eq!(dyadic_radii(5.0, 100.0), vec![10.0, 20.0, 40.0]);
        assert_eq!(dyadic_radii(8.0, 64.0), vec![16.0, 32.0]);
        assert!(dyadic_radii(10.0, 20.0).is_empty());
    }

    #[test]
    fn profile_counts_both_endpoints() {
        let g = graph(
            &[(1.0, 1.0), (6.0, 1.0), (1.0, 10.0), (9.0, 9.0)],
            &[],
            &[(0, 1), (0, 2)],
        );
        // lengths 5 and 9
        let p = annulus_shortcut_profile(&g, &[4.0, 8.0]);
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn occupancy_cases() {
        let empty = assemble(params(), Vec::new());
        let (total, e) = lemma1_cell_occupancy(&empty, 0.5);
        assert_eq!(total, 400);
        assert_eq!(e, total);
        // one node at the centre of every 1 x 1 cell
        let pts: Vec<(f64, f64)> = (0..400)
            .map(|k| ((k % 20) as f64 + 0.5, (k / 20) as f64 + 0.5))
            .collect();
        let positions = pts.iter().map(|&(x, y)| TorusPoint::new(x, y)).collect();
        let g = Graph::from_parts(params(), positions, &[], &[]).unwrap();
        assert_eq!(lemma1_cell_occupancy(&g, 0.5), (400, 0));
    }

    #[test]
    fn empty_cell_oracle_at_moderate_scale() {
        // beta^2 c = 0.5 leaves a few empty cells on average; compare the
        // mean count over seeds against the void-probability formula with
        // the exact cell area
        let (n, c, beta) = (4096u64, 2.0, 0.5);
        let mut total_empty = 0usize;
        let mut cells = 0usize;
        let seeds = 60;
        let mut area = 0.0;
        for seed in 0..seeds {
            let g = generate(&ModelParams::new(n, c, 2.0, 1.0, seed).unwrap());
            let (t, e) = lemma1_cell_occupancy(&g, beta);
            total_empty += e;
            cells = t;
            area = g.params().side().powi(2) / t as f64;
        }
        let mean = total_empty as f64 / seeds as f64;
        let expected = cells as f64 * (-area).exp();
        assert!(
            (mean - expected).abs() < 4.0 * (expected / seeds as f64).sqrt(),
            "{mean} vs {expected}"
        );
        let approx = expected_empty_cells(n as f64, c, beta);
        assert!((approx / expected - 1.0).abs() < 0.5, "{approx} vs {expected}");
    }

    #[test]
    fn connectivity_cases() {
        let one = graph(&[(1.0, 1.0)], &[], &[]);
        let c = local_connectivity(&one);
        assert!(c.is_connected);
        assert_eq!(c.giant_fraction, 1.0);
        let two = graph(&[(1.0, 1.0), (8.0, 8.0)], &[], &[]);
        let c = local_connectivity(&two);
        assert!(!c.is_connected);
        assert_eq!((c.components, c.giant_fraction), (2, 0.5));
        let chain = graph(&[(1.0, 1.0), (2.5, 1.0), (4.0, 1.0)], &[(0, 1), (1, 2)], &[]);
        assert!(local_connectivity(&chain).is_connected);
    }

    #[test]
    fn property_pn_sampling() {
        let g = generate(&ModelParams::new(4096, 4.0, 2.0, 1.0, 8).unwrap());
        let mut rng = derived_rng(8, 99);
        let (checked, held) = sample_property_pn(&g, 500, &mut rng);
        assert_eq!(checked, 500);
        assert_eq!(held, 500);
        // sparse nodes with a tiny radius mostly fail
        let p = ModelParams::new(4096, 0.05, 2.0, 1.0, 1).unwrap();
        let nodes: Vec<Node> = uniform_points(50, p.side(), &mut rng);
        let g = assemble(p, nodes);
        let (_, held) = sample_property_pn(&g, 200, &mut rng);
        assert!(held < 20, "{held}");
    }
}
