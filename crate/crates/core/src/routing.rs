//! Decentralised routing on a [`Graph`].
//!
//! The message carries a radius `r`, initialised to the source-target
//! distance. At each node the router delivers directly if it can, otherwise
//! prefers a shortcut into the annulus `A(t, r)` and falls back to the
//! closest local contact that is strictly closer to `t`. Whenever the
//! message reaches a node within `r / 2` of `t` the radius halves, which
//! marks the start of a new phase; halving repeats until the node is back
//! in `(r / 2, r]` or `r` has dropped to `r_n`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::RouteError;
use crate::genmodel::{Graph, NodeId};
use crate::geometry::TorusPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    ApproxGreedy,
    PureGreedy,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::ApproxGreedy => "approx_greedy",
            Algorithm::PureGreedy => "pure_greedy",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "approx_greedy" | "approx-greedy" => Ok(Algorithm::ApproxGreedy),
            "pure_greedy" | "pure-greedy" | "greedy" => Ok(Algorithm::PureGreedy),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteStatus {
    Delivered,
    DeadEnd,
    BudgetExhausted,
}

impl RouteStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RouteStatus::Delivered => "delivered",
            RouteStatus::DeadEnd => "dead_end",
            RouteStatus::BudgetExhausted => "budget_exhausted",
        }
    }
}

impl fmt::Display for RouteStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopKind {
    Local,
    Shortcut,
}

impl fmt::Display for HopKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HopKind::Local => "local",
            HopKind::Shortcut => "shortcut",
        })
    }
}

/// One forwarded hop. `r_after` is the radius once halving on arrival is done.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopTrace {
    pub hop_index: usize,
    pub from: NodeId,
    pub to: NodeId,
    pub kind: HopKind,
    pub r_before: f64,
    pub r_after: f64,
    pub dist_to_t: f64,
}

impl fmt::Display for HopTrace {
    /// `hop_index from to kind r_before r_after dist_to_t`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {} {}",
            self.hop_index, self.from, self.to, self.kind, self.r_before, self.r_after, self.dist_to_t
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteResult {
    pub algorithm: Algorithm,
    pub source: NodeId,
    pub dest: NodeId,
    pub initial_distance: f64,
    pub path: Vec<NodeId>,
    pub hops_total: usize,
    pub hops_local: usize,
    pub hops_shortcut: usize,
    /// Number of radius halvings.
    pub phases: usize,
    /// Local hops taken in each phase; `phases + 1` entries.
    pub per_phase_local_hops: Vec<usize>,
    pub status: RouteStatus,
    #[serde(skip)]
    pub trace: Vec<HopTrace>,
}

impl RouteResult {
    pub fn delivered(&self) -> bool {
        self.status == RouteStatus::Delivered
    }

    pub fn final_node(&self) -> NodeId {
        *self.path.last().expect("a path always holds the source")
    }
}

/// Default hop budget, `10 N`.
pub fn default_hop_budget(graph: &Graph) -> usize {
    10 * graph.len().max(1)
}

pub fn route(
    graph: &Graph,
    algorithm: Algorithm,
    s: NodeId,
    t: NodeId,
    hop_budget: usize,
) -> Result<RouteResult, RouteError> {
    match algorithm {
        Algorithm::ApproxGreedy => route_approx_greedy(graph, s, t, hop_budget),
        Algorithm::PureGreedy => route_pure_greedy(graph, s, t, hop_budget),
    }
}

/// Annulus-shortcut routing with local fallback.
pub fn route_approx_greedy(graph: &Graph, s: NodeId, t: NodeId, hop_budget: usize) -> Result<RouteResult, RouteError> {
    Router::new(graph, Algorithm::ApproxGreedy, s, t, hop_budget).map(|r| r.run(approx_greedy_step))
}

/// Moves to the neighbour strictly closest to `t`. The radius is tracked
/// for instrumentation only.
pub fn route_pure_greedy(graph: &Graph, s: NodeId, t: NodeId, hop_budget: usize) -> Result<RouteResult, RouteError> {
    Router::new(graph, Algorithm::PureGreedy, s, t, hop_budget).map(|r| r.run(pure_greedy_step))
}

fn approx_greedy_step(graph: &Graph, x: NodeId, t: NodeId, r: f64) -> Option<(NodeId, HopKind)> {
    if graph.local_contacts(x).binary_search(&t).is_ok() {
        return Some((t, HopKind::Local));
    }
    if graph.shortcut_neighbours(x).binary_search(&t).is_ok() {
        return Some((t, HopKind::Shortcut));
    }
    let torus = graph.torus();
    let tp = graph.position(t);
    // neighbour lists are id-sorted, so a strict comparison keeps the
    // smallest id among equidistant candidates
    let mut best: Option<(f64, NodeId)> = None;
    for &y in graph.shortcut_neighbours(x) {
        let yp = graph.position(y);
        if torus.in_annulus(tp, r, yp) {
            let d = torus.distance(yp, tp);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, y));
            }
        }
    }
    if let Some((_, y)) = best {
        return Some((y, HopKind::Shortcut));
    }
    closest_strictly_closer(graph, x, t, graph.local_contacts(x)).map(|y| (y, HopKind::Local))
}

fn pure_greedy_step(graph: &Graph, x: NodeId, t: NodeId, _r: f64) -> Option<(NodeId, HopKind)> {
    let local = closest_strictly_closer(graph, x, t, graph.local_contacts(x));
    let shortcut = closest_strictly_closer(graph, x, t, graph.shortcut_neighbours(x));
    let pick = match (local, shortcut) {
        (Some(a), Some(b)) => {
            let (da, db) = (graph.distance(a, t), graph.distance(b, t));
            if da < db || (da == db && a < b) {
                (a, HopKind::Local)
            } else {
                (b, HopKind::Shortcut)
            }
        }
        (Some(a), None) => (a, HopKind::Local),
        (None, Some(b)) => (b, HopKind::Shortcut),
        (None, None) => return None,
    };
    Some(pick)
}

/// Neighbour minimising the distance to `t` among those strictly closer
/// than `x`; ties go to the smallest id.
fn closest_strictly_closer(graph: &Graph, x: NodeId, t: NodeId, candidates: &[NodeId]) -> Option<NodeId> {
    let mut best_d = graph.distance(x, t);
    let mut best = None;
    for &y in candidates {
        let d = graph.distance(y, t);
        if d < best_d {
            best_d = d;
            best = Some(y);
        }
    }
    best
}

struct Router<'g> {
    graph: &'g Graph,
    result: RouteResult,
    budget: usize,
}

impl<'g> Router<'g> {
    fn new(graph: &'g Graph, algorithm: Algorithm, s: NodeId, t: NodeId, budget: usize) -> Result<Self, RouteError> {
        for id in [s, t] {
            if id as usize >= graph.len() {
                return Err(RouteError::InvalidNode { id, len: graph.len() });
            }
        }
        if budget == 0 {
            return Err(RouteError::ZeroBudget);
        }
        let initial_distance = graph.distance(s, t);
        Ok(Self {
            graph,
            budget,
            result: RouteResult {
                algorithm,
                source: s,
                dest: t,
                initial_distance,
                path: vec![s],
                hops_total: 0,
                hops_local: 0,
                hops_shortcut: 0,
                phases: 0,
                per_phase_local_hops: vec![0],
                status: RouteStatus::Delivered,
                trace: Vec::new(),
            },
        })
    }

    fn run(mut self, step: impl Fn(&Graph, NodeId, NodeId, f64) -> Option<(NodeId, HopKind)>) -> RouteResult {
        let graph = self.graph;
        let t = self.result.dest;
        let mut x = self.result.source;
        let mut r = self.result.initial_distance;
        let local_radius = graph.params().local_radius();
        while x != t {
            if self.result.hops_total == self.budget {
                self.result.status = RouteStatus::BudgetExhausted;
                break;
            }
            debug_assert!({
                let d = graph.distance(x, t);
                d <= r && (d > r / 2.0 || r <= local_radius)
            });
            let Some((y, kind)) = step(graph, x, t, r) else {
                self.result.status = RouteStatus::DeadEnd;
                break;
            };
            let r_before = r;
            let phase = self.result.phases;
            let d = graph.distance(y, t);
            if y != t {
                // below r_n the next hop is a direct delivery, so the
                // radius no longer steers anything
                while d <= r / 2.0 && r > local_radius {
                    r /= 2.0;
                    self.result.phases += 1;
                    self.result.per_phase_local_hops.push(0);
                }
            }
            let res = &mut self.result;
            res.trace.push(HopTrace {
                hop_index: res.hops_total,
                from: x,
                to: y,
                kind,
                r_before,
                r_after: r,
                dist_to_t: d,
            });
            res.hops_total += 1;
            match kind {
                HopKind::Local => {
                    res.hops_local += 1;
                    res.per_phase_local_hops[phase] += 1;
                }
                HopKind::Shortcut => res.hops_shortcut += 1,
            }
            res.path.push(y);
            x = y;
        }
        self.result
    }
}

/// Local progress predicate: some node `u != x` within the
/// closed ball of radius `r_n` around `x` is strictly closer to `t`.
pub fn check_property_pn(graph: &Graph, x: NodeId, t: TorusPoint) -> Result<bool, RouteError> {
    let (xp, dt) = progress_setup(graph, x, t)?;
    let torus = graph.torus();
    let mut found = false;
    graph.for_each_within(xp, graph.params().local_radius(), |u, _| {
        if u != x && torus.distance(graph.position(u), t) < dt {
            found = true;
        }
    });
    Ok(found)
}

/// As [`check_property_pn`] but over the local contacts of `x`, i.e. the
/// open ball of radius `r_n`.
pub fn has_closer_local_contact(graph: &Graph, x: NodeId, t: TorusPoint) -> Result<bool, RouteError> {
    let (_, dt) = progress_setup(graph, x, t)?;
    let torus = graph.torus();
    Ok(graph
        .local_contacts(x)
        .iter()
        .any(|&u| torus.distance(graph.position(u), t) < dt))
}

fn progress_setup(graph: &Graph, x: NodeId, t: TorusPoint) -> Result<(TorusPoint, f64), RouteError> {
    if x as usize >= graph.len() {
        return Err(RouteError::InvalidNode {
            id: x,
            len: graph.len(),
        });
    }
    let xp = graph.position(x);
    let dt = graph.torus().distance(xp, t);
    let local_radius = graph.params().local_radius();
    if dt < local_radius {
        return Err(RouteError::TooCloseToTarget {
            id: x,
            distance: dt,
            local_radius,
        });
    }
    Ok((xp, dt))
}
