//! Replays a [`RouteResult`] against the graph and re-derives every quantity
//! the router reported, without reusing any routing code.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::genmodel::Graph;
use crate::routing::{Algorithm, RouteResult, RouteStatus};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteViolation {
    /// Index of the offending hop, if the violation is tied to one.
    pub hop: Option<usize>,
    pub message: String,
}

impl fmt::Display for RouteViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hop {
            Some(h) => write!(f, "hop {h}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Checks path structure on every route and, on delivered approximately
/// greedy routes, the radius bracket, annulus landing, local progress and
/// the phase bound.
pub fn validate_route(graph: &Graph, res: &RouteResult) -> Vec<RouteViolation> {
    let mut out = Vec::new();
    let mut fail = |hop: Option<usize>, message: String| out.push(RouteViolation { hop, message });
    let (s, t) = (res.source, res.dest);

    if res.path.first() != Some(&s) {
        fail(None, format!("path does not start at the source {s}"));
        return out;
    }
    if res.hops_total + 1 != res.path.len() {
        fail(
            None,
            format!("hops_total {} but path of {} nodes", res.hops_total, res.path.len()),
        );
    }
    if res.hops_local + res.hops_shortcut != res.hops_total {
        fail(None, "local and shortcut hops do not add up".to_string());
    }
    if (res.status == RouteStatus::Delivered) != (res.path.last() == Some(&t)) {
        fail(None, format!("status {} inconsistent with the final node", res.status));
    }
    let mut shortcut_hops = 0;
    for (k, w) in res.path.windows(2).enumerate() {
        if graph.shortcut_adjacency().contains(w[0], w[1]) {
            shortcut_hops += 1;
        } else if !graph.local_adjacency().contains(w[0], w[1]) {
            fail(Some(k), format!("{} and {} are not adjacent", w[0], w[1]));
        }
    }
    if shortcut_hops != res.hops_shortcut {
        fail(
            None,
            format!(
                "{shortcut_hops} shortcut hops on the path, {} reported",
                res.hops_shortcut
            ),
        );
    }
    if res.algorithm != Algorithm::ApproxGreedy || res.status != RouteStatus::Delivered || s == t {
        return out;
    }

    let torus = graph.torus();
    let tp = graph.position(t);
    let r_n = graph.params().local_radius();
    let r0 = graph.distance(s, t);
    let mut r = r0;
    let mut phases = 0usize;
    for (k, w) in res.path.windows(2).enumerate() {
        let (x, y) = (w[0], w[1]);
        let dx = graph.distance(x, t);
        let dy = graph.distance(y, t);
        if r > r_n && !(r / 2.0 < dx && dx <= r) {
            fail(Some(k), format!("radius bracket broken: r = {r}, d(x, t) = {dx}"));
        }
        if y != t {
            if graph.shortcut_adjacency().contains(x, y) {
                if !torus.in_annulus(tp, r, graph.position(y)) {
                    fail(Some(k), format!("shortcut lands at distance {dy}, outside A(t, {r})"));
                }
            } else if dy >= dx {
                fail(Some(k), format!("local hop does not approach t: {dx} -> {dy}"));
            }
            while dy <= r / 2.0 && r > r_n {
                r /= 2.0;
                phases += 1;
            }
        }
    }
    if phases != res.phases {
        fail(
            None,
            format!("replay counts {phases} phases, router reported {}", res.phases),
        );
    }
    let bound = (r0 / r_n).log2().max(0.0) + 1.0;
    if phases as f64 > bound {
        fail(None, format!("{phases} phases exceed log2(r0 / r_n) + 1 = {bound:.3}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmodel::{generate, ModelParams, NodeId};
    use crate::geometry::TorusPoint;
    use crate::routing::{route, route_approx_greedy};

    fn line() -> Graph {
        let params = ModelParams::new(400, 4.0 / 400f64.ln(), 2.0, 1.0, 0).unwrap();
        let positions = [(0.0, 0.0), (3.0, 0.0), (4.5, 0.0), (6.0, 0.0)]
            .iter()
            .map(|&(x, y)| TorusPoint::new(x, y))
            .collect();
        Graph::from_parts(params, positions, &[(1, 2), (2, 3)], &[(0, 1)]).unwrap()
    }

    #[test]
    fn genuine_routes_validate() {
        let g = line();
        assert!(validate_route(&g, &route_approx_greedy(&g, 0, 3, 10).unwrap()).is_empty());
        for alpha in [1.0, 2.0, 3.0] {
            let g = generate(&ModelParams::new(4096, 4.0, alpha, 1.0, 2).unwrap());
            let count = g.len() as NodeId;
            for k in 0..100u32 {
                for algo in [Algorithm::ApproxGreedy, Algorithm::PureGreedy] {
                    let res = route(&g, algo, (k * 31) % count, (k * 977 + 5) % count, 100_000).unwrap();
                    assert!(validate_route(&g, &res).is_empty());
                }
            }
        }
    }

    #[test]
    fn tampered_routes_are_caught() {
        let g = line();
        let good = route_approx_greedy(&g, 0, 3, 10).unwrap();

        let mut bad = good.clone();
        bad.path = vec![0, 2, 3];
        bad.hops_total = 2;
        bad.hops_local = 1;
        assert!(validate_route(&g, &bad)
            .iter()
            .any(|v| v.message.contains("not adjacent")));

        let mut bad = good.clone();
        bad.phases = 1;
        assert!(validate_route(&g, &bad).iter().any(|v| v.message.contains("phases")));

        let mut bad = good.clone();
        bad.status = RouteStatus::DeadEnd;
        assert!(validate_route(&g, &bad).iter().any(|v| v.message.contains("status")));
    }

    #[test]
    fn shortcut_outside_annulus_is_caught() {
        // s=(0,0) jumps to (5,0), 1 from t=(6,0): outside A(t, 6) = (1.5, 3]
        let params = ModelParams::new(400, 4.0 / 400f64.ln(), 2.0, 1.0, 0).unwrap();
        let positions = [(0.0, 0.0), (5.0, 0.0), (6.0, 0.0)]
            .iter()
            .map(|&(x, y)| TorusPoint::new(x, y))
            .collect();
        let g = Graph::from_parts(params, positions, &[(1, 2)], &[(0, 1)]).unwrap();
        let mut res = route_approx_greedy(&g, 0, 2, 10).unwrap();
        // the router dead-ends here; forge the hop it refused to take
        assert_eq!(res.status, RouteStatus::DeadEnd);
        res.path = vec![0, 1, 2];
        res.hops_total = 2;
        res.hops_local = 1;
        res.hops_shortcut = 1;
        res.status = RouteStatus::Delivered;
        res.phases = 1;
        let v = validate_route(&g, &res);
        assert!(v.iter().any(|v| v.message.contains("outside A(t")), "{v:?}");
    }
}
