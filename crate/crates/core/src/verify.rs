//! Named pass/fail checks: quick model and routing suites, and the full
//! statistical battery run at desk scale.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::analysis::{
    self, annulus_count, annulus_shortcut_profile, cell_occupancy, dyadic_radii, fit_scaling, local_connectivity,
    sample_property_pn, summarize, validate_route, FitModel, LengthSurvival, SweepConfig,
};
use crate::genmodel::{
    assemble, derived_rng, generate, io, reference_shortcuts, sample_points, sample_points_with, Graph, ModelParams,
    NodeId,
};
use crate::geometry::TorusPoint;
use crate::routing::{route, route_approx_greedy, route_pure_greedy, Algorithm, RouteStatus};

const VERIFY_STREAM: u64 = 0x7665_7269_6679;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "pass" } else { "FAIL" };
        write!(f, "{}: {verdict} ({})", self.name, self.detail)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Model,
    Routing,
    Scaling,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "model" => Ok(Suite::Model),
            "routing" => Ok(Suite::Routing),
            "scaling" => Ok(Suite::Scaling),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite `{other}` (expected model, routing, scaling or all)"
            )),
        }
    }
}

/// Model constants for the quick suites.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub n: u64,
    pub c: f64,
    pub alpha: f64,
    pub dbar: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n: 4096,
            c: 4.0,
            alpha: 2.0,
            dbar: 1.0,
            seed: 1,
        }
    }
}

impl VerifyOptions {
    fn params(&self) -> Result<ModelParams, crate::error::ModelError> {
        ModelParams::new(self.n, self.c, self.alpha, self.dbar, self.seed)
    }
}

/// Runs a suite. The scaling suite ignores `opts` and uses the desk-scale
/// constants of [`acceptance`].
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<CheckOutcome>, crate::error::ModelError> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Model | Suite::All) {
        out.extend(model_suite(opts)?);
    }
    if matches!(suite, Suite::Routing | Suite::All) {
        out.extend(routing_suite(opts)?);
    }
    if matches!(suite, Suite::Scaling | Suite::All) {
        out.extend(acceptance::scaling());
    }
    Ok(out)
}

/// Largest `n` at which the quadratic reference sampler is run.
const EXACT_SAMPLER_MAX_N: u64 = 16_384;

pub fn model_suite(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>, crate::error::ModelError> {
    let params = opts.params()?;
    let graph = generate(&params);
    let mut out = Vec::new();

    let exact_params = if params.n() <= EXACT_SAMPLER_MAX_N {
        params.clone()
    } else {
        ModelParams::new(EXACT_SAMPLER_MAX_N, opts.c, opts.alpha, opts.dbar, opts.seed)?
    };
    let exact_graph = if exact_params == params {
        graph.clone()
    } else {
        generate(&exact_params)
    };
    let reference = reference_shortcuts(&exact_params, exact_graph.nodes());
    out.push(CheckOutcome::new(
        "fast_sampler == exact_sampler",
        &reference == exact_graph.shortcut_adjacency(),
        format!("n = {}, {} shortcuts", exact_params.n(), reference.edge_count()),
    ));

    let invariants = graph.check_invariants();
    out.push(CheckOutcome::new(
        "graph invariants",
        invariants.is_ok(),
        match invariants {
            Ok(()) => format!(
                "{} nodes, {} local edges",
                graph.len(),
                graph.local_adjacency().edge_count()
            ),
            Err(e) => e.to_string(),
        },
    ));

    let text = io::to_text(&graph);
    let round_trip = io::from_text(&text).map(|g| io::to_text(&g) == text);
    out.push(CheckOutcome::new(
        "graph file round trip",
        matches!(round_trip, Ok(true)),
        format!("{} bytes", text.len()),
    ));

    let seeds = 20u64;
    let mut degree_sum = 0.0;
    let mut connected = 0;
    let mut n_a = Vec::new();
    let r = (40.0f64).min(params.side() / 2.0);
    for k in 0..seeds {
        let g = generate(&params.clone().with_seed(opts.seed + k));
        degree_sum += g.mean_shortcut_degree();
        if local_connectivity(&g).is_connected {
            connected += 1;
        }
        n_a.push(annulus_count(&g, TorusPoint::new(0.0, 0.0), r) as f64);
    }
    let mean_degree = degree_sum / seeds as f64;
    out.push(CheckOutcome::new(
        "mean shortcut degree ~ dbar",
        (mean_degree / params.target_degree() - 1.0).abs() < 0.1,
        format!("{mean_degree:.4} over {seeds} seeds, target {}", params.target_degree()),
    ));
    out.push(CheckOutcome::new(
        "local graph connected",
        connected as f64 >= 0.95 * seeds as f64,
        format!("{connected}/{seeds} seeds"),
    ));
    let expected = 3.0 * std::f64::consts::PI * r * r / 16.0;
    let (mean, se) = mean_and_stderr(&n_a);
    out.push(CheckOutcome::new(
        "annulus count ~ Poisson(3 pi r^2 / 16)",
        (mean - expected).abs() <= 3.0 * se.max(1e-12),
        format!("r = {r:.2}: mean {mean:.2} +- {se:.2}, expected {expected:.2}"),
    ));

    let beta = 0.5;
    let occupancy_params = ModelParams::new(opts.n, 8.0, opts.alpha, opts.dbar, opts.seed)?;
    let mut clean = 0;
    for k in 0..seeds {
        let p = occupancy_params.clone().with_seed(opts.seed + k);
        let pts: Vec<TorusPoint> = sample_points(&p).iter().map(|n| n.pos).collect();
        let (_, empty) = cell_occupancy(&pts, p.side(), beta * p.local_radius());
        if empty == 0 {
            clean += 1;
        }
    }
    out.push(CheckOutcome::new(
        "no empty cells at c = 8, beta = 1/2",
        clean as f64 >= 0.95 * seeds as f64,
        format!("{clean}/{seeds} seeds fully occupied"),
    ));

    out.extend(degenerate_checks(opts)?);
    Ok(out)
}

/// Edge cases that must hold on any build: empty and single-node graphs.
pub fn degenerate_checks(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>, crate::error::ModelError> {
    let params = opts.params()?;
    let empty = assemble(params.clone(), Vec::new());
    let mut out = Vec::new();
    let (total, empty_cells) = analysis::lemma1_cell_occupancy(&empty, 0.5);
    out.push(CheckOutcome::new(
        "empty graph: invariants, occupancy, counts",
        empty.check_invariants().is_ok()
            && empty_cells == total
            && annulus_count(&empty, TorusPoint::new(0.0, 0.0), 10.0) == 0
            && empty.mean_shortcut_degree() == 0.0,
        format!("{total} cells"),
    ));
    let text = io::to_text(&empty);
    out.push(CheckOutcome::new(
        "empty graph: file round trip",
        io::from_text(&text).is_ok_and(|g| g.is_empty() && io::to_text(&g) == text),
        "0 nodes",
    ));
    let single = assemble(
        params.clone(),
        sample_points_with(&params, &mut derived_rng(0, 0))
            .into_iter()
            .take(1)
            .collect(),
    );
    let res = route_approx_greedy(&single, 0, 0, 1);
    let conn = local_connectivity(&single);
    out.push(CheckOutcome::new(
        "single node: trivial route and connectivity",
        res.as_ref().is_ok_and(|r| r.hops_total == 0 && r.delivered())
            && conn.is_connected
            && conn.giant_fraction == 1.0,
        "s = t = 0",
    ));
    Ok(out)
}

/// The 4-node line used by the routing hand traces: s=(0,0), a=(3,0),
/// b=(4.5,0), t=(6,0) on a torus of side 20 with local radius 2 and one
/// shortcut s-a.
pub fn hand_built_line() -> Graph {
    let params = ModelParams::new(400, 4.0 / 400f64.ln(), 2.0, 1.0, 0).expect("valid constants");
    let positions = [(0.0, 0.0), (3.0, 0.0), (4.5, 0.0), (6.0, 0.0)]
        .iter()
        .map(|&(x, y)| TorusPoint::new(x, y))
        .collect();
    Graph::from_parts(params, positions, &[(1, 2), (2, 3)], &[(0, 1)]).expect("hand-built graph is valid")
}

pub fn routing_suite(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>, crate::error::ModelError> {
    let mut out = Vec::new();
    let line = hand_built_line();
    let approx = route_approx_greedy(&line, 0, 3, 100).expect("valid ids");
    out.push(CheckOutcome::new(
        "approx greedy hand trace",
        approx.path == [0, 1, 2, 3] && approx.hops_shortcut == 1 && approx.phases == 2 && approx.delivered(),
        format!("path {:?}, {} phases", approx.path, approx.phases),
    ));
    let pure = route_pure_greedy(&line, 0, 3, 100).expect("valid ids");
    out.push(CheckOutcome::new(
        "pure greedy hand trace",
        pure.path == [0, 1, 2, 3],
        format!("path {:?}", pure.path),
    ));

    let params = opts.params()?;
    let graph = generate(&params);
    if graph.len() < 2 {
        out.push(CheckOutcome::new("route replay", false, "graph has fewer than 2 nodes"));
        return Ok(out);
    }
    let mut rng = derived_rng(opts.seed, VERIFY_STREAM);
    let routes = 200;
    let mut violations = Vec::new();
    let mut delivered = 0;
    for _ in 0..routes {
        let s = rng.random_range(0..graph.len()) as NodeId;
        let t = rng.random_range(0..graph.len()) as NodeId;
        for algo in [Algorithm::ApproxGreedy, Algorithm::PureGreedy] {
            let res = route(&graph, algo, s, t, crate::routing::default_hop_budget(&graph)).expect("ids in range");
            if algo == Algorithm::ApproxGreedy && res.status == RouteStatus::Delivered {
                delivered += 1;
            }
            violations.extend(validate_route(&graph, &res));
        }
    }
    out.push(CheckOutcome::new(
        "route replay",
        violations.is_empty(),
        match violations.first() {
            None => format!("{routes} pairs x 2 algorithms, {delivered} approx-greedy deliveries"),
            Some(v) => format!("{} violations, first: {v}", violations.len()),
        },
    ));
    out.push(CheckOutcome::new(
        "approx greedy failure rate < 1%",
        (routes - delivered) as f64 <= 0.01 * routes as f64,
        format!("{delivered}/{routes} delivered"),
    ));
    let (checked, held) = sample_property_pn(&graph, 1000, &mut rng);
    out.push(CheckOutcome::new(
        "closer point within r_n",
        held == checked,
        format!("{held}/{checked} samples"),
    ));
    Ok(out)
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn sample_variance(xs: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
}

/// The numbered desk-scale battery.
pub mod acceptance {
    use super::*;

    pub const SCALING_GRID: [u64; 7] = [1 << 12, 1 << 13, 1 << 14, 1 << 15, 1 << 16, 1 << 17, 1 << 18];
    pub const SCALING_SEEDS: usize = 10;
    pub const SCALING_PAIRS: usize = 20;

    fn scaling_config(alpha: f64) -> SweepConfig {
        SweepConfig {
            n_grid: SCALING_GRID.to_vec(),
            alpha,
            seeds_per_n: SCALING_SEEDS,
            pairs_per_graph: SCALING_PAIRS,
            ..SweepConfig::default()
        }
    }

    fn label(k: u32, text: &str) -> String {
        format!("{k} {text}")
    }

    /// Criteria 1, 2, 3 and 10 from one sweep per exponent.
    pub fn scaling() -> Vec<CheckOutcome> {
        let mut out = Vec::new();
        let mut violations = Vec::new();
        let mut routes_checked = 0;
        let mut delivered_checked = 0;
        for (k, alpha) in [(1u32, 2.0), (2, 1.0), (3, 3.0)] {
            let name = match k {
                1 => "alpha = 2 polylog scaling",
                2 => "alpha = 1 polynomial growth",
                _ => "alpha = 3 polynomial growth",
            };
            let cfg = scaling_config(alpha);
            let sweep = match analysis::run_sweep(&cfg) {
                Ok(s) => s,
                Err(e) => {
                    out.push(CheckOutcome::new(label(k, name), false, e.to_string()));
                    continue;
                }
            };
            routes_checked += sweep.routes_checked;
            delivered_checked += sweep
                .records
                .iter()
                .filter(|r| r.status == analysis::RecordStatus::Delivered)
                .count();
            violations.extend(
                sweep
                    .violations
                    .iter()
                    .map(|(n, seed, trial, v)| format!("alpha {alpha} n {n} seed {seed} trial {trial}: {v}")),
            );
            out.push(scaling_check(k, name, alpha, &sweep));
        }
        out.push(CheckOutcome::new(
            label(10, "routing invariants on every delivered route"),
            violations.is_empty() && routes_checked > 0,
            match violations.first() {
                None => format!("{delivered_checked} delivered routes replayed, 0 violations"),
                Some(v) => format!("{} violations, first: {v}", violations.len()),
            },
        ));
        out
    }

    fn scaling_check(k: u32, name: &str, alpha: f64, sweep: &analysis::SweepOutcome) -> CheckOutcome {
        let summary = summarize(&sweep.records);
        let routed: usize = summary
            .iter()
            .map(|s| s.delivered + s.dead_end + s.budget_exhausted)
            .sum();
        let failed: usize = summary.iter().map(|s| s.dead_end + s.budget_exhausted).sum();
        let failure_rate = failed as f64 / routed.max(1) as f64;
        let means: Vec<String> = summary.iter().map(|s| format!("{:.2}", s.mean_hops)).collect();
        let mut detail = format!(
            "mean hops [{}], failure rate {:.2}%",
            means.join(", "),
            100.0 * failure_rate
        );
        let per_phase: Vec<String> = sweep
            .phase_stats
            .iter()
            .map(|(n, p)| format!("{:.2}", p.mean_local_hops() / (*n as f64).ln()))
            .collect();
        detail.push_str(&format!(", local hops per phase / ln n [{}]", per_phase.join(", ")));
        let model = if k == 1 { FitModel::PolyLog } else { FitModel::PowerLaw };
        let fit = match fit_scaling(&sweep.records, model) {
            Ok(f) => f,
            Err(e) => return CheckOutcome::new(label(k, name), false, format!("{detail}; fit failed: {e}")),
        };
        detail.push_str(&format!(", {model} b = {:.3} +- {:.3}", fit.b, fit.ci_b));
        let mut passed = failure_rate < 0.01;
        if k == 1 {
            let ratios: Vec<f64> = summary
                .iter()
                .map(|s| s.mean_hops / (s.n as f64).ln().powi(2))
                .collect();
            let spread =
                ratios.iter().cloned().fold(f64::MIN, f64::max) / ratios.iter().cloned().fold(f64::MAX, f64::min);
            detail.push_str(&format!(", hops/(ln n)^2 spread {spread:.2}"));
            passed &= (1.0..=3.0).contains(&fit.b) && spread < 3.0;
        } else {
            passed &= fit.b >= 0.08 && fit.ci_excludes_zero();
            if let Some(th) = analysis::lower_bound_threshold(alpha) {
                detail.push_str(&format!(", lower-bound threshold {th:.4}"));
            }
            if k == 2 {
                let first = summary.first().map_or(f64::NAN, |s| s.mean_hops);
                let last = summary.last().map_or(f64::NAN, |s| s.mean_hops);
                detail.push_str(&format!(", growth 2^12 -> 2^18 x{:.2}", last / first));
                passed &= last > 5.0 * first;
            }
        }
        CheckOutcome::new(label(k, name), passed, detail)
    }

    /// Criterion 4: fast and quadratic samplers agree exactly.
    pub fn sampler_equivalence() -> CheckOutcome {
        let mut mismatches = Vec::new();
        let mut compared = 0;
        for n in [1024u64, 4096] {
            for alpha in [1.0, 2.0, 3.0] {
                for seed in 0..10 {
                    let params = ModelParams::new(n, 4.0, alpha, 1.0, seed).expect("valid constants");
                    let g = generate(&params);
                    compared += 1;
                    if &reference_shortcuts(&params, g.nodes()) != g.shortcut_adjacency() {
                        mismatches.push(format!("n {n} alpha {alpha} seed {seed}"));
                    }
                }
            }
        }
        CheckOutcome::new(
            label(4, "fast sampler == exact sampler"),
            mismatches.is_empty(),
            format!("{compared} graphs compared, mismatches: {mismatches:?}"),
        )
    }

    /// Criterion 5: mean incident shortcut degree within 5% of `dbar`.
    pub fn degree_calibration() -> CheckOutcome {
        let mut passed = true;
        let mut parts = Vec::new();
        for alpha in [1.0, 2.0, 3.0] {
            let seeds = 50;
            let mean = (0..seeds)
                .map(|seed| {
                    generate(&ModelParams::new(10_000, 4.0, alpha, 1.0, seed).expect("valid constants"))
                        .mean_shortcut_degree()
                })
                .sum::<f64>()
                / seeds as f64;
            passed &= (mean - 1.0).abs() <= 0.05;
            parts.push(format!("alpha {alpha}: {mean:.4}"));
        }
        CheckOutcome::new(label(5, "degree calibration"), passed, parts.join(", "))
    }

    /// Criterion 6: `N_A` at `r = 40`, `n = 10^4` has Poisson mean and
    /// dispersion.
    pub fn annulus_poisson() -> CheckOutcome {
        let r = 40.0;
        let counts: Vec<f64> = (0..100)
            .map(|seed| {
                let params = ModelParams::new(10_000, 4.0, 2.0, 1.0, seed).expect("valid constants");
                let g = assemble(params.clone(), sample_points(&params));
                let t = TorusPoint::new(params.side() / 2.0, params.side() / 2.0);
                annulus_count(&g, t, r) as f64
            })
            .collect();
        let expected = 3.0 * std::f64::consts::PI * r * r / 16.0;
        let (mean, se) = mean_and_stderr(&counts);
        let dispersion = sample_variance(&counts) / mean;
        CheckOutcome::new(
            label(6, "annulus count Poisson mean"),
            (mean - expected).abs() <= 3.0 * se && (0.8..=1.2).contains(&dispersion),
            format!("mean {mean:.2} +- {se:.2} vs {expected:.2}, variance/mean {dispersion:.3}"),
        )
    }

    /// Criteria 7 and 9 share their `alpha = 2`, `c = 4`, `n = 10^5` graphs.
    pub fn scale_free_and_lemma1() -> Vec<CheckOutcome> {
        let seeds = 20u64;
        let n = 100_000;
        let mut profile_sum: Vec<f64> = Vec::new();
        let mut radii = Vec::new();
        let mut pn_ok = 0;
        let mut pn_worst = (usize::MAX, 0usize);
        let mut connected = 0;
        for seed in 0..seeds {
            let params = ModelParams::new(n, 4.0, 2.0, 1.0, seed).expect("valid constants");
            let g = generate(&params);
            radii = dyadic_radii(params.local_radius(), params.shortcut_range());
            let profile = annulus_shortcut_profile(&g, &radii);
            if profile_sum.is_empty() {
                profile_sum = vec![0.0; profile.len()];
            }
            for (acc, p) in profile_sum.iter_mut().zip(profile) {
                *acc += p;
            }
            let mut rng = derived_rng(seed, VERIFY_STREAM);
            let (checked, held) = sample_property_pn(&g, 10_000, &mut rng);
            if held == checked {
                pn_ok += 1;
            }
            if held < pn_worst.0 {
                pn_worst = (held, checked);
            }
            if local_connectivity(&g).is_connected {
                connected += 1;
            }
        }
        let profile: Vec<f64> = profile_sum.iter().map(|s| s / seeds as f64).collect();
        let mean = profile.iter().sum::<f64>() / profile.len().max(1) as f64;
        let max_dev = profile.iter().map(|p| (p / mean - 1.0).abs()).fold(0.0, f64::max);
        let scale_free = CheckOutcome::new(
            label(7, "scale-free annulus profile"),
            profile.len() >= 2 && max_dev < 0.15,
            format!(
                "radii {radii:?}: shortcuts per node {:?}, max relative deviation {max_dev:.3}",
                profile.iter().map(|p| (p * 1e4).round() / 1e4).collect::<Vec<_>>()
            ),
        );

        let mut clean = 0;
        let beta = 0.5;
        for seed in 0..seeds {
            let params = ModelParams::new(n, 8.0, 2.0, 1.0, seed).expect("valid constants");
            let pts: Vec<TorusPoint> = sample_points(&params).iter().map(|v| v.pos).collect();
            if cell_occupancy(&pts, params.side(), beta * params.local_radius()).1 == 0 {
                clean += 1;
            }
        }
        let need = 0.95 * seeds as f64;
        let lemma1 = CheckOutcome::new(
            label(9, "local progress suite"),
            clean as f64 >= need && pn_ok as f64 >= need && connected as f64 >= need,
            format!(
                "fully occupied at c = 8: {clean}/{seeds}; property held in all samples: {pn_ok}/{seeds} (worst {}/{}); connected at c = 4: {connected}/{seeds}",
                pn_worst.0, pn_worst.1
            ),
        );
        vec![scale_free, lemma1]
    }

    /// Criterion 8: tail of the shortcut length distribution at `alpha = 3`.
    pub fn shortcut_tail() -> CheckOutcome {
        let n = 100_000;
        let mut lengths = Vec::new();
        let mut geometric_centre = 0.0;
        for seed in 0..20 {
            let params = ModelParams::new(n, 4.0, 3.0, 1.0, seed).expect("valid constants");
            let g = generate(&params);
            lengths.extend(analysis::shortcut_lengths(&g));
            geometric_centre = (params.local_radius() * params.shortcut_range()).sqrt();
        }
        let count = lengths.len();
        let (lo, hi) = (geometric_centre / 10f64.sqrt(), geometric_centre * 10f64.sqrt());
        let slope = LengthSurvival::from_lengths(lengths)
            .ok()
            .and_then(|s| s.tail_slope(lo, hi, 21));
        CheckOutcome::new(
            label(8, "shortcut length tail at alpha = 3"),
            slope.is_some_and(|s| s <= -0.7),
            format!(
                "{count} shortcuts, slope over [{lo:.2}, {hi:.2}] = {}",
                slope.map_or("n/a".into(), |s| format!("{s:.3}"))
            ),
        )
    }

    /// Every criterion, in order.
    pub fn all() -> Vec<CheckOutcome> {
        let mut out = scaling();
        out.push(sampler_equivalence());
        out.push(degree_calibration());
        out.push(annulus_poisson());
        let mut sf = scale_free_and_lemma1();
        let lemma1 = sf.pop().expect("two outcomes");
        out.push(sf.pop().expect("two outcomes"));
        out.push(shortcut_tail());
        out.push(lemma1);
        out.sort_by_key(|c| {
            c.name
                .split(' ')
                .next()
                .and_then(|k| k.parse::<u32>().ok())
                .unwrap_or(u32::MAX)
        });
        out
    }
}
