//! Hop-count sweeps over a grid of network sizes.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::genmodel::{derived_rng, generate, mix64, DegreeConvention, Graph, ModelParams, NodeId};
use crate::routing::{default_hop_budget, route, Algorithm, RouteStatus};

use super::replay::{validate_route, RouteViolation};

const TRIAL_STREAM: u64 = 0x7472_6961_6c73;
/// Attempts at drawing a pair farther apart than `r_n` before giving up.
const MAX_PAIR_ATTEMPTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HopBudget {
    /// `10 N` for a graph of `N` nodes.
    #[default]
    TenTimesNodes,
    Fixed(usize),
}

impl HopBudget {
    pub fn for_graph(self, graph: &Graph) -> usize {
        match self {
            HopBudget::TenTimesNodes => default_hop_budget(graph),
            HopBudget::Fixed(b) => b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_grid: Vec<u64>,
    pub alpha: f64,
    pub c: f64,
    pub dbar: f64,
    pub convention: DegreeConvention,
    /// Graph seeds are `base_seed .. base_seed + seeds_per_n`.
    pub base_seed: u64,
    pub seeds_per_n: usize,
    pub pairs_per_graph: usize,
    pub algorithm: Algorithm,
    pub hop_budget: HopBudget,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_grid: Vec::new(),
            alpha: 2.0,
            c: 4.0,
            dbar: 1.0,
            convention: DegreeConvention::Incident,
            base_seed: 0,
            seeds_per_n: 1,
            pairs_per_graph: 1,
            algorithm: Algorithm::ApproxGreedy,
            hop_budget: HopBudget::TenTimesNodes,
            gamma: None,
            delta: None,
            epsilon: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |m: &str| Err(AnalysisError::InvalidConfig(m.to_string()));
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n grid must be strictly increasing");
        }
        if self.seeds_per_n == 0 {
            return bad("seeds per n must be at least 1");
        }
        if self.pairs_per_graph == 0 {
            return bad("pairs per graph must be at least 1");
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 0.5) {
                return bad("delta must lie in (0, 1/2)");
            }
        }
        if let HopBudget::Fixed(0) = self.hop_budget {
            return bad("hop budget must be at least 1");
        }
        Ok(())
    }

    /// Lower-bound exponent quoted for the chosen `alpha`: `(2 - α)/6` below
    /// 2, `(α - 2)/(2(α - 1))` above, none at 2.
    pub fn theoretical_threshold(&self) -> Option<f64> {
        lower_bound_threshold(self.alpha)
    }
}

pub fn lower_bound_threshold(alpha: f64) -> Option<f64> {
    if alpha < 2.0 {
        Some((2.0 - alpha) / 6.0)
    } else if alpha > 2.0 {
        Some((alpha - 2.0) / (2.0 * (alpha - 1.0)))
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Delivered,
    DeadEnd,
    BudgetExhausted,
    GenerationError,
    NoEligiblePair,
}

impl From<RouteStatus> for RecordStatus {
    fn from(s: RouteStatus) -> Self {
        match s {
            RouteStatus::Delivered => RecordStatus::Delivered,
            RouteStatus::DeadEnd => RecordStatus::DeadEnd,
            RouteStatus::BudgetExhausted => RecordStatus::BudgetExhausted,
        }
    }
}

/// One routing trial. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: u64,
    pub seed: u64,
    pub trial: usize,
    pub alpha: f64,
    pub c: f64,
    pub dbar: f64,
    pub s: Option<NodeId>,
    pub t: Option<NodeId>,
    pub initial_distance: Option<f64>,
    pub hops_total: usize,
    pub hops_local: usize,
    pub hops_shortcut: usize,
    pub phases: usize,
    pub status: RecordStatus,
}

pub const CSV_HEADER: &str =
    "n,seed,trial,alpha,c,dbar,s,t,initial_distance,hops_total,hops_local,hops_shortcut,phases,status";

/// Local hops per phase, pooled over delivered routes at one `n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub phases: u64,
    pub local_hops: u64,
    pub max_local_hops: u64,
}

impl PhaseStats {
    pub fn mean_local_hops(&self) -> f64 {
        if self.phases == 0 {
            0.0
        } else {
            self.local_hops as f64 / self.phases as f64
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepOutcome {
    /// Sorted by `(n, seed, trial)`.
    pub records: Vec<SweepRecord>,
    /// Pairs redrawn because they were within `r_n` of each other.
    pub rejected_pairs: u64,
    pub routes_checked: u64,
    pub violations: Vec<(u64, u64, usize, RouteViolation)>,
    pub phase_stats: BTreeMap<u64, PhaseStats>,
}

struct JobOutput {
    records: Vec<SweepRecord>,
    rejected_pairs: u64,
    routes_checked: u64,
    violations: Vec<(u64, u64, usize, RouteViolation)>,
    phase_stats: PhaseStats,
}

/// Generates one graph per `(n, seed)` and routes `pairs_per_graph`
/// uniformly drawn pairs on it. Output does not depend on the thread count;
/// `PSWG_THREADS` caps the worker pool.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome, AnalysisError> {
    config.validate()?;
    let jobs: Vec<(u64, u64)> = config
        .n_grid
        .iter()
        .flat_map(|&n| (0..config.seeds_per_n as u64).map(move |k| (n, config.base_seed + k)))
        .collect();
    let outputs: Vec<(u64, JobOutput)> = with_thread_pool(|| {
        jobs.par_iter()
            .map(|&(n, seed)| (n, run_job(config, n, seed)))
            .collect()
    });
    let mut outcome = SweepOutcome::default();
    for (n, out) in outputs {
        outcome.records.extend(out.records);
        outcome.rejected_pairs += out.rejected_pairs;
        outcome.routes_checked += out.routes_checked;
        outcome.violations.extend(out.violations);
        let stats = outcome.phase_stats.entry(n).or_default();
        stats.phases += out.phase_stats.phases;
        stats.local_hops += out.phase_stats.local_hops;
        stats.max_local_hops = stats.max_local_hops.max(out.phase_stats.max_local_hops);
    }
    outcome.records.sort_by_key(|r| (r.n, r.seed, r.trial));
    Ok(outcome)
}

fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("PSWG_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    match threads {
        Some(k) if k > 0 => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not build a {k}-thread pool ({e}); using the global pool");
                f()
            }
        },
        _ => f(),
    }
}

fn run_job(config: &SweepConfig, n: u64, seed: u64) -> JobOutput {
    let base = SweepRecord {
        n,
        seed,
        trial: 0,
        alpha: config.alpha,
        c: config.c,
        dbar: config.dbar,
        s: None,
        t: None,
        initial_distance: None,
        hops_total: 0,
        hops_local: 0,
        hops_shortcut: 0,
        phases: 0,
        status: RecordStatus::GenerationError,
    };
    let mut out = JobOutput {
        records: Vec::with_capacity(config.pairs_per_graph),
        rejected_pairs: 0,
        routes_checked: 0,
        violations: Vec::new(),
        phase_stats: PhaseStats::default(),
    };
    let params = match ModelParams::with_convention(n, config.c, config.alpha, config.dbar, seed, config.convention) {
        Ok(p) => p,
        Err(e) => {
            log::warn!("n={n} seed={seed}: {e}");
            out.records
                .extend((0..config.pairs_per_graph).map(|trial| SweepRecord { trial, ..base.clone() }));
            return out;
        }
    };
    let graph = generate(&params);
    log::debug!(
        "n={n} seed={seed}: {} nodes, mean shortcut degree {:.3}",
        graph.len(),
        graph.mean_shortcut_degree()
    );
    let budget = config.hop_budget.for_graph(&graph);
    let r_n = params.local_radius();
    for trial in 0..config.pairs_per_graph {
        let mut rng = derived_rng(mix64(seed ^ n.rotate_left(32)) ^ trial as u64, TRIAL_STREAM);
        let mut pair = None;
        if graph.len() >= 2 {
            for _ in 0..MAX_PAIR_ATTEMPTS {
                let s = rng.random_range(0..graph.len()) as NodeId;
                let t = rng.random_range(0..graph.len()) as NodeId;
                if graph.distance(s, t) > r_n {
                    pair = Some((s, t));
                    break;
                }
                out.rejected_pairs += 1;
            }
        }
        let Some((s, t)) = pair else {
            out.records.push(SweepRecord {
                trial,
                status: RecordStatus::NoEligiblePair,
                ..base.clone()
            });
            continue;
        };
        let res = route(&graph, config.algorithm, s, t, budget).expect("ids are drawn from the node range");
        out.routes_checked += 1;
        out.violations
            .extend(validate_route(&graph, &res).into_iter().map(|v| (n, seed, trial, v)));
        if res.delivered() {
            out.phase_stats.phases += res.per_phase_local_hops.len() as u64;
            for &h in &res.per_phase_local_hops {
                out.phase_stats.local_hops += h as u64;
                out.phase_stats.max_local_hops = out.phase_stats.max_local_hops.max(h as u64);
            }
        }
        out.records.push(SweepRecord {
            trial,
            s: Some(s),
            t: Some(t),
            initial_distance: Some(res.initial_distance),
            hops_total: res.hops_total,
            hops_local: res.hops_local,
            hops_shortcut: res.hops_shortcut,
            phases: res.phases,
            status: res.status.into(),
            ..base.clone()
        });
    }
    out
}

/// Per-`n` aggregate of a record list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub n: u64,
    pub trials: usize,
    pub delivered: usize,
    pub dead_end: usize,
    pub budget_exhausted: usize,
    pub other_failures: usize,
    /// Mean hops over delivered routes.
    pub mean_hops: f64,
    pub stderr_hops: f64,
    pub mean_shortcut_hops: f64,
}

impl GridSummary {
    /// Share of routed trials that ended in `dead_end` or `budget_exhausted`.
    pub fn routing_failure_rate(&self) -> f64 {
        let routed = self.delivered + self.dead_end + self.budget_exhausted;
        if routed == 0 {
            0.0
        } else {
            (self.dead_end + self.budget_exhausted) as f64 / routed as f64
        }
    }
}

pub fn summarize(records: &[SweepRecord]) -> Vec<GridSummary> {
    let mut by_n: BTreeMap<u64, Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        by_n.entry(r.n).or_default().push(r);
    }
    by_n.into_iter()
        .map(|(n, rs)| {
            let hops: Vec<f64> = rs
                .iter()
                .filter(|r| r.status == RecordStatus::Delivered)
                .map(|r| r.hops_total as f64)
                .collect();
            let shortcut: f64 = rs
                .iter()
                .filter(|r| r.status == RecordStatus::Delivered)
                .map(|r| r.hops_shortcut as f64)
                .sum();
            let count = |s: RecordStatus| rs.iter().filter(|r| r.status == s).count();
            let k = hops.len() as f64;
            let mean = if hops.is_empty() {
                f64::NAN
            } else {
                hops.iter().sum::<f64>() / k
            };
            let stderr = if hops.len() < 2 {
                f64::NAN
            } else {
                (hops.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
            };
            GridSummary {
                n,
                trials: rs.len(),
                delivered: hops.len(),
                dead_end: count(RecordStatus::DeadEnd),
                budget_exhausted: count(RecordStatus::BudgetExhausted),
                other_failures: count(RecordStatus::GenerationError) + count(RecordStatus::NoEligiblePair),
                mean_hops: mean,
                stderr_hops: stderr,
                mean_shortcut_hops: if hops.is_empty() { f64::NAN } else { shortcut / k },
            }
        })
        .collect()
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> csv::Result<Vec<SweepRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n_grid: Vec<u64>, seeds: usize, pairs: usize) -> SweepConfig {
        SweepConfig {
            n_grid,
            seeds_per_n: seeds,
            pairs_per_graph: pairs,
            base_seed: 11,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn single_trial_is_replayable() {
        let cfg = config(vec![4096], 1, 1);
        let a = run_sweep(&cfg).unwrap();
        assert_eq!(a.records.len(), 1);
        assert_eq!(a.records[0].status, RecordStatus::Delivered);
        assert_eq!(run_sweep(&cfg).unwrap(), a);
        let r = &a.records[0];
        let g = generate(&ModelParams::new(4096, 4.0, 2.0, 1.0, 11).unwrap());
        let res = route(
            &g,
            Algorithm::ApproxGreedy,
            r.s.unwrap(),
            r.t.unwrap(),
            default_hop_budget(&g),
        )
        .unwrap();
        assert_eq!(res.hops_total, r.hops_total);
    }

    #[test]
    fn empty_grid_gives_no_records() {
        assert!(run_sweep(&config(vec![], 3, 3)).unwrap().records.is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(config(vec![4096, 1024], 1, 1).validate().is_err());
        assert!(config(vec![1024, 1024], 1, 1).validate().is_err());
        assert!(config(vec![1024], 0, 1).validate().is_err());
        assert!(config(vec![1024], 1, 0).validate().is_err());
        let mut cfg = config(vec![1024], 1, 1);
        cfg.delta = Some(0.5);
        assert!(cfg.validate().is_err());
        cfg.delta = Some(0.2);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn generation_errors_are_recorded() {
        let out = run_sweep(&config(vec![16, 1024], 1, 2)).unwrap();
        assert_eq!(out.records.len(), 4);
        assert!(out.records[..2]
            .iter()
            .all(|r| r.status == RecordStatus::GenerationError && r.s.is_none()));
        assert!(out.records[2..]
            .iter()
            .all(|r| r.status != RecordStatus::GenerationError));
    }

    #[test]
    fn records_are_sorted_and_pairs_are_far_enough() {
        let out = run_sweep(&config(vec![1024, 2048], 3, 4)).unwrap();
        assert_eq!(out.records.len(), 24);
        let keys: Vec<_> = out.records.iter().map(|r| (r.n, r.seed, r.trial)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        for r in &out.records {
            let r_n = (4.0 * (r.n as f64).ln()).sqrt();
            assert!(r.initial_distance.unwrap() > r_n);
        }
        assert!(out.violations.is_empty(), "{:?}", out.violations);
        assert_eq!(out.routes_checked, 24);
    }

    #[test]
    fn csv_round_trip_and_header() {
        let out = run_sweep(&config(vec![16, 1024], 1, 2)).unwrap();
        let mut buf = Vec::new();
        write_csv(&out.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert!(text.lines().nth(1).unwrap().ends_with(",generation_error"));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), out.records);

        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER);
    }

    #[test]
    fn summary_counts_statuses() {
        let out = run_sweep(&config(vec![1024], 2, 5)).unwrap();
        let s = summarize(&out.records);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].trials, 10);
        assert_eq!(s[0].delivered + s[0].dead_end + s[0].budget_exhausted, 10);
        assert!(s[0].mean_hops >= 1.0);
    }

    #[test]
    fn thresholds() {
        assert_eq!(lower_bound_threshold(1.0), Some(1.0 / 6.0));
        assert_eq!(lower_bound_threshold(3.0), Some(0.25));
        assert_eq!(lower_bound_threshold(2.0), None);
    }
}
