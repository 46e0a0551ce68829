use pswg::analysis::{
    estimate_cdelta_shortcut_probability, estimate_hit_probability, local_connectivity, nodes_in_bracket, run_sweep,
    summarize, RecordStatus, SweepConfig,
};
use pswg::{generate, ModelParams, NodeId};

fn graph(n: u64, alpha: f64, seed: u64) -> pswg::Graph {
    generate(&ModelParams::new(n, 4.0, alpha, 1.0, seed).unwrap())
}

#[test]
fn annulus_hit_probability_clears_lower_bound() {
    let g = graph(100_000, 2.0, 11);
    let r = 16.0 * g.params().local_radius();
    assert!(r <= g.params().shortcut_range());
    let (mut hits, mut samples, mut bound_sum) = (0usize, 0usize, 0.0);
    for k in 0..20u32 {
        let t = g.position(k * 4000);
        let bracket = nodes_in_bracket(&g, t, r);
        let est = estimate_hit_probability(&g, t, r, &bracket).unwrap();
        hits += est.hits;
        samples += est.samples;
        bound_sum += est.lower_bound * est.samples as f64;
    }
    let p = hits as f64 / samples as f64;
    let bound = bound_sum / samples as f64;
    let se = (bound * (1.0 - bound) / samples as f64).sqrt();
    assert!(
        p >= bound - 3.0 * se,
        "hit rate {p} below bound {bound} ({samples} samples)"
    );
}

#[test]
fn disc_hit_probability_below_bound_for_small_alpha() {
    let g = graph(100_000, 1.0, 5);
    let all: Vec<NodeId> = (0..g.len() as NodeId).collect();
    let (mut hits, mut samples, mut bound) = (0usize, 0usize, 0.0);
    for k in 0..10u32 {
        let est = estimate_cdelta_shortcut_probability(&g, g.position(k * 9000), 0.2, &all).unwrap();
        hits += est.hits;
        samples += est.samples;
        bound = est.bound;
    }
    let expected = 16.0 * 100_000f64.powf(-0.1);
    assert!((bound - expected).abs() < 1e-9 * expected);
    assert!((hits as f64 / samples as f64) < bound);
}

#[test]
fn local_graph_is_connected_at_c4() {
    for seed in 0..3 {
        let g = graph(50_000, 2.0, seed);
        let conn = local_connectivity(&g);
        assert!(conn.is_connected, "seed {seed}: {} components", conn.components);
        assert_eq!(conn.giant_fraction, 1.0);
    }
}

#[test]
fn sweep_is_deterministic_and_delivers() {
    let config = SweepConfig {
        n_grid: vec![1024, 4096, 16384],
        seeds_per_n: 2,
        pairs_per_graph: 10,
        base_seed: 9,
        ..SweepConfig::default()
    };
    let a = run_sweep(&config).unwrap();
    let b = run_sweep(&config).unwrap();
    assert_eq!(a.records, b.records);
    assert!(a.violations.is_empty(), "{:?}", a.violations);
    assert!(a.records.iter().all(|r| r.status == RecordStatus::Delivered));
    let summary = summarize(&a.records);
    assert_eq!(summary.len(), 3);
    assert!(summary[0].mean_hops < summary[2].mean_hops);
}
