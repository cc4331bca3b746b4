use std::collections::BTreeMap;

use proptest::prelude::*;
use sleeping_coloring::coloring::{
    phase1, phase2_degree_reduction, phase3_interim_coloring, phase3_tournament_reduction,
    run_pipeline, InterimColoring, PipelineConfig,
};
use sleeping_coloring::graph::{build_graph, generate, Color, ColoringInstance, Family, Graph, NodeId, Validity};
use sleeping_coloring::metrics::Phase;

fn default_instance(g: Graph) -> ColoringInstance {
    ColoringInstance::with_default_lists(g)
}

/// Independent properness check over the original lists.
fn assert_proper_total(inst: &ColoringInstance, coloring: &sleeping_coloring::Coloring) {
    let g = inst.graph();
    for i in 0..g.node_count() {
        let c = coloring.get(g.id(i)).unwrap_or_else(|| panic!("node {} uncolored", g.id(i)));
        assert!(inst.list(i).contains(&c), "node {} got {c} outside its list", g.id(i));
    }
    for (u, v) in g.edges() {
        assert_ne!(coloring.get(g.id(u)), coloring.get(g.id(v)), "edge {}-{}", g.id(u), g.id(v));
    }
}

#[test]
fn single_node() {
    let inst = default_instance(build_graph(&[], &[42]).unwrap());
    for seed in 0..200 {
        let run = run_pipeline(&inst, &PipelineConfig::with_seed(seed)).unwrap();
        assert_eq!(run.coloring.get(NodeId(42)), Some(Color(1)));
        assert!(run.metrics.worst_case_awake <= 4);
    }
}

#[test]
fn triangle_seed_sweep() {
    let inst = default_instance(build_graph(&[(0, 1), (1, 2), (0, 2)], &[0, 1, 2]).unwrap());
    for seed in 0..1000 {
        let run = run_pipeline(&inst, &PipelineConfig::with_seed(seed)).unwrap();
        assert_proper_total(&inst, &run.coloring);
        assert_eq!(run.metrics.validity, Validity::ProperTotal);
    }
}

#[test]
fn edgeless_graphs_are_cheap() {
    let ids: Vec<u64> = (0..50).collect();
    let inst = default_instance(build_graph(&[], &ids).unwrap());
    for seed in 0..50 {
        let run = run_pipeline(&inst, &PipelineConfig::with_seed(seed)).unwrap();
        assert_proper_total(&inst, &run.coloring);
        // At most every trial iteration plus one leaf round.
        let k = PipelineConfig::default().iterations(50) as u64;
        assert!(run.metrics.worst_case_awake <= 2 * k + 1);
        assert_eq!(run.metrics.worst_awake_in(Phase::Two), 0);
    }
}

#[test]
fn identical_config_identical_run() {
    let inst = default_instance(generate(Family::Gnp(0.05), 300, 9).unwrap());
    let config = PipelineConfig {
        trace: true,
        phase2_threshold: Some(12),
        ..PipelineConfig::with_seed(5)
    };
    let a = run_pipeline(&inst, &config).unwrap();
    let b = run_pipeline(&inst, &config).unwrap();
    assert_eq!(a.coloring, b.coloring);
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.trace.unwrap().render(), b.trace.unwrap().render());
}

#[test]
fn forced_phase2_stays_proper_and_spares_low_nodes() {
    for seed in 0..40 {
        let inst = default_instance(generate(Family::Gnp(0.08), 200, seed).unwrap());
        let config = PipelineConfig {
            k1: Some(1),
            phase2_threshold: Some(10),
            trace: true,
            ..PipelineConfig::with_seed(seed)
        };
        let run = run_pipeline(&inst, &config).unwrap();
        assert_proper_total(&inst, &run.coloring);
        assert!(run.metrics.worst_awake_in(Phase::Two) > 0);
        assert!(!run.metrics.phase2_incomplete);
        // Every node colored by phase 2 or 3 is accounted for in the trace.
        let counts = run.trace.unwrap().awake_counts();
        for (v, m) in &run.metrics.per_node {
            assert_eq!(counts.get(v).copied().unwrap_or(0), m.awake_rounds, "node {v}");
        }
        assert!(run.phase3.residual_max_degree < 10);
    }
}

#[test]
fn phase1_postconditions() {
    let inst = default_instance(generate(Family::Gnp(0.05), 400, 3).unwrap());
    for seed in 0..30 {
        let k = 3;
        let res = phase1(&inst, k, seed).unwrap();
        let g = inst.graph();
        for (v, c) in res.coloring.iter() {
            assert!(inst.list(g.index_of(v).unwrap()).contains(&c));
        }
        for (u, v) in g.edges() {
            let (a, b) = (res.coloring.get(g.id(u)), res.coloring.get(g.id(v)));
            assert!(a.is_none() || a != b);
        }
        // The residual holds exactly the uncolored nodes, with lists that
        // avoid their colored neighbors and stay admissible.
        let r = res.residual.graph();
        assert_eq!(r.node_count() + res.coloring.len(), g.node_count());
        for i in 0..r.node_count() {
            let v = r.id(i);
            assert!(res.coloring.get(v).is_none());
            let gi = g.index_of(v).unwrap();
            for &j in g.neighbors(gi) {
                if let Some(c) = res.coloring.get(g.id(j)) {
                    assert!(!res.residual.list(i).contains(&c));
                }
            }
            assert!(res.residual.list(i).len() > r.degree(i));
        }
        for m in res.metrics.per_node.values() {
            assert_eq!(m.awake_rounds % 2, 0);
            assert!(m.awake_rounds <= 2 * k as u64);
        }
    }
}

#[test]
fn empty_graph_colors_half_in_one_iteration() {
    let ids: Vec<u64> = (0..10).collect();
    let inst = default_instance(build_graph(&[], &ids).unwrap());
    let runs = 10_000;
    let colored: usize = (0..runs).map(|s| phase1(&inst, 1, s).unwrap().coloring.len()).sum();
    let frac = colored as f64 / (runs as f64 * 10.0);
    assert!((frac - 0.5).abs() <= 0.02, "{frac}");
}

#[test]
fn uncolored_count_decays_geometrically() {
    let inst = default_instance(generate(Family::Gnp(0.04), 200, 1).unwrap());
    let (n, runs, k) = (200.0, 1000u64, 10u32);
    let mut sums = vec![0u64; k as usize];
    for seed in 0..runs {
        let m = phase1(&inst, k, seed).unwrap().metrics;
        for (i, s) in sums.iter_mut().enumerate() {
            *s += m.uncolored_after(i + 1);
        }
    }
    let slack = 3.0 * (n * runs as f64).sqrt() / runs as f64;
    for (i, s) in sums.iter().enumerate() {
        let mean = *s as f64 / runs as f64;
        let bound = n * 0.75f64.powi(i as i32 + 1) + slack;
        assert!(mean <= bound, "after {} iterations: {mean} > {bound}", i + 1);
    }
}

#[test]
fn star_center_leaves_threshold_quickly() {
    let edges: Vec<(u64, u64)> = (1..=64).map(|i| (0, i)).collect();
    let ids: Vec<u64> = (0..=64).collect();
    let inst = default_instance(build_graph(&edges, &ids).unwrap());
    let runs = 1000;
    let mut total = 0u64;
    for seed in 0..runs {
        let res = phase2_degree_reduction(&inst, 8, 40, seed).unwrap();
        assert!(!res.incomplete);
        assert!(res.residual.graph().node_count() == 0 || res.residual.graph().max_degree() < 8);
        total += res.iterations;
        // Leaves are below the threshold and never wake up.
        for (v, m) in &res.metrics.per_node {
            if v.0 != 0 {
                assert_eq!(m.awake_rounds, 0);
            }
        }
    }
    let mean = total as f64 / runs as f64;
    assert!(mean <= 12.0, "{mean}");
}

#[test]
fn phase2_noop_below_threshold() {
    let inst = default_instance(generate(Family::Cycle, 30, 0).unwrap());
    let res = phase2_degree_reduction(&inst, 3, 40, 0).unwrap();
    assert!(res.coloring.is_empty());
    assert!(res.metrics.per_node.values().all(|m| m.awake_rounds == 0));
    assert_eq!(res.residual, inst);
}

#[test]
fn phase2_failure_rate_is_small() {
    let runs = 200;
    let mut failures = 0;
    for seed in 0..runs {
        let inst = default_instance(generate(Family::Gnp(0.05), 500, seed).unwrap());
        let res = phase2_degree_reduction(&inst, 16, 40, seed).unwrap();
        let g = res.residual.graph();
        assert!(res.incomplete == (g.node_count() > 0 && g.max_degree() >= 16));
        for i in 0..g.node_count() {
            assert!(res.residual.list(i).len() > g.degree(i));
        }
        failures += res.incomplete as u32;
    }
    assert!((failures as f64) / (runs as f64) < 0.01, "{failures} failures");
}

fn check_interim(inst: &ColoringInstance, interim: &InterimColoring) {
    let g = inst.graph();
    let d = g.max_degree() as u128;
    assert!(interim.palette <= (9 * d * d).max(1));
    for (u, v) in g.edges() {
        assert_ne!(interim.colors[&g.id(u)], interim.colors[&g.id(v)]);
    }
    assert!(interim.colors.values().all(|&c| (c as u128) < interim.palette));
}

#[test]
fn interim_examples() {
    let ids: Vec<u64> = (0..6).collect();
    let edgeless = default_instance(build_graph(&[], &ids).unwrap());
    let i = phase3_interim_coloring(&edgeless).unwrap();
    check_interim(&edgeless, &i);
    assert!(i.colors.values().all(|&c| c == 0));

    let c5 = default_instance(generate(Family::Cycle, 5, 0).unwrap());
    let i = phase3_interim_coloring(&c5).unwrap();
    check_interim(&c5, &i);
    assert!(i.palette <= 36);
    assert_eq!(i, phase3_interim_coloring(&c5).unwrap());

    for seed in 0..1000 {
        let g = generate(Family::Gnp(0.15), 30, seed).unwrap();
        let inst = default_instance(g);
        check_interim(&inst, &phase3_interim_coloring(&inst).unwrap());
    }
}

#[test]
fn tournament_on_an_edge() {
    let g = build_graph(&[(0, 1)], &[0, 1]).unwrap();
    let inst = ColoringInstance::new(g, vec![vec![Color(1), Color(2)]; 2]).unwrap();
    let interim = InterimColoring {
        colors: BTreeMap::from([(NodeId(0), 0), (NodeId(1), 1)]),
        palette: 2,
        rounds: 0,
    };
    let run = phase3_tournament_reduction(&inst, &interim).unwrap();
    assert_eq!(run.coloring.get(NodeId(0)), Some(Color(1)));
    assert_eq!(run.coloring.get(NodeId(1)), Some(Color(2)));
    // Preliminary round 1, leaf 0 at round 2, announce at 3, leaf 1 at 4.
    assert_eq!(run.trace.awake_rounds_of(NodeId(0)), vec![1, 2, 3]);
    assert_eq!(run.trace.awake_rounds_of(NodeId(1)), vec![1, 3, 4]);
}

#[test]
fn tournament_single_class() {
    let ids: Vec<u64> = (0..5).collect();
    let inst = default_instance(build_graph(&[], &ids).unwrap());
    let interim = phase3_interim_coloring(&inst).unwrap();
    let run = phase3_tournament_reduction(&inst, &interim).unwrap();
    assert_eq!(run.classes, 1);
    assert!(run.awake.values().all(|&a| a <= 3));
    assert!(run.coloring.iter().all(|(_, c)| c == Color(1)));
}

fn arb_instance() -> impl Strategy<Value = ColoringInstance> {
    (2usize..24, proptest::collection::vec(any::<bool>(), 24 * 23 / 2), 0u32..3, any::<u64>()).prop_map(
        |(n, bits, extra, salt)| {
            let mut edges = Vec::new();
            let mut k = 0;
            for u in 0..n as u64 {
                for v in u + 1..n as u64 {
                    if bits[k] && (salt >> (k % 64)) & 1 == 1 {
                        edges.push((u, v));
                    }
                    k += 1;
                }
            }
            let ids: Vec<u64> = (0..n as u64).map(|i| i * 3 + (salt % 5)).collect();
            let edges: Vec<(u64, u64)> = edges.iter().map(|&(u, v)| (ids[u as usize], ids[v as usize])).collect();
            let g = build_graph(&edges, &ids).unwrap();
            let lists = (0..n)
                .map(|i| {
                    let len = g.degree(i) as u32 + 1 + extra;
                    (0..len).map(|c| Color(1 + c * 2 + (i as u32 % 3))).collect()
                })
                .collect();
            ColoringInstance::new(g, lists).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pipeline_is_always_proper(inst in arb_instance(), seed in any::<u64>(), k1 in 1u32..4, t in 2usize..6) {
        let config = PipelineConfig {
            k1: Some(k1),
            phase2_threshold: Some(t),
            trace: true,
            ..PipelineConfig::with_seed(seed)
        };
        let run = run_pipeline(&inst, &config).unwrap();
        assert_proper_total(&inst, &run.coloring);
        let m = &run.metrics;
        prop_assert!(m.average_awake <= num_rational::Ratio::from_integer(m.worst_case_awake));
        prop_assert!(m.worst_case_awake <= m.total_rounds);
        let colored_p1 = m.per_node.values().filter(|x| x.colored_in == Some(Phase::One)).count() as u64;
        prop_assert_eq!(m.decay_histogram.iter().sum::<u64>(), colored_p1);
        let counts = run.trace.unwrap().awake_counts();
        for (v, x) in &m.per_node {
            prop_assert_eq!(counts.get(v).copied().unwrap_or(0), x.awake_rounds);
            prop_assert_eq!(x.awake_by_phase.iter().sum::<u64>(), x.awake_rounds);
        }
    }
}
