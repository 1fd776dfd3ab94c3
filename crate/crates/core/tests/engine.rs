use std::collections::HashSet;

use gossim::engine::*;
use gossim::metrics::*;
use gossim::protocol::{ProtocolConfig, Variant};
use gossim::topology::*;
use proptest::prelude::*;

fn single(origin: NodeId, variant: Variant, ttl: u32) -> SimulationConfig {
    SimulationConfig {
        workload: Workload::Single {
            origin: Some(origin),
        },
        total_steps: ttl + 4,
        cache_capacity: 4096,
        ..SimulationConfig::new(ProtocolConfig::new(variant, ttl))
    }
}

fn connected_er(n: usize, m: usize, seed: u64) -> OverlayGraph {
    GeneratorSpec::ErdosRenyi { nodes: n, edges: m }
        .generate_connected(seed)
        .unwrap()
        .0
}

#[test]
fn flooding_first_hops_are_bfs_distances() {
    for seed in 0..8 {
        let g = connected_er(60, 90, seed);
        let d = g.diameter().unwrap();
        for origin in [0, 17, 59] {
            let t = simulate(&g, &single(origin, Variant::Fp(1.0), d)).unwrap();
            let bfs = g.bfs_distances(origin);
            let firsts: Vec<_> = t.deliveries.iter().filter(|x| x.first).collect();
            assert_eq!(firsts.len(), g.node_count() - 1);
            for x in firsts {
                assert_eq!(Some(x.hops), bfs[x.receiver as usize]);
            }
        }
    }
}

#[test]
fn spanning_tree_forwarding_costs_one() {
    // Each non-origin node receives exactly one copy along a BFS tree.
    let g = connected_er(80, 160, 3);
    let mut t = EventTrace::default();
    for (id, origin) in [0u32, 40, 79].into_iter().enumerate() {
        t.generated(&Generation {
            msg: id as u32,
            origin,
            step: 0,
            ttl: 20,
        });
        for (v, d) in g.bfs_distances(origin).into_iter().enumerate() {
            let d = d.unwrap();
            if d > 0 {
                t.delivered(&Delivery {
                    msg: id as u32,
                    receiver: v as NodeId,
                    hops: d,
                    step: d,
                    first: true,
                });
            }
        }
    }
    assert_eq!(overhead_ratio(&t, 80).unwrap(), 1.0);
    assert_eq!(coverage(&t, 80).unwrap(), 1.0);
}

#[test]
fn ttl_bounds_reach() {
    let g = OverlayGraph::path(10);
    for ttl in 1..6 {
        let t = simulate(&g, &single(0, Variant::Fp(1.0), ttl)).unwrap();
        let reached: Vec<_> = t.deliveries.iter().filter(|d| d.first).map(|d| d.receiver).collect();
        assert_eq!(reached, (1..=ttl + 1).collect::<Vec<_>>());
    }
}

#[test]
fn free_riders_block_relaying() {
    // On a star with the hub as the only free rider, leaves hear only the
    // hub's own messages.
    let g = OverlayGraph::star(6);
    let mut cfg = SimulationConfig::new(ProtocolConfig::new(Variant::Fp(1.0), 4));
    cfg.total_steps = 300;
    cfg.free_rider_fraction = 0.2;
    let riders = (0..200u64)
        .map(|s| assign_free_riders(6, 0.2, s))
        .position(|r| r == [0])
        .expect("some seed picks the hub");
    cfg.seed = riders as u64;
    let t = simulate(&g, &cfg).unwrap();
    let hub_msgs: HashSet<u32> = t.generations.iter().filter(|x| x.origin == 0).map(|x| x.msg).collect();
    assert!(!hub_msgs.is_empty());
    for d in &t.deliveries {
        if d.receiver != 0 {
            assert!(hub_msgs.contains(&d.msg), "leaf {} got a relayed message", d.receiver);
        }
    }
}

#[test]
fn ddf1_on_regular_graphs_replays_fixed_gossip() {
    for (k, alpha) in [(4usize, 0.8), (6, 0.5), (8, 1.3)] {
        let g = generate_kregular(120, k, k as u64).unwrap();
        let gamma = (k as f64).powf(-alpha);
        let mk = |v| SimulationConfig {
            total_steps: 200,
            seed: 11,
            degree_knowledge: DegreeKnowledge::Preloaded,
            ..SimulationConfig::new(ProtocolConfig::new(v, 6))
        };
        let a = simulate(&g, &mk(Variant::Ddf1(alpha))).unwrap();
        let b = simulate(&g, &mk(Variant::Fp(gamma))).unwrap();
        assert_eq!(a, b, "k={k}");
        assert!(a.total_sends() > 0);
    }
}

#[test]
fn sweep_points_are_means_of_runs() {
    let graphs: Vec<_> = (0..3).map(|s| generate_kregular(50, 4, s).unwrap()).collect();
    let base = SimulationConfig {
        total_steps: 80,
        seed: 9,
        ..SimulationConfig::new(ProtocolConfig::new(Variant::Fp(0.5), 6))
    };
    let grid = [0.3, 0.6, 1.0];
    let runs = sweep_runs(&graphs, &base, &grid, 2, CoverageBase::ExcludeOrigin).unwrap();
    let points = sweep(&graphs, &base, &grid, 2, CoverageBase::ExcludeOrigin).unwrap();
    for ((x, reports), p) in runs.iter().zip(&points) {
        assert_eq!(reports.len(), 6);
        let mean = |f: fn(&RunReport) -> f64| reports.iter().map(f).sum::<f64>() / 6.0;
        assert_eq!(*x, p.param);
        assert!((p.coverage - mean(|r| r.coverage)).abs() < 1e-12);
        assert!((p.overhead - mean(|r| r.overhead_ratio)).abs() < 1e-12);
    }
    // a single run is its own point
    let one = sweep(&graphs[..1], &base, &[0.6], 1, CoverageBase::ExcludeOrigin).unwrap();
    let mut cfg = base;
    cfg.protocol.variant = Variant::Fp(0.6);
    cfg.seed = run_seed(base.seed, 0, 0);
    let r = RunReport::from_trace(&simulate(&graphs[0], &cfg).unwrap(), 50, CoverageBase::ExcludeOrigin).unwrap();
    assert_eq!((one[0].coverage, one[0].overhead, one[0].delay), (r.coverage, r.overhead_ratio, r.mean_delay));
    // flooding dominates thinner gossip
    assert!(points.iter().all(|p| points[2].coverage >= p.coverage));
}

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![
        (0.0f64..=1.0).prop_map(Variant::Fp),
        (0.0f64..=1.0).prop_map(Variant::Pb),
        (0.05f64..3.0).prop_map(Variant::Ddf1),
        (0.05f64..3.0).prop_map(Variant::Ddf2),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn runs_respect_causality(
        seed in any::<u64>(),
        v in variant(),
        ttl in 1u32..8,
        cache in 1usize..64,
        riders in 0.0f64..0.5,
    ) {
        let g = connected_er(40, 70, seed % 1000);
        let cfg = SimulationConfig {
            total_steps: 60,
            cache_capacity: cache,
            free_rider_fraction: riders,
            seed,
            ..SimulationConfig::new(ProtocolConfig::new(v, ttl))
        };
        let mut both = (EventTrace::default(), ReportAccumulator::new());
        let stats = run(&g, &cfg, &mut both).unwrap();
        let t = both.0;
        prop_assert_eq!(stats.sends, t.total_sends());
        prop_assert_eq!(stats.sends, stats.deliveries);
        let dist: Vec<Vec<Option<u32>>> = g.nodes().map(|u| g.bfs_distances(u)).collect();
        let mut firsts = HashSet::new();
        for d in &t.deliveries {
            let gen = &t.generations[d.msg as usize];
            prop_assert_eq!(d.step, gen.step + d.hops);
            prop_assert!(d.hops >= 1 && d.hops <= ttl + 1);
            if d.first {
                prop_assert!(firsts.insert((d.msg, d.receiver)));
                prop_assert!(d.receiver != gen.origin);
                prop_assert!(Some(d.hops) >= dist[gen.origin as usize][d.receiver as usize]);
            }
            prop_assert!(d.step < cfg.total_steps + ttl + 2);
        }
        prop_assert!(t.generations.iter().all(|x| x.step < cfg.generation_limit()));
        if let Ok(r) = both.1.finish(40, CoverageBase::ExcludeOrigin) {
            prop_assert!((0.0..=1.0).contains(&r.coverage));
            if r.coverage == 1.0 {
                prop_assert!(r.overhead_ratio >= 1.0);
            }
            if let Some(delay) = r.mean_delay {
                prop_assert!(delay >= 1.0);
            }
        }
    }

    #[test]
    fn flooding_metrics_ignore_labels(seed in any::<u64>(), ttl in 1u32..6, origin in 0u32..30) {
        let g = connected_er(30, 45, seed % 500);
        let mut perm: Vec<NodeId> = (0..30).collect();
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let edges: Vec<_> = g.edges().map(|(u, v)| (perm[u as usize], perm[v as usize])).collect();
        let h = OverlayGraph::from_edges(30, &edges).unwrap();
        let a = simulate(&g, &single(origin, Variant::Fp(1.0), ttl)).unwrap();
        let b = simulate(&h, &single(perm[origin as usize], Variant::Fp(1.0), ttl)).unwrap();
        let ra = RunReport::from_trace(&a, 30, CoverageBase::ExcludeOrigin).unwrap();
        let rb = RunReport::from_trace(&b, 30, CoverageBase::ExcludeOrigin).unwrap();
        prop_assert_eq!(ra, rb);
    }
}
