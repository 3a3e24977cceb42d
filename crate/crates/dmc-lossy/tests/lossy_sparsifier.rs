use dmc_graph::*;
use dmc_lossy::*;
use dmc_oracle::{conductance_exact, enumerate_all_cuts, stoer_wagner};
use dmc_sequence::{build_sequence, SequenceParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn complete(n: usize, w: u64, offset: usize) -> Vec<(usize, usize, u64)> {
    let mut e = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            e.push((u + offset, v + offset, w));
        }
    }
    e
}

fn two_k5_bridge() -> WeightedMultigraph {
    let mut e = complete(5, 1, 0);
    e.extend(complete(5, 1, 5));
    e.push((4, 5, 1));
    WeightedMultigraph::from_edges(10, &e).unwrap()
}

fn random_graph(seed: u64, n: usize, m: usize, max_w: u64) -> WeightedMultigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::new(n);
    for v in 1..n {
        b.add_edge(rng.gen_range(0..v), v, rng.gen_range(1..=max_w)).unwrap();
    }
    for _ in n - 1..m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        b.add_edge(u, v, rng.gen_range(1..=max_w)).unwrap();
    }
    b.build().unwrap()
}

fn max_degree(g: &WeightedMultigraph) -> Weight {
    g.degrees().into_iter().max().unwrap()
}

/// Two-vertex conductance straight from the definition.
fn pair_conductance(g: &WeightedMultigraph) -> f64 {
    let cross = g.total_edge_weight() as f64;
    cross / g.degree(0).min(g.degree(1)) as f64
}

#[test]
fn single_vertex_expander_is_loops_only() {
    let e = explicit_expander(1).unwrap();
    assert_eq!(e.graph.vertex_count(), 1);
    assert_eq!(e.graph.edge_count(), 0);
    assert!(e.graph.self_loop(0) > 0);
    assert!(e.graph.degree(0) <= 9);
}

#[test]
fn two_vertex_expander_is_a_bounded_pair() {
    let e = explicit_expander(2).unwrap();
    let g = &e.graph;
    assert_eq!(g.edge_count(), 1);
    assert!(max_degree(g) <= 9);
    let direct = pair_conductance(g);
    assert!((e.alpha0.unwrap() - direct).abs() < 1e-12);
    assert!(direct >= ALPHA0);
}

#[test]
fn sixteen_vertex_expander_meets_alpha0_exactly() {
    let e = explicit_expander(16).unwrap();
    let c = conductance_exact(&e.graph).unwrap();
    assert!(max_degree(&e.graph) <= 9);
    assert!(c.value >= ALPHA0, "Φ(H16) = {}", c.value);
    assert_eq!(e.alpha0, Some(c.value));
}

#[test]
fn family_is_certified_at_every_small_size() {
    for n in 2..=EXACT_CERT_LIMIT {
        let e = explicit_expander(n).unwrap();
        assert!(max_degree(&e.graph) <= 8, "n = {n}");
        assert!(e.graph.is_connected());
        assert!(e.alpha0.unwrap() >= ALPHA0, "n = {n}: {:?}", e.alpha0);
    }
}

#[test]
fn family_keeps_spectral_expansion_at_larger_sizes() {
    for n in [17, 40, 100, 500, 2000] {
        let e = explicit_expander(n).unwrap();
        assert_eq!(e.method, Some(dmc_decomp::CertMethod::SpectralSurrogate));
        assert!(max_degree(&e.graph) <= 8);
        assert!(e.alpha0.unwrap() >= ALPHA0, "n = {n}: {:?}", e.alpha0);
    }
}

#[test]
fn empty_expander_is_an_error() {
    assert_eq!(explicit_expander(0).unwrap_err(), LossyError::EmptyExpander);
    assert_eq!(degree_mapped_expander(&[]).unwrap_err(), LossyError::EmptyExpander);
}

#[test]
fn unit_demands_give_the_plain_family() {
    let e = degree_mapped_expander(&[1.0; 12]).unwrap();
    assert_eq!(e.graph, expander_graph(12));
    for v in 0..12 {
        let d = e.graph.degree(v);
        assert!((1..=9).contains(&d));
    }
}

#[test]
fn demand_pair_four_four() {
    let e = degree_mapped_expander(&[4.0, 4.0]).unwrap();
    let g = &e.graph;
    for v in 0..2 {
        assert!((4..=36).contains(&g.degree(v)), "deg {v} = {}", g.degree(v));
    }
    // Contraction never lowers conductance.
    let before = explicit_expander(8).unwrap().alpha0.unwrap();
    assert!(pair_conductance(g) >= before - 1e-12);
    assert!((e.alpha0.unwrap() - pair_conductance(g)).abs() < 1e-12);
}

#[test]
fn demand_below_one_is_rejected() {
    let err = degree_mapped_expander(&[2.0, 0.5]).unwrap_err();
    assert!(matches!(err, LossyError::DemandBelowOne { vertex: 1, .. }));
    assert!(degree_mapped_expander(&[f64::NAN]).is_err());
}

#[test]
fn random_demand_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let k = rng.gen_range(1..=10);
        let d: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..30.0)).collect();
        let e = degree_mapped_expander(&d).unwrap();
        for (v, &dv) in d.iter().enumerate() {
            let deg = e.graph.degree(v) as f64;
            assert!(dv <= deg && deg <= 9.0 * dv, "d = {dv}, deg = {deg}");
        }
    }
}

#[test]
fn min_delta_values() {
    assert_eq!(min_delta(0.05, 0.125), 68);
    assert_eq!(min_delta(0.5, 0.01), 3);
    assert_eq!(min_delta(0.1, 0.1), 27);
}

#[test]
fn small_delta_is_a_parameter_error() {
    let g = two_k5_bridge();
    let err = build_lossy(&g, 1, 10, &LossyParams::default()).unwrap_err();
    assert_eq!(err, LossyError::DeltaTooSmall { delta: 10, required: 68 });
    assert_eq!(build_lossy(&g, 0, 68, &LossyParams::default()).unwrap_err(), LossyError::ZeroLambda);
}

#[test]
fn routing_a_single_edge() {
    let g = two_k5_bridge();
    let seq = build_sequence(&g, &SequenceParams::default()).unwrap();
    assert_eq!(seq.levels[1].graph.vertex_count(), 2);
    let h_next = WeightedMultigraph::from_edges(2, &[(0, 1, 1)]).unwrap();
    let h0 = route_boundary_edges(&seq, 0, &h_next).unwrap();
    assert_eq!(h0.edge_count(), 1);
    let e = h0.edges()[0];
    assert_eq!((e.u, e.v, e.w), (4, 5, 1));
    let map = &seq.levels[0].contraction_map;
    assert_ne!(map[e.u], map[e.v]);
}

#[test]
fn routing_lands_on_the_only_boundary_vertex() {
    let g = two_k5_bridge();
    let seq = build_sequence(&g, &SequenceParams::default()).unwrap();
    let h_next = WeightedMultigraph::from_edges(2, &[(0, 1, 17)]).unwrap();
    let h0 = route_boundary_edges(&seq, 0, &h_next).unwrap();
    assert_eq!(h0.degree(4), 17);
    assert_eq!(h0.degree(5), 17);
    assert_eq!(h0.total_edge_weight(), 17);
    // Cap: ⌈deg_H(u)·w(E(v, rest))/deg_G(u)⌉ = ⌈17·1/1⌉.
    let g1 = &seq.levels[1].graph;
    assert_eq!(g1.degree(0), 1);
}

#[test]
fn routing_conserves_degree_and_respects_caps() {
    for seed in 0..12 {
        let g = random_graph(seed, 30, 70, 3);
        let seq = build_sequence(&g, &SequenceParams::default()).unwrap();
        let lt = stoer_wagner(&g).unwrap().value.max(1);
        let lossy = build_lossy_on(&g, &seq, lt, 68, &LossyParams::default()).unwrap();
        for i in 0..seq.depth() {
            let lvl = &seq.levels[i];
            let gi = &lvl.graph;
            let g_next = &seq.levels[i + 1].graph;
            let h_next = &lossy.levels[i + 1];
            let h0 = route_boundary_edges(&seq, i, h_next).unwrap();
            let map = &lvl.contraction_map;
            let mut incidence = vec![0u64; g_next.vertex_count()];
            for e in h0.edges() {
                assert_ne!(map[e.u], map[e.v]);
                incidence[map[e.u]] += e.w;
                incidence[map[e.v]] += e.w;
            }
            for j in 0..g_next.vertex_count() {
                assert_eq!(incidence[j], h_next.boundary_degree(j), "seed {seed} level {i} cluster {j}");
            }
            for v in 0..gi.vertex_count() {
                let j = map[v];
                let bnd: u64 = gi.incident(v).filter(|e| map[e.other(v)] != j).map(|e| e.w).sum();
                let dg = g_next.degree(j) as u128;
                let cap = if dg == 0 { 0 } else { (h_next.degree(j) as u128 * bnd as u128).div_ceil(dg) };
                assert!(h0.degree(v) as u128 <= cap, "seed {seed} level {i} vertex {v}");
            }
        }
    }
}

#[test]
fn single_expander_cluster_sandwich_on_k8() {
    let g = WeightedMultigraph::from_edges(8, &complete(8, 1, 0)).unwrap();
    let seq = build_sequence(&g, &SequenceParams::default()).unwrap();
    assert_eq!(seq.depth(), 1);
    let lossy = build_lossy_on(&g, &seq, 7, 68, &LossyParams::default()).unwrap();
    assert!(lossy.cluster_sandwich_holds);
    // H is exactly one degree-mapped expander on the demands deg·Δ/λ̃.
    let demands: Vec<f64> = (0..8).map(|v| g.degree(v) as f64 * 68.0 / 7.0).collect();
    assert_eq!(lossy.h, degree_mapped_expander(&demands).unwrap().graph);
    for v in 0..8 {
        let scaled = lossy.weight() * lossy.h.degree(v) as f64;
        let d = g.degree(v) as f64;
        assert!(d <= scaled + 1e-9 && scaled <= 9.0 * d + 1e-9);
    }
    assert!(lossy.sandwich.iter().all(|s| s.holds));
    assert!(lossy.gamma_exhaustive);
}

#[test]
fn two_k5_cut_ratios_over_every_cut() {
    let g = two_k5_bridge();
    let lossy = build_lossy(&g, 1, 68, &LossyParams::default()).unwrap();
    assert!(lossy.gamma_exhaustive);
    // The bridge is realized by routed edges between its two endpoints only.
    let cross: Vec<_> = lossy.h.edges().iter().filter(|e| (e.u < 5) != (e.v < 5)).collect();
    assert!(!cross.is_empty());
    assert!(cross.iter().all(|e| (e.u.min(e.v), e.u.max(e.v)) == (4, 5)));
    let gamma = lossy.gamma_measured;
    let mut checked = 0;
    for c in enumerate_all_cuts(&g).unwrap() {
        let mask = c.mask(10);
        let gc = c.weight as f64;
        let hc = lossy.scaled_cut(&mask);
        assert!(gc / gamma <= hc * (1.0 + 1e-12) && hc <= gamma * gc * (1.0 + 1e-12));
        checked += 1;
    }
    assert_eq!(checked, 511);
    assert!(gamma.is_finite());
}

#[test]
fn level_sandwich_on_random_graphs() {
    for seed in 0..10 {
        let g = random_graph(100 + seed, 40, 120, 2);
        let lt = stoer_wagner(&g).unwrap().value.max(1);
        let lossy = build_lossy(&g, lt, 68, &LossyParams::default()).unwrap();
        let l = lossy.depth;
        assert_eq!(lossy.sandwich.len(), l + 1);
        for s in &lossy.sandwich {
            assert!(s.holds, "seed {seed}: {s:?}");
            assert!(s.factor <= 10.0 * (l + 1) as f64);
            if s.min_ratio.is_finite() {
                assert!(s.min_ratio >= 1.0 - 1e-12 && s.max_ratio <= s.factor + 1e-12);
            }
        }
        assert!(lossy.cluster_sandwich_holds);
        assert!(lossy.gamma_measured.is_finite());
    }
}

#[test]
fn cluster_expanders_keep_their_certified_expansion() {
    for seed in 0..5 {
        let g = random_graph(200 + seed, 24, 80, 2);
        let lt = stoer_wagner(&g).unwrap().value.max(1);
        let lossy = build_lossy(&g, lt, 68, &LossyParams::default()).unwrap();
        if let Some(a) = lossy.alpha0 {
            assert!(a >= ALPHA0, "seed {seed}: {a}");
        }
    }
}

/// Every level-`i` cluster of `Hⁱ` restricted to its vertices has conductance
/// at least the certified constant, and the routed edges leaving a cluster are
/// within `(10L+1)` times its internal volume.
#[test]
fn cluster_expansion_and_boundary_ratio() {
    for seed in 0..6 {
        let g = random_graph(300 + seed, 14, 40, 3);
        let seq = build_sequence(&g, &SequenceParams::default()).unwrap();
        let lt = stoer_wagner(&g).unwrap().value.max(1);
        let lossy = build_lossy_on(&g, &seq, lt, 68, &LossyParams::default()).unwrap();
        let l = seq.depth();
        for i in 0..l {
            let hi = &lossy.levels[i];
            for cluster in &seq.levels[i].clusters {
                let (sub, _) = hi.induced(cluster).unwrap();
                if cluster.len() > 1 && cluster.len() <= 12 {
                    let c = conductance_exact(&sub).unwrap();
                    assert!(c.value >= ALPHA0, "seed {seed} level {i}: {}", c.value);
                }
                let inner = sub.total_volume();
                let mask = hi.mask(cluster).unwrap();
                let out = cut_weight_mask(hi, &mask);
                assert!(out as f64 <= (10 * l + 1) as f64 * inner as f64);
            }
        }
    }
}

#[test]
fn reruns_are_identical() {
    let g = random_graph(7, 30, 90, 4);
    let a = build_lossy(&g, 3, 68, &LossyParams::default()).unwrap();
    let b = build_lossy(&g, 3, 68, &LossyParams::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn any_lambda_tilde_within_a_factor_three_works() {
    let g = random_graph(8, 20, 60, 3);
    let lambda = stoer_wagner(&g).unwrap().value;
    for lt in [lambda, 2 * lambda, 3 * lambda] {
        let lossy = build_lossy(&g, lt, 68, &LossyParams::default()).unwrap();
        assert!(lossy.sandwich.iter().all(|s| s.holds), "λ̃ = {lt}");
    }
}

#[test]
fn measured_gamma_is_within_tracked_constants() {
    let mut fixtures = vec![two_k5_bridge(), WeightedMultigraph::from_edges(8, &complete(8, 1, 0)).unwrap()];
    fixtures.extend((0..6).map(|s| random_graph(400 + s, 14, 44, 3)));
    for g in fixtures {
        let lt = stoer_wagner(&g).unwrap().value;
        let lossy = build_lossy(&g, lt, 68, &LossyParams::default()).unwrap();
        assert!(lossy.gamma_exhaustive);
        let alpha = lossy.alpha0.unwrap_or(ALPHA0).min(ALPHA0);
        let bound = gamma_bound(lossy.depth, alpha, 0.05);
        assert!(lossy.gamma_measured <= bound, "γ = {} > {bound}", lossy.gamma_measured);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn demand_sandwich(d in prop::collection::vec(1.0f64..50.0, 1..8)) {
        let e = degree_mapped_expander(&d).unwrap();
        for (v, &dv) in d.iter().enumerate() {
            let deg = e.graph.degree(v) as f64;
            prop_assert!(dv <= deg && deg <= 9.0 * dv);
        }
    }

    #[test]
    fn family_degree_bound(n in 1usize..300) {
        let g = expander_graph(n);
        prop_assert_eq!(g.vertex_count(), n);
        prop_assert!(max_degree(&g) <= 9);
        prop_assert!(g.is_connected());
    }

    #[test]
    fn lossy_degree_sandwich(seed in 0u64..1000) {
        let g = random_graph(seed, 16, 40, 3);
        let lt = stoer_wagner(&g).unwrap().value.max(1);
        let lossy = build_lossy(&g, lt, 68, &LossyParams::default()).unwrap();
        prop_assert!(lossy.sandwich.iter().all(|s| s.holds));
        prop_assert!(lossy.gamma_measured >= 1.0);
    }
}
