use dmc_graph::*;
use dmc_oracle::{enumerate_all_cuts, stoer_wagner};
use dmc_pipeline::*;
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

fn k4() -> WeightedMultigraph {
    WeightedMultigraph::from_edges(4, &complete(4, 1, 0)).unwrap()
}

fn dumbbell() -> WeightedMultigraph {
    let mut e = complete(5, 1, 0);
    e.extend(complete(5, 1, 5));
    e.push((4, 5, 1));
    WeightedMultigraph::from_edges(10, &e).unwrap()
}

/// Connected random multigraph: a random spanning tree plus extra edges.
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

fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    (1..n).map(|i| (perm[rng.gen_range(0..i)], perm[i])).collect()
}

fn small_instance(seed: u64) -> WeightedMultigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = rng.gen_range(4..=12);
    let m = rng.gen_range(n..=40);
    random_graph(seed, n, m, 100)
}

fn params() -> PipelineParams {
    PipelineParams::default()
}

#[test]
fn k4_skeleton_properties_over_every_cut() {
    let g = k4();
    let sk = build_skeleton(&g, &params()).unwrap();
    let r = check_skeleton_properties(&sk, &g).unwrap();
    assert_eq!(r.lambda, 3);
    assert_eq!(r.cuts_checked, 7);
    assert_eq!(r.mincuts_checked, 4);
    assert!(r.holds(), "{r:?}");
}

#[test]
fn skeleton_properties_on_100_random_graphs() {
    for seed in 0..100 {
        let g = small_instance(seed);
        let sk = build_skeleton(&g, &params()).unwrap();
        let r = check_skeleton_properties(&sk, &g).unwrap();
        assert!(r.holds(), "seed {seed}: {r:?}");
        assert_eq!(r.cuts_checked, (1usize << (g.vertex_count() - 1)) - 1);
    }
}

#[test]
fn skeleton_weights_are_integer_multiples() {
    let g = random_graph(3, 10, 30, 50);
    let sk = build_skeleton(&g, &params()).unwrap();
    let p = &sk.params;
    assert_eq!(p.d_hat % p.d_tilde, 0);
    assert_eq!(p.multiplier() * p.d_tilde, p.d_hat);
    // W = min(Ŵ, W̃) and W̃/Ŵ is the integer multiplier.
    assert_eq!(sk.weight(), p.w_hat().min(p.w_tilde()));
    assert!((p.w_tilde() / p.w_hat() - p.multiplier() as f64).abs() < 1e-6 * p.multiplier() as f64);
    // H is Ĥ plus the multiplied lossy part.
    let total: u128 = sk.h.edges().iter().map(|e| e.w as u128).sum();
    let hat: u128 = sk.h_hat.edges().iter().map(|e| e.w as u128).sum();
    let tilde: u128 = sk.h_tilde.edges().iter().map(|e| e.w as u128).sum();
    assert_eq!(total, hat + p.multiplier() as u128 * tilde);
}

#[test]
fn parameter_ledger_follows_the_formulas() {
    let g = random_graph(4, 9, 25, 20);
    let sk = build_skeleton(&g, &params()).unwrap();
    let p = &sk.params;
    let tau = p.beta.powf(-p.tau_c * p.depth as f64) * p.gamma * p.gamma / p.eps;
    assert!((p.tau - tau).abs() <= 1e-9 * tau);
    let l1 = (p.depth + 1) as f64;
    let eps_prime = 0.5 * (p.phi / (l1 * p.tau)).powi(2) * p.eps;
    assert!((p.eps_prime - eps_prime).abs() <= 1e-12 * eps_prime);
    assert_eq!(p.delta, 68);
    assert_eq!(p.d_tilde, 68 * (2.0 * p.gamma / p.eps).ceil() as u64);
    assert!(p.gamma >= 1.0 && p.gamma_exhaustive);
    // At this scale ε′ is tiny and D̂ sits at the cap.
    assert!(p.d_hat_clamped);
    assert!(p.d_hat <= DEFAULT_D_HAT_CAP);
    assert!(sk.rounding_slack < p.eps * p.lambda_tilde as f64 / 6.0);
}

#[test]
fn estimator_runs_monotone_inside_the_pipeline() {
    let g = random_graph(5, 12, 40, 100);
    let sk = build_skeleton(&g, &params()).unwrap();
    assert!(sk.estimator.monotone, "{:?}", sk.estimator);
    assert!(sk.estimator.error_budget < 0.5);
    assert!(sk.estimator.final_phi <= sk.estimator.initial_phi + sk.estimator.error_budget);
}

#[test]
fn skeleton_reruns_are_identical() {
    let g = random_graph(6, 11, 35, 30);
    let a = build_skeleton(&g, &params()).unwrap();
    let b = build_skeleton(&g, &params()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn skeleton_rejects_bad_inputs() {
    let g = k4();
    let mut p = params();
    p.eps = 0.0;
    assert!(matches!(build_skeleton(&g, &p), Err(PipelineError::Params(_))));
    p.eps = 1.5;
    assert!(matches!(build_skeleton(&g, &p), Err(PipelineError::Params(_))));
    let split = WeightedMultigraph::from_edges(4, &[(0, 1, 1), (2, 3, 1)]).unwrap();
    assert_eq!(build_skeleton(&split, &params()).unwrap_err(), PipelineError::Disconnected);
    let single = GraphBuilder::new(1).build().unwrap();
    assert_eq!(build_skeleton(&single, &params()).unwrap_err(), PipelineError::TooSmall(1));
}

#[test]
fn seven_sixths_covers_the_approximation_at_one_percent() {
    assert!(1.01 / 0.99 <= 7.0 / 6.0);
}

#[test]
fn k4_skeleton_conditions() {
    let g = k4();
    let sk = build_skeleton(&g, &params()).unwrap();
    let c = verify_skeleton_conditions(&sk, &g).unwrap();
    assert_eq!(c.c_prime, stoer_wagner(&sk.h).unwrap().value);
    assert!(c.approx_ratio >= 1.0);
    assert!(c.approx_ratio <= 1.01 / 0.99);
    assert!(c.within_seven_sixths);
    assert_eq!(c.m_prime, sk.h.edges().iter().map(|e| e.w as u128).sum::<u128>());
}

#[test]
fn skeleton_conditions_on_random_graphs() {
    for seed in 0..30 {
        let g = small_instance(1000 + seed);
        let sk = build_skeleton(&g, &params()).unwrap();
        let c = verify_skeleton_conditions(&sk, &g).unwrap();
        assert!(c.approx_ratio <= 1.01 / 0.99, "seed {seed}: {c:?}");
    }
}

#[test]
fn packing_a_tree_returns_the_tree() {
    let g = WeightedMultigraph::from_edges(5, &[(0, 1, 3), (1, 2, 1), (1, 3, 2), (3, 4, 5)]).unwrap();
    let pack = pack_trees(&g, 1, &PackingParams::default()).unwrap();
    assert_eq!(pack.trees.len(), 1);
    assert_eq!(pack.trees[0], vec![(0, 1), (1, 2), (1, 3), (3, 4)]);
}

#[test]
fn packing_uses_the_bridge() {
    let g = dumbbell();
    let pack = pack_trees(&g, 1, &PackingParams::default()).unwrap();
    let bridge_side: Vec<bool> = (0..10).map(|v| v < 5).collect();
    for t in &pack.trees {
        assert!(t.contains(&(4, 5)));
        assert_eq!(tree_crossings(t, &bridge_side), 1);
    }
    let ans = min_two_respecting_cut(&g, &pack.trees[0]).unwrap();
    assert_eq!(ans.value, 1);
}

#[test]
fn packing_spreads_load() {
    let g = WeightedMultigraph::from_edges(4, &complete(4, 1, 0)).unwrap();
    let pack = pack_trees(&g, 3, &PackingParams::default()).unwrap();
    // ⌈1·3·ln 6⌉ = 6 iterations, several distinct trees.
    assert_eq!(pack.iterations, 6);
    assert!(pack.trees.len() >= 2);
    for t in &pack.trees {
        assert_eq!(t.len(), 3);
    }
}

#[test]
fn packing_rejects_disconnected_graphs() {
    let g = WeightedMultigraph::from_edges(4, &[(0, 1, 1), (2, 3, 1)]).unwrap();
    assert_eq!(pack_trees(&g, 1, &PackingParams::default()).unwrap_err(), PipelineError::Disconnected);
}

#[test]
fn some_tree_two_respects_the_mincut_in_100_pipelines() {
    for seed in 0..100 {
        let g = small_instance(2000 + seed);
        let sk = build_skeleton(&g, &params()).unwrap();
        let c_prime = stoer_wagner(&sk.h).unwrap().value;
        let pack = pack_trees_with(&sk.h, c_prime, &PackingParams::default(), Some(&g)).unwrap();
        let star = stoer_wagner(&g).unwrap();
        let mask = star.witness.mask(g.vertex_count());
        assert!(some_tree_two_respects(&pack, &mask), "seed {seed}");
    }
}

#[test]
fn c4_with_a_path_tree() {
    let g = WeightedMultigraph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]).unwrap();
    let tree = [(0, 1), (1, 2), (2, 3)];
    let ans = min_two_respecting_cut(&g, &tree).unwrap();
    assert_eq!(ans.value, 2);
    let mask = ans.witness.mask(4);
    assert!(tree_crossings(&tree, &mask) <= 2);
    // Brute force over all seven cuts.
    let best = enumerate_all_cuts(&g).unwrap().into_iter().map(|c| c.weight).min().unwrap();
    assert_eq!(best, 2);
}

#[test]
fn k4_with_a_star_tree() {
    let g = k4();
    let ans = min_two_respecting_cut(&g, &[(0, 1), (0, 2), (0, 3)]).unwrap();
    assert_eq!(ans.value, 3);
    assert_eq!(brute_force_two_respecting(&g, &[(0, 1), (0, 2), (0, 3)]).unwrap().value, 3);
}

#[test]
fn nested_pair_is_evaluated_correctly() {
    // Path 0-1-2-3-4 with a heavy chord 0-4: the best cut is the middle
    // stretch {1, 2, 3}, which needs the nested case.
    let g = WeightedMultigraph::from_edges(5, &[(0, 1, 1), (1, 2, 9), (2, 3, 9), (3, 4, 1), (0, 4, 9)]).unwrap();
    let tree = [(0, 1), (1, 2), (2, 3), (3, 4)];
    let ans = min_two_respecting_cut(&g, &tree).unwrap();
    assert_eq!(ans.value, 2);
    let mut side = ans.witness.side.clone();
    if side.contains(&0) {
        side = ans.witness.complement(&g).side;
    }
    assert_eq!(side, vec![1, 2, 3]);
    assert_eq!(ans.tree_edges_cut, vec![0, 3]);
}

#[test]
fn two_respect_matches_brute_force_on_500_trials() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..500 {
        let n = rng.gen_range(2..=12);
        let m = rng.gen_range(n - 1..=3 * n);
        let g = random_graph(5000 + trial, n, m, 20);
        let tree = random_tree(&mut rng, n);
        let dp = min_two_respecting_cut(&g, &tree).unwrap();
        let bf = brute_force_two_respecting(&g, &tree).unwrap();
        assert_eq!(dp.value, bf.value, "trial {trial}");
        assert_eq!(cut_weight_mask(&g, &dp.witness.mask(n)), dp.value);
        assert!(tree_crossings(&tree, &dp.witness.mask(n)) <= 2);
    }
}

#[test]
fn two_respect_rejects_non_trees() {
    let g = k4();
    assert!(matches!(min_two_respecting_cut(&g, &[(0, 1), (1, 2)]), Err(PipelineError::NotSpanningTree(_))));
    assert!(matches!(min_two_respecting_cut(&g, &[(0, 1), (1, 0), (2, 3)]), Err(PipelineError::NotSpanningTree(_))));
    assert!(matches!(min_two_respecting_cut(&g, &[(0, 1), (1, 2), (2, 9)]), Err(PipelineError::NotSpanningTree(_))));
}

#[test]
fn mincut_of_k4() {
    let run = deterministic_mincut(&k4(), &params()).unwrap();
    assert_eq!(run.result.value, 3);
    assert_eq!(run.result.witness.weight, 3);
}

#[test]
fn mincut_of_the_dumbbell() {
    let g = dumbbell();
    let run = deterministic_mincut(&g, &params()).unwrap();
    assert_eq!(run.result.value, 1);
    let mut side = run.result.witness.side.clone();
    if !side.contains(&0) {
        side = run.result.witness.complement(&g).side;
    }
    assert_eq!(side, vec![0, 1, 2, 3, 4]);
}

#[test]
fn mincut_matches_stoer_wagner_on_200_graphs() {
    for seed in 0..200 {
        let g = small_instance(seed);
        let run = deterministic_mincut(&g, &params()).unwrap();
        let sw = stoer_wagner(&g).unwrap().value;
        assert_eq!(run.result.value, sw, "seed {seed}");
        assert_eq!(cut_weight_mask(&g, &run.result.witness.mask(g.vertex_count())), sw);
    }
}

#[test]
fn mincut_of_disconnected_graph_is_zero() {
    let g = WeightedMultigraph::from_edges(4, &[(0, 1, 4), (2, 3, 4)]).unwrap();
    let run = deterministic_mincut(&g, &params()).unwrap();
    assert_eq!(run.result.value, 0);
    assert!(run.skeleton.is_none());
}

#[test]
fn mincut_runs_are_byte_identical() {
    let g = random_graph(9, 40, 160, 100);
    let a = deterministic_mincut(&g, &params()).unwrap().without_timings();
    let b = deterministic_mincut(&g, &params()).unwrap().without_timings();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn mincut_is_independent_of_thread_count() {
    let g = random_graph(10, 60, 240, 100);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| deterministic_mincut(&g, &params()).unwrap().without_timings());
    let b = four.install(|| deterministic_mincut(&g, &params()).unwrap().without_timings());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dp_equals_brute_force(seed in 0u64..100_000, n in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(seed, n, 2 * n, 9);
        let tree = random_tree(&mut rng, n);
        prop_assert_eq!(
            min_two_respecting_cut(&g, &tree).unwrap().value,
            brute_force_two_respecting(&g, &tree).unwrap().value
        );
    }

    #[test]
    fn pipeline_equals_oracle(seed in 0u64..100_000) {
        let g = small_instance(seed);
        let run = deterministic_mincut(&g, &params()).unwrap();
        prop_assert_eq!(run.result.value, stoer_wagner(&g).unwrap().value);
    }

    #[test]
    fn skeleton_lower_property(seed in 0u64..100_000) {
        let g = small_instance(seed);
        let sk = build_skeleton(&g, &params()).unwrap();
        prop_assert!(check_skeleton_properties(&sk, &g).unwrap().holds());
    }
}
