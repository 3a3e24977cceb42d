//! End-to-end acceptance matrix. Prints one line per criterion and exits
//! nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use dmc_cli::{generate, Family, InstanceSpec};
use dmc_graph::{cut_weight_mask, laplacian_quadratic, WeightedMultigraph};
use dmc_lossy::{build_lossy, expander_graph, min_delta, LossyParams};
use dmc_oracle::{approx_mincut, for_each_cut, stoer_wagner};
use dmc_pipeline::*;
use dmc_sequence::*;
use dmc_unbalanced::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn gnm(n: usize, m: usize, wmax: u64, seed: u64) -> WeightedMultigraph {
    generate(&InstanceSpec { family: Family::Gnm { n, m }, wmin: 1, wmax, seed }).unwrap()
}

fn spec(s: &str) -> WeightedMultigraph {
    generate(&s.parse().unwrap()).unwrap()
}

/// `n ∈ [4, 12]`, `m ≤ 40`, weights in `[1, 100]`.
fn small_instance(seed: u64) -> WeightedMultigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xacce);
    let n = rng.gen_range(4..=12);
    let m = rng.gen_range(n - 1..=40);
    gnm(n, m, 100, seed)
}

fn fixtures() -> Vec<(String, WeightedMultigraph)> {
    let mut out: Vec<(String, WeightedMultigraph)> = [
        "dumbbell k=3",
        "dumbbell k=5",
        "dumbbell k=6",
        "dumbbell k=20",
        "grid rows=3 cols=4 wmax=100 seed=1",
        "grid rows=4 cols=4 wmax=100 seed=2",
        "grid rows=10 cols=10 wmax=100 seed=3",
        "expander-union parts=2 size=6 links=1",
        "expander-union parts=3 size=4 links=2",
        "expander-union parts=4 size=40 links=3",
    ]
    .iter()
    .map(|s| (s.to_string(), spec(s)))
    .collect();
    for n in [8, 12, 64, 200] {
        out.push((format!("expander n={n}"), expander_graph(n)));
    }
    out
}

fn small_corpus() -> Vec<(String, WeightedMultigraph)> {
    let mut v: Vec<_> = (0..200).map(|s| (format!("random seed={s}"), small_instance(s))).collect();
    v.extend(fixtures().into_iter().filter(|(_, g)| g.vertex_count() <= 12));
    v
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut corpus: Vec<_> = (0..200).map(|s| (format!("random seed={s}"), small_instance(s))).collect();
    corpus.extend(fixtures());
    let mut bad = Vec::new();
    for (name, g) in &corpus {
        let got = deterministic_mincut(g, &PipelineParams::default()).map(|r| r.result.value);
        let want = stoer_wagner(g).unwrap().value;
        if got.as_ref().ok() != Some(&want) {
            bad.push(format!("{name}: {got:?} vs {want}"));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 60.0,
        format!("{}/{} equal the oracle in {secs:.1}s {}", corpus.len() - bad.len(), corpus.len(), bad.join("; ")),
    )
}

fn criterion_2() -> Outcome {
    let params = PipelineParams { eps: 0.01, ..Default::default() };
    let corpus = small_corpus();
    let (mut cuts, mut lower, mut upper, mut approx) = (0usize, 0usize, 0usize, 0usize);
    let (mut min_ratio, mut max_ratio, mut worst_approx) = (f64::INFINITY, 0.0f64, 0.0f64);
    for (_, g) in &corpus {
        let sk = build_skeleton(g, &params).unwrap();
        let r = check_skeleton_properties(&sk, g).unwrap();
        cuts += r.cuts_checked;
        lower += r.lower_violations;
        upper += r.upper_violations;
        min_ratio = min_ratio.min(r.min_ratio);
        max_ratio = max_ratio.max(r.max_mincut_ratio);
        match verify_skeleton_conditions(&sk, g) {
            Ok(c) => worst_approx = worst_approx.max(c.approx_ratio),
            Err(_) => approx += 1,
        }
    }
    outcome(
        lower == 0 && upper == 0 && approx == 0,
        format!(
            "{} skeletons, {cuts} cuts; lower violations {lower}, mincut violations {upper}, 7/6 failures {approx}; ratios in [{min_ratio:.5}, {max_ratio:.5}], worst H-approximation {worst_approx:.5}",
            corpus.len()
        ),
    )
}

fn indicator(s: &ExpanderSequence, level: usize, v: usize) -> Vec<i64> {
    s.labels[level].iter().map(|&x| (x == v) as i64).collect()
}

fn criterion_3() -> Outcome {
    let (eps, tau) = (0.4, 3.0);
    let mut fails = Vec::new();
    let (mut classes, mut worst_initial, mut worst_additive) = (0usize, 0.0f64, 0.0f64);
    for seed in 0..100 {
        let g = small_instance(3000 + seed);
        let s = build_sequence(&g, &SequenceParams::default()).unwrap();
        let lt = approx_mincut(&g).unwrap().value;
        let index = build_edge_classes(&g, &s).with_degree_cap(tau * lt as f64 / s.params.phi);
        let d_hat = min_d_hat(&index, eps, lt).ceil() as u64;
        let mut p = SampleParams::new(eps, SkeletonWeight { lambda_tilde: lt, d_hat });
        p.allow_bundles = true;
        let sk = match derandomized_sample(&g, &index, &p) {
            Ok(sk) => sk,
            Err(e) => {
                fails.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let t = &sk.trace;
        worst_initial = worst_initial.max(t.initial);
        let mut prev = t.initial;
        let stepwise = t.decisions.iter().all(|&x| {
            let ok = x <= prev + t.error_budget;
            prev = x;
            ok
        });
        if t.initial > 0.5 || !stepwise || t.error_budget > 0.5 || t.final_phi > 1.0 || t.decisions.len() != g.edge_count() {
            fails.push(format!("seed {seed}: trace {:?}", (t.initial, t.final_phi, t.error_budget)));
        }
        let w_bar = sk.weight.value();
        for c in index.classes.iter().filter(|c| c.in_scope) {
            let x = indicator(&s, c.key.level_u, c.key.u);
            let y = indicator(&s, c.key.level_v, c.key.v);
            let lg = laplacian_quadratic(&g, &x, &y).unwrap() as f64;
            let lh = laplacian_quadratic(&sk.h_hat, &x, &y).unwrap() as f64;
            let ratio = (lg - w_bar * lh).abs() / (eps * lt as f64);
            worst_additive = worst_additive.max(ratio);
            if ratio > 1.0 {
                fails.push(format!("seed {seed}: class {:?} off by {ratio}·ελ̃", c.key));
            }
            classes += 1;
        }
    }
    outcome(
        fails.is_empty(),
        format!(
            "100 instances, {classes} in-scope classes; max Φ(∅) {worst_initial:.3e}, worst additive error {worst_additive:.3}·ελ̃ {}",
            fails.join("; ")
        ),
    )
}

fn exact_tails(ps: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let (mut below, mut above) = (0.0, 0.0);
    for mask in 0u32..(1 << ps.len()) {
        let mut pr = 1.0;
        let mut x = 0.0;
        for (i, &p) in ps.iter().enumerate() {
            if mask >> i & 1 == 1 {
                pr *= p;
                x += 1.0;
            } else {
                pr *= 1.0 - p;
            }
        }
        if x > hi {
            above += pr;
        }
        if x < lo {
            below += pr;
        }
    }
    (below, above)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut bad = 0;
    let mut tightest: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=15);
        let ps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let delta: f64 = rng.gen_range(0.01..0.99);
        let mu: f64 = ps.iter().sum();
        let (below, above) = exact_tails(&ps, (1.0 - delta) * mu, (1.0 + delta) * mu);
        let up = chernoff_upper_middle(&ps, delta, 96);
        let lo = chernoff_lower_middle(&ps, delta, 96);
        let ok_up = above <= up * (1.0 + 1e-12);
        let ok_lo = lo.is_some_and(|lo| below <= lo * (1.0 + 1e-12));
        if !(ok_up && ok_lo) {
            bad += 1;
        }
        if up > 0.0 {
            tightest = tightest.max(above / up);
        }
    }
    outcome(bad == 0, format!("1000 sums, {bad} tail violations; largest exact/bound ratio {tightest:.4}"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut fails = Vec::new();
    let mut worst = f64::INFINITY;
    for trial in 0..500 {
        let n = rng.gen_range(4..=20);
        let m = rng.gen_range(n - 1..=3 * n);
        let g = gnm(n, m, rng.gen_range(1..=50), 5000 + trial);
        let s = build_sequence(&g, &SequenceParams::default()).unwrap();
        let k = rng.gen_range(1..n);
        let mut set: Vec<usize> = (0..n).collect();
        for i in 0..k {
            set.swap(i, rng.gen_range(i..n));
        }
        set.truncate(k);
        let cs = canonical_sequence(&s, &set).unwrap();
        if !check_d_lower_bound(&s, &cs) {
            fails.push(format!("trial {trial}: containment"));
        }
        match check_d_upper_bound(&s, &cs, s.params.beta) {
            Ok(ub) if ub.holds() => worst = worst.min(ub.rhs / ub.lhs.max(1) as f64),
            Ok(ub) => fails.push(format!("trial {trial}: {} > {}", ub.lhs, ub.rhs)),
            Err(e) => fails.push(format!("trial {trial}: {e}")),
        }
    }
    let (mut mincuts, mut balanced) = (0usize, 0usize);
    for seed in 0..100 {
        let g = small_instance(6000 + seed);
        let s = build_sequence(&g, &SequenceParams::default()).unwrap();
        let lambda = stoer_wagner(&g).unwrap().value;
        let phi = s.params.phi;
        let tau = s.d_constant();
        let n = g.vertex_count();
        for_each_cut(&g, |mask, w, _| {
            let side: Vec<usize> = (0..n).filter(|&v| mask[v]).collect();
            let cs = canonical_sequence(&s, &side).unwrap();
            if w == lambda {
                mincuts += 1;
                if !is_tau_unbalanced(&s, &cs, tau, phi, lambda) {
                    fails.push(format!("seed {seed}: mincut {side:?} is balanced"));
                }
            }
            for t in [0.25, 1.0, tau] {
                if !is_tau_unbalanced(&s, &cs, t, phi, lambda) {
                    balanced += 1;
                    if (w as f64) < balanced_cut_floor(&s, t, lambda) * (1.0 - 1e-12) {
                        fails.push(format!("seed {seed}: balanced cut {w} under floor"));
                    }
                }
            }
        })
        .unwrap();
    }
    outcome(
        fails.is_empty(),
        format!(
            "500 (graph, S) pairs, min upper-bound slack {worst:.3}; {mincuts} mincuts unbalanced; {balanced} balanced cuts above the floor {}",
            fails.join("; ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let p = LossyParams::default();
    let d = p.sequence.decomposition;
    let delta = min_delta(d.phi, d.beta);
    let mut fails = Vec::new();
    let (mut cuts, mut max_gamma, mut max_level_ratio) = (0usize, 0.0f64, 0.0f64);
    let corpus: Vec<WeightedMultigraph> =
        (0..60).map(|s| small_instance(7000 + s)).chain((0..10).map(|s| gnm(40, 120, 3, 7100 + s))).collect();
    for (i, g) in corpus.iter().enumerate() {
        let lt = approx_mincut(g).unwrap().value;
        let l = match build_lossy(g, lt, delta, &p) {
            Ok(l) => l,
            Err(e) => {
                fails.push(format!("graph {i}: {e}"));
                continue;
            }
        };
        let cap = 10.0 * (l.depth + 1) as f64;
        for s in &l.sandwich {
            if s.min_ratio.is_finite() {
                max_level_ratio = max_level_ratio.max(s.max_ratio);
                if s.min_ratio < 1.0 - 1e-12 || s.max_ratio > cap + 1e-12 {
                    fails.push(format!("graph {i} level {}: [{}, {}] vs {cap}", s.level, s.min_ratio, s.max_ratio));
                }
            }
        }
        if !l.cluster_sandwich_holds {
            fails.push(format!("graph {i}: cluster sandwich"));
        }
        let gamma = l.gamma_measured;
        if !gamma.is_finite() || gamma < 1.0 {
            fails.push(format!("graph {i}: γ = {gamma}"));
        }
        max_gamma = max_gamma.max(gamma);
        if g.vertex_count() <= 12 {
            for_each_cut(g, |mask, w, _| {
                let gc = w as f64;
                let hc = l.scaled_cut(mask);
                if gc / gamma > hc * (1.0 + 1e-12) || hc > gamma * gc * (1.0 + 1e-12) {
                    fails.push(format!("graph {i}: cut {gc} vs {hc} outside γ = {gamma}"));
                }
                cuts += 1;
            })
            .unwrap();
        }
    }
    outcome(
        fails.is_empty(),
        format!(
            "{} sparsifiers; largest level ratio {max_level_ratio:.3}; max γ {max_gamma:.3}; {cuts} cuts within γ {}",
            corpus.len(),
            fails.join("; ")
        ),
    )
}

fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    (1..n).map(|i| (perm[rng.gen_range(0..i)], perm[i])).collect()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut dp_bad = 0;
    for trial in 0..500 {
        let n = rng.gen_range(2..=12);
        let m = rng.gen_range(n - 1..=30);
        let g = gnm(n, m, 100, 8000 + trial);
        let tree = random_tree(&mut rng, n);
        let dp = min_two_respecting_cut(&g, &tree).unwrap();
        let bf = brute_force_two_respecting(&g, &tree).unwrap();
        if dp.value != bf.value || cut_weight_mask(&g, &dp.witness.mask(n)) != dp.value {
            dp_bad += 1;
        }
    }
    let mut pack_bad = Vec::new();
    let params = PipelineParams::default();
    for seed in 0..100 {
        let g = small_instance(9000 + seed);
        let sk = build_skeleton(&g, &params).unwrap();
        let c_prime = sk.h.degrees().into_iter().min().unwrap_or(1).max(1);
        let pack = pack_trees_with(&sk.h, c_prime, &params.packing, Some(&g)).unwrap();
        let star = stoer_wagner(&g).unwrap();
        if !some_tree_two_respects(&pack, &star.witness.mask(g.vertex_count())) {
            pack_bad.push(seed);
        }
    }
    outcome(
        dp_bad == 0 && pack_bad.is_empty(),
        format!("DP disagrees on {dp_bad}/500 pairs; packing misses the oracle mincut on {}/100 runs {pack_bad:?}", pack_bad.len()),
    )
}

fn stage_outputs(g: &WeightedMultigraph) -> Vec<String> {
    let p = PipelineParams::default();
    let json = |v: serde_json::Value| v.to_string();
    let lt = approx_mincut(g).unwrap();
    let s = build_sequence(g, &p.sequence).unwrap();
    let sk = build_skeleton(g, &p).unwrap();
    let d = p.sequence.decomposition;
    let lossy = build_lossy(g, lt.value, min_delta(d.phi, d.beta), &LossyParams::default()).unwrap();
    let c_prime = sk.h.degrees().into_iter().min().unwrap().max(1);
    let pack = pack_trees_with(&sk.h, c_prime, &p.packing, Some(g)).unwrap();
    let run = deterministic_mincut(g, &p).unwrap().without_timings();
    vec![
        json(serde_json::to_value(&lt).unwrap()),
        json(serde_json::json!({ "labels": s.labels, "d": s.d_constant() })),
        dmc_graph::write_dimacs(&sk.h),
        json(serde_json::to_value(&sk.params).unwrap()),
        json(serde_json::to_value(&sk.estimator).unwrap()),
        dmc_graph::write_dimacs(&lossy.h),
        json(serde_json::to_value(&lossy.sandwich).unwrap()),
        format!("{:?}", pack.trees),
        json(serde_json::to_value(&run).unwrap()),
    ]
}

fn criterion_8() -> Outcome {
    let corpus: Vec<WeightedMultigraph> =
        vec![small_instance(1), small_instance(2), spec("dumbbell k=6"), gnm(300, 1500, 100, 8), spec("grid rows=12 cols=12 wmax=50 seed=4")];
    let pool = |t: usize| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
    let (one, many) = (pool(1), pool(8));
    let mut diffs = 0;
    let mut compared = 0;
    for g in &corpus {
        let a = one.install(|| stage_outputs(g));
        let b = many.install(|| stage_outputs(g));
        let c = many.install(|| stage_outputs(g));
        for i in 0..a.len() {
            compared += 1;
            if a[i] != b[i] || b[i] != c[i] {
                diffs += 1;
            }
        }
    }
    outcome(diffs == 0, format!("{compared} stage outputs, 1 vs 8 threads and repeated runs; {diffs} differ"))
}

fn criterion_9() -> Outcome {
    let t0 = Instant::now();
    let mut secs = Vec::new();
    for m in [10_000, 20_000, 40_000, 80_000] {
        let g = gnm(1000, m, 100, 1);
        let t = Instant::now();
        let r = deterministic_mincut(&g, &PipelineParams::default());
        secs.push((m, t.elapsed().as_secs_f64(), r.is_ok()));
    }
    let ratios: Vec<f64> = secs.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let total = t0.elapsed().as_secs_f64();
    let ok = secs.iter().all(|s| s.2) && ratios.iter().all(|&r| r <= 3.0) && total < 600.0;
    let times: Vec<String> = secs.iter().map(|(m, s, _)| format!("m={m}: {s:.2}s")).collect();
    let ratios: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    outcome(ok, format!("{}; per-doubling ratios [{}]; total {total:.1}s", times.join(", "), ratios.join(", ")))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (k, f) in criteria {
        if only.is_some_and(|o| o != k) {
            continue;
        }
        let t = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| outcome(false, "panicked".into()));
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {k}: {verdict} ({:.1}s) {}", t.elapsed().as_secs_f64(), o.detail);
        failed += !o.passed as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
