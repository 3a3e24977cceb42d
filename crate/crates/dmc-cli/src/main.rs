use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dmc_cli::*;
use dmc_decomp::decompose;
use dmc_graph::{write_dimacs, VertexId, WeightedMultigraph};
use dmc_lossy::{build_lossy, min_delta, LossyParams};
use dmc_oracle::{approx_mincut, brute_force_mincut, stoer_wagner};
use dmc_pipeline::{
    build_skeleton, deterministic_mincut, min_two_respecting_cut, pack_trees_with, verify_skeleton_conditions,
};
use dmc_sequence::build_sequence;
use dmc_unbalanced::{build_edge_classes, derandomized_sample, min_d_hat, SampleParams, SkeletonWeight};
use serde_json::json;

#[derive(Parser)]
#[command(name = "detmincut", version, about = "Deterministic global minimum cut toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GraphInput {
    /// DIMACS graph file.
    input: Option<String>,
    /// Generate instead, e.g. "gnm n=100 m=400 wmax=50 seed=3".
    #[arg(long = "gen")]
    generator: Option<String>,
}

#[derive(Args, Clone, Default)]
struct ParamArgs {
    /// Flat key = value config file; flags below override it.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long = "tau-c")]
    tau_c: Option<f64>,
    #[arg(long)]
    delta: Option<u64>,
    #[arg(long)]
    f: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMethod {
    StoerWagner,
    Approx,
    Brute,
}

#[derive(Clone, Copy, ValueEnum)]
enum SparsifierKind {
    Lossy,
    Unbalanced,
}

#[derive(Subcommand)]
enum Command {
    /// End-to-end deterministic mincut.
    Mincut {
        #[command(flatten)]
        graph: GraphInput,
        #[command(flatten)]
        params: ParamArgs,
        /// Cross-check against Stoer-Wagner; exit 1 on mismatch.
        #[arg(long)]
        verify: bool,
        /// Leave out wall-clock timings so output is reproducible.
        #[arg(long)]
        no_timings: bool,
    },
    /// Baseline mincut.
    Oracle {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long, value_enum, default_value = "stoer-wagner")]
        method: OracleMethod,
    },
    /// One expander decomposition.
    Decompose {
        #[command(flatten)]
        graph: GraphInput,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Expander decomposition sequence.
    Sequence {
        #[command(flatten)]
        graph: GraphInput,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Skeleton graph statistics; optionally write H as DIMACS.
    Skeleton {
        #[command(flatten)]
        graph: GraphInput,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Build one of the two sparsifiers.
    Sparsify {
        #[arg(value_enum)]
        kind: SparsifierKind,
        #[command(flatten)]
        graph: GraphInput,
        #[command(flatten)]
        params: ParamArgs,
        /// `τ` for the unbalanced sparsifier's class scope.
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Tree packing of the skeleton.
    Pack {
        #[command(flatten)]
        graph: GraphInput,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Minimum 2-respecting cut for a tree given as 1-based `u v` lines.
    Tworespect {
        #[command(flatten)]
        graph: GraphInput,
        #[arg(long)]
        tree: String,
    },
    /// CSV timings over gnm instances.
    Bench {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "10000,20000,40000,80000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        wmax: u64,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run and verify every instance of a config file; JSON reports in input
    /// order.
    Suite { config: String },
}

fn load_graph(input: &GraphInput) -> Result<WeightedMultigraph, CliError> {
    match (&input.input, &input.generator) {
        (Some(path), None) => generate(&InstanceSpec::new(Family::Dimacs { path: path.clone() })),
        (None, Some(spec)) => generate(&spec.parse()?),
        _ => Err(CliError::Usage("give exactly one of a DIMACS file or --gen".into())),
    }
}

fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))
}

fn write(path: &str, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{path}: {e}")))
}

fn config_from(args: &ParamArgs) -> Result<Config, CliError> {
    let mut c = match &args.config {
        Some(p) => Config::parse(&read(p)?)?,
        None => Config::default(),
    };
    let set = |c: &mut Config, k: &str, v: Option<String>| v.map_or(Ok(()), |v| c.set(k, &v));
    set(&mut c, "eps", args.eps.map(|x| x.to_string()))?;
    set(&mut c, "phi", args.phi.map(|x| x.to_string()))?;
    set(&mut c, "beta", args.beta.map(|x| x.to_string()))?;
    set(&mut c, "tau_c", args.tau_c.map(|x| x.to_string()))?;
    set(&mut c, "delta", args.delta.map(|x| x.to_string()))?;
    set(&mut c, "f", args.f.map(|x| x.to_string()))?;
    Ok(c)
}

fn print(v: &serde_json::Value) {
    use std::io::Write;
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).unwrap());
}

fn to_value<T: serde::Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).unwrap()
}

fn parse_tree(text: &str, n: usize) -> Result<Vec<(VertexId, VertexId)>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let nums: Vec<usize> = line.split_whitespace().filter_map(|t| t.parse().ok()).collect();
        if nums.len() != 2 || nums[0] == 0 || nums[1] == 0 || nums[0] > n || nums[1] > n {
            return Err(CliError::Usage(format!("tree line {}: expected two 1-based vertices", i + 1)));
        }
        out.push((nums[0] - 1, nums[1] - 1));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Mincut { graph, params, verify, no_timings } => {
            let g = load_graph(&graph)?;
            let c = config_from(&params)?;
            let mut r = deterministic_mincut(&g, &c.pipeline)?;
            if no_timings {
                r = r.without_timings();
            }
            let mut out = to_value(&r);
            let mut code = EXIT_OK;
            if verify {
                let o = stoer_wagner(&g).map_err(dmc_pipeline::PipelineError::from)?;
                let ok = o.value == r.result.value;
                out["verification"] = json!({ "oracle": o.value, "exact": ok });
                if !ok {
                    code = EXIT_VERIFY;
                }
            }
            print(&out);
            Ok(code)
        }
        Command::Oracle { graph, method } => {
            let g = load_graph(&graph)?;
            let v = match method {
                OracleMethod::StoerWagner => to_value(&stoer_wagner(&g).map_err(dmc_pipeline::PipelineError::from)?),
                OracleMethod::Approx => to_value(&approx_mincut(&g).map_err(dmc_pipeline::PipelineError::from)?),
                OracleMethod::Brute => to_value(&brute_force_mincut(&g).map_err(dmc_pipeline::PipelineError::from)?),
            };
            print(&v);
            Ok(EXIT_OK)
        }
        Command::Decompose { graph, params } => {
            let g = load_graph(&graph)?;
            let c = config_from(&params)?;
            let d = decompose(&g, &c.pipeline.sequence.decomposition)
                .map_err(|e| dmc_pipeline::PipelineError::from(dmc_sequence::SequenceError::from(e)))?;
            print(&json!({
                "clusters": d.clusters,
                "intercluster_weight": d.intercluster_weight,
                "certificates": d.certificates,
                "iterations": d.iterations,
                "c_report": d.c_report,
                "budget_exceeded": d.budget_exceeded,
            }));
            Ok(EXIT_OK)
        }
        Command::Sequence { graph, params } => {
            let g = load_graph(&graph)?;
            let c = config_from(&params)?;
            let s = build_sequence(&g, &c.pipeline.sequence).map_err(dmc_pipeline::PipelineError::from)?;
            let levels: Vec<_> = s
                .levels
                .iter()
                .map(|l| json!({ "vertices": l.graph.vertex_count(), "clusters": l.clusters, "intercluster_weight": l.intercluster_weight }))
                .collect();
            print(&json!({ "depth": s.depth(), "d_constant": s.d_constant(), "levels": levels, "labels": s.labels }));
            Ok(EXIT_OK)
        }
        Command::Skeleton { graph, params, out } => {
            let g = load_graph(&graph)?;
            let c = config_from(&params)?;
            let sk = build_skeleton(&g, &c.pipeline)?;
            if let Some(p) = &out {
                write(p, &write_dimacs(&sk.h))?;
            }
            let mut v = json!({
                "params": sk.params,
                "estimator": sk.estimator,
                "weight": sk.weight(),
                "lambda_over_w": sk.lambda_over_w(),
                "rounding_slack": sk.rounding_slack,
                "distinct_edges": sk.h.edge_count(),
            });
            let mut code = EXIT_OK;
            if g.vertex_count() <= c.oracle_limit {
                match verify_skeleton_conditions(&sk, &g) {
                    Ok(chk) => v["conditions"] = to_value(&chk),
                    Err(e) => {
                        v["conditions_error"] = json!(e.to_string());
                        code = EXIT_VERIFY;
                    }
                }
            }
            print(&v);
            Ok(code)
        }
        Command::Sparsify { kind, graph, params, tau, out } => {
            let g = load_graph(&graph)?;
            let c = config_from(&params)?;
            let lt = approx_mincut(&g).map_err(dmc_pipeline::PipelineError::from)?.value;
            match kind {
                SparsifierKind::Lossy => {
                    let d = c.pipeline.sequence.decomposition;
                    let delta = c.pipeline.delta.unwrap_or_else(|| min_delta(d.phi, d.beta));
                    let lp = LossyParams { sequence: c.pipeline.sequence, ..LossyParams::default() };
                    let l = build_lossy(&g, lt, delta, &lp).map_err(dmc_pipeline::PipelineError::from)?;
                    if let Some(p) = &out {
                        write(p, &write_dimacs(&l.h))?;
                    }
                    print(&json!({
                        "weight": l.weight(),
                        "lambda_tilde": l.lambda_tilde,
                        "delta": l.delta,
                        "depth": l.depth,
                        "gamma_measured": l.gamma_measured,
                        "gamma_exhaustive": l.gamma_exhaustive,
                        "alpha0": l.alpha0,
                        "sandwich": l.sandwich,
                        "cluster_sandwich_holds": l.cluster_sandwich_holds,
                        "edges": l.h.edge_count(),
                    }));
                    let ok = l.cluster_sandwich_holds && l.sandwich.iter().all(|s| s.holds);
                    Ok(if ok { EXIT_OK } else { EXIT_VERIFY })
                }
                SparsifierKind::Unbalanced => {
                    let s = build_sequence(&g, &c.pipeline.sequence).map_err(dmc_pipeline::PipelineError::from)?;
                    let phi = s.params.phi;
                    let index = build_edge_classes(&g, &s).with_degree_cap(tau * lt as f64 / phi);
                    let eps = c.pipeline.eps;
                    let d_hat = min_d_hat(&index, eps, lt).ceil() as u64;
                    let mut sp = SampleParams::new(eps, SkeletonWeight { lambda_tilde: lt, d_hat });
                    sp.allow_bundles = true;
                    sp.precision_bits = c.pipeline.precision_bits;
                    let sk = derandomized_sample(&g, &index, &sp).map_err(dmc_pipeline::PipelineError::from)?;
                    if let Some(p) = &out {
                        write(p, &write_dimacs(&sk.h_hat))?;
                    }
                    let t = &sk.trace;
                    print(&json!({
                        "weight": sk.weight.value(),
                        "lambda_tilde": lt,
                        "d_hat": d_hat,
                        "classes": index.classes.len(),
                        "in_scope_classes": index.in_scope_count(),
                        "initial_phi": t.initial,
                        "final_phi": t.final_phi,
                        "monotone": t.is_monotone(),
                        "error_budget": t.error_budget,
                        "precision_bits": t.precision_bits,
                        "edges": sk.h_hat.edge_count(),
                    }));
                    Ok(if t.is_monotone() && t.initial <= 0.5 { EXIT_OK } else { EXIT_VERIFY })
                }
            }
        }
        Command::Pack { graph, params } => {
            let g = load_graph(&graph)?;
            let c = config_from(&params)?;
            let sk = build_skeleton(&g, &c.pipeline)?;
            let c_prime = sk.h.degrees().into_iter().min().unwrap_or(1).max(1);
            let pack = pack_trees_with(&sk.h, c_prime, &c.pipeline.packing, Some(&g))?;
            let trees: Vec<Vec<(usize, usize)>> =
                pack.trees.iter().map(|t| t.iter().map(|&(u, v)| (u + 1, v + 1)).collect()).collect();
            print(&json!({
                "iterations": pack.iterations,
                "tree_count": pack.trees.len(),
                "c_prime_bound": c_prime,
                "trees": trees,
            }));
            Ok(EXIT_OK)
        }
        Command::Tworespect { graph, tree } => {
            let g = load_graph(&graph)?;
            let t = parse_tree(&read(&tree)?, g.vertex_count())?;
            let a = min_two_respecting_cut(&g, &t)?;
            print(&to_value(&a));
            Ok(EXIT_OK)
        }
        Command::Bench { n, sizes, seed, wmax, params } => {
            let c = config_from(&params)?;
            let rows = bench(n, &sizes, seed, wmax, &c.pipeline)?;
            write_bench_csv(&rows, std::io::stdout())?;
            Ok(EXIT_OK)
        }
        Command::Suite { config } => {
            let c = Config::parse(&read(&config)?)?;
            let reports = run_suite(&c);
            print(&to_value(&reports));
            Ok(if reports.iter().all(|r| r.passed()) { EXIT_OK } else { EXIT_VERIFY })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
