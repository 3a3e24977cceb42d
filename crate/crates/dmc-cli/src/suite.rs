use dmc_graph::{cut_weight_mask, write_dimacs, GraphBuilder, WeightedMultigraph};
use dmc_oracle::stoer_wagner;
use dmc_pipeline::{
    build_skeleton, check_skeleton_properties, deterministic_mincut, ParameterLedger, SkeletonResult, StageTiming,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Config, Fault};
use crate::generate::{generate, InstanceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The property the check stands for.
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub value: Option<u64>,
    pub oracle: Option<u64>,
    pub params: Option<ParameterLedger>,
    pub timings: Vec<StageTiming>,
    pub checks: Vec<Check>,
    /// DIMACS text of the input when something failed.
    pub replay: Option<String>,
    pub error: Option<String>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, invariant: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), invariant: invariant.into(), passed, detail }
}

fn corrupt(sk: &mut SkeletonResult) {
    let h = &sk.h;
    let mut b = GraphBuilder::new(h.vertex_count());
    for e in h.edges() {
        if e.w / 2 > 0 {
            b.add_edge(e.u, e.v, e.w / 2).unwrap();
        }
    }
    sk.h = b.build().unwrap();
}

/// Run and verify one graph.
pub fn run_graph(name: &str, g: &WeightedMultigraph, config: &Config) -> RunReport {
    let mut r = RunReport {
        instance: name.to_string(),
        n: g.vertex_count(),
        m: g.edge_count(),
        value: None,
        oracle: None,
        params: None,
        timings: Vec::new(),
        checks: Vec::new(),
        replay: None,
        error: None,
    };
    match deterministic_mincut(g, &config.pipeline) {
        Ok(run) => {
            let mut value = run.result.value;
            if config.fault == Some(Fault::CorruptValue) {
                value += 1;
            }
            r.value = Some(value);
            r.params = run.skeleton.as_ref().map(|s| s.params.clone());
            r.timings = run.timings.clone();
            let mask = run.result.witness.mask(g.vertex_count());
            let w = cut_weight_mask(g, &mask);
            r.checks.push(check("witness", "the witness cut weighs the reported value", w == value, format!("{w}")));
            if let Some(s) = &run.skeleton {
                r.checks.push(check(
                    "estimator monotone",
                    "Φ never increases across decisions",
                    s.estimator.monotone,
                    format!("max increase {}", s.estimator.max_increase),
                ));
            }
            if g.vertex_count() <= config.oracle_limit {
                match stoer_wagner(g) {
                    Ok(o) => {
                        r.oracle = Some(o.value);
                        r.checks.push(check(
                            "exactness",
                            "value equals the Stoer-Wagner mincut",
                            o.value == value,
                            format!("pipeline {value}, oracle {}", o.value),
                        ));
                    }
                    Err(e) => r.error = Some(e.to_string()),
                }
            }
        }
        Err(e) => r.error = Some(e.to_string()),
    }
    if g.vertex_count() <= config.enumerate_limit && g.is_connected() && g.vertex_count() >= 2 {
        match build_skeleton(g, &config.pipeline) {
            Ok(mut sk) => {
                if config.fault == Some(Fault::CorruptSkeleton) {
                    corrupt(&mut sk);
                }
                match check_skeleton_properties(&sk, g) {
                    Ok(p) => {
                        r.checks.push(check(
                            "property 1",
                            "W·|∂_H S*| ≤ (1+ε)λ for every mincut S*",
                            p.upper_violations == 0,
                            format!("{} of {} mincuts violate; worst ratio {}", p.upper_violations, p.mincuts_checked, p.max_mincut_ratio),
                        ));
                        r.checks.push(check(
                            "property 2",
                            "W·|∂_H S| ≥ (1−ε)λ for every cut S",
                            p.lower_violations == 0,
                            format!("{} of {} cuts violate; worst ratio {}", p.lower_violations, p.cuts_checked, p.min_ratio),
                        ));
                    }
                    Err(e) => r.error = Some(e.to_string()),
                }
            }
            Err(e) => r.error = Some(e.to_string()),
        }
    }
    if !r.passed() {
        r.replay = Some(write_dimacs(g));
    }
    r
}

pub fn run_instance(spec: &InstanceSpec, config: &Config) -> RunReport {
    match generate(spec) {
        Ok(g) => run_graph(&spec.to_string(), &g, config),
        Err(e) => RunReport {
            instance: spec.to_string(),
            n: 0,
            m: 0,
            value: None,
            oracle: None,
            params: None,
            timings: Vec::new(),
            checks: Vec::new(),
            replay: None,
            error: Some(e.to_string()),
        },
    }
}

/// Reports in input order; instances run in parallel.
pub fn run_suite(config: &Config) -> Vec<RunReport> {
    config.instances.par_iter().map(|s| run_instance(s, config)).collect()
}
