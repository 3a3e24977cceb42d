use dmc_pipeline::PipelineParams;
use serde::{Deserialize, Serialize};

use crate::generate::InstanceSpec;
use crate::CliError;

/// Deliberate corruption applied before verification, to exercise the
/// failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Halve every skeleton multiplicity.
    CorruptSkeleton,
    /// Report one more than the computed mincut.
    CorruptValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub pipeline: PipelineParams,
    pub instances: Vec<InstanceSpec>,
    pub fault: Option<Fault>,
    /// Skeleton properties are checked by enumeration up to this many
    /// vertices.
    pub enumerate_limit: usize,
    /// Stoer-Wagner cross-check up to this many vertices.
    pub oracle_limit: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            pipeline: PipelineParams::default(),
            instances: Vec::new(),
            fault: None,
            enumerate_limit: 12,
            oracle_limit: 2000,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Usage(format!("bad value `{v}` for `{key}`")))
}

impl Config {
    /// Flat `key = value` lines; `#` starts a comment and `instance` may
    /// repeat.
    pub fn parse(text: &str) -> Result<Config, CliError> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected `key = value`", i + 1)))?;
            c.set(k.trim(), v.trim())?;
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        let p = &mut self.pipeline;
        match key {
            "eps" => p.eps = parse(key, v)?,
            "phi" => p.sequence.decomposition.phi = parse(key, v)?,
            "beta" => p.sequence.decomposition.beta = parse(key, v)?,
            "tau_c" => p.tau_c = parse(key, v)?,
            "delta" => p.delta = Some(parse(key, v)?),
            "f" => p.f_config = parse(key, v)?,
            "precision_bits" => p.precision_bits = parse(key, v)?,
            "d_hat_cap" => p.d_hat_cap = parse(key, v)?,
            "max_trees" => p.packing.max_trees = parse(key, v)?,
            "pack_k" => p.packing.k = parse(key, v)?,
            "enumerate_limit" => self.enumerate_limit = parse(key, v)?,
            "oracle_limit" => self.oracle_limit = parse(key, v)?,
            "instance" => self.instances.push(v.parse()?),
            "inject" => {
                self.fault = match v {
                    "corrupt-skeleton" => Some(Fault::CorruptSkeleton),
                    "corrupt-value" => Some(Fault::CorruptValue),
                    "none" => None,
                    _ => return Err(CliError::Usage(format!("unknown fault `{v}`"))),
                }
            }
            _ => return Err(CliError::Usage(format!("unknown key `{key}`"))),
        }
        Ok(())
    }
}
