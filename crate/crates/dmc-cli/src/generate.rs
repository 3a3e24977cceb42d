use std::fmt;
use std::str::FromStr;

use dmc_graph::{parse_dimacs, GraphBuilder, Weight, WeightedMultigraph};
use dmc_lossy::expander_graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Random spanning tree plus uniform extra edges, weights uniform in
    /// `[wmin, wmax]`.
    Gnm { n: usize, m: usize },
    /// Two `K_k` joined by one edge of weight 1.
    Dumbbell { k: usize },
    /// `parts` explicit expanders on `size` vertices each, consecutive parts
    /// joined by `links` unit edges.
    ExpanderUnion { parts: usize, size: usize, links: usize },
    Grid { rows: usize, cols: usize },
    Dimacs { path: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub family: Family,
    pub wmin: Weight,
    pub wmax: Weight,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(family: Family) -> Self {
        InstanceSpec { family, wmin: 1, wmax: 1, seed: 0 }
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Gnm { n, m } => {
                write!(f, "gnm n={n} m={m} wmin={} wmax={} seed={}", self.wmin, self.wmax, self.seed)
            }
            Family::Dumbbell { k } => write!(f, "dumbbell k={k}"),
            Family::ExpanderUnion { parts, size, links } => {
                write!(f, "expander-union parts={parts} size={size} links={links}")
            }
            Family::Grid { rows, cols } => write!(f, "grid rows={rows} cols={cols} wmin={} wmax={} seed={}", self.wmin, self.wmax, self.seed),
            Family::Dimacs { path } => write!(f, "dimacs path={path}"),
        }
    }
}

/// `family key=value ...`, e.g. `gnm n=10 m=20 seed=7 wmax=100`.
impl FromStr for InstanceSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let mut toks = s.split_whitespace();
        let name = toks.next().ok_or_else(|| CliError::Usage("empty instance spec".into()))?;
        let mut kv = std::collections::BTreeMap::new();
        for t in toks {
            let (k, v) = t.split_once('=').ok_or_else(|| CliError::Usage(format!("expected key=value, got `{t}`")))?;
            kv.insert(k.to_string(), v.to_string());
        }
        let num = |k: &str, default: Option<u64>| -> Result<u64, CliError> {
            match kv.get(k) {
                Some(v) => v.parse().map_err(|_| CliError::Usage(format!("`{k}` must be an integer, got `{v}`"))),
                None => default.ok_or_else(|| CliError::Usage(format!("`{name}` needs `{k}`"))),
            }
        };
        let family = match name {
            "gnm" => Family::Gnm { n: num("n", None)? as usize, m: num("m", None)? as usize },
            "dumbbell" => Family::Dumbbell { k: num("k", None)? as usize },
            "expander-union" => Family::ExpanderUnion {
                parts: num("parts", Some(2))? as usize,
                size: num("size", None)? as usize,
                links: num("links", Some(1))? as usize,
            },
            "grid" => Family::Grid { rows: num("rows", None)? as usize, cols: num("cols", None)? as usize },
            "dimacs" => Family::Dimacs {
                path: kv.get("path").cloned().ok_or_else(|| CliError::Usage("`dimacs` needs `path`".into()))?,
            },
            other => return Err(CliError::Usage(format!("unknown family `{other}`"))),
        };
        Ok(InstanceSpec { family, wmin: num("wmin", Some(1))?, wmax: num("wmax", Some(1))?, seed: num("seed", Some(0))? })
    }
}

/// Deterministic for a given spec; every generated graph is connected.
pub fn generate(spec: &InstanceSpec) -> Result<WeightedMultigraph, CliError> {
    if spec.wmin == 0 || spec.wmin > spec.wmax {
        return Err(CliError::Usage(format!("weight range [{}, {}] is empty or contains 0", spec.wmin, spec.wmax)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weight = |rng: &mut ChaCha8Rng| rng.gen_range(spec.wmin..=spec.wmax);
    let g = match &spec.family {
        &Family::Gnm { n, m } => {
            if n < 2 || m + 1 < n {
                return Err(CliError::Usage(format!("gnm needs n ≥ 2 and m ≥ n−1, got n={n} m={m}")));
            }
            let mut b = GraphBuilder::new(n);
            for v in 1..n {
                let u = rng.gen_range(0..v);
                let w = weight(&mut rng);
                b.add_edge(u, v, w)?;
            }
            for _ in n - 1..m {
                let u = rng.gen_range(0..n);
                let mut v = rng.gen_range(0..n - 1);
                if v >= u {
                    v += 1;
                }
                let w = weight(&mut rng);
                b.add_edge(u, v, w)?;
            }
            b.build()?
        }
        &Family::Dumbbell { k } => {
            if k < 2 {
                return Err(CliError::Usage("dumbbell needs k ≥ 2".into()));
            }
            let mut b = GraphBuilder::new(2 * k);
            for side in [0, k] {
                for u in 0..k {
                    for v in u + 1..k {
                        b.add_edge(side + u, side + v, 1)?;
                    }
                }
            }
            b.add_edge(k - 1, k, 1)?;
            b.build()?
        }
        &Family::ExpanderUnion { parts, size, links } => {
            if parts == 0 || size < 2 || links == 0 {
                return Err(CliError::Usage("expander-union needs parts ≥ 1, size ≥ 2, links ≥ 1".into()));
            }
            let part = expander_graph(size);
            let mut b = GraphBuilder::new(parts * size);
            for p in 0..parts {
                let off = p * size;
                for e in part.edges() {
                    b.add_edge(off + e.u, off + e.v, e.w)?;
                }
                if p + 1 < parts {
                    for j in 0..links {
                        b.add_edge(off + j % size, off + size + (j * 7 + 3) % size, 1)?;
                    }
                }
            }
            b.build()?
        }
        &Family::Grid { rows, cols } => {
            if rows * cols < 2 {
                return Err(CliError::Usage("grid needs at least 2 vertices".into()));
            }
            let mut b = GraphBuilder::new(rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        let w = weight(&mut rng);
                        b.add_edge(v, v + 1, w)?;
                    }
                    if r + 1 < rows {
                        let w = weight(&mut rng);
                        b.add_edge(v, v + cols, w)?;
                    }
                }
            }
            b.build()?
        }
        Family::Dimacs { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            parse_dimacs(&text, 1)?
        }
    };
    Ok(g)
}
