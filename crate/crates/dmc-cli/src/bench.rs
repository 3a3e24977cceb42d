use std::io::Write;

use dmc_pipeline::{deterministic_mincut, PipelineParams};
use serde::{Deserialize, Serialize};

use crate::generate::{generate, Family, InstanceSpec};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub stage: String,
    pub milliseconds: f64,
}

/// One end-to-end run per edge count on `gnm` graphs with `n` vertices;
/// rows per stage plus a `total` row.
pub fn bench(n: usize, sizes: &[usize], seed: u64, wmax: u64, params: &PipelineParams) -> Result<Vec<BenchRow>, CliError> {
    let mut rows = Vec::new();
    for &m in sizes {
        let spec = InstanceSpec { family: Family::Gnm { n, m }, wmin: 1, wmax, seed };
        let g = generate(&spec)?;
        let t = std::time::Instant::now();
        let run = deterministic_mincut(&g, params)?;
        let total = t.elapsed().as_secs_f64() * 1e3;
        for s in &run.timings {
            rows.push(BenchRow { n, m, stage: s.stage.clone(), milliseconds: s.millis });
        }
        rows.push(BenchRow { n, m, stage: "total".into(), milliseconds: total });
    }
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}
