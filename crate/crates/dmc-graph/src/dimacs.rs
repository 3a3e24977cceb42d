//! DIMACS-style edge lists: a `p <n> <m>` header (an optional format token
//! such as `p cut 4 5` is accepted) followed by `e u v w` lines with 1-based
//! vertices. Lines starting with `c` are comments.

use std::fmt::Write as _;

use crate::{GraphBuilder, GraphError, Weight, WeightedMultigraph};

/// Parse with integer weights. Decimal weights are multiplied by `scale` and
/// must land on an integer.
pub fn parse_dimacs(text: &str, scale: u64) -> Result<WeightedMultigraph, GraphError> {
    let mut builder: Option<GraphBuilder> = None;
    let mut declared_m = 0usize;
    let mut seen_m = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let err = |msg: &str| GraphError::Parse { line: line_no, msg: msg.to_string() };
        match toks[0] {
            "p" => {
                if builder.is_some() {
                    return Err(err("duplicate header"));
                }
                let nums: Vec<&str> = toks[1..].iter().copied().filter(|t| t.parse::<usize>().is_ok()).collect();
                if nums.len() != 2 {
                    return Err(err("expected `p <n> <m>`"));
                }
                let n: usize = nums[0].parse().map_err(|_| err("bad vertex count"))?;
                declared_m = nums[1].parse().map_err(|_| err("bad edge count"))?;
                builder = Some(GraphBuilder::new(n));
            }
            "e" | "a" => {
                let b = builder.as_mut().ok_or_else(|| err("edge before header"))?;
                if toks.len() < 3 {
                    return Err(err("expected `e u v [w]`"));
                }
                let u: usize = toks[1].parse().map_err(|_| err("bad endpoint"))?;
                let v: usize = toks[2].parse().map_err(|_| err("bad endpoint"))?;
                if u == 0 || v == 0 {
                    return Err(err("vertices are 1-based"));
                }
                let w = match toks.get(3) {
                    Some(t) => parse_weight(t, scale).ok_or_else(|| err("bad weight"))?,
                    None => scale,
                };
                if w == 0 {
                    return Err(err("weights must be positive"));
                }
                b.add_edge(u - 1, v - 1, w).map_err(|e| err(&e.to_string()))?;
                seen_m += 1;
            }
            _ => return Err(err("unknown line type")),
        }
    }
    let b = builder.ok_or(GraphError::Parse { line: 0, msg: "missing header".into() })?;
    if seen_m != declared_m {
        return Err(GraphError::Parse { line: 0, msg: format!("header declares {declared_m} edges, found {seen_m}") });
    }
    b.build()
}

fn parse_weight(tok: &str, scale: u64) -> Option<Weight> {
    if let Ok(w) = tok.parse::<u64>() {
        return w.checked_mul(scale);
    }
    let (int, frac) = tok.split_once('.')?;
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let digits = frac.len() as u32;
    let frac_val: u64 = frac.parse().ok()?;
    let den = 10u64.checked_pow(digits)?;
    let num = int.checked_mul(den)?.checked_add(frac_val)?.checked_mul(scale)?;
    (num % den == 0).then_some(num / den)
}

/// Serialize; self-loops are written as `e v v w` lines.
pub fn write_dimacs(g: &WeightedMultigraph) -> String {
    let loops = g.self_loops().iter().filter(|&&l| l > 0).count();
    let mut out = String::new();
    writeln!(out, "p {} {}", g.vertex_count(), g.edge_count() + loops).unwrap();
    for e in g.edges() {
        writeln!(out, "e {} {} {}", e.u + 1, e.v + 1, e.w).unwrap();
    }
    for (v, &l) in g.self_loops().iter().enumerate() {
        if l > 0 {
            writeln!(out, "e {} {} {}", v + 1, v + 1, l).unwrap();
        }
    }
    out
}
