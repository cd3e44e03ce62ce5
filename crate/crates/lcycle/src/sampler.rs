//! Uniform sampling of G(n, M): M distinct edges drawn uniformly from the
//! n(n−1)/2 unordered vertex pairs, reproducible per (seed, trial stream).

use std::collections::HashSet;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, parse_err, Result};

/// One realization of G(n, M). Edges are unordered pairs (u, v) with
/// u < v < n, pairwise distinct, sorted in colexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSample {
    pub n: u64,
    pub edges: Vec<(u32, u32)>,
}

/// Number of vertex pairs C(n, 2); errors when it would not fit the u32
/// vertex representation.
pub fn edge_count(n: u64) -> Result<u64> {
    if n > u32::MAX as u64 {
        return Err(domain(format!("n = {n} exceeds the supported vertex range")));
    }
    Ok(n * (n.saturating_sub(1)) / 2)
}

/// Colexicographic rank of an edge: i = v(v−1)/2 + u for u < v.
pub fn edge_rank(u: u32, v: u32) -> u64 {
    assert!(u < v, "edge ranks are defined for u < v");
    let v = v as u64;
    v * (v - 1) / 2 + u as u64
}

/// Inverse of `edge_rank` on [0, C(n,2)).
pub fn edge_unrank(n: u64, i: u64) -> Result<(u32, u32)> {
    if i >= edge_count(n)? {
        return Err(domain(format!(
            "edge index {i} out of range for n = {n}"
        )));
    }
    // v = ⌊(1+√(1+8i))/2⌋ up to f64 rounding, fixed by the adjustment loops.
    let mut v = ((1.0 + (1.0 + 8.0 * i as f64).sqrt()) / 2.0).floor() as u64;
    while v * (v - 1) / 2 > i {
        v -= 1;
    }
    while v * (v + 1) / 2 <= i {
        v += 1;
    }
    let u = i - v * (v - 1) / 2;
    debug_assert!(u < v);
    Ok((u as u32, v as u32))
}

/// Uniform G(n, M) for the default stream 0.
pub fn sample_gnm(n: u64, m: u64, seed: u64) -> Result<GraphSample> {
    sample_gnm_stream(n, m, seed, 0)
}

/// Uniform G(n, M) on an explicit RNG stream. Streams decouple Monte Carlo
/// trials: trial t uses stream t, so results do not depend on how trials are
/// scheduled across workers.
///
/// Edge-index subsets are drawn by Floyd's combination sampling: expected
/// O(M) index draws and O(M) memory even when C(n,2) is astronomically
/// larger than M.
pub fn sample_gnm_stream(n: u64, m: u64, seed: u64, stream: u64) -> Result<GraphSample> {
    let total = edge_count(n)?;
    if m > total {
        return Err(domain(format!(
            "M = {m} exceeds the number of vertex pairs {total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut chosen: HashSet<u64> = HashSet::with_capacity(m as usize);
    for j in (total - m)..total {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut indices: Vec<u64> = chosen.into_iter().collect();
    indices.sort_unstable();
    let edges = indices
        .into_iter()
        .map(|i| edge_unrank(n, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(GraphSample { n, edges })
}

/// Plain-text edge list: header "n M seed", then one "u v" line per edge.
pub fn dump(g: &GraphSample, seed: u64) -> String {
    let mut out = String::with_capacity(16 * (g.edges.len() + 1));
    out.push_str(&format!("{} {} {}\n", g.n, g.edges.len(), seed));
    for &(u, v) in &g.edges {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Parse the `dump` format back into a sample plus the recorded seed.
pub fn parse_dump(text: &str) -> Result<(GraphSample, u64)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err("empty edge dump"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(format!(
            "edge dump header must be \"n M seed\", got {header:?}"
        )));
    }
    let n: u64 = fields[0]
        .parse()
        .map_err(|_| parse_err(format!("bad n in header {header:?}")))?;
    let m: u64 = fields[1]
        .parse()
        .map_err(|_| parse_err(format!("bad M in header {header:?}")))?;
    let seed: u64 = fields[2]
        .parse()
        .map_err(|_| parse_err(format!("bad seed in header {header:?}")))?;
    let mut seen = HashSet::with_capacity(m as usize);
    let mut edges = Vec::with_capacity(m as usize);
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let pair: Vec<&str> = line.split_whitespace().collect();
        if pair.len() != 2 {
            return Err(parse_err(format!("bad edge line {line:?}")));
        }
        let u: u32 = pair[0]
            .parse()
            .map_err(|_| parse_err(format!("bad vertex in {line:?}")))?;
        let v: u32 = pair[1]
            .parse()
            .map_err(|_| parse_err(format!("bad vertex in {line:?}")))?;
        if u >= v || (v as u64) >= n {
            return Err(parse_err(format!(
                "edge ({u}, {v}) violates u < v < n with n = {n}"
            )));
        }
        if !seen.insert((u, v)) {
            return Err(parse_err(format!("duplicate edge ({u}, {v})")));
        }
        edges.push((u, v));
    }
    if edges.len() as u64 != m {
        return Err(parse_err(format!(
            "header promises {m} edges, found {}",
            edges.len()
        )));
    }
    Ok((GraphSample { n, edges }, seed))
}
