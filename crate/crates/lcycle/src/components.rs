//! Connected-component decomposition of a sample: classify components as
//! tree / unicyclic / complex, extract cycle lengths of unicyclic components
//! by leaf peeling, and aggregate the per-trial statistics the limit laws
//! are about.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::lengthset::LengthSet;
use crate::sampler::GraphSample;

/// Classification by excess e − v: trees (−1), unicyclic (0), complex (≥ 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentClass {
    Tree,
    Unicyclic { cycle_len: u64 },
    Complex { excess: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentSummary {
    pub vertices: u64,
    pub edges: u64,
    pub class: ComponentClass,
}

/// Per-sample aggregate: the cycle-count statistic X_L plus the component
/// inventory that the asymptotic laws condition on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrialStats {
    /// Number of unicyclic components whose cycle length lies in L.
    pub x_l: u64,
    /// Σ (edges − vertices) over complex components.
    pub total_excess: u64,
    pub num_complex: u64,
    pub num_unicyclic: u64,
    /// Cycle length → number of unicyclic components with that cycle length.
    pub cycle_length_histogram: BTreeMap<u64, u64>,
}

/// Reusable working memory for `census`; one per worker, never shared.
#[derive(Debug, Default)]
pub struct Scratch {
    parent: Vec<u32>,
    size: Vec<u32>,
    degree: Vec<u32>,
    edge_cnt: Vec<u64>,
    survivors: Vec<u32>,
    off: Vec<usize>,
    cur: Vec<usize>,
    adj: Vec<u32>,
    queue: Vec<u32>,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, n: usize, m: usize) {
        self.parent.clear();
        self.parent.extend(0..n as u32);
        self.size.clear();
        self.size.resize(n, 1);
        self.degree.clear();
        self.degree.resize(n, 0);
        self.edge_cnt.clear();
        self.edge_cnt.resize(n, 0);
        self.survivors.clear();
        self.survivors.resize(n, 0);
        self.off.clear();
        self.off.resize(n + 1, 0);
        self.cur.clear();
        self.cur.resize(n, 0);
        self.adj.clear();
        self.adj.resize(2 * m, 0);
        self.queue.clear();
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let grand = parent[parent[x as usize] as usize];
        parent[x as usize] = grand;
        x = grand;
    }
    x
}

fn union(parent: &mut [u32], size: &mut [u32], a: u32, b: u32) {
    let mut ra = find(parent, a);
    let mut rb = find(parent, b);
    if ra == rb {
        return;
    }
    if size[ra as usize] < size[rb as usize] {
        std::mem::swap(&mut ra, &mut rb);
    }
    parent[rb as usize] = ra;
    size[ra as usize] += size[rb as usize];
}

/// Run union-find, build the adjacency structure, and peel degree-1
/// vertices to a fixed point. Afterwards `s.degree[v] ≥ 2` exactly on
/// 2-core vertices, and `s.edge_cnt` / `s.survivors` hold per-root totals.
fn decompose_into(g: &GraphSample, s: &mut Scratch) {
    let n = g.n as usize;
    let m = g.edges.len();
    s.prepare(n, m);
    for &(u, v) in &g.edges {
        s.degree[u as usize] += 1;
        s.degree[v as usize] += 1;
        union(&mut s.parent, &mut s.size, u, v);
    }
    for i in 0..n {
        s.off[i + 1] = s.off[i] + s.degree[i] as usize;
        s.cur[i] = s.off[i];
    }
    for &(u, v) in &g.edges {
        s.adj[s.cur[u as usize]] = v;
        s.cur[u as usize] += 1;
        s.adj[s.cur[v as usize]] = u;
        s.cur[v as usize] += 1;
    }
    for v in 0..n {
        if s.degree[v] == 1 {
            s.queue.push(v as u32);
        }
    }
    let mut head = 0;
    while head < s.queue.len() {
        let v = s.queue[head] as usize;
        head += 1;
        if s.degree[v] != 1 {
            continue;
        }
        s.degree[v] = 0;
        for idx in s.off[v]..s.off[v + 1] {
            let w = s.adj[idx] as usize;
            if s.degree[w] > 0 {
                s.degree[w] -= 1;
                if s.degree[w] == 1 {
                    s.queue.push(w as u32);
                }
                break;
            }
        }
    }
    for &(u, _) in &g.edges {
        let r = find(&mut s.parent, u);
        s.edge_cnt[r as usize] += 1;
    }
    for v in 0..n {
        if s.degree[v] >= 2 {
            let r = find(&mut s.parent, v as u32);
            s.survivors[r as usize] += 1;
        }
    }
}

/// One-pass aggregate of a sample's component structure. Cycle lengths are
/// always ≥ 3 in a simple graph, so membership checks cannot fail.
pub fn census(g: &GraphSample, l: &LengthSet, s: &mut Scratch) -> TrialStats {
    decompose_into(g, s);
    let n = g.n as usize;
    let mut stats = TrialStats::default();
    for v in 0..n {
        let r = find(&mut s.parent, v as u32);
        if r as usize != v {
            continue;
        }
        let vertices = s.size[v] as u64;
        let edges = s.edge_cnt[v];
        if edges == vertices {
            let len = s.survivors[v] as u64;
            debug_assert!(len >= 3);
            stats.num_unicyclic += 1;
            *stats.cycle_length_histogram.entry(len).or_insert(0) += 1;
            if l.contains_unchecked(len) {
                stats.x_l += 1;
            }
        } else if edges > vertices {
            stats.num_complex += 1;
            stats.total_excess += edges - vertices;
        }
    }
    stats
}

/// Full component inventory, ordered by each component's smallest vertex.
pub fn decompose(g: &GraphSample) -> Vec<ComponentSummary> {
    let mut s = Scratch::new();
    decompose_into(g, &mut s);
    let n = g.n as usize;
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for v in 0..n {
        let r = find(&mut s.parent, v as u32) as usize;
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let vertices = s.size[r] as u64;
        let edges = s.edge_cnt[r];
        let class = if edges + 1 == vertices {
            ComponentClass::Tree
        } else if edges == vertices {
            ComponentClass::Unicyclic {
                cycle_len: s.survivors[r] as u64,
            }
        } else {
            ComponentClass::Complex {
                excess: edges - vertices,
            }
        };
        out.push(ComponentSummary {
            vertices,
            edges,
            class,
        });
    }
    out
}

/// Cycle length of a sample that is a single unicyclic component.
///
/// # Panics
/// Panics when the sample is not connected-unicyclic; the contract is that
/// callers extract the component first.
pub fn cycle_length(g: &GraphSample) -> u64 {
    let comps: Vec<_> = decompose(g)
        .into_iter()
        .filter(|c| !(c.vertices == 1 && c.edges == 0))
        .collect();
    assert!(
        comps.len() == 1,
        "cycle_length requires a single connected component"
    );
    match comps[0].class {
        ComponentClass::Unicyclic { cycle_len } => cycle_len,
        ref other => panic!("cycle_length requires a unicyclic component, got {other:?}"),
    }
}

/// Number of unicyclic components whose cycle length lies in L.
pub fn count_l_cycles(comps: &[ComponentSummary], l: &LengthSet) -> Result<u64> {
    let mut count = 0;
    for c in comps {
        if let ComponentClass::Unicyclic { cycle_len } = c.class {
            if l.contains(cycle_len)? {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Σ excess over complex components; 0 for a forest-plus-unicyclic graph.
pub fn total_excess(comps: &[ComponentSummary]) -> u64 {
    comps
        .iter()
        .map(|c| match c.class {
            ComponentClass::Complex { excess } => excess,
            _ => 0,
        })
        .sum()
}
