//! Maximum subgraph density `max_H e(H)/v(H)`.
//!
//! The exact value comes from Dinkelbach iterations over max-weight closure
//! problems solved by min cut: for a guess `a/b`, maximise
//! `b·e(S) - a·|S|` over vertex sets `S`. All arithmetic is integral.

use std::collections::VecDeque;
use std::fmt;

use num_rational::Ratio;

use crate::error::{input, Result};
use crate::graph::Graph;

/// Exact density `numerator / denominator` (edges over vertices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DensityValue {
    pub numerator: u64,
    pub denominator: u64,
}

impl DensityValue {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.numerator, self.denominator)
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl fmt::Display for DensityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// Densest vertex set together with its density.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensestSubgraph {
    pub vertices: Vec<usize>,
    pub edges: usize,
    pub density: DensityValue,
}

/// Exact maximum subgraph density via parametric min cut.
pub fn max_subgraph_density(g: &Graph) -> Result<DensityValue> {
    Ok(densest_by_flow(g)?.density)
}

/// Densest subgraph via Dinkelbach + min cut. Returns the largest
/// maximiser (the union of all densest sets).
pub fn densest_by_flow(g: &Graph) -> Result<DensestSubgraph> {
    if g.edge_count() == 0 {
        return input("maximum subgraph density needs at least one edge");
    }
    let mut s: Vec<usize> = g.non_isolated();
    let mut e = count_induced(g, &s);
    loop {
        let (a, b) = reduce(e as u64, s.len() as u64);
        let (best, value) = max_closure(g, a as i64, b as i64);
        if value <= 0 {
            // `a/b` is optimal; the largest maximiser of b·e(S) - a·|S| = 0
            // is the union of all densest sets.
            let vertices = if best.is_empty() { s } else { best };
            let edges = count_induced(g, &vertices);
            let (num, den) = reduce(edges as u64, vertices.len() as u64);
            debug_assert_eq!((num, den), (a, b));
            return Ok(DensestSubgraph { vertices, edges, density: DensityValue { numerator: num, denominator: den } });
        }
        e = count_induced(g, &best);
        s = best;
    }
}

/// Reference implementation over all vertex subsets, `n <= 20`.
pub fn max_subgraph_density_brute(g: &Graph) -> Result<DensityValue> {
    Ok(densest_brute(g)?.density)
}

/// Densest vertex subset by exhaustive search. Ties go to more edges, then to
/// the lexicographically smallest vertex list.
pub fn densest_brute(g: &Graph) -> Result<DensestSubgraph> {
    if g.edge_count() == 0 {
        return input("maximum subgraph density needs at least one edge");
    }
    if g.n() > 20 {
        return Err(crate::error::LabError::Resource(format!("brute-force density limited to 20 vertices, got {}", g.n())));
    }
    let n = g.n();
    let mut best: Option<(Ratio<u64>, usize, Vec<usize>)> = None;
    for mask in 1u32..(1u32 << n) {
        let vs: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let e = count_induced(g, &vs);
        if e == 0 {
            continue;
        }
        let d = Ratio::new(e as u64, vs.len() as u64);
        let better = match &best {
            None => true,
            Some((bd, be, bv)) => d > *bd || (d == *bd && (e > *be || (e == *be && vs < *bv))),
        };
        if better {
            best = Some((d, e, vs));
        }
    }
    let (d, e, vertices) = best.expect("at least one edge");
    Ok(DensestSubgraph {
        vertices,
        edges: e,
        density: DensityValue { numerator: *d.numer(), denominator: *d.denom() },
    })
}

fn count_induced(g: &Graph, vs: &[usize]) -> usize {
    let mut inside = vec![false; g.n()];
    for &v in vs {
        inside[v] = true;
    }
    g.edges().iter().filter(|&&(a, b)| inside[a] && inside[b]).count()
}

fn reduce(a: u64, b: u64) -> (u64, u64) {
    let r = Ratio::new(a, b);
    (*r.numer(), *r.denom())
}

/// Maximises `b·e(S) - a·|S|` as a max-weight closure: edge nodes of weight
/// `b` require both endpoint nodes of weight `-a`. Returns the largest
/// optimal vertex set (complement of the sink side of the maximal min cut).
fn max_closure(g: &Graph, a: i64, b: i64) -> (Vec<usize>, i64) {
    let m = g.edge_count();
    let n = g.n();
    let source = m + n;
    let sink = source + 1;
    let mut net = FlowNetwork::new(m + n + 2);
    let inf = b * m as i64 + 1;
    for (idx, &(u, v)) in g.edges().iter().enumerate() {
        net.add_edge(source, idx, b);
        net.add_edge(idx, m + u, inf);
        net.add_edge(idx, m + v, inf);
    }
    for v in 0..n {
        net.add_edge(m + v, sink, a);
    }
    let cut = net.max_flow(source, sink);
    let value = b * m as i64 - cut;
    // nodes that can still reach the sink in the residual graph lie on the
    // sink side of every min cut; the rest form the largest closure
    let reaches_sink = net.reverse_reachable(sink);
    let vertices = (0..n).filter(|&v| !reaches_sink[m + v]).collect();
    (vertices, value)
}

/// Dinic max flow on integer capacities.
struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork { head: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new() }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: i64) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let nodes = self.head.len();
        let mut flow = 0;
        loop {
            let mut level = vec![usize::MAX; nodes];
            level[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.head[u] {
                    if self.cap[e] > 0 && level[self.to[e]] == usize::MAX {
                        level[self.to[e]] = level[u] + 1;
                        queue.push_back(self.to[e]);
                    }
                }
            }
            if level[t] == usize::MAX {
                return flow;
            }
            let mut it = vec![0usize; nodes];
            loop {
                let pushed = self.augment(s, t, i64::MAX, &level, &mut it);
                if pushed == 0 {
                    break;
                }
                flow += pushed;
            }
        }
    }

    fn augment(&mut self, u: usize, t: usize, limit: i64, level: &[usize], it: &mut [usize]) -> i64 {
        if u == t {
            return limit;
        }
        while it[u] < self.head[u].len() {
            let e = self.head[u][it[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && level[v] == level[u] + 1 {
                let d = self.augment(v, t, limit.min(self.cap[e]), level, it);
                if d > 0 {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            it[u] += 1;
        }
        0
    }

    /// Nodes from which `t` is reachable through positive residual capacity.
    fn reverse_reachable(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[t] = true;
        let mut stack = vec![t];
        while let Some(v) = stack.pop() {
            for &e in &self.head[v] {
                // residual arc u -> v exists when the paired arc e^1 (u -> v) has capacity
                let u = self.to[e];
                if !seen[u] && self.cap[e ^ 1] > 0 {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }
}
