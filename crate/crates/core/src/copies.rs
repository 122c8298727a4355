//! Copies of a pattern graph inside a host graph.
//!
//! A copy is a subgraph of the host isomorphic to the pattern, identified by
//! its edge set. Copies are counted as injective edge-preserving maps
//! (embeddings) divided by the pattern's automorphism count.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{input, LabError, Result};
use crate::graph::{Edge, Graph};

/// Largest pattern accepted by exact counting and automorphism routines.
pub const MAX_PATTERN_VERTICES: usize = 10;
/// Largest number of copies the uniform copy sampler will stream through.
pub const MAX_STREAMED_COPIES: u128 = 1_000_000;

/// Backtracking enumerator of embeddings of `pattern` into `host`.
///
/// Candidate sets for every unmapped pattern vertex are narrowed as
/// neighbours get mapped; a branch is cut when some unmapped vertex has no
/// candidate left or when the union of candidates is smaller than the
/// number of vertices still to place.
pub struct Embeddings<'a> {
    pattern: &'a Graph,
    host: &'a Graph,
    order: Vec<usize>,
    words: usize,
}

impl<'a> Embeddings<'a> {
    pub fn new(pattern: &'a Graph, host: &'a Graph) -> Self {
        let words = host.n().div_ceil(64).max(1);
        Embeddings { pattern, host, order: search_order(pattern), words }
    }

    /// Calls `visit` with `map[pattern vertex] = host vertex` for every
    /// embedding, in lexicographic order of the search sequence.
    pub fn for_each(&self, mut visit: impl FnMut(&[usize]) -> ControlFlow<()>) -> ControlFlow<()> {
        let k = self.pattern.n();
        if k > self.host.n() {
            return ControlFlow::Continue(());
        }
        if k == 0 {
            return visit(&[]);
        }
        let w = self.words;
        // one block of k candidate bitsets per depth
        let mut levels = vec![0u64; (k + 1) * k * w];
        for u in 0..k {
            let du = self.pattern.degree(u);
            for x in 0..self.host.n() {
                if self.host.degree(x) >= du {
                    levels[u * w + x / 64] |= 1u64 << (x % 64);
                }
            }
        }
        let mut map = vec![usize::MAX; k];
        let mut used = vec![0u64; w];
        self.step(0, &mut levels, &mut map, &mut used, &mut visit)
    }

    fn step(
        &self,
        depth: usize,
        levels: &mut [u64],
        map: &mut [usize],
        used: &mut [u64],
        visit: &mut impl FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if depth == self.order.len() {
            return visit(map);
        }
        let (k, w) = (self.pattern.n(), self.words);
        let block = k * w;
        let u = self.order[depth];
        let options: Vec<usize> = {
            let cur = &levels[depth * block + u * w..depth * block + (u + 1) * w];
            bits(cur.iter().zip(used.iter()).map(|(c, s)| c & !s)).collect()
        };
        for x in options {
            let (head, tail) = levels.split_at_mut((depth + 1) * block);
            let cur = &head[depth * block..];
            let next = &mut tail[..block];
            next.copy_from_slice(cur);
            let nx = self.host.neighbors(x).words();
            for v in self.pattern.neighbors(u).iter() {
                if map[v] == usize::MAX {
                    for (a, b) in next[v * w..(v + 1) * w].iter_mut().zip(nx) {
                        *a &= *b;
                    }
                }
            }
            map[u] = x;
            used[x / 64] |= 1u64 << (x % 64);
            if self.feasible(depth + 1, next, used) {
                self.step(depth + 1, levels, map, used, visit)?;
            }
            used[x / 64] &= !(1u64 << (x % 64));
            map[u] = usize::MAX;
        }
        ControlFlow::Continue(())
    }

    fn feasible(&self, depth: usize, cand: &[u64], used: &[u64]) -> bool {
        let remaining = self.order.len() - depth;
        if remaining == 0 {
            return true;
        }
        let w = self.words;
        let mut union = [0u64; 8];
        let mut union_vec;
        let union: &mut [u64] = if w <= 8 {
            &mut union[..w]
        } else {
            union_vec = vec![0u64; w];
            &mut union_vec
        };
        for &v in &self.order[depth..] {
            let mut any = 0u64;
            for i in 0..w {
                let c = cand[v * w + i] & !used[i];
                any |= c;
                union[i] |= c;
            }
            if any == 0 {
                return false;
            }
        }
        union.iter().map(|x| x.count_ones() as usize).sum::<usize>() >= remaining
    }

    pub fn count(&self) -> u128 {
        let mut c = 0u128;
        let _ = self.for_each(|_| {
            c += 1;
            ControlFlow::Continue(())
        });
        c
    }

    /// Counts embeddings, stopping with `None` once `limit` is exceeded.
    pub fn count_up_to(&self, limit: u128) -> Option<u128> {
        let mut c = 0u128;
        let flow = self.for_each(|_| {
            c += 1;
            if c > limit {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        match flow {
            ControlFlow::Break(()) => None,
            ControlFlow::Continue(()) => Some(c),
        }
    }

    pub fn exists(&self) -> bool {
        self.for_each(|_| ControlFlow::Break(())).is_break()
    }
}

fn bits(words: impl Iterator<Item = u64>) -> impl Iterator<Item = usize> {
    words.enumerate().flat_map(|(wi, mut b)| {
        std::iter::from_fn(move || {
            if b == 0 {
                return None;
            }
            let t = b.trailing_zeros() as usize;
            b &= b - 1;
            Some(wi * 64 + t)
        })
    })
}

/// Start at the highest-degree vertex, then repeatedly take the vertex with
/// the most already-placed neighbours (ties: higher degree, lower label).
fn search_order(pattern: &Graph) -> Vec<usize> {
    let k = pattern.n();
    let mut placed = vec![false; k];
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let next = (0..k)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let back = pattern.neighbors(v).iter().filter(|&w| placed[w]).count();
                (back, pattern.degree(v), std::cmp::Reverse(v))
            })
            .expect("unplaced vertex exists");
        placed[next] = true;
        order.push(next);
    }
    order
}

/// Edge set of the image of `pattern` under `map`, sorted.
pub fn image_edges(pattern: &Graph, map: &[usize]) -> Vec<Edge> {
    let mut e: Vec<Edge> = pattern
        .edges()
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (map[a], map[b]);
            (x.min(y), x.max(y))
        })
        .collect();
    e.sort_unstable();
    e
}

fn guard_pattern(h: &Graph) -> Result<()> {
    if h.n() > MAX_PATTERN_VERTICES {
        return Err(LabError::Resource(format!(
            "pattern has {} vertices, limit is {MAX_PATTERN_VERTICES}",
            h.n()
        )));
    }
    Ok(())
}

fn require_no_isolated(h: &Graph) -> Result<()> {
    if h.has_isolated_vertices() {
        return input("pattern must not have isolated vertices");
    }
    if h.edge_count() == 0 {
        return input("pattern must have at least one edge");
    }
    Ok(())
}

/// `|Aut(H)|` by exhaustive search over vertex bijections preserving edges.
pub fn automorphism_count(h: &Graph) -> Result<u64> {
    guard_pattern(h)?;
    Ok(Embeddings::new(h, h).count() as u64)
}

/// Number of distinct subgraphs of `g` isomorphic to `h`.
pub fn count_copies(h: &Graph, g: &Graph) -> Result<u64> {
    require_no_isolated(h)?;
    guard_pattern(h)?;
    let emb = Embeddings::new(h, g).count();
    let aut = automorphism_count(h)? as u128;
    debug_assert_eq!(emb % aut, 0);
    Ok((emb / aut) as u64)
}

/// `|S_H| = n! / ((n - v(H))! |Aut(H)|)`, the number of copies of `h` in `K_n`.
pub fn copies_in_complete(h: &Graph, n: usize) -> Result<BigUint> {
    require_no_isolated(h)?;
    guard_pattern(h)?;
    if h.n() > n {
        return input(format!("pattern has {} vertices but n = {n}", h.n()));
    }
    let mut falling = BigUint::one();
    for i in 0..h.n() {
        falling *= BigUint::from(n - i);
    }
    Ok(falling / BigUint::from(automorphism_count(h)?))
}

/// Probability that a uniform copy of `h` in `K_n` lies inside a fixed copy
/// of `gamma`, with the vertex-containment upper bound `(v(gamma)/n)^{v(h)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentProbability {
    pub exact: BigRational,
    pub vertex_bound: BigRational,
}

pub fn containment_probability(h: &Graph, gamma: &Graph, n: usize) -> Result<ContainmentProbability> {
    if gamma.n() > n {
        return input(format!("gamma has {} vertices but n = {n}", gamma.n()));
    }
    let inside = BigUint::from(count_copies(h, gamma)?);
    let total = copies_in_complete(h, n)?;
    let exact = BigRational::new(inside.into(), total.into());
    let base = BigRational::new(BigUint::from(gamma.n()).into(), BigUint::from(n).into());
    let mut vertex_bound = BigRational::one();
    for _ in 0..h.n() {
        vertex_bound *= &base;
    }
    Ok(ContainmentProbability { exact, vertex_bound })
}

/// Whether `g` contains a copy of `h`. No size guard: used for containment
/// events of large patterns where the candidate pruning does the work.
pub fn contains_copy(h: &Graph, g: &Graph) -> bool {
    if h.edge_count() > g.edge_count() {
        return false;
    }
    Embeddings::new(h, g).exists()
}

/// All copies of `h` in `g` as sorted edge lists, in sorted order.
pub fn enumerate_copies(h: &Graph, g: &Graph, limit: usize) -> Result<Vec<Vec<Edge>>> {
    let mut seen = BTreeSet::new();
    let mut over = false;
    let _ = Embeddings::new(h, g).for_each(|map| {
        seen.insert(image_edges(h, map));
        if seen.len() > limit {
            over = true;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    if over {
        return Err(LabError::Resource(format!("more than {limit} copies")));
    }
    Ok(seen.into_iter().collect())
}

/// A uniformly random copy of `h` in `g`, or `None` if there is none.
///
/// Reservoir sampling over the embedding stream: each copy is hit by exactly
/// `|Aut(h)|` embeddings, so a uniform embedding gives a uniform copy.
pub fn uniform_copy<R: Rng + ?Sized>(h: &Graph, g: &Graph, rng: &mut R) -> Result<Option<Vec<Edge>>> {
    if h.edge_count() > g.edge_count() {
        return Ok(None);
    }
    let aut = if h.n() <= MAX_PATTERN_VERTICES { automorphism_count(h)? as u128 } else { 1 };
    let limit = MAX_STREAMED_COPIES * aut;
    let mut seen = 0u128;
    let mut chosen: Option<Vec<usize>> = None;
    let flow = Embeddings::new(h, g).for_each(|map| {
        seen += 1;
        if seen > limit {
            return ControlFlow::Break(());
        }
        if rng.random_range(0..seen) == 0 {
            chosen = Some(map.to_vec());
        }
        ControlFlow::Continue(())
    });
    if flow.is_break() {
        return Err(LabError::Resource(format!("more than {MAX_STREAMED_COPIES} copies to sample from")));
    }
    Ok(chosen.map(|m| image_edges(h, &m)))
}

/// Isomorphism classes of the subgraphs of `gamma` without isolated
/// vertices, each with its number of copies inside `gamma`.
pub fn subgraph_classes(gamma: &Graph, max_edges: usize) -> Result<Vec<(Graph, u64)>> {
    let m = gamma.edge_count();
    if m > max_edges {
        return Err(LabError::Resource(format!("{m} edges, subset enumeration limit is {max_edges}")));
    }
    // bucket by a cheap invariant, then confirm isomorphism by embedding
    let mut buckets: BTreeMap<(usize, usize, Vec<usize>), Vec<Graph>> = BTreeMap::new();
    for mask in 1u64..(1u64 << m) {
        let edges: Vec<Edge> = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| gamma.edges()[i]).collect();
        let h = Graph::new(gamma.n(), edges).expect("subset of valid edges").without_isolated();
        let mut degs = h.degrees();
        degs.sort_unstable();
        let key = (h.n(), h.edge_count(), degs);
        let bucket = buckets.entry(key).or_default();
        if !bucket.iter().any(|r| Embeddings::new(&h, r).exists()) {
            bucket.push(h);
        }
    }
    let mut out = Vec::new();
    for reps in buckets.into_values() {
        for h in reps {
            let c = count_copies(&h, gamma)?;
            out.push((h, c));
        }
    }
    Ok(out)
}

/// `P_Gamma[H in Gamma]` as a float, convenience for reports.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    if r.is_zero() {
        return 0.0;
    }
    r.to_f64().unwrap_or(f64::NAN)
}
