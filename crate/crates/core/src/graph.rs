//! Undirected simple graphs on vertices `0..n`.
//!
//! A [`Graph`] keeps its edges as a sorted list of pairs `(i, j)` with
//! `i < j` together with a bitset adjacency used by the subgraph searches.
//! The external edge-list format is 1-based; everything in memory is 0-based.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{input, LabError, Result};

pub type Edge = (usize, usize);

/// Bitset over `0..n`, one `u64` word per 64 vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexSet {
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet { words: vec![0; n.div_ceil(64).max(1)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    #[inline]
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        self.words[v / 64] |= 1u64 << (v % 64);
    }

    #[inline]
    pub fn remove(&mut self, v: usize) {
        self.words[v / 64] &= !(1u64 << (v % 64));
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn intersect_with(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    #[inline]
    pub fn union_with(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    #[inline]
    pub fn difference_with(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !*b;
        }
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + t)
            })
        })
    }
}

/// Immutable undirected simple graph.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<VertexSet>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph").field("n", &self.n).field("edges", &self.edges).finish()
    }
}

impl Graph {
    /// Builds a graph from 0-based pairs. Unordered duplicates collapse; a
    /// self-loop or an endpoint `>= n` is rejected.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            if a >= n || b >= n {
                return input(format!("vertex out of range in edge ({a}, {b}) for n = {n}"));
            }
            if a == b {
                return input(format!("self-loop at vertex {a}"));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self::from_sorted_unchecked(n, set.into_iter().collect()))
    }

    /// `edges` must be sorted, deduplicated, `i < j < n`.
    pub(crate) fn from_sorted_unchecked(n: usize, edges: Vec<Edge>) -> Self {
        let mut adj = vec![VertexSet::empty(n); n];
        for &(a, b) in &edges {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        Graph { n, edges, adj }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_unchecked(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.adj[a].contains(b)
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Vertices with at least one incident edge.
    pub fn non_isolated(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| !self.adj[v].is_empty()).collect()
    }

    pub fn has_isolated_vertices(&self) -> bool {
        (0..self.n).any(|v| self.adj[v].is_empty())
    }

    /// Dense symmetric 0/1 adjacency matrix with zero diagonal.
    pub fn adjacency(&self) -> Mat<f64> {
        let mut a = Mat::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// Whether every edge of `self` is an edge of `other` (same vertex set size).
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n == other.n && self.edges.iter().all(|&(a, b)| other.has_edge(a, b))
    }

    /// Keeps only the edges for which `keep` returns true.
    pub fn filter_edges(&self, mut keep: impl FnMut(Edge) -> bool) -> Graph {
        let edges = self.edges.iter().copied().filter(|&e| keep(e)).collect();
        Self::from_sorted_unchecked(self.n, edges)
    }

    /// Subgraph induced on `vertices`, relabelled to `0..vertices.len()` in
    /// the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut edges = Vec::new();
        for (ia, &a) in vertices.iter().enumerate() {
            for (ib, &b) in vertices.iter().enumerate().skip(ia + 1) {
                if self.has_edge(a, b) {
                    edges.push((ia, ib));
                }
            }
        }
        Graph::new(vertices.len(), edges).expect("relabelled edges are valid")
    }

    /// Drops isolated vertices, relabelling the rest in increasing order.
    pub fn without_isolated(&self) -> Graph {
        let keep = self.non_isolated();
        self.induced_edges_only(&keep)
    }

    /// Relabels `vertices` to `0..k` and keeps the edges of `self` among them
    /// (same as [`Graph::induced`] but for sorted input).
    fn induced_edges_only(&self, vertices: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| index[a] != usize::MAX && index[b] != usize::MAX)
            .map(|&(a, b)| (index[a], index[b]))
            .collect::<Vec<_>>();
        Graph::new(vertices.len(), edges).expect("relabelled edges are valid")
    }

    /// Maps every edge through `map` into a graph on `n` vertices.
    pub fn relabel(&self, map: &[usize], n: usize) -> Result<Graph> {
        if map.len() != self.n {
            return input("relabel map length differs from vertex count");
        }
        Graph::new(n, self.edges.iter().map(|&(a, b)| (map[a], map[b])))
    }

    /// Reads the edge-list format: a header `n m`, then `m` lines `i j`
    /// with 1-based endpoints. Blank lines and `#` comments are skipped.
    pub fn read_edge_list(reader: impl BufRead) -> Result<Graph> {
        let mut lines = reader
            .lines()
            .map(|l| l.map_err(LabError::from))
            .filter(|l| l.as_ref().map(|s| !s.trim().is_empty() && !s.trim_start().starts_with('#')).unwrap_or(true));
        let header = lines.next().ok_or_else(|| LabError::Input("missing header line".into()))??;
        let (n, m) = parse_pair(&header)?;
        let mut pairs = Vec::with_capacity(m);
        for line in lines {
            let (a, b) = parse_pair(&line?)?;
            if a == 0 || b == 0 {
                return input("edge-list endpoints are 1-based");
            }
            pairs.push((a - 1, b - 1));
        }
        if pairs.len() != m {
            return input(format!("header announces {m} edges, found {}", pairs.len()));
        }
        Graph::new(n, pairs)
    }

    /// Writes the edge-list format with sorted 1-based edges.
    pub fn write_edge_list(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{} {}", self.n, self.edges.len())?;
        for &(a, b) in &self.edges {
            writeln!(w, "{} {}", a + 1, b + 1)?;
        }
        Ok(())
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace().map(|t| t.parse::<usize>());
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => input(format!("malformed line: {line:?}")),
    }
}

/// Builds a graph from 1-based pairs, the convention of the text formats.
pub fn build_graph(n: usize, pairs: &[(usize, usize)]) -> Result<Graph> {
    let mut zero_based = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        if a == 0 || b == 0 || a > n || b > n {
            return input(format!("vertex out of range in edge ({a}, {b}) for n = {n}"));
        }
        zero_based.push((a - 1, b - 1));
    }
    Graph::new(n, zero_based)
}

/// Serializable edge list used inside JSON records.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeListRecord {
    pub n: usize,
    /// 1-based pairs.
    pub edges: Vec<(usize, usize)>,
}

impl From<&Graph> for EdgeListRecord {
    fn from(g: &Graph) -> Self {
        EdgeListRecord { n: g.n, edges: g.edges.iter().map(|&(a, b)| (a + 1, b + 1)).collect() }
    }
}

/// Writes a dense matrix as CSV rows.
pub fn write_matrix_csv(m: &Mat<f64>, w: impl Write) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        wtr.write_record(&row).map_err(|e| LabError::Io(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_from_one_based_pairs() {
        let g = build_graph(3, &[(1, 2), (2, 3), (1, 3)]).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn empty_graph() {
        let g = build_graph(4, &[]).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.n(), 4);
    }

    #[test]
    fn unordered_duplicates_collapse() {
        let g = build_graph(3, &[(1, 2), (2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn rejects_bad_vertices() {
        assert!(matches!(build_graph(3, &[(1, 4)]), Err(LabError::Input(_))));
        assert!(matches!(build_graph(3, &[(2, 2)]), Err(LabError::Input(_))));
        assert!(matches!(build_graph(3, &[(0, 1)]), Err(LabError::Input(_))));
    }

    #[test]
    fn adjacency_is_symmetric_zero_diagonal() {
        let g = build_graph(4, &[(1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        let a = g.adjacency();
        for i in 0..4 {
            assert_eq!(a[(i, i)], 0.0);
            for j in 0..4 {
                assert_eq!(a[(i, j)], a[(j, i)]);
            }
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let g = build_graph(5, &[(5, 1), (2, 3)]).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "5 2\n1 5\n2 3\n");
        let back = Graph::read_edge_list(&buf[..]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn edge_list_count_mismatch() {
        let text = "3 2\n1 2\n";
        assert!(Graph::read_edge_list(text.as_bytes()).is_err());
    }

    #[test]
    fn vertex_set_iteration() {
        let mut s = VertexSet::empty(130);
        for v in [0, 63, 64, 129] {
            s.insert(v);
        }
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(s.len(), 4);
        s.remove(64);
        assert!(!s.contains(64));
    }
}
