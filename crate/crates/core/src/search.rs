//! Maximum-weight copy of a pattern under a symmetric weight matrix.
//!
//! Shared by the scan statistic (weights = adjacency) and the maximum
//! likelihood oracle (weights = centered matrix). Exact branch and bound over
//! injective vertex assignments.

use faer::MatRef;

use crate::copies::image_edges;
use crate::error::{input, LabError, Result};
use crate::graph::{Edge, Graph};

pub const MAX_SEARCH_PATTERN: usize = 10;
pub const MAX_SEARCH_HOST: usize = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedCopy {
    /// Sorted edges of the copy.
    pub edges: Vec<Edge>,
    /// `assignment[v]` is the host vertex of pattern vertex `v`.
    pub assignment: Vec<usize>,
    /// Sum of weights over the copy's (unordered) edges.
    pub weight: f64,
}

/// Copy of `pattern` maximising the summed weight of its edges.
///
/// Pattern vertices are placed highest-degree first (then by most placed
/// neighbours); among equal optima the lexicographically smallest
/// assignment in that order wins. A node is cut when
/// `partial + sum_w max_y (edges from w to placed vertices) + (top-r pair weights)`
/// cannot beat the incumbent, `r` being the number of edges with both
/// endpoints unplaced.
pub fn find_max_weight_copy(pattern: &Graph, weight: MatRef<'_, f64>) -> Result<WeightedCopy> {
    let n = weight.nrows();
    if weight.ncols() != n {
        return input("weight matrix must be square");
    }
    if pattern.n() > MAX_SEARCH_PATTERN || n > MAX_SEARCH_HOST {
        return Err(LabError::Resource(format!(
            "branch and bound limited to |v(pattern)| <= {MAX_SEARCH_PATTERN} and n <= {MAX_SEARCH_HOST} (got {}, {n})",
            pattern.n()
        )));
    }
    if pattern.n() > n {
        return input(format!("pattern has {} vertices but n = {n}", pattern.n()));
    }
    if pattern.edge_count() == 0 {
        return input("pattern has no edges");
    }
    crate::spectral::check_symmetric(weight)?;

    let mut pairs: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push(weight[(i, j)]);
        }
    }
    pairs.sort_by(|a, b| b.total_cmp(a));
    let mut top = vec![0.0; pattern.edge_count() + 1];
    for r in 1..top.len() {
        top[r] = top[r - 1] + pairs.get(r - 1).copied().unwrap_or(f64::NEG_INFINITY);
    }

    let order = placement_order(pattern);
    let mut bb = BranchAndBound {
        pattern,
        weight,
        order,
        top,
        map: vec![usize::MAX; pattern.n()],
        used: vec![false; n],
        best: None,
    };
    bb.descend(0, 0.0);
    let (w, assignment) = bb.best.expect("pattern fits in host");
    Ok(WeightedCopy { edges: image_edges(pattern, &assignment), assignment, weight: w })
}

fn placement_order(pattern: &Graph) -> Vec<usize> {
    let k = pattern.n();
    let mut placed = vec![false; k];
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let next = (0..k)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let back = pattern.neighbors(v).iter().filter(|&w| placed[w]).count();
                (pattern.degree(v), back, std::cmp::Reverse(v))
            })
            .expect("unplaced vertex exists");
        placed[next] = true;
        order.push(next);
    }
    order
}

struct BranchAndBound<'a> {
    pattern: &'a Graph,
    weight: MatRef<'a, f64>,
    order: Vec<usize>,
    top: Vec<f64>,
    map: Vec<usize>,
    used: Vec<bool>,
    best: Option<(f64, Vec<usize>)>,
}

impl BranchAndBound<'_> {
    fn slack(&self) -> f64 {
        match &self.best {
            Some((b, _)) => *b + 1e-9 * (1.0 + b.abs()),
            None => f64::NEG_INFINITY,
        }
    }

    fn descend(&mut self, depth: usize, partial: f64) {
        let n = self.weight.nrows();
        if depth == self.order.len() {
            if partial > self.slack() {
                self.best = Some((partial, self.map.clone()));
            }
            return;
        }
        let u = self.order[depth];
        for x in 0..n {
            if self.used[x] {
                continue;
            }
            let gain: f64 = self
                .pattern
                .neighbors(u)
                .iter()
                .filter(|&v| self.map[v] != usize::MAX)
                .map(|v| self.weight[(self.map[v], x)])
                .sum();
            self.map[u] = x;
            self.used[x] = true;
            let value = partial + gain;
            if self.bound(depth + 1, value) > self.slack() {
                self.descend(depth + 1, value);
            }
            self.used[x] = false;
            self.map[u] = usize::MAX;
        }
    }

    fn bound(&self, depth: usize, partial: f64) -> f64 {
        if depth == self.order.len() {
            return partial;
        }
        let n = self.weight.nrows();
        let mut b = partial;
        let mut inner_edges = 0;
        for &w in &self.order[depth..] {
            let placed: Vec<usize> = self
                .pattern
                .neighbors(w)
                .iter()
                .filter_map(|v| (self.map[v] != usize::MAX).then_some(self.map[v]))
                .collect();
            inner_edges += self.pattern.neighbors(w).iter().filter(|&v| self.map[v] == usize::MAX).count();
            if placed.is_empty() {
                continue;
            }
            let mut best_y = f64::NEG_INFINITY;
            for y in 0..n {
                if !self.used[y] {
                    let s: f64 = placed.iter().map(|&x| self.weight[(x, y)]).sum();
                    best_y = best_y.max(s);
                }
            }
            b += best_y;
        }
        b + self.top[inner_edges / 2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{make_family, FamilySpec};
    use faer::Mat;
    use rand::{Rng, SeedableRng};

    /// All injective maps, first maximum in lexicographic order of
    /// `order`-indexed assignment tuples.
    fn exhaustive(pattern: &Graph, w: &Mat<f64>) -> f64 {
        fn rec(p: &Graph, w: &Mat<f64>, v: usize, map: &mut Vec<usize>, best: &mut f64) {
            if v == p.n() {
                let s: f64 = p.edges().iter().map(|&(a, b)| w[(map[a], map[b])]).sum();
                *best = best.max(s);
                return;
            }
            for x in 0..w.nrows() {
                if !map[..v].contains(&x) {
                    map[v] = x;
                    rec(p, w, v + 1, map, best);
                }
            }
        }
        let mut best = f64::NEG_INFINITY;
        rec(pattern, w, 0, &mut vec![0; pattern.n()], &mut best);
        best
    }

    #[test]
    fn triangle_in_k4_weights() {
        let tri = make_family(&FamilySpec::Clique { k: 3 }).unwrap();
        let a = make_family(&FamilySpec::Clique { k: 4 }).unwrap().adjacency();
        let c = find_max_weight_copy(&tri, a.as_ref()).unwrap();
        assert_eq!(c.weight, 3.0);
        assert_eq!(c.edges, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn single_edge_argmax() {
        let e = make_family(&FamilySpec::Path { k: 2 }).unwrap();
        let mut w = Mat::<f64>::zeros(4, 4);
        w[(0, 1)] = 5.0;
        w[(1, 0)] = 5.0;
        w[(2, 3)] = 1.0;
        w[(3, 2)] = 1.0;
        let c = find_max_weight_copy(&e, w.as_ref()).unwrap();
        assert_eq!(c.edges, vec![(0, 1)]);
        assert_eq!(c.weight, 5.0);
    }

    #[test]
    fn path3_all_ones_ties() {
        let p3 = make_family(&FamilySpec::Path { k: 3 }).unwrap();
        let w = Mat::from_fn(4, 4, |i, j| if i != j { 1.0 } else { 0.0 });
        let c = find_max_weight_copy(&p3, w.as_ref()).unwrap();
        assert_eq!(c.weight, 2.0);
        // centre placed first on vertex 0, then its ends on 1 and 2
        assert_eq!(c.edges, vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn guards() {
        let k11 = make_family(&FamilySpec::Clique { k: 11 }).unwrap();
        let w = Mat::<f64>::zeros(12, 12);
        assert!(matches!(find_max_weight_copy(&k11, w.as_ref()), Err(LabError::Resource(_))));
        let e = make_family(&FamilySpec::Path { k: 2 }).unwrap();
        let w = Mat::<f64>::zeros(41, 41);
        assert!(matches!(find_max_weight_copy(&e, w.as_ref()), Err(LabError::Resource(_))));
    }

    #[test]
    fn matches_exhaustive_on_random_weights() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let patterns = [
            FamilySpec::Clique { k: 3 },
            FamilySpec::Path { k: 4 },
            FamilySpec::Star { leaves: 3 },
            FamilySpec::CompleteBipartite { left: 2, right: 2 },
        ];
        for spec in &patterns {
            let p = make_family(spec).unwrap();
            for _ in 0..10 {
                let n = rng.random_range(p.n()..=7);
                let mut w = Mat::<f64>::zeros(n, n);
                for i in 0..n {
                    for j in 0..i {
                        let v = rng.random_range(-2.0..3.0);
                        w[(i, j)] = v;
                        w[(j, i)] = v;
                    }
                }
                let c = find_max_weight_copy(&p, w.as_ref()).unwrap();
                let oracle = exhaustive(&p, &w);
                assert!((c.weight - oracle).abs() < 1e-9, "{spec}: {} vs {oracle}", c.weight);
                let recomputed: f64 = c.edges.iter().map(|&(a, b)| w[(a, b)]).sum();
                assert!((recomputed - c.weight).abs() < 1e-9);
            }
        }
    }
}
