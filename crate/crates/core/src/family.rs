//! Named pattern families and their closed-form nuclear norms.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, LabError, Result};
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Clique { k: usize },
    CompleteBipartite { left: usize, right: usize },
    /// Complete `r`-partite graph on `v` vertices with balanced parts.
    Turan { v: usize, r: usize },
    /// Path on `k` vertices.
    Path { k: usize },
    Star { leaves: usize },
    DisjointUnion { parts: Vec<FamilySpec> },
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Clique { k } => write!(f, "clique({k})"),
            FamilySpec::CompleteBipartite { left, right } => write!(f, "complete_bipartite({left},{right})"),
            FamilySpec::Turan { v, r } => write!(f, "turan({v},{r})"),
            FamilySpec::Path { k } => write!(f, "path({k})"),
            FamilySpec::Star { leaves } => write!(f, "star({leaves})"),
            FamilySpec::DisjointUnion { parts } => {
                write!(f, "disjoint_union(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FamilySpec {
    pub fn vertex_count(&self) -> usize {
        match self {
            FamilySpec::Clique { k } | FamilySpec::Path { k } => *k,
            FamilySpec::CompleteBipartite { left, right } => left + right,
            FamilySpec::Turan { v, .. } => *v,
            FamilySpec::Star { leaves } => leaves + 1,
            FamilySpec::DisjointUnion { parts } => parts.iter().map(|p| p.vertex_count()).sum(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            // A single vertex would be isolated.
            FamilySpec::Clique { k } if k < 2 => input("clique needs k >= 2"),
            FamilySpec::Path { k } if k < 2 => input("path needs k >= 2 vertices"),
            FamilySpec::CompleteBipartite { left, right } if left == 0 || right == 0 => {
                input("complete bipartite sides must be >= 1")
            }
            FamilySpec::Turan { v, r } if r < 2 || r > v => input("turan needs 2 <= r <= v"),
            FamilySpec::Star { leaves } if leaves == 0 => input("star needs >= 1 leaf"),
            FamilySpec::DisjointUnion { ref parts } if parts.is_empty() => input("empty disjoint union"),
            _ => Ok(()),
        }
    }
}

/// Builds the named graph on consecutive vertices `0..v`.
pub fn make_family(spec: &FamilySpec) -> Result<Graph> {
    spec.validate()?;
    let mut edges = Vec::new();
    let n = spec.vertex_count();
    match spec {
        FamilySpec::Clique { k } => {
            for i in 0..*k {
                for j in i + 1..*k {
                    edges.push((i, j));
                }
            }
        }
        FamilySpec::CompleteBipartite { left, right } => {
            for i in 0..*left {
                for j in 0..*right {
                    edges.push((i, left + j));
                }
            }
        }
        FamilySpec::Turan { v, r } => {
            let part = |x: usize| x % r;
            for i in 0..*v {
                for j in i + 1..*v {
                    if part(i) != part(j) {
                        edges.push((i, j));
                    }
                }
            }
        }
        FamilySpec::Path { k } => edges.extend((1..*k).map(|i| (i - 1, i))),
        FamilySpec::Star { leaves } => edges.extend((1..=*leaves).map(|i| (0, i))),
        FamilySpec::DisjointUnion { parts } => {
            let mut offset = 0;
            for p in parts {
                let g = make_family(p)?;
                edges.extend(g.edges().iter().map(|&(a, b)| (a + offset, b + offset)));
                offset += g.n();
            }
        }
    }
    Graph::new(n, edges)
}

/// Closed-form nuclear norm of a family's adjacency matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedForm {
    Exact(f64),
    /// Only an upper bound is known in closed form.
    UpperBound(f64),
}

impl ClosedForm {
    pub fn value(self) -> f64 {
        match self {
            ClosedForm::Exact(x) | ClosedForm::UpperBound(x) => x,
        }
    }
}

pub fn closed_form_nuclear_norm(spec: &FamilySpec) -> Result<ClosedForm> {
    spec.validate()?;
    match *spec {
        FamilySpec::Clique { k } => Ok(ClosedForm::Exact(2.0 * (k as f64 - 1.0))),
        FamilySpec::CompleteBipartite { left, right } => Ok(ClosedForm::Exact(2.0 * ((left * right) as f64).sqrt())),
        FamilySpec::Path { k } => {
            let s = (1..=k).map(|i| (2.0 * (i as f64 * PI / (k as f64 + 1.0)).cos()).abs()).sum();
            Ok(ClosedForm::Exact(s))
        }
        FamilySpec::Turan { v, r } => Ok(ClosedForm::UpperBound(2.0 * (1.0 - 1.0 / r as f64) * v as f64)),
        _ => Err(LabError::Unsupported(format!("no closed-form nuclear norm for {spec}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes() {
        let g = make_family(&FamilySpec::Clique { k: 4 }).unwrap();
        assert_eq!((g.n(), g.edge_count()), (4, 6));
        let g = make_family(&FamilySpec::CompleteBipartite { left: 2, right: 3 }).unwrap();
        assert_eq!((g.n(), g.edge_count()), (5, 6));
    }

    #[test]
    fn turan_6_3_by_enumeration() {
        let g = make_family(&FamilySpec::Turan { v: 6, r: 3 }).unwrap();
        // Parts {0,3}, {1,4}, {2,5}: every cross pair is an edge.
        let parts = [[0, 3], [1, 4], [2, 5]];
        let mut expected = 0;
        for a in 0..6 {
            for b in a + 1..6 {
                let same = parts.iter().any(|p| p.contains(&a) && p.contains(&b));
                assert_eq!(g.has_edge(a, b), !same);
                expected += usize::from(!same);
            }
        }
        assert_eq!(expected, 12);
        assert_eq!(g.edge_count(), 12);
    }

    #[test]
    fn disjoint_union_offsets() {
        let spec = FamilySpec::DisjointUnion {
            parts: vec![FamilySpec::Clique { k: 3 }, FamilySpec::Path { k: 3 }],
        };
        let g = make_family(&spec).unwrap();
        assert_eq!(g.n(), 6);
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2), (3, 4), (4, 5)]);
        assert!(!g.has_isolated_vertices());
    }

    #[test]
    fn invalid_parameters() {
        for spec in [
            FamilySpec::Clique { k: 1 },
            FamilySpec::Path { k: 0 },
            FamilySpec::Star { leaves: 0 },
            FamilySpec::Turan { v: 3, r: 4 },
            FamilySpec::Turan { v: 3, r: 1 },
            FamilySpec::CompleteBipartite { left: 0, right: 2 },
            FamilySpec::DisjointUnion { parts: vec![] },
        ] {
            assert!(make_family(&spec).is_err(), "{spec}");
        }
    }

    #[test]
    fn closed_forms() {
        assert_eq!(closed_form_nuclear_norm(&FamilySpec::Clique { k: 10 }).unwrap(), ClosedForm::Exact(18.0));
        let b = closed_form_nuclear_norm(&FamilySpec::CompleteBipartite { left: 2, right: 3 }).unwrap();
        assert!((b.value() - 2.0 * 6f64.sqrt()).abs() < 1e-12);
        assert!((b.value() - 4.8990).abs() < 1e-4);
        let p = closed_form_nuclear_norm(&FamilySpec::Path { k: 2 }).unwrap();
        assert!((p.value() - 2.0).abs() < 1e-12);
        assert!(matches!(
            closed_form_nuclear_norm(&FamilySpec::Turan { v: 6, r: 3 }).unwrap(),
            ClosedForm::UpperBound(x) if (x - 8.0).abs() < 1e-12
        ));
        assert!(matches!(
            closed_form_nuclear_norm(&FamilySpec::Star { leaves: 3 }),
            Err(LabError::Unsupported(_))
        ));
    }

    #[test]
    fn json_shape() {
        let spec: FamilySpec = serde_json::from_str(r#"{"kind":"complete_bipartite","left":2,"right":3}"#).unwrap();
        assert_eq!(spec, FamilySpec::CompleteBipartite { left: 2, right: 3 });
        let s = serde_json::to_string(&FamilySpec::Clique { k: 4 }).unwrap();
        assert_eq!(s, r#"{"kind":"clique","k":4}"#);
    }
}
