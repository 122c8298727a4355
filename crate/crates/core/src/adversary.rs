//! Monotone adversaries: edge deletions only, and under the alternative the
//! planted copy's surviving edges are never touched.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::copies::uniform_copy;
use crate::error::{LabError, Result};
use crate::family::{make_family, FamilySpec};
use crate::graph::Graph;
use crate::random::PlantedInstance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversarySpec {
    Identity,
    /// Strips everything outside the plant; leaves a null graph alone.
    RemoveAllOutside,
    /// Deletes each eligible edge independently with probability `delta`.
    RandomMonotone { delta: f64 },
    /// Keeps one uniformly chosen copy of the target (each edge with
    /// probability `p`) and deletes the rest. Null side only.
    NullCopyPlanter { gamma_family: FamilySpec, p: f64 },
    /// Deletes every edge outside the planted copy.
    AltStripper,
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::Identity => write!(f, "identity"),
            AdversarySpec::RemoveAllOutside => write!(f, "remove_all_outside"),
            AdversarySpec::RandomMonotone { delta } => write!(f, "random_monotone({delta})"),
            AdversarySpec::NullCopyPlanter { gamma_family, p } => write!(f, "null_copy_planter({gamma_family},{p})"),
            AdversarySpec::AltStripper => write!(f, "alt_stripper"),
        }
    }
}

impl AdversarySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            AdversarySpec::RandomMonotone { delta } if !(0.0..=1.0).contains(delta) => {
                Err(LabError::Config(format!("delta must lie in [0, 1], got {delta}")))
            }
            AdversarySpec::NullCopyPlanter { gamma_family, p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(LabError::Config(format!("p must lie in [0, 1], got {p}")));
                }
                make_family(gamma_family).map(|_| ()).map_err(|e| LabError::Config(e.to_string()))
            }
            _ => Ok(()),
        }
    }

    /// Whether the kind may act on alternative instances.
    pub fn applies_to_alternative(&self) -> bool {
        !matches!(self, AdversarySpec::NullCopyPlanter { .. })
    }
}

fn thin<R: Rng + ?Sized>(g: &Graph, delta: f64, rng: &mut R, protected: impl Fn((usize, usize)) -> bool) -> Graph {
    g.filter_edges(|e| protected(e) || !rng.random_bool(delta))
}

pub fn apply_null_adversary<R: Rng + ?Sized>(spec: &AdversarySpec, g: &Graph, rng: &mut R) -> Result<Graph> {
    spec.validate()?;
    match spec {
        AdversarySpec::Identity | AdversarySpec::RemoveAllOutside => Ok(g.clone()),
        AdversarySpec::RandomMonotone { delta } => Ok(thin(g, *delta, rng, |_| false)),
        AdversarySpec::NullCopyPlanter { gamma_family, p } => {
            let gamma = make_family(gamma_family)?;
            if gamma.n() > g.n() {
                return Ok(g.clone());
            }
            match uniform_copy(&gamma, g, rng)? {
                None => Ok(g.clone()),
                Some(copy) => {
                    let kept: Vec<_> = copy.into_iter().filter(|_| rng.random_bool(*p)).collect();
                    Ok(Graph::from_sorted_unchecked(g.n(), kept))
                }
            }
        }
        // Nothing is planted under the null.
        AdversarySpec::AltStripper => Ok(Graph::empty(g.n())),
    }
}

pub fn apply_alt_adversary<R: Rng + ?Sized>(spec: &AdversarySpec, inst: &PlantedInstance, rng: &mut R) -> Result<Graph> {
    spec.validate()?;
    let planted = |e| inst.planted_copy.binary_search(&e).is_ok();
    match spec {
        AdversarySpec::Identity => Ok(inst.graph.clone()),
        AdversarySpec::RemoveAllOutside | AdversarySpec::AltStripper => Ok(inst.graph.filter_edges(planted)),
        AdversarySpec::RandomMonotone { delta } => Ok(thin(&inst.graph, *delta, rng, planted)),
        AdversarySpec::NullCopyPlanter { .. } => {
            Err(LabError::Config(format!("{spec} is a null-side adversary")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{sample_er, sample_planted, stream_rng, ModelParams};

    #[test]
    fn identity_and_extremes() {
        let g = sample_er(12, 0.5, &mut stream_rng(1, 0, 0)).unwrap();
        let mut rng = stream_rng(1, 1, 0);
        assert_eq!(apply_null_adversary(&AdversarySpec::Identity, &g, &mut rng).unwrap(), g);
        assert_eq!(apply_null_adversary(&AdversarySpec::RemoveAllOutside, &g, &mut rng).unwrap(), g);
        let gone = apply_null_adversary(&AdversarySpec::RandomMonotone { delta: 1.0 }, &g, &mut rng).unwrap();
        assert_eq!(gone.edge_count(), 0);
    }

    #[test]
    fn copy_planter_on_k4() {
        let k4 = make_family(&FamilySpec::Clique { k: 4 }).unwrap();
        let spec = AdversarySpec::NullCopyPlanter { gamma_family: FamilySpec::Clique { k: 3 }, p: 1.0 };
        for t in 0..50 {
            let out = apply_null_adversary(&spec, &k4, &mut stream_rng(2, 0, t)).unwrap();
            assert_eq!(out.edge_count(), 3);
            assert_eq!(out.non_isolated().len(), 3);
            assert!(out.is_subgraph_of(&k4));
        }
    }

    #[test]
    fn copy_planter_without_copy_is_identity() {
        let path = make_family(&FamilySpec::Path { k: 5 }).unwrap();
        let spec = AdversarySpec::NullCopyPlanter { gamma_family: FamilySpec::Clique { k: 3 }, p: 1.0 };
        assert_eq!(apply_null_adversary(&spec, &path, &mut stream_rng(0, 0, 0)).unwrap(), path);
    }

    #[test]
    fn alt_side() {
        let params = ModelParams::from_family(20, 1.0, 0.5, FamilySpec::Clique { k: 5 }).unwrap();
        let inst = sample_planted(&params, &mut stream_rng(4, 0, 0)).unwrap();
        let mut rng = stream_rng(4, 1, 0);
        let out = apply_alt_adversary(&AdversarySpec::AltStripper, &inst, &mut rng).unwrap();
        assert_eq!(out.edges(), inst.planted_copy.as_slice());
        assert_eq!(out.edge_count(), 10);
        assert_eq!(apply_alt_adversary(&AdversarySpec::Identity, &inst, &mut rng).unwrap(), inst.graph);
        let same = apply_alt_adversary(&AdversarySpec::RandomMonotone { delta: 0.0 }, &inst, &mut rng).unwrap();
        assert_eq!(same, inst.graph);
        let spec = AdversarySpec::NullCopyPlanter { gamma_family: FamilySpec::Clique { k: 5 }, p: 1.0 };
        assert!(matches!(apply_alt_adversary(&spec, &inst, &mut rng), Err(LabError::Config(_))));
    }

    #[test]
    fn json_shape() {
        let s: AdversarySpec = serde_json::from_str(
            r#"{"kind":"null_copy_planter","gamma_family":{"kind":"clique","k":3},"p":1.0}"#,
        )
        .unwrap();
        assert_eq!(s, AdversarySpec::NullCopyPlanter { gamma_family: FamilySpec::Clique { k: 3 }, p: 1.0 });
        let s: AdversarySpec = serde_json::from_str(r#"{"kind":"random_monotone","delta":0.25}"#).unwrap();
        assert_eq!(s, AdversarySpec::RandomMonotone { delta: 0.25 });
        assert!(AdversarySpec::RandomMonotone { delta: 1.5 }.validate().is_err());
    }
}
