use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::domain;
use crate::adversary::{apply_null_adversary, AdversarySpec};
use crate::copies::{contains_copy, copies_in_complete, enumerate_copies};
use crate::error::{input, LabError, Result};
use crate::family::{make_family, FamilySpec};
use crate::graph::{Edge, Graph};
use crate::random::{sample_er, stream_rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentEstimate {
    pub p_hat: f64,
    /// 95% Wilson score interval.
    pub lower: f64,
    pub upper: f64,
    pub trials: usize,
}

impl ContainmentEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }
}

fn wilson(successes: usize, trials: usize) -> (f64, f64) {
    let z = 1.96f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Fraction of `G(n, q)` draws containing a copy of `gamma`.
pub fn estimate_containment_probability(gamma: &Graph, n: usize, q: f64, trials: usize, seed: u64) -> Result<ContainmentEstimate> {
    if trials == 0 {
        return input("trials must be >= 1");
    }
    if gamma.edge_count() == 0 || gamma.has_isolated_vertices() {
        return input("pattern must have edges and no isolated vertices");
    }
    if gamma.n() > n {
        return Ok(ContainmentEstimate { p_hat: 0.0, lower: 0.0, upper: 0.0, trials });
    }
    let hits: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|i| Ok(contains_copy(gamma, &sample_er(n, q, &mut stream_rng(seed, domain::CONTAINMENT, i))?)))
        .collect::<Result<_>>()?;
    let s = hits.iter().filter(|&&h| h).count();
    let (lower, upper) = wilson(s, trials);
    Ok(ContainmentEstimate { p_hat: s as f64 / trials as f64, lower, upper, trials })
}

/// `P[G(n, q) contains gamma]` by summing over all `2^C(n,2)` graphs; `n <= 7`.
pub fn exact_containment_probability(gamma: &Graph, n: usize, q: f64) -> Result<f64> {
    if n > 7 {
        return Err(LabError::Resource(format!("exact enumeration limited to n <= 7, got {n}")));
    }
    if gamma.n() > n {
        return Ok(0.0);
    }
    let pairs: Vec<Edge> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let m = pairs.len();
    let mut total = 0.0;
    for mask in 0u32..(1u32 << m) {
        let edges: Vec<Edge> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| pairs[b]).collect();
        let k = edges.len() as i32;
        let g = Graph::new(n, edges)?;
        if contains_copy(gamma, &g) {
            total += q.powi(k) * (1.0 - q).powi(m as i32 - k);
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityAudit {
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Every copy of the pattern in `K_n` (1-based edges) with the number of
    /// times it was the surviving copy.
    pub table: Vec<(Vec<Edge>, u64)>,
    pub attempts: u64,
    pub acceptance_rate: f64,
}

pub const MAX_AUDIT_COPIES: u64 = 1000;
const MIN_ACCEPTANCE: f64 = 1e-4;

/// Draws `G(n, q)` conditioned on containing the pattern (by rejection),
/// applies the copy-planting adversary with `p = 1` and tests the surviving
/// copy against the uniform law on all copies in `K_n`.
pub fn uniformity_audit(gamma_family: &FamilySpec, n: usize, q: f64, trials: usize, seed: u64) -> Result<UniformityAudit> {
    if trials == 0 {
        return input("trials must be >= 1");
    }
    let gamma = make_family(gamma_family)?;
    let total = copies_in_complete(&gamma, n)?;
    if total > MAX_AUDIT_COPIES.into() {
        return Err(LabError::Resource(format!("{total} copies in K_{n}, audit tabulates at most {MAX_AUDIT_COPIES}")));
    }
    let kn = make_family(&FamilySpec::Clique { k: n })?;
    let copies = enumerate_copies(&gamma, &kn, MAX_AUDIT_COPIES as usize)?;
    let index: HashMap<Vec<Edge>, usize> = copies.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let adversary = AdversarySpec::NullCopyPlanter { gamma_family: gamma_family.clone(), p: 1.0 };

    let mut counts = vec![0u64; copies.len()];
    let mut accepted = 0usize;
    let mut attempts = 0u64;
    while accepted < trials {
        let i = attempts;
        attempts += 1;
        let g = sample_er(n, q, &mut stream_rng(seed, domain::AUDIT, i))?;
        if contains_copy(&gamma, &g) {
            let out = apply_null_adversary(&adversary, &g, &mut stream_rng(seed, domain::AUDIT_ADVERSARY, i))?;
            let slot = index
                .get(out.edges())
                .ok_or_else(|| LabError::Execution("surviving edges are not a copy of the pattern".into()))?;
            counts[*slot] += 1;
            accepted += 1;
        }
        if attempts >= 10_000 && (accepted as f64) < MIN_ACCEPTANCE * attempts as f64 {
            return Err(LabError::Execution(format!(
                "conditioning acceptance rate {:.2e} is below {MIN_ACCEPTANCE:e}; try a larger q",
                accepted as f64 / attempts as f64
            )));
        }
    }
    let expected = trials as f64 / copies.len() as f64;
    let chi_square: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dof = copies.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let d = ChiSquared::new(dof as f64).map_err(|e| LabError::Execution(e.to_string()))?;
        d.sf(chi_square)
    };
    let table = copies
        .iter()
        .zip(&counts)
        .map(|(c, &k)| (c.iter().map(|&(a, b)| (a + 1, b + 1)).collect(), k))
        .collect();
    Ok(UniformityAudit {
        chi_square,
        dof,
        p_value,
        table,
        attempts,
        acceptance_rate: accepted as f64 / attempts as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(spec: FamilySpec) -> Graph {
        make_family(&spec).unwrap()
    }

    #[test]
    fn single_pair_containment() {
        let e = fam(FamilySpec::Path { k: 2 });
        let est = estimate_containment_probability(&e, 2, 0.3, 20_000, 4).unwrap();
        assert!(est.contains(0.3), "{est:?}");
        assert!((exact_containment_probability(&e, 2, 0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn oversized_pattern_never_contained() {
        let k5 = fam(FamilySpec::Clique { k: 5 });
        let est = estimate_containment_probability(&k5, 4, 0.9, 10, 0).unwrap();
        assert_eq!(est.p_hat, 0.0);
        assert_eq!(exact_containment_probability(&k5, 4, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn exact_oracle_small_cases() {
        // Edge in G(3, q): 1 - (1-q)^3.
        let e = fam(FamilySpec::Path { k: 2 });
        let q: f64 = 0.4;
        assert!((exact_containment_probability(&e, 3, q).unwrap() - (1.0 - (1.0 - q).powi(3))).abs() < 1e-14);
        // Triangle in G(3, q): q^3.
        let t = fam(FamilySpec::Clique { k: 3 });
        assert!((exact_containment_probability(&t, 3, q).unwrap() - q.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn audit_edge_in_three_vertices() {
        let a = uniformity_audit(&FamilySpec::Path { k: 2 }, 3, 0.5, 3000, 5).unwrap();
        assert_eq!(a.table.len(), 3);
        assert_eq!(a.dof, 2);
        assert_eq!(a.table.iter().map(|(_, c)| c).sum::<u64>(), 3000);
        assert!(a.p_value > 1e-3, "{a:?}");
    }

    #[test]
    fn audit_rejects_zero_trials_and_rare_events() {
        assert!(matches!(uniformity_audit(&FamilySpec::Path { k: 2 }, 3, 0.5, 0, 0), Err(LabError::Input(_))));
        let r = uniformity_audit(&FamilySpec::Clique { k: 5 }, 5, 0.01, 10, 0);
        assert!(matches!(r, Err(LabError::Execution(_))));
    }
}
