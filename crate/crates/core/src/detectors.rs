//! The test suite: edge count, maximum degree, scan, nuclear-norm program,
//! clique SDP and the brute-force maximum-likelihood oracle.

use serde::{Deserialize, Serialize};

use crate::copies::{contains_copy, MAX_PATTERN_VERTICES};
use crate::density::{densest_brute, densest_by_flow};
use crate::error::{LabError, Result};
use crate::family::{make_family, FamilySpec};
use crate::graph::{Edge, Graph};
use crate::random::{center_graph, ModelParams};
use crate::search::find_max_weight_copy;
use crate::solver::{solve_clique_sdp, solve_nuclear_program, SolveConfig, SolveResult};
use crate::spectral::nuclear_norm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorKind {
    Count,
    Degree,
    /// `kappa` defaults to `(p + q) / 2`.
    Scan {
        #[serde(default)]
        kappa: Option<f64>,
    },
    /// `gamma_prime` defaults to the model's pattern.
    Nuclear {
        #[serde(default)]
        gamma_prime: Option<FamilySpec>,
    },
    CliqueSdp { k: usize },
    MleOracle,
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DetectorKind::Count => write!(f, "count"),
            DetectorKind::Degree => write!(f, "degree"),
            DetectorKind::Scan { kappa: None } => write!(f, "scan"),
            DetectorKind::Scan { kappa: Some(k) } => write!(f, "scan(kappa={k})"),
            DetectorKind::Nuclear { gamma_prime: None } => write!(f, "nuclear"),
            DetectorKind::Nuclear { gamma_prime: Some(g) } => write!(f, "nuclear({g})"),
            DetectorKind::CliqueSdp { k } => write!(f, "clique_sdp({k})"),
            DetectorKind::MleOracle => write!(f, "mle_oracle"),
        }
    }
}

fn default_alpha() -> f64 {
    0.05
}

fn default_c() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ThresholdSource {
    /// Closed-form threshold; `c` is the unspecified universal constant of
    /// the nuclear and SDP thresholds and is ignored by the other tests.
    Theoretical {
        #[serde(default = "default_c")]
        c: f64,
    },
    /// Empirical `(1 - alpha)` null quantile, resolved by the lab harness.
    Calibrated {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    Explicit { tau: f64 },
}

impl Default for ThresholdSource {
    fn default() -> Self {
        ThresholdSource::Calibrated { alpha: default_alpha() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    #[serde(flatten)]
    pub kind: DetectorKind,
    #[serde(default)]
    pub threshold: ThresholdSource,
    #[serde(default)]
    pub solver: SolveConfig,
}

impl DetectorSpec {
    pub fn new(kind: DetectorKind, threshold: ThresholdSource) -> Self {
        DetectorSpec { kind, threshold, solver: SolveConfig::default() }
    }

    /// Whether the paper's test rejects on `statistic > tau` rather than `>=`.
    pub fn strict(&self) -> bool {
        matches!(self.kind, DetectorKind::Nuclear { .. } | DetectorKind::CliqueSdp { .. } | DetectorKind::MleOracle)
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        self.solver.validate()?;
        match &self.threshold {
            ThresholdSource::Calibrated { alpha } if !(*alpha > 0.0 && *alpha < 1.0) => {
                return Err(LabError::Config(format!("alpha must lie in (0, 1), got {alpha}")));
            }
            ThresholdSource::Explicit { tau } if !tau.is_finite() => {
                return Err(LabError::Config("explicit threshold must be finite".into()));
            }
            _ => {}
        }
        match &self.kind {
            DetectorKind::Scan { kappa } => {
                scan_kappa(*kappa, params)?;
            }
            DetectorKind::Nuclear { gamma_prime } => {
                nuclear_pattern(gamma_prime.as_ref(), params)?;
            }
            DetectorKind::CliqueSdp { k } if *k == 0 || *k > params.n => {
                return Err(LabError::Config(format!("clique size must satisfy 1 <= k <= n, got {k}")));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub iters: usize,
    pub converged: bool,
    pub residual_primal: f64,
    pub residual_dual: f64,
    pub max_violation: f64,
}

impl From<&SolveResult> for SolverDiagnostics {
    fn from(r: &SolveResult) -> Self {
        SolverDiagnostics {
            iters: r.iters,
            converged: r.converged,
            residual_primal: r.residual_primal,
            residual_dual: r.residual_dual,
            max_violation: r.max_violation(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverDiagnostics>,
    /// Best copy found by the scan or MLE search, 1-based.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub copy: Option<Vec<Edge>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub kind: String,
    pub statistic: f64,
    pub threshold: f64,
    pub reject: bool,
    pub diagnostics: Diagnostics,
}

impl Decision {
    /// `false` when the solver behind the statistic did not converge.
    pub fn usable(&self) -> bool {
        self.diagnostics.solver.as_ref().is_none_or(|s| s.converged)
    }
}

/// A test statistic before a threshold is attached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub value: f64,
    pub diagnostics: Diagnostics,
}

fn decide(kind: impl ToString, stat: Statistic, threshold: f64, strict: bool) -> Decision {
    let reject = if strict { stat.value > threshold } else { stat.value >= threshold };
    Decision { kind: kind.to_string(), statistic: stat.value, threshold, reject, diagnostics: stat.diagnostics }
}

fn one_based(edges: &[Edge]) -> Vec<Edge> {
    edges.iter().map(|&(a, b)| (a + 1, b + 1)).collect()
}

fn plain(value: f64) -> Statistic {
    Statistic { value, diagnostics: Diagnostics::default() }
}

pub fn count_threshold(params: &ModelParams) -> f64 {
    let n = params.n as f64;
    n * (n - 1.0) / 2.0 * params.q + params.gamma.edge_count() as f64 * (params.p - params.q) / 2.0
}

pub fn degree_threshold(params: &ModelParams) -> f64 {
    (params.n as f64 - 1.0) * params.q + params.gamma.max_degree() as f64 * (params.p - params.q) / 2.0
}

/// `|e(G)|` against `C(n,2) q + |e(Gamma)| (p - q) / 2`.
pub fn count_test(g: &Graph, params: &ModelParams) -> Decision {
    decide("count", plain(g.edge_count() as f64), count_threshold(params), false)
}

/// Maximum degree against `(n - 1) q + d_max(Gamma) (p - q) / 2`.
pub fn degree_test(g: &Graph, params: &ModelParams) -> Decision {
    decide("degree", plain(g.max_degree() as f64), degree_threshold(params), false)
}

/// Densest subgraph of the pattern, relabelled to `0..v`. Patterns up to 20
/// vertices use exhaustive search (ties toward more edges, then the
/// lexicographically smallest vertex set); larger ones the min-cut method.
pub fn densest_pattern(gamma: &Graph) -> Result<Graph> {
    let best = if gamma.n() <= 20 { densest_brute(gamma)? } else { densest_by_flow(gamma)? };
    Ok(gamma.induced(&best.vertices).without_isolated())
}

fn scan_kappa(kappa: Option<f64>, params: &ModelParams) -> Result<f64> {
    let k = kappa.unwrap_or((params.p + params.q) / 2.0);
    if !(k > params.q && k < params.p) {
        return Err(LabError::Config(format!("kappa must lie in (q, p) = ({}, {}), got {k}", params.q, params.p)));
    }
    Ok(k)
}

pub fn scan_statistic(g: &Graph, gamma_max: &Graph) -> Result<Statistic> {
    let best = find_max_weight_copy(gamma_max, g.adjacency().as_ref())?;
    Ok(Statistic {
        value: best.weight,
        diagnostics: Diagnostics { solver: None, copy: Some(one_based(&best.edges)) },
    })
}

/// Most edges observed on any copy of `gamma_max`, against `kappa |e(gamma_max)|`.
pub fn scan_test(g: &Graph, gamma_max: &Graph, params: &ModelParams, kappa: Option<f64>) -> Result<Decision> {
    let kappa = scan_kappa(kappa, params)?;
    let stat = scan_statistic(g, gamma_max)?;
    Ok(decide("scan", stat, kappa * gamma_max.edge_count() as f64, false))
}

fn nuclear_pattern(gamma_prime: Option<&FamilySpec>, params: &ModelParams) -> Result<Graph> {
    let Some(spec) = gamma_prime else {
        return Ok(params.gamma.clone());
    };
    let gp = make_family(spec).map_err(|e| LabError::Config(e.to_string()))?;
    let gamma = &params.gamma;
    let fits = gp.edge_count() <= gamma.edge_count() && gp.n() <= gamma.n();
    if !fits || (gp.n() <= MAX_PATTERN_VERTICES && gamma.n() <= 2 * MAX_PATTERN_VERTICES && !contains_copy(&gp, gamma)) {
        return Err(LabError::Config(format!("{spec} is not a subgraph of the planted pattern")));
    }
    Ok(gp)
}

/// `[tau0, tau1)` for the nuclear test with constant `c`.
pub fn nuclear_theoretical_interval(gamma_prime: &Graph, params: &ModelParams, c: f64) -> Result<(f64, f64)> {
    let n = params.n as f64;
    let (p, q) = (params.p, params.q);
    let t = nuclear_norm(gamma_prime.adjacency().as_ref())?;
    let e = gamma_prime.edge_count() as f64;
    let tau0 = c * t / q * (n.sqrt() + n.ln().sqrt());
    let tau1 = 2.0 * (p - q) / q * e - (e / 2.0 * n.ln()).sqrt();
    Ok((tau0, tau1))
}

fn midpoint_or_fail(tau0: f64, tau1: f64, what: &str) -> Result<f64> {
    if tau1 <= tau0 {
        return Err(LabError::Config(format!(
            "{what}: empty threshold interval [{tau0:.4}, {tau1:.4}); the signal condition fails at this size"
        )));
    }
    Ok(0.5 * (tau0 + tau1))
}

pub fn nuclear_statistic(g: &Graph, gamma_prime: &Graph, q: f64, cfg: &SolveConfig) -> Result<Statistic> {
    let t = nuclear_norm(gamma_prime.adjacency().as_ref())?;
    let w = center_graph(g, q)?;
    let r = solve_nuclear_program(&w, t, cfg)?;
    if !r.converged {
        log::warn!("nuclear program stopped after {} iterations without converging", r.iters);
    }
    Ok(Statistic { value: r.objective, diagnostics: Diagnostics { solver: Some((&r).into()), copy: None } })
}

/// `1{C(W) > tau}` where `C(W)` is the nuclear program's value at radius
/// `||gamma_prime||_*`.
pub fn nuclear_test(
    g: &Graph,
    gamma_prime: &Graph,
    params: &ModelParams,
    threshold: &ThresholdSource,
    cfg: &SolveConfig,
) -> Result<Decision> {
    let tau = match *threshold {
        ThresholdSource::Theoretical { c } => {
            let (t0, t1) = nuclear_theoretical_interval(gamma_prime, params, c)?;
            midpoint_or_fail(t0, t1, "nuclear test")?
        }
        ThresholdSource::Explicit { tau } => tau,
        ThresholdSource::Calibrated { .. } => return Err(uncalibrated()),
    };
    let stat = nuclear_statistic(g, gamma_prime, params.q, cfg)?;
    Ok(decide("nuclear", stat, tau, true))
}

fn uncalibrated() -> LabError {
    LabError::Config("calibrated threshold must be resolved by calibration before testing".into())
}

/// `[tau0, k^2)` for the clique SDP with `delta = 1/n`.
pub fn sdp_theoretical_interval(k: usize, params: &ModelParams, c: f64) -> Result<(f64, f64)> {
    if params.p != 1.0 || params.q != 0.5 {
        return Err(LabError::Config("theoretical SDP thresholds are stated for (p, q) = (1, 1/2)".into()));
    }
    let (k, n) = (k as f64, params.n as f64);
    Ok((c * k * n.sqrt() + k * (2.0 * n.ln()).sqrt(), k * k))
}

pub fn sdp_statistic(g: &Graph, k: usize, q: f64, cfg: &SolveConfig) -> Result<Statistic> {
    let w = center_graph(g, q)?;
    let r = solve_clique_sdp(&w, k, cfg)?;
    if !r.converged {
        log::warn!("clique SDP stopped after {} iterations without converging", r.iters);
    }
    Ok(Statistic { value: r.objective, diagnostics: Diagnostics { solver: Some((&r).into()), copy: None } })
}

pub fn clique_sdp_test(
    g: &Graph,
    k: usize,
    params: &ModelParams,
    threshold: &ThresholdSource,
    cfg: &SolveConfig,
) -> Result<Decision> {
    let tau = match *threshold {
        ThresholdSource::Theoretical { c } => {
            let (t0, t1) = sdp_theoretical_interval(k, params, c)?;
            midpoint_or_fail(t0, t1, "clique SDP test")?
        }
        ThresholdSource::Explicit { tau } => tau,
        ThresholdSource::Calibrated { .. } => return Err(uncalibrated()),
    };
    let stat = sdp_statistic(g, k, params.q, cfg)?;
    Ok(decide("clique_sdp", stat, tau, true))
}

/// Copy of `gamma` maximising `<W, Z>`, with that value (summed over ordered
/// pairs, so twice the copy's weight in `W`).
pub fn mle_bruteforce(g: &Graph, gamma: &Graph, q: f64) -> Result<(Vec<Edge>, f64)> {
    let w = center_graph(g, q)?;
    let best = find_max_weight_copy(gamma, w.w.as_ref())?;
    Ok((best.edges, 2.0 * best.weight))
}

/// Statistic of any detector on one observed graph.
pub fn compute_statistic(spec: &DetectorSpec, g: &Graph, params: &ModelParams) -> Result<Statistic> {
    match &spec.kind {
        DetectorKind::Count => Ok(plain(g.edge_count() as f64)),
        DetectorKind::Degree => Ok(plain(g.max_degree() as f64)),
        DetectorKind::Scan { .. } => scan_statistic(g, &densest_pattern(&params.gamma)?),
        DetectorKind::Nuclear { gamma_prime } => {
            nuclear_statistic(g, &nuclear_pattern(gamma_prime.as_ref(), params)?, params.q, &spec.solver)
        }
        DetectorKind::CliqueSdp { k } => sdp_statistic(g, *k, params.q, &spec.solver),
        DetectorKind::MleOracle => {
            let (copy, value) = mle_bruteforce(g, &params.gamma, params.q)?;
            Ok(Statistic { value, diagnostics: Diagnostics { solver: None, copy: Some(one_based(&copy)) } })
        }
    }
}

/// Threshold implied by a non-calibrated source.
pub fn resolve_threshold(spec: &DetectorSpec, params: &ModelParams) -> Result<f64> {
    match (&spec.threshold, &spec.kind) {
        (ThresholdSource::Explicit { tau }, _) => Ok(*tau),
        (ThresholdSource::Calibrated { .. }, _) => Err(uncalibrated()),
        (ThresholdSource::Theoretical { .. }, DetectorKind::Count) => Ok(count_threshold(params)),
        (ThresholdSource::Theoretical { .. }, DetectorKind::Degree) => Ok(degree_threshold(params)),
        (ThresholdSource::Theoretical { .. }, DetectorKind::Scan { kappa }) => {
            Ok(scan_kappa(*kappa, params)? * densest_pattern(&params.gamma)?.edge_count() as f64)
        }
        (ThresholdSource::Theoretical { c }, DetectorKind::Nuclear { gamma_prime }) => {
            let gp = nuclear_pattern(gamma_prime.as_ref(), params)?;
            let (t0, t1) = nuclear_theoretical_interval(&gp, params, *c)?;
            midpoint_or_fail(t0, t1, "nuclear test")
        }
        (ThresholdSource::Theoretical { c }, DetectorKind::CliqueSdp { k }) => {
            let (t0, t1) = sdp_theoretical_interval(*k, params, *c)?;
            midpoint_or_fail(t0, t1, "clique SDP test")
        }
        (ThresholdSource::Theoretical { .. }, DetectorKind::MleOracle) => {
            Err(LabError::Config("the MLE oracle has no closed-form threshold; use calibrated or explicit".into()))
        }
    }
}

/// Runs a detector against an already resolved threshold.
pub fn run_detector(spec: &DetectorSpec, g: &Graph, params: &ModelParams, tau: f64) -> Result<Decision> {
    let stat = compute_statistic(spec, g, params)?;
    Ok(decide(&spec.kind, stat, tau, spec.strict()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{apply_alt_adversary, AdversarySpec};
    use crate::copies::enumerate_copies;
    use crate::random::{sample_er, sample_planted, stream_rng};
    use crate::spectral::inner;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn clique(k: usize) -> Graph {
        make_family(&FamilySpec::Clique { k }).unwrap()
    }

    #[test]
    fn count_and_degree_thresholds() {
        let gamma = Graph::new(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]).unwrap();
        let params = ModelParams::new(10, 1.0, 0.5, gamma).unwrap();
        assert_eq!(count_threshold(&params), 24.0);
        let d = count_test(&Graph::empty(10), &params);
        assert_eq!((d.statistic, d.reject), (0.0, false));

        let star = ModelParams::from_family(100, 1.0, 0.5, FamilySpec::Star { leaves: 20 }).unwrap();
        assert_eq!(degree_threshold(&star), 54.5);
        let five = ModelParams::from_family(5, 1.0, 0.5, FamilySpec::Path { k: 2 }).unwrap();
        assert_eq!(degree_test(&clique(5), &five).statistic, 4.0);
        assert_eq!(degree_test(&Graph::empty(5), &five).statistic, 0.0);
    }

    #[test]
    fn count_under_stripping_star() {
        let params = ModelParams::from_family(40, 0.8, 0.5, FamilySpec::Star { leaves: 6 }).unwrap();
        for t in 0..20 {
            let inst = sample_planted(&params, &mut stream_rng(3, 0, t)).unwrap();
            let g = apply_alt_adversary(&AdversarySpec::AltStripper, &inst, &mut stream_rng(3, 1, t)).unwrap();
            assert!(count_test(&g, &params).statistic <= 6.0);
        }
    }

    #[test]
    fn scan_examples() {
        let params = ModelParams::from_family(10, 1.0, 0.5, FamilySpec::Clique { k: 4 }).unwrap();
        let gm = densest_pattern(&params.gamma).unwrap();
        assert_eq!(gm, clique(4));
        let inst = sample_planted(&params, &mut stream_rng(1, 0, 0)).unwrap();
        let d = scan_test(&inst.graph, &gm, &params, Some(0.75)).unwrap();
        assert_eq!((d.statistic, d.threshold, d.reject), (6.0, 4.5, true));
        let d = scan_test(&Graph::empty(10), &gm, &params, None).unwrap();
        assert_eq!((d.statistic, d.reject), (0.0, false));
        assert!(scan_test(&inst.graph, &gm, &params, Some(0.4)).is_err());
    }

    #[test]
    fn densest_pattern_of_union() {
        let spec = FamilySpec::DisjointUnion { parts: vec![FamilySpec::Clique { k: 4 }, FamilySpec::Path { k: 3 }] };
        assert_eq!(densest_pattern(&make_family(&spec).unwrap()).unwrap(), clique(4));
        let star = make_family(&FamilySpec::Star { leaves: 4 }).unwrap();
        assert_eq!(densest_pattern(&star).unwrap(), star);
    }

    #[test]
    fn nuclear_planted_lower_bound() {
        let k = 6;
        let params = ModelParams::from_family(20, 1.0, 0.5, FamilySpec::Clique { k }).unwrap();
        let inst = sample_planted(&params, &mut stream_rng(2, 0, 0)).unwrap();
        let d = nuclear_test(&inst.graph, &params.gamma, &params, &ThresholdSource::Explicit { tau: 0.0 }, &SolveConfig::default())
            .unwrap();
        assert!(d.usable());
        let kk = (k * (k - 1)) as f64;
        let w = center_graph(&inst.graph, 0.5).unwrap();
        assert_abs_diff_eq!(inner(w.w.as_ref(), inst.planted_matrix().as_ref()), kk, epsilon = 1e-12);
        assert!(d.statistic >= kk - 1e-4 * d.statistic);
    }

    #[test]
    fn nuclear_zero_weights_and_thresholds() {
        // Empty graph: W = -1 off the diagonal, so the best Z is diagonal and scores 0.
        let params = ModelParams::from_family(8, 1.0, 0.5, FamilySpec::Clique { k: 3 }).unwrap();
        let d = nuclear_test(&Graph::empty(8), &params.gamma, &params, &ThresholdSource::Explicit { tau: 0.5 }, &SolveConfig::default())
            .unwrap();
        assert!(d.statistic.abs() < 1e-6);
        assert!(!d.reject);

        // tau1 <= tau0 at small n is a configuration error.
        let err = nuclear_test(&Graph::empty(8), &params.gamma, &params, &ThresholdSource::Theoretical { c: 1.0 }, &SolveConfig::default());
        assert!(matches!(err, Err(LabError::Config(_))));

        let big = ModelParams::from_family(256, 1.0, 0.5, FamilySpec::Clique { k: 48 }).unwrap();
        let (t0, t1) = nuclear_theoretical_interval(&big.gamma, &big, 0.05).unwrap();
        let n = 256f64;
        assert_abs_diff_eq!(t0, 0.05 * 94.0 / 0.5 * (16.0 + n.ln().sqrt()), epsilon = 1e-9);
        assert_abs_diff_eq!(t1, 2.0 * 1128.0 - (1128.0 / 2.0 * n.ln()).sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn sdp_thresholds() {
        let params = ModelParams::from_family(40, 1.0, 0.5, FamilySpec::Clique { k: 10 }).unwrap();
        let (t0, t1) = sdp_theoretical_interval(10, &params, 0.1).unwrap();
        assert_abs_diff_eq!(t0, 0.1 * 10.0 * 40f64.sqrt() + 10.0 * (2.0 * 40f64.ln()).sqrt(), epsilon = 1e-12);
        assert_eq!(t1, 100.0);
        let other = ModelParams::from_family(40, 0.9, 0.5, FamilySpec::Clique { k: 10 }).unwrap();
        assert!(sdp_theoretical_interval(10, &other, 0.1).is_err());
    }

    #[test]
    fn mle_examples() {
        // Empty graph at q = 1/2: every copy is worth -2|e|.
        let tri = clique(3);
        let (copy, value) = mle_bruteforce(&Graph::empty(5), &tri, 0.5).unwrap();
        assert_eq!(value, -6.0);
        assert_eq!(copy, vec![(0, 1), (0, 2), (1, 2)]);

        // A single triangle in an otherwise triangle-free graph.
        let g = Graph::new(7, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (2, 5), (4, 6)]).unwrap();
        let (copy, value) = mle_bruteforce(&g, &tri, 0.5).unwrap();
        assert_eq!(copy, vec![(4, 5), (4, 6), (5, 6)]);
        assert_eq!(value, 6.0);
    }

    #[test]
    fn mle_matches_enumeration() {
        let mut rng = stream_rng(8, 0, 0);
        for spec in [FamilySpec::Clique { k: 3 }, FamilySpec::Path { k: 4 }, FamilySpec::Star { leaves: 3 }] {
            let gamma = make_family(&spec).unwrap();
            for _ in 0..10 {
                let n = rng.random_range(gamma.n()..=7);
                let g = sample_er(n, 0.5, &mut rng).unwrap();
                let (_, value) = mle_bruteforce(&g, &gamma, 0.5).unwrap();
                let w = center_graph(&g, 0.5).unwrap().w;
                let all = enumerate_copies(&gamma, &make_family(&FamilySpec::Clique { k: n }).unwrap(), usize::MAX).unwrap();
                let oracle = all
                    .iter()
                    .map(|c| c.iter().map(|&(a, b)| 2.0 * w[(a, b)]).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max);
                assert_abs_diff_eq!(value, oracle, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn mle_below_nuclear() {
        let params = ModelParams::from_family(8, 0.9, 0.5, FamilySpec::Clique { k: 3 }).unwrap();
        for t in 0..5 {
            let inst = sample_planted(&params, &mut stream_rng(4, 0, t)).unwrap();
            let (_, mle) = mle_bruteforce(&inst.graph, &params.gamma, 0.5).unwrap();
            let nuc = nuclear_statistic(&inst.graph, &params.gamma, 0.5, &SolveConfig::default()).unwrap();
            assert!(mle <= nuc.value + 1e-4, "{mle} > {}", nuc.value);
        }
    }

    #[test]
    fn spec_json() {
        let s: DetectorSpec = serde_json::from_str(
            r#"{"kind":"nuclear","gamma_prime":{"kind":"clique","k":4},"threshold":{"source":"calibrated","alpha":0.1}}"#,
        )
        .unwrap();
        assert_eq!(s.kind, DetectorKind::Nuclear { gamma_prime: Some(FamilySpec::Clique { k: 4 }) });
        assert_eq!(s.threshold, ThresholdSource::Calibrated { alpha: 0.1 });
        let s: DetectorSpec = serde_json::from_str(r#"{"kind":"count"}"#).unwrap();
        assert_eq!(s.threshold, ThresholdSource::Calibrated { alpha: 0.05 });
        let d = count_test(&Graph::empty(3), &ModelParams::from_family(3, 1.0, 0.5, FamilySpec::Path { k: 2 }).unwrap());
        let v: serde_json::Value = serde_json::to_value(&d).unwrap();
        assert_eq!(v["kind"], "count");
        assert!(v.get("diagnostics").is_some());
    }

    #[test]
    fn nuclear_pattern_must_fit() {
        let params = ModelParams::from_family(20, 1.0, 0.5, FamilySpec::Path { k: 4 }).unwrap();
        assert!(nuclear_pattern(Some(&FamilySpec::Clique { k: 3 }), &params).is_err());
        assert!(nuclear_pattern(Some(&FamilySpec::Path { k: 3 }), &params).is_ok());
    }

    fn random_graph(n: usize, bits: &[bool]) -> Graph {
        let mut edges = Vec::new();
        let mut it = bits.iter().cycle();
        for a in 0..n {
            for b in a + 1..n {
                if *it.next().unwrap() {
                    edges.push((a, b));
                }
            }
        }
        Graph::new(n, edges).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn statistics_monotone_under_deletion(
            bits in proptest::collection::vec(any::<bool>(), 45),
            mask in proptest::collection::vec(any::<bool>(), 45),
        ) {
            let g = random_graph(10, &bits);
            let mut it = mask.iter().cycle();
            let h = g.filter_edges(|_| *it.next().unwrap());
            let params = ModelParams::from_family(10, 1.0, 0.5, FamilySpec::Clique { k: 3 }).unwrap();
            prop_assert!(count_test(&h, &params).statistic <= count_test(&g, &params).statistic);
            prop_assert!(degree_test(&h, &params).statistic <= degree_test(&g, &params).statistic);
            let gm = densest_pattern(&params.gamma).unwrap();
            prop_assert!(scan_statistic(&h, &gm).unwrap().value <= scan_statistic(&g, &gm).unwrap().value);
            let cfg = SolveConfig::default();
            let a = nuclear_statistic(&h, &params.gamma, 0.5, &cfg).unwrap();
            let b = nuclear_statistic(&g, &params.gamma, 0.5, &cfg).unwrap();
            prop_assert!(a.value <= b.value + 2e-4 * (1.0 + b.value.abs()), "{} > {}", a.value, b.value);
        }
    }
}
