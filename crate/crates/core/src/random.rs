//! Null and planted ensembles, the centered observation matrix and Bernoulli
//! divergences.

use std::path::Path;

use faer::Mat;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::copies::{copies_in_complete, subgraph_classes};
use crate::error::{input, LabError, Result};
use crate::family::{make_family, FamilySpec};
use crate::graph::{Edge, EdgeListRecord, Graph};

pub type LabRng = ChaCha8Rng;

/// Independent stream for `(seed, domain, index)`. `domain` separates
/// purposes (calibration, null trials, alternative trials, adversaries) and
/// `index` selects the ChaCha stream, so trial `i` draws the same numbers no
/// matter how trials are scheduled.
pub fn stream_rng(seed: u64, domain: u64, index: u64) -> LabRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&splitmix(seed).to_le_bytes());
    key[8..16].copy_from_slice(&splitmix(seed ^ 0xA5A5_5A5A_C3C3_3C3C).to_le_bytes());
    key[16..24].copy_from_slice(&splitmix(domain).to_le_bytes());
    key[24..].copy_from_slice(&splitmix(domain.wrapping_add(seed)).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Parameters of the planted ensemble `G_Gamma(n, p, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub gamma: Graph,
    /// Name of the pattern when it came from a family.
    pub family: Option<FamilySpec>,
}

impl ModelParams {
    pub fn new(n: usize, p: f64, q: f64, gamma: Graph) -> Result<Self> {
        let params = ModelParams { n, p, q, gamma, family: None };
        params.validate()?;
        Ok(params)
    }

    pub fn from_family(n: usize, p: f64, q: f64, family: FamilySpec) -> Result<Self> {
        let gamma = make_family(&family)?;
        let params = ModelParams { n, p, q, gamma, family: Some(family) };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return input(format!("q must lie in (0, 1), got {}", self.q));
        }
        if !(self.p > self.q && self.p <= 1.0) {
            return input(format!("p must lie in (q, 1], got p = {} with q = {}", self.p, self.q));
        }
        if self.gamma.n() > self.n {
            return input(format!("pattern has {} vertices but n = {}", self.gamma.n(), self.n));
        }
        if self.gamma.edge_count() == 0 || self.gamma.has_isolated_vertices() {
            return input("pattern must have edges and no isolated vertices");
        }
        Ok(())
    }

    pub fn family_label(&self) -> String {
        match &self.family {
            Some(f) => f.to_string(),
            None => format!("graph(v={},e={})", self.gamma.n(), self.gamma.edge_count()),
        }
    }
}

/// A sampled observation together with the hidden copy that produced it.
#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub graph: Graph,
    /// Edges of the planted copy (empty under the null).
    pub planted_copy: Vec<Edge>,
    /// `embedding[v]` is the vertex carrying pattern vertex `v` (empty under the null).
    pub embedding: Vec<usize>,
    pub params: ModelParams,
    pub seed: Option<u64>,
}

impl PlantedInstance {
    pub fn is_null(&self) -> bool {
        self.planted_copy.is_empty()
    }

    /// 0/1 adjacency of the planted copy (`Z*`).
    pub fn planted_matrix(&self) -> Mat<f64> {
        let mut z = Mat::zeros(self.params.n, self.params.n);
        for &(a, b) in &self.planted_copy {
            z[(a, b)] = 1.0;
            z[(b, a)] = 1.0;
        }
        z
    }

    pub fn record(&self) -> InstanceRecord {
        InstanceRecord {
            n: self.params.n,
            p: self.params.p,
            q: self.params.q,
            family: self.params.family.clone(),
            gamma: EdgeListRecord::from(&self.params.gamma),
            seed: self.seed,
            planted_copy_edges: self.planted_copy.iter().map(|&(a, b)| (a + 1, b + 1)).collect(),
        }
    }

    /// Writes `<stem>.edges` and `<stem>.json`.
    pub fn write_files(&self, stem: &Path) -> Result<()> {
        let f = std::fs::File::create(stem.with_extension("edges"))?;
        self.graph.write_edge_list(std::io::BufWriter::new(f))?;
        let json = serde_json::to_string_pretty(&self.record())?;
        std::fs::write(stem.with_extension("json"), json + "\n")?;
        Ok(())
    }

    /// Reads the pair written by [`PlantedInstance::write_files`].
    pub fn read_files(stem: &Path) -> Result<Self> {
        let f = std::fs::File::open(stem.with_extension("edges"))?;
        let graph = Graph::read_edge_list(std::io::BufReader::new(f))?;
        let text = std::fs::read_to_string(stem.with_extension("json"))?;
        let rec: InstanceRecord = serde_json::from_str(&text)?;
        Self::from_record(graph, rec)
    }

    pub fn from_record(graph: Graph, rec: InstanceRecord) -> Result<Self> {
        let gamma = match &rec.family {
            Some(f) => make_family(f)?,
            None => Graph::new(rec.gamma.n, rec.gamma.edges.iter().map(|&(a, b)| (a - 1, b - 1)))?,
        };
        let params = ModelParams { n: rec.n, p: rec.p, q: rec.q, gamma, family: rec.family.clone() };
        params.validate()?;
        if graph.n() != rec.n {
            return input(format!("edge list has n = {}, record says {}", graph.n(), rec.n));
        }
        let mut planted_copy = Vec::new();
        for &(a, b) in &rec.planted_copy_edges {
            if a == 0 || b == 0 || a > rec.n || b > rec.n {
                return input("planted edge out of range");
            }
            planted_copy.push(((a - 1).min(b - 1), (a - 1).max(b - 1)));
        }
        planted_copy.sort_unstable();
        Ok(PlantedInstance { graph, planted_copy, embedding: Vec::new(), params, seed: rec.seed })
    }
}

/// Sidecar JSON describing an instance.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InstanceRecord {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub family: Option<FamilySpec>,
    pub gamma: EdgeListRecord,
    pub seed: Option<u64>,
    /// 1-based.
    pub planted_copy_edges: Vec<(usize, usize)>,
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return input(format!("q must lie in (0, 1), got {q}"));
    }
    Ok(())
}

/// Erdős–Rényi `G(n, q)`: pairs visited in lexicographic order, each kept
/// with probability `q`.
pub fn sample_er<R: Rng + ?Sized>(n: usize, q: f64, rng: &mut R) -> Result<Graph> {
    check_q(q)?;
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < q {
                edges.push((a, b));
            }
        }
    }
    Ok(Graph::from_sorted_unchecked(n, edges))
}

/// Null instance wrapper around [`sample_er`].
pub fn sample_null<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<PlantedInstance> {
    let graph = sample_er(params.n, params.q, rng)?;
    Ok(PlantedInstance { graph, planted_copy: Vec::new(), embedding: Vec::new(), params: params.clone(), seed: None })
}

/// Draws a uniform injection of the pattern into `[n]`, keeps its edges with
/// probability `p` and every other pair with probability `q`.
pub fn sample_planted<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<PlantedInstance> {
    params.validate()?;
    let n = params.n;
    let mut verts: Vec<usize> = (0..n).collect();
    let (chosen, _) = verts.partial_shuffle(rng, params.gamma.n());
    let embedding = chosen.to_vec();
    let mut planted: Vec<Edge> = params
        .gamma
        .edges()
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (embedding[a], embedding[b]);
            (x.min(y), x.max(y))
        })
        .collect();
    planted.sort_unstable();
    let mut in_plant = vec![false; n * n];
    for &(a, b) in &planted {
        in_plant[a * n + b] = true;
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let prob = if in_plant[a * n + b] { params.p } else { params.q };
            if rng.random::<f64>() < prob {
                edges.push((a, b));
            }
        }
    }
    Ok(PlantedInstance {
        graph: Graph::from_sorted_unchecked(n, edges),
        planted_copy: planted,
        embedding,
        params: params.clone(),
        seed: None,
    })
}

/// `W_ij = A_ij / q - 1` off the diagonal, `0` on it.
#[derive(Clone, Debug)]
pub struct CenteredMatrix {
    pub w: Mat<f64>,
    pub q: f64,
}

pub fn center_matrix(adjacency: &Mat<f64>, q: f64) -> Result<CenteredMatrix> {
    check_q(q)?;
    let n = adjacency.nrows();
    let w = Mat::from_fn(n, n, |i, j| if i == j { 0.0 } else { adjacency[(i, j)] / q - 1.0 });
    Ok(CenteredMatrix { w, q })
}

pub fn center_graph(g: &Graph, q: f64) -> Result<CenteredMatrix> {
    center_matrix(&g.adjacency(), q)
}

/// `(d_KL(p || q), chi^2(p || q))` for Bernoulli laws.
pub fn bernoulli_divergences(p: f64, q: f64) -> Result<(f64, f64)> {
    check_q(q)?;
    if !(0.0..=1.0).contains(&p) {
        return input(format!("p must lie in [0, 1], got {p}"));
    }
    let xlogy = |x: f64, r: f64| if x == 0.0 { 0.0 } else { x * r.ln() };
    let kl = xlogy(p, p / q) + xlogy(1.0 - p, (1.0 - p) / (1.0 - q));
    let chi2 = (p - q).powi(2) / (q * (1.0 - q));
    Ok((kl, chi2))
}

/// `E[N(H, G(n, q))] = |S_H| q^{e(H)}`.
pub fn expected_copy_count(h: &Graph, n: usize, q: f64) -> Result<f64> {
    let s = copies_in_complete(h, n)?;
    let s = s.to_f64().ok_or_else(|| LabError::Execution("copy count overflows f64".into()))?;
    Ok(s * q.powi(h.edge_count() as i32))
}

pub const MAX_THRESHOLD_PATTERN: usize = 8;

#[derive(Clone, Debug)]
pub struct SubgraphExpectation {
    pub subgraph: Graph,
    /// `N(H, Gamma)`.
    pub copies_in_gamma: u64,
    /// `E[N(H, G(n, q))]`.
    pub expected_count: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct ExpectationThresholdReport {
    pub entries: Vec<SubgraphExpectation>,
    pub infimum: f64,
    /// `infimum >= 1/2`.
    pub holds: bool,
}

/// For every subgraph class `H` of `gamma` (no isolated vertices), the ratio
/// `E[N(H, G(n, q))] / N(H, gamma)`, and whether the infimum is at least 1/2.
pub fn expectation_threshold_check(gamma: &Graph, n: usize, q: f64) -> Result<ExpectationThresholdReport> {
    check_q(q)?;
    if gamma.n() > MAX_THRESHOLD_PATTERN {
        return Err(LabError::Resource(format!(
            "subgraph enumeration limited to {MAX_THRESHOLD_PATTERN} vertices, got {}",
            gamma.n()
        )));
    }
    if gamma.n() > n {
        return input(format!("pattern has {} vertices but n = {n}", gamma.n()));
    }
    let mut entries = Vec::new();
    for (h, copies) in subgraph_classes(gamma, 20)? {
        let expected = expected_copy_count(&h, n, q)?;
        entries.push(SubgraphExpectation {
            ratio: expected / copies as f64,
            subgraph: h,
            copies_in_gamma: copies,
            expected_count: expected,
        });
    }
    let infimum = entries.iter().map(|e| e.ratio).fold(f64::INFINITY, f64::min);
    Ok(ExpectationThresholdReport { entries, infimum, holds: infimum >= 0.5 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let a = sample_er(10, 0.5, &mut stream_rng(7, 0, 0)).unwrap();
        let b = sample_er(10, 0.5, &mut stream_rng(7, 0, 0)).unwrap();
        assert_eq!(a, b);
        let c = sample_er(10, 0.5, &mut stream_rng(7, 0, 1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_q_gives_empty_graph() {
        let g = sample_er(10, 1e-12, &mut stream_rng(1, 0, 0)).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn q_validation() {
        assert!(sample_er(5, 0.0, &mut stream_rng(1, 0, 0)).is_err());
        assert!(sample_er(5, 1.0, &mut stream_rng(1, 0, 0)).is_err());
        let k3 = make_family(&FamilySpec::Clique { k: 3 }).unwrap();
        assert!(ModelParams::new(5, 0.3, 0.5, k3.clone()).is_err());
        assert!(ModelParams::new(2, 1.0, 0.5, k3).is_err());
    }

    #[test]
    fn p_one_keeps_plant() {
        let params = ModelParams::from_family(30, 1.0, 0.2, FamilySpec::Clique { k: 6 }).unwrap();
        for t in 0..20 {
            let inst = sample_planted(&params, &mut stream_rng(3, 1, t)).unwrap();
            assert_eq!(inst.planted_copy.len(), 15);
            assert!(inst.planted_copy.iter().all(|&(a, b)| inst.graph.has_edge(a, b)));
        }
    }

    #[test]
    fn single_pair_case() {
        let params = ModelParams::from_family(2, 0.7, 0.3, FamilySpec::Path { k: 2 }).unwrap();
        let mut hits = 0;
        let trials = 20_000;
        for t in 0..trials {
            let inst = sample_planted(&params, &mut stream_rng(5, 1, t)).unwrap();
            assert_eq!(inst.planted_copy, vec![(0, 1)]);
            hits += inst.graph.edge_count();
        }
        let f = hits as f64 / trials as f64;
        let sigma = (0.7f64 * 0.3 / trials as f64).sqrt();
        assert!((f - 0.7).abs() < 4.0 * sigma, "{f}");
    }

    #[test]
    fn centering() {
        let a = Mat::from_fn(3, 3, |i, j| if i != j && (i + j) % 2 == 1 { 1.0 } else { 0.0 });
        let w = center_matrix(&a, 0.5).unwrap().w;
        assert_eq!(w[(0, 1)], 1.0);
        assert_eq!(w[(0, 2)], -1.0);
        for i in 0..3 {
            assert_eq!(w[(i, i)], 0.0);
        }
        let w = center_matrix(&a, 0.2).unwrap().w;
        assert!((w[(0, 1)] - 4.0).abs() < 1e-12);
        assert_eq!(w[(2, 0)], -1.0);
    }

    #[test]
    fn divergences() {
        assert_eq!(bernoulli_divergences(0.3, 0.3).unwrap(), (0.0, 0.0));
        let (kl, chi) = bernoulli_divergences(1.0, 0.5).unwrap();
        assert!((kl - 2f64.ln()).abs() < 1e-15);
        assert!((chi - 1.0).abs() < 1e-15);
        let (kl, _) = bernoulli_divergences(0.9, 0.1).unwrap();
        let oracle = 0.9 * 9f64.ln() + 0.1 * (1.0f64 / 9.0).ln();
        assert!((kl - oracle).abs() < 1e-14);
        assert!((kl - 0.8 * 9f64.ln()).abs() < 1e-14);
        assert!(bernoulli_divergences(0.5, 0.0).is_err());
        assert!(bernoulli_divergences(0.5, 1.0).is_err());
        let (kl0, _) = bernoulli_divergences(0.0, 0.5).unwrap();
        assert!((kl0 - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn expected_counts() {
        let e = make_family(&FamilySpec::Path { k: 2 }).unwrap();
        assert!((expected_copy_count(&e, 10, 0.5).unwrap() - 22.5).abs() < 1e-12);
        let t = make_family(&FamilySpec::Clique { k: 3 }).unwrap();
        assert!((expected_copy_count(&t, 6, 0.5).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn expectation_threshold_examples() {
        let e = make_family(&FamilySpec::Path { k: 2 }).unwrap();
        let r = expectation_threshold_check(&e, 10, 0.5).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert!((r.entries[0].ratio - 22.5).abs() < 1e-12);
        assert!(r.holds);

        let t = make_family(&FamilySpec::Clique { k: 3 }).unwrap();
        let r = expectation_threshold_check(&t, 3, 0.1).unwrap();
        let tri = r.entries.iter().find(|x| x.subgraph.edge_count() == 3).unwrap();
        assert!((tri.ratio - 0.001).abs() < 1e-15);
        assert!(!r.holds);

        let r = expectation_threshold_check(&t, 100, 0.5).unwrap();
        assert_eq!(r.entries.len(), 3);
        // edge: 4950*0.5/3, path: 100*C(99,2)*0.25/3, triangle: C(100,3)/8
        let mut ratios: Vec<f64> = r.entries.iter().map(|x| x.ratio).collect();
        ratios.sort_by(f64::total_cmp);
        assert!((ratios[0] - 825.0).abs() < 1e-9);
        assert!(r.holds);
    }

    #[test]
    fn instance_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let params = ModelParams::from_family(12, 0.9, 0.3, FamilySpec::Star { leaves: 3 }).unwrap();
        let mut inst = sample_planted(&params, &mut stream_rng(2, 0, 0)).unwrap();
        inst.seed = Some(2);
        let stem = dir.path().join("inst");
        inst.write_files(&stem).unwrap();
        let back = PlantedInstance::read_files(&stem).unwrap();
        assert_eq!(back.graph, inst.graph);
        assert_eq!(back.planted_copy, inst.planted_copy);
        assert_eq!(back.params.gamma, inst.params.gamma);
        assert_eq!(back.seed, Some(2));
    }
}
