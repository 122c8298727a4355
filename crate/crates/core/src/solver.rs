//! Euclidean projections and consensus ADMM for the nuclear-norm program,
//! the clique SDP and the subgraph-selection relaxation.

use std::io::Write;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{input, LabError, Result};
use crate::graph::Graph;
use crate::random::CenteredMatrix;
use crate::spectral::{check_symmetric, frobenius, inner, reconstruct, sym_eigen, sym_eigenvalues};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub rho: f64,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub max_iters: usize,
    pub over_relaxation: f64,
    /// Rescale `rho` when one residual dominates the other by a factor of 10.
    pub adaptive_rho: bool,
    /// Keep one trace row per iteration.
    pub trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            rho: 1.0,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            max_iters: 5000,
            over_relaxation: 1.6,
            adaptive_rho: false,
            trace: false,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if !(self.tol_primal > 0.0 && self.tol_dual > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1".into());
        }
        if !(1.0..=1.8).contains(&self.over_relaxation) {
            return bad(format!("over_relaxation must lie in [1, 1.8], got {}", self.over_relaxation));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub residual_primal: f64,
    pub residual_dual: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintViolation {
    pub constraint: String,
    pub violation: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub z: Mat<f64>,
    pub objective: f64,
    pub residual_primal: f64,
    pub residual_dual: f64,
    /// Recomputed from `z` after the last iteration.
    pub feasibility: Vec<ConstraintViolation>,
    pub iters: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

impl SolveResult {
    pub fn max_violation(&self) -> f64 {
        self.feasibility.iter().map(|c| c.violation).fold(0.0, f64::max)
    }
}

pub fn write_trace_csv(trace: &[TraceRow], w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in trace {
        wtr.serialize(row).map_err(|e| LabError::Io(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Euclidean projection onto `{x : ||x||_1 <= t}` by sort and water-fill.
pub fn project_l1_ball(v: &[f64], t: f64) -> Vec<f64> {
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= t {
        return v.to_vec();
    }
    if t <= 0.0 {
        return vec![0.0; v.len()];
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let cand = (cum - t) / (j + 1) as f64;
        if uj - cand > 0.0 {
            theta = cand;
        } else {
            break;
        }
    }
    v.iter().map(|&x| x.signum() * (x.abs() - theta).max(0.0)).collect()
}

fn nuclear_ball_unchecked(s: MatRef<'_, f64>, t: f64) -> Result<Mat<f64>> {
    let eig = sym_eigen(s)?;
    let l1: f64 = eig.values.iter().map(|x| x.abs()).sum();
    if l1 <= t {
        return Ok(s.to_owned());
    }
    Ok(reconstruct(eig.vectors.as_ref(), &project_l1_ball(&eig.values, t)))
}

/// Frobenius-nearest symmetric matrix with nuclear norm at most `t`.
pub fn project_nuclear_ball(s: MatRef<'_, f64>, t: f64) -> Result<Mat<f64>> {
    if !(t >= 0.0) {
        return input(format!("nuclear radius must be >= 0, got {t}"));
    }
    check_symmetric(s)?;
    nuclear_ball_unchecked(s, t)
}

/// Entrywise clamp to `[0, 1]`.
pub fn project_box(m: MatRef<'_, f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].clamp(0.0, 1.0))
}

fn psd_unchecked(s: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let eig = sym_eigen(s)?;
    if eig.values.iter().all(|&x| x >= 0.0) {
        return Ok(s.to_owned());
    }
    let clipped: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0)).collect();
    Ok(reconstruct(eig.vectors.as_ref(), &clipped))
}

/// Nearest positive semidefinite matrix: negative eigenvalues set to zero.
pub fn project_psd(s: MatRef<'_, f64>) -> Result<Mat<f64>> {
    check_symmetric(s)?;
    psd_unchecked(s)
}

/// Projection onto `{Z : Tr Z = k, sum Z = k^2}`: `Z + a I + b J` with
/// `(a, b)` from the 2x2 Gram system of `I` and `J`.
fn project_trace_sum(m: MatRef<'_, f64>, k: f64) -> Mat<f64> {
    let n = m.nrows();
    let nf = n as f64;
    let mut tr = 0.0;
    let mut sum = 0.0;
    for j in 0..n {
        tr += m[(j, j)];
        for i in 0..n {
            sum += m[(i, j)];
        }
    }
    if n == 1 {
        // Both equalities pin the single entry (k must equal 1).
        return Mat::from_fn(1, 1, |_, _| k);
    }
    let (r1, r2) = (k - tr, k * k - sum);
    // [n n; n n^2] [a b]^T = [r1 r2]^T
    let det = nf * nf * nf - nf * nf;
    let a = (nf * nf * r1 - nf * r2) / det;
    let b = (nf * r2 - nf * r1) / det;
    Mat::from_fn(n, n, |i, j| m[(i, j)] + b + if i == j { a } else { 0.0 })
}

fn check_w(w: MatRef<'_, f64>) -> Result<()> {
    for j in 0..w.ncols() {
        for i in 0..w.nrows() {
            if w[(i, j)].is_nan() {
                return input("centered matrix contains NaN");
            }
        }
    }
    check_symmetric(w)
}

fn diff_norm(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let d = a[(i, j)] - b[(i, j)];
            s += d * d;
        }
    }
    s.sqrt()
}

fn stopped(cfg: &SolveConfig, r: f64, s: f64, scale: f64) -> bool {
    r <= cfg.tol_primal * (1.0 + scale) && s <= cfg.tol_dual * (1.0 + scale)
}

/// Residual balancing; returns the factor applied to rho.
fn rebalance(cfg: &SolveConfig, rho: &mut f64, r: f64, s: f64) -> f64 {
    if !cfg.adaptive_rho {
        return 1.0;
    }
    let f = if r > 10.0 * s {
        2.0
    } else if s > 10.0 * r {
        0.5
    } else {
        1.0
    };
    *rho *= f;
    f
}

/// `maximize <W, Z>` subject to `||Z||_* <= t` and `0 <= Z <= J`
/// (optionally `Z_ij = 0` off `support`).
///
/// Two-block consensus: `X` carries the objective and the nuclear ball, `Y`
/// the box. The returned `Z` is the final box iterate, scaled down if needed
/// so that it satisfies the nuclear constraint exactly.
pub fn solve_nuclear_program(w: &CenteredMatrix, t: f64, cfg: &SolveConfig) -> Result<SolveResult> {
    nuclear_admm(w.w.as_ref(), t, None, cfg)
}

fn nuclear_admm(w: MatRef<'_, f64>, t: f64, support: Option<&Graph>, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.validate()?;
    if !(t >= 0.0) {
        return input(format!("nuclear radius must be >= 0, got {t}"));
    }
    check_w(w)?;
    let n = w.nrows();
    let allowed = |i: usize, j: usize| match support {
        Some(g) => g.has_edge(i, j),
        None => true,
    };
    let box_proj = |m: &Mat<f64>| {
        Mat::from_fn(n, n, |i, j| if allowed(i, j) { m[(i, j)].clamp(0.0, 1.0) } else { 0.0 })
    };

    let alpha = cfg.over_relaxation;
    let mut rho = cfg.rho;
    let mut y = Mat::<f64>::zeros(n, n);
    let mut u = Mat::<f64>::zeros(n, n);
    let mut trace = Vec::new();
    let (mut r, mut s) = (f64::INFINITY, f64::INFINITY);
    let mut iters = 0;
    let mut converged = false;

    for it in 1..=cfg.max_iters {
        iters = it;
        let v = Mat::from_fn(n, n, |i, j| y[(i, j)] - u[(i, j)] + w[(i, j)] / rho);
        let x = nuclear_ball_unchecked(v.as_ref(), t)?;
        let xh = Mat::from_fn(n, n, |i, j| alpha * x[(i, j)] + (1.0 - alpha) * y[(i, j)]);
        let y_prev = y;
        y = box_proj(&Mat::from_fn(n, n, |i, j| xh[(i, j)] + u[(i, j)]));
        u = Mat::from_fn(n, n, |i, j| u[(i, j)] + xh[(i, j)] - y[(i, j)]);
        r = diff_norm(&x, &y);
        s = rho * diff_norm(&y, &y_prev);
        if cfg.trace {
            trace.push(TraceRow { iter: it, objective: inner(w, y.as_ref()), residual_primal: r, residual_dual: s, rho });
        }
        if stopped(cfg, r, s, frobenius(y.as_ref())) {
            converged = true;
            break;
        }
        let f = rebalance(cfg, &mut rho, r, s);
        if f != 1.0 {
            u = Mat::from_fn(n, n, |i, j| u[(i, j)] / f);
        }
    }

    let nuc: f64 = sym_eigenvalues(y.as_ref())?.iter().map(|x| x.abs()).sum();
    if nuc > t {
        let c = if nuc > 0.0 { t / nuc } else { 0.0 };
        y = Mat::from_fn(n, n, |i, j| y[(i, j)] * c);
    }
    let z = y;
    let mut feasibility = vec![
        ConstraintViolation {
            constraint: "nuclear_norm".into(),
            violation: (sym_eigenvalues(z.as_ref())?.iter().map(|x| x.abs()).sum::<f64>() - t).max(0.0),
        },
        ConstraintViolation { constraint: "box".into(), violation: box_violation(z.as_ref()) },
        ConstraintViolation { constraint: "symmetry".into(), violation: asymmetry(z.as_ref()) },
    ];
    if support.is_some() {
        let mut off = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if !allowed(i, j) {
                    off = off.max(z[(i, j)].abs());
                }
            }
        }
        feasibility.push(ConstraintViolation { constraint: "support".into(), violation: off });
    }
    Ok(SolveResult {
        objective: inner(w, z.as_ref()),
        z,
        residual_primal: r,
        residual_dual: s,
        feasibility,
        iters,
        converged,
        trace,
    })
}

fn box_violation(z: MatRef<'_, f64>) -> f64 {
    let mut v = 0.0f64;
    for j in 0..z.ncols() {
        for i in 0..z.nrows() {
            let x = z[(i, j)];
            v = v.max(-x).max(x - 1.0);
        }
    }
    v
}

fn asymmetry(z: MatRef<'_, f64>) -> f64 {
    let mut v = 0.0f64;
    for j in 0..z.ncols() {
        for i in 0..j {
            v = v.max((z[(i, j)] - z[(j, i)]).abs());
        }
    }
    v
}

/// `maximize <W, Z>` subject to `Z PSD`, `Z >= 0`, `Tr Z = k`, `sum Z = k^2`.
///
/// Three-block consensus over the PSD cone, the nonnegative orthant and the
/// affine slice (which also carries the objective); all three projections
/// are exact. The returned `Z` is the consensus iterate.
pub fn solve_clique_sdp(w: &CenteredMatrix, k: usize, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let wm = w.w.as_ref();
    check_w(wm)?;
    let n = wm.nrows();
    if k == 0 || k > n {
        return input(format!("clique size must satisfy 1 <= k <= n, got k = {k}, n = {n}"));
    }
    let kf = k as f64;
    let alpha = cfg.over_relaxation;
    let mut rho = cfg.rho;
    let mut z = Mat::from_fn(n, n, |_, _| kf * kf / (n * n) as f64);
    let mut us = [Mat::<f64>::zeros(n, n), Mat::zeros(n, n), Mat::zeros(n, n)];
    let mut trace = Vec::new();
    let (mut r, mut s) = (f64::INFINITY, f64::INFINITY);
    let mut iters = 0;
    let mut converged = false;

    for it in 1..=cfg.max_iters {
        iters = it;
        let v0 = Mat::from_fn(n, n, |i, j| z[(i, j)] - us[0][(i, j)]);
        let v1 = Mat::from_fn(n, n, |i, j| z[(i, j)] - us[1][(i, j)]);
        let v2 = Mat::from_fn(n, n, |i, j| z[(i, j)] - us[2][(i, j)] + wm[(i, j)] / rho);
        let xs = [
            psd_unchecked(v0.as_ref())?,
            Mat::from_fn(n, n, |i, j| v1[(i, j)].max(0.0)),
            project_trace_sum(v2.as_ref(), kf),
        ];
        let xh: Vec<Mat<f64>> =
            xs.iter().map(|x| Mat::from_fn(n, n, |i, j| alpha * x[(i, j)] + (1.0 - alpha) * z[(i, j)])).collect();
        let z_prev = z;
        z = Mat::from_fn(n, n, |i, j| (0..3).map(|b| xh[b][(i, j)] + us[b][(i, j)]).sum::<f64>() / 3.0);
        for b in 0..3 {
            us[b] = Mat::from_fn(n, n, |i, j| us[b][(i, j)] + xh[b][(i, j)] - z[(i, j)]);
        }
        r = xs.iter().map(|x| diff_norm(x, &z).powi(2)).sum::<f64>().sqrt();
        s = rho * 3f64.sqrt() * diff_norm(&z, &z_prev);
        if cfg.trace {
            trace.push(TraceRow { iter: it, objective: inner(wm, z.as_ref()), residual_primal: r, residual_dual: s, rho });
        }
        if stopped(cfg, r, s, frobenius(z.as_ref())) {
            converged = true;
            break;
        }
        let f = rebalance(cfg, &mut rho, r, s);
        if f != 1.0 {
            for u in us.iter_mut() {
                *u = Mat::from_fn(n, n, |i, j| u[(i, j)] / f);
            }
        }
    }

    let (mut tr, mut sum, mut neg) = (0.0, 0.0, 0.0f64);
    for j in 0..n {
        tr += z[(j, j)];
        for i in 0..n {
            sum += z[(i, j)];
            neg = neg.max(-z[(i, j)]);
        }
    }
    let lmin = sym_eigenvalues(z.as_ref())?.first().copied().unwrap_or(0.0);
    let feasibility = vec![
        ConstraintViolation { constraint: "trace".into(), violation: (tr - kf).abs() },
        ConstraintViolation { constraint: "sum".into(), violation: (sum - kf * kf).abs() / (kf * kf) },
        ConstraintViolation { constraint: "psd".into(), violation: (-lmin).max(0.0) },
        ConstraintViolation { constraint: "nonnegative".into(), violation: neg },
    ];
    Ok(SolveResult {
        objective: inner(wm, z.as_ref()),
        z,
        residual_primal: r,
        residual_dual: s,
        feasibility,
        iters,
        converged,
        trace,
    })
}

#[derive(Clone, Debug)]
pub struct SubgraphSelection {
    pub x: Mat<f64>,
    /// `max <X, A>` over the relaxation.
    pub opt_relax: f64,
    /// Edges with `X_ij >= theta`.
    pub heuristic: Graph,
    pub theta: f64,
    pub result: SolveResult,
}

/// Relaxation of the best subgraph for the nuclear test:
/// `maximize <X, A>` subject to `||X||_* <= 1`, `0 <= X <= J` and `X`
/// supported on the edges of `g`. `theta` defaults to half the largest entry.
pub fn solve_subgraph_selection(g: &Graph, theta: Option<f64>, cfg: &SolveConfig) -> Result<SubgraphSelection> {
    if g.edge_count() == 0 {
        return input("graph has no edges, so no nonempty subgraph exists");
    }
    let a = g.adjacency();
    let result = nuclear_admm(a.as_ref(), 1.0, Some(g), cfg)?;
    let x = result.z.clone();
    let max_entry = g.edges().iter().map(|&(i, j)| x[(i, j)]).fold(0.0, f64::max);
    let theta = theta.unwrap_or(0.5 * max_entry);
    let heuristic = g.filter_edges(|(i, j)| x[(i, j)] >= theta);
    Ok(SubgraphSelection { opt_relax: result.objective, x, heuristic, theta, result })
}

pub const MAX_BRUTE_EDGES: usize = 20;

/// `max 2|e(H)| / ||A_H||_*` over nonempty edge subsets `H` of `g`,
/// together with the maximising subgraph.
pub fn opt_d_bruteforce(g: &Graph) -> Result<(f64, Graph)> {
    let m = g.edge_count();
    if m == 0 {
        return input("graph has no edges");
    }
    if m > MAX_BRUTE_EDGES {
        return Err(LabError::Resource(format!("{m} edges, subset enumeration limit is {MAX_BRUTE_EDGES}")));
    }
    let edges = g.edges();
    let mut best = (f64::NEG_INFINITY, Graph::empty(g.n()));
    for mask in 1u32..(1 << m) {
        let h = Graph::from_sorted_unchecked(
            g.n(),
            (0..m).filter(|b| mask >> b & 1 == 1).map(|b| edges[b]).collect(),
        );
        let nuc: f64 = sym_eigenvalues(h.adjacency().as_ref())?.iter().map(|x| x.abs()).sum();
        let val = 2.0 * h.edge_count() as f64 / nuc;
        if val > best.0 {
            best = (val, h);
        }
    }
    Ok(best)
}
