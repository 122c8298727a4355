use serde::{Deserialize, Serialize};

use crate::density::{max_subgraph_density, DensityValue};
use crate::error::Result;
use crate::graph::Graph;
use crate::random::bernoulli_divergences;
use crate::spectral::nuclear_norm;

/// Slack used in the conditions that carry a free `epsilon`.
pub const REGIME_EPSILON: f64 = 0.1;

/// One finite-n reading of an asymptotic condition. `holds` is the numeric
/// comparison at this size, not a statement about the limit; it is `None`
/// when the condition involves an unspecified constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub formula: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub vertices: usize,
    pub edges: usize,
    pub max_degree: usize,
    pub mu: DensityValue,
    pub nuclear_norm: f64,
    pub kl: f64,
    pub chi_square: f64,
    pub conditions: Vec<Condition>,
}

impl RegimeReport {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn cond(name: &str, formula: &str, lhs: f64, rhs: f64, holds: Option<bool>) -> Condition {
    Condition { name: name.into(), formula: formula.into(), lhs, rhs, holds }
}

/// Numeric values of the density conditions for pattern `gamma` in `G(n, p, q)`.
/// Logarithms are natural.
pub fn regime_report(gamma: &Graph, n: usize, p: f64, q: f64) -> Result<RegimeReport> {
    let mu = max_subgraph_density(gamma)?;
    let (kl, chi2) = bernoulli_divergences(p, q)?;
    let nuc = nuclear_norm(gamma.adjacency().as_ref())?;
    let m = mu.value();
    let v = gamma.n() as f64;
    let e = gamma.edge_count() as f64;
    let d = gamma.max_degree() as f64;
    let ln_n = (n as f64).ln();
    let eps = REGIME_EPSILON;

    let sublog_rhs = v.ln() / v.ln().ln();
    let alpha = m / v.ln();
    let lb_rhs = (1.0 - eps) * alpha / (2.0 + alpha * (1.0 + chi2).ln()) * ln_n;
    let copy_lhs = (1.0 + eps) * m * e.ln().ln() + v.ln();
    let nuc_ratio = e / nuc;

    let conditions = vec![
        cond(
            "sublog",
            "mu vs log|v| / loglog|v|",
            m,
            sublog_rhs,
            (v.ln().ln() > 0.0).then(|| m < sublog_rhs),
        ),
        cond("count_max_degree", "|e| max d_max^2 vs n", e.max(d * d), n as f64, Some(e.max(d * d) > n as f64)),
        cond(
            "lower_bound_vanilla",
            "mu <= (1-eps) a / (2 + a log(1+chi2)) log n, a = mu / log|v|",
            m,
            lb_rhs,
            Some(m <= lb_rhs),
        ),
        cond("opt_upper", "mu d_KL / log n vs 1", m * kl / ln_n, 1.0, Some(m * kl / ln_n > 1.0)),
        cond(
            "copy",
            "(1+eps) mu loglog|e| + log|v| <= log n",
            copy_lhs,
            ln_n,
            (!copy_lhs.is_nan()).then_some(copy_lhs <= ln_n),
        ),
        cond("nuclear_signal", "|e| / ||Gamma||_* vs sqrt(n) (constant unspecified)", nuc_ratio, (n as f64).sqrt(), None),
    ];
    Ok(RegimeReport {
        n,
        p,
        q,
        vertices: gamma.n(),
        edges: gamma.edge_count(),
        max_degree: gamma.max_degree(),
        mu,
        nuclear_norm: nuc,
        kl,
        chi_square: chi2,
        conditions,
    })
}
