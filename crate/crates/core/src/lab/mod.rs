//! Monte-Carlo harness: null-quantile calibration and risk estimation over
//! adversary pairs, plus the containment, regime and uniformity tools.

mod containment;
mod experiment;
mod regime;

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use containment::{
    estimate_containment_probability, exact_containment_probability, uniformity_audit, ContainmentEstimate,
    UniformityAudit,
};
pub use experiment::{run_experiment, AdversaryPair, ExperimentConfig, ExperimentRow, ExperimentSummary, ModelSpec};
pub use regime::{regime_report, Condition, RegimeReport};

use crate::adversary::{apply_alt_adversary, apply_null_adversary, AdversarySpec};
use crate::detectors::{compute_statistic, DetectorSpec, Statistic};
use crate::error::{input, LabError, Result};
use crate::graph::Graph;
use crate::random::{sample_er, sample_planted, stream_rng, ModelParams};

/// Stream domains; each purpose draws from its own ChaCha key.
pub mod domain {
    pub const CALIBRATION: u64 = 1;
    pub const NULL: u64 = 2;
    pub const NULL_ADVERSARY: u64 = 3;
    pub const ALT: u64 = 4;
    pub const ALT_ADVERSARY: u64 = 5;
    pub const CONTAINMENT: u64 = 6;
    pub const AUDIT: u64 = 7;
    pub const AUDIT_ADVERSARY: u64 = 8;
}

pub const MIN_CALIBRATION_TRIALS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub tau: f64,
    pub alpha: f64,
    /// Null statistics in trial order (discarded trials omitted).
    pub statistics: Vec<f64>,
    pub discarded: usize,
}

/// Index (1-based) of the calibration order statistic: `ceil((1 - alpha) T)`
/// clamped to `[1, T]`.
pub fn quantile_index(alpha: f64, t: usize) -> usize {
    (((1.0 - alpha) * t as f64).ceil() as usize).clamp(1, t)
}

/// Empirical `(1 - alpha)` quantile of the detector's statistic over vanilla
/// `G(n, q)` draws.
pub fn calibrate_threshold(
    spec: &DetectorSpec,
    params: &ModelParams,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<Calibration> {
    if trials < MIN_CALIBRATION_TRIALS {
        return input(format!("calibration needs at least {MIN_CALIBRATION_TRIALS} trials, got {trials}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return input(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let stats: Vec<Statistic> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let g = sample_er(params.n, params.q, &mut stream_rng(seed, domain::CALIBRATION, i))?;
            compute_statistic(spec, &g, params)
        })
        .collect::<Result<_>>()?;
    let usable: Vec<f64> = stats.iter().filter(|s| usable(s)).map(|s| s.value).collect();
    let discarded = trials - usable.len();
    if usable.is_empty() {
        return Err(LabError::Execution("every calibration trial was discarded".into()));
    }
    if discarded > 0 {
        log::warn!("calibration discarded {discarded} of {trials} trials");
    }
    let mut sorted = usable.clone();
    sorted.sort_by(f64::total_cmp);
    let tau = sorted[quantile_index(alpha, sorted.len()) - 1];
    Ok(Calibration { tau, alpha, statistics: usable, discarded })
}

fn usable(s: &Statistic) -> bool {
    s.diagnostics.solver.as_ref().is_none_or(|d| d.converged)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub type1_rate: f64,
    pub type2_rate: f64,
    pub risk: f64,
    pub trials: usize,
    /// `1.96 sqrt(sum of the two binomial variances)`.
    pub half_width_95: f64,
    pub discarded_trials: usize,
    /// Statistics in trial order, null side then alternative side.
    #[serde(skip)]
    pub null_statistics: Vec<f64>,
    #[serde(skip)]
    pub alt_statistics: Vec<f64>,
}

impl fmt::Display for RiskEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "type1 {:.4} type2 {:.4} risk {:.4} +- {:.4} ({} trials, {} discarded)",
            self.type1_rate, self.type2_rate, self.risk, self.half_width_95, self.trials, self.discarded_trials
        )
    }
}

/// Memo of statistics keyed by `(alternative side, trial index)`; an entry is
/// reused only when the observed graph is identical.
#[derive(Default)]
pub struct StatisticCache {
    inner: Mutex<HashMap<(bool, u64), (Graph, Statistic)>>,
}

impl StatisticCache {
    fn get_or_compute(&self, key: (bool, u64), g: Graph, f: impl FnOnce(&Graph) -> Result<Statistic>) -> Result<Statistic> {
        if let Some((cached, s)) = self.inner.lock().expect("cache lock").get(&key) {
            if *cached == g {
                return Ok(s.clone());
            }
        }
        let s = f(&g)?;
        self.inner.lock().expect("cache lock").insert(key, (g, s.clone()));
        Ok(s)
    }
}

/// Type-I and Type-II rates of `spec` at threshold `tau` against one
/// adversary pair. Trial `i` on each side uses its own streams, so the result
/// does not depend on scheduling.
pub fn estimate_risk(
    spec: &DetectorSpec,
    params: &ModelParams,
    null_adversary: &AdversarySpec,
    alt_adversary: &AdversarySpec,
    tau: f64,
    trials: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    estimate_risk_cached(spec, params, null_adversary, alt_adversary, tau, trials, seed, None)
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_risk_cached(
    spec: &DetectorSpec,
    params: &ModelParams,
    null_adversary: &AdversarySpec,
    alt_adversary: &AdversarySpec,
    tau: f64,
    trials: usize,
    seed: u64,
    cache: Option<&StatisticCache>,
) -> Result<RiskEstimate> {
    if trials == 0 {
        return input("trials must be >= 1");
    }
    null_adversary.validate()?;
    alt_adversary.validate()?;
    if !alt_adversary.applies_to_alternative() {
        return Err(LabError::Config(format!("{alt_adversary} cannot act on the alternative")));
    }
    let stat = |alt: bool, i: u64, g: Graph| match cache {
        Some(c) => c.get_or_compute((alt, i), g, |g| compute_statistic(spec, g, params)),
        None => compute_statistic(spec, &g, params),
    };
    let null: Vec<Statistic> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let g = sample_er(params.n, params.q, &mut stream_rng(seed, domain::NULL, i))?;
            let g = apply_null_adversary(null_adversary, &g, &mut stream_rng(seed, domain::NULL_ADVERSARY, i))?;
            stat(false, i, g)
        })
        .collect::<Result<_>>()?;
    let alt: Vec<Statistic> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let inst = sample_planted(params, &mut stream_rng(seed, domain::ALT, i))?;
            let g = apply_alt_adversary(alt_adversary, &inst, &mut stream_rng(seed, domain::ALT_ADVERSARY, i))?;
            stat(true, i, g)
        })
        .collect::<Result<_>>()?;

    let strict = spec.strict();
    let rejects = |v: f64| if strict { v > tau } else { v >= tau };
    let null_vals: Vec<f64> = null.iter().filter(|s| usable(s)).map(|s| s.value).collect();
    let alt_vals: Vec<f64> = alt.iter().filter(|s| usable(s)).map(|s| s.value).collect();
    let discarded = 2 * trials - null_vals.len() - alt_vals.len();
    if null_vals.is_empty() || alt_vals.is_empty() {
        return Err(LabError::Execution("every trial on one side was discarded".into()));
    }
    if discarded > 0 {
        log::warn!("risk estimate discarded {discarded} of {} trials", 2 * trials);
    }
    let t1 = null_vals.iter().filter(|&&v| rejects(v)).count() as f64 / null_vals.len() as f64;
    let t2 = alt_vals.iter().filter(|&&v| !rejects(v)).count() as f64 / alt_vals.len() as f64;
    let var = t1 * (1.0 - t1) / null_vals.len() as f64 + t2 * (1.0 - t2) / alt_vals.len() as f64;
    Ok(RiskEstimate {
        type1_rate: t1,
        type2_rate: t2,
        risk: t1 + t2,
        trials,
        half_width_95: 1.96 * var.sqrt(),
        discarded_trials: discarded,
        null_statistics: null_vals,
        alt_statistics: alt_vals,
    })
}

/// Sets the global worker count from `SEMIRANDOM_THREADS` when present.
pub fn init_threads_from_env() {
    if let Some(n) = std::env::var("SEMIRANDOM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("thread pool already initialised");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{DetectorKind, ThresholdSource};
    use crate::family::FamilySpec;

    fn count_spec() -> DetectorSpec {
        DetectorSpec::new(DetectorKind::Count, ThresholdSource::Calibrated { alpha: 0.05 })
    }

    #[test]
    fn quantile_boundaries() {
        assert_eq!(quantile_index(0.5, 100), 50);
        assert_eq!(quantile_index(1e-9, 100), 100);
        assert_eq!(quantile_index(0.05, 200), 190);
        assert_eq!(quantile_index(0.999999, 10), 1);
    }

    #[test]
    fn calibration_median_of_edge_count() {
        let params = ModelParams::from_family(20, 1.0, 0.5, FamilySpec::Clique { k: 3 }).unwrap();
        let c = calibrate_threshold(&count_spec(), &params, 0.5, 4000, 3).unwrap();
        // median of Binomial(190, 1/2) is 95
        assert!((c.tau - 95.0).abs() <= 1.0, "{}", c.tau);
        let c = calibrate_threshold(&count_spec(), &params, 1e-9, 200, 3).unwrap();
        assert_eq!(c.tau, c.statistics.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        assert!(calibrate_threshold(&count_spec(), &params, 0.05, 99, 3).is_err());
    }

    #[test]
    fn constant_statistic_calibrates_to_constant() {
        // One-vertex-pair graphs with q tiny: the count is 0 on every draw.
        let params = ModelParams::from_family(2, 1.0, 1e-12, FamilySpec::Path { k: 2 }).unwrap();
        let c = calibrate_threshold(&count_spec(), &params, 0.05, 100, 0).unwrap();
        assert_eq!(c.tau, 0.0);
    }

    #[test]
    fn constant_tests_have_unit_risk() {
        let params = ModelParams::from_family(12, 1.0, 0.5, FamilySpec::Clique { k: 4 }).unwrap();
        let id = AdversarySpec::Identity;
        let always = estimate_risk(&count_spec(), &params, &id, &id, f64::NEG_INFINITY, 50, 1).unwrap();
        assert_eq!((always.type1_rate, always.type2_rate, always.risk), (1.0, 0.0, 1.0));
        let never = estimate_risk(&count_spec(), &params, &id, &id, f64::INFINITY, 50, 1).unwrap();
        assert_eq!((never.type1_rate, never.type2_rate, never.risk), (0.0, 1.0, 1.0));
        assert_eq!(never.half_width_95, 0.0);
    }

    #[test]
    fn deterministic_and_cache_transparent() {
        let params = ModelParams::from_family(16, 1.0, 0.5, FamilySpec::Clique { k: 5 }).unwrap();
        let id = AdversarySpec::Identity;
        let strip = AdversarySpec::AltStripper;
        let a = estimate_risk(&count_spec(), &params, &id, &strip, 62.0, 40, 9).unwrap();
        let b = estimate_risk(&count_spec(), &params, &id, &strip, 62.0, 40, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.null_statistics, b.null_statistics);
        let cache = StatisticCache::default();
        let c = estimate_risk_cached(&count_spec(), &params, &id, &strip, 62.0, 40, 9, Some(&cache)).unwrap();
        let d = estimate_risk_cached(&count_spec(), &params, &id, &strip, 62.0, 40, 9, Some(&cache)).unwrap();
        assert_eq!(c.null_statistics, a.null_statistics);
        assert_eq!(d.alt_statistics, a.alt_statistics);
    }

    #[test]
    fn null_only_adversary_rejected_on_alternative() {
        let params = ModelParams::from_family(10, 1.0, 0.5, FamilySpec::Clique { k: 3 }).unwrap();
        let planter = AdversarySpec::NullCopyPlanter { gamma_family: FamilySpec::Clique { k: 3 }, p: 1.0 };
        let r = estimate_risk(&count_spec(), &params, &AdversarySpec::Identity, &planter, 1.0, 5, 0);
        assert!(matches!(r, Err(LabError::Config(_))));
    }
}
