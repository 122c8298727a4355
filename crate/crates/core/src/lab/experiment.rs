use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{calibrate_threshold, estimate_risk_cached, StatisticCache, MIN_CALIBRATION_TRIALS};
use crate::adversary::AdversarySpec;
use crate::detectors::{resolve_threshold, DetectorKind, DetectorSpec, ThresholdSource};
use crate::error::{LabError, Result};
use crate::family::FamilySpec;
use crate::random::ModelParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub family: FamilySpec,
}

impl ModelSpec {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::from_family(self.n, self.p, self.q, self.family.clone())
            .map_err(|e| LabError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryPair {
    pub null: AdversarySpec,
    pub alt: AdversarySpec,
}

fn identity() -> AdversarySpec {
    AdversarySpec::Identity
}

/// One experiment: a model (optionally swept over pattern families), a
/// detector and a grid of adversary pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    /// Families replacing `model.family`, one row block each.
    #[serde(default)]
    pub sweep: Vec<FamilySpec>,
    #[serde(default = "identity")]
    pub adversary_null: AdversarySpec,
    #[serde(default = "identity")]
    pub adversary_alt: AdversarySpec,
    /// When non-empty, replaces the single `(adversary_null, adversary_alt)` pair.
    #[serde(default)]
    pub adversary_grid: Vec<AdversaryPair>,
    pub detector: DetectorSpec,
    pub trials: usize,
    /// Defaults to `max(trials, 100)`.
    #[serde(default)]
    pub calibration_trials: Option<usize>,
    /// Overrides the detector's calibration level.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Stem for `<output>.csv` and `<output>.json`.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn pairs(&self) -> Vec<AdversaryPair> {
        if self.adversary_grid.is_empty() {
            vec![AdversaryPair { null: self.adversary_null.clone(), alt: self.adversary_alt.clone() }]
        } else {
            self.adversary_grid.clone()
        }
    }

    pub fn families(&self) -> Vec<FamilySpec> {
        if self.sweep.is_empty() {
            vec![self.model.family.clone()]
        } else {
            self.sweep.clone()
        }
    }

    pub fn params_for(&self, family: &FamilySpec) -> Result<ModelParams> {
        ModelSpec { family: family.clone(), ..self.model.clone() }.params()
    }

    pub fn alpha(&self) -> Option<f64> {
        match (&self.alpha, &self.detector.threshold) {
            (Some(a), _) => Some(*a),
            (None, ThresholdSource::Calibrated { alpha }) => Some(*alpha),
            _ => None,
        }
    }

    pub fn calibration_trials(&self) -> usize {
        self.calibration_trials.unwrap_or(self.trials.max(MIN_CALIBRATION_TRIALS))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return bad(format!("alpha must lie in (0, 1), got {a}"));
            }
        }
        let calibrated = matches!(self.detector.threshold, ThresholdSource::Calibrated { .. });
        if calibrated && self.calibration_trials() < MIN_CALIBRATION_TRIALS {
            return bad(format!("calibration_trials must be >= {MIN_CALIBRATION_TRIALS}"));
        }
        for pair in self.pairs() {
            pair.null.validate()?;
            pair.alt.validate()?;
            if !pair.alt.applies_to_alternative() {
                return bad(format!("{} cannot act on the alternative", pair.alt));
            }
        }
        for family in self.families() {
            let params = self.params_for(&family)?;
            self.detector.validate(&params)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub detector: String,
    pub adversary_null: String,
    pub adversary_alt: String,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub family: String,
    pub tau: f64,
    pub type1: f64,
    pub type2: f64,
    pub risk: f64,
    pub ci: f64,
    pub trials: usize,
    pub seed: u64,
    pub discarded: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub rows: Vec<ExperimentRow>,
    /// Largest risk over the declared adversary grid, per family. This is a
    /// lower bound on the worst case over all monotone adversaries.
    pub max_risk_over_grid: Vec<(String, f64)>,
}

/// Calibrates (when asked), estimates the risk for every adversary pair and
/// family, and writes `<output>.csv` / `<output>.json` if an output is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut worst = Vec::new();
    for family in cfg.families() {
        let params = cfg.params_for(&family)?;
        let detector = detector_for(&cfg.detector, &family);
        let tau = match cfg.alpha().filter(|_| matches!(detector.threshold, ThresholdSource::Calibrated { .. })) {
            Some(alpha) => calibrate_threshold(&detector, &params, alpha, cfg.calibration_trials(), cfg.seed)?.tau,
            None => resolve_threshold(&detector, &params)?,
        };
        let cache = StatisticCache::default();
        let mut family_worst = f64::NEG_INFINITY;
        for pair in cfg.pairs() {
            let est = estimate_risk_cached(&detector, &params, &pair.null, &pair.alt, tau, cfg.trials, cfg.seed, Some(&cache))?;
            log::info!("{} / {} / {}: {est}", detector.kind, pair.null, pair.alt);
            family_worst = family_worst.max(est.risk);
            rows.push(ExperimentRow {
                detector: detector.kind.to_string(),
                adversary_null: pair.null.to_string(),
                adversary_alt: pair.alt.to_string(),
                n: params.n,
                p: params.p,
                q: params.q,
                family: family.to_string(),
                tau,
                type1: est.type1_rate,
                type2: est.type2_rate,
                risk: est.risk,
                ci: est.half_width_95,
                trials: cfg.trials,
                seed: cfg.seed,
                discarded: est.discarded_trials,
            });
        }
        worst.push((family.to_string(), family_worst));
    }
    let summary = ExperimentSummary { rows, max_risk_over_grid: worst };
    if let Some(out) = &cfg.output {
        write_outputs(&summary, out)?;
    }
    Ok(summary)
}

/// Clique SDP sweeps follow the family's clique size.
fn detector_for(spec: &DetectorSpec, family: &FamilySpec) -> DetectorSpec {
    let mut d = spec.clone();
    if let (DetectorKind::CliqueSdp { k }, FamilySpec::Clique { k: fk }) = (&mut d.kind, family) {
        *k = *fk;
    }
    d
}

pub fn write_outputs(summary: &ExperimentSummary, stem: &Path) -> Result<()> {
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut wtr = csv::Writer::from_path(stem.with_extension("csv")).map_err(|e| LabError::Io(e.to_string()))?;
    for row in &summary.rows {
        wtr.serialize(row).map_err(|e| LabError::Io(e.to_string()))?;
    }
    wtr.flush()?;
    std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(summary)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "model": {"n": 14, "p": 1.0, "q": 0.5, "family": {"kind": "clique", "k": 4}},
        "adversary_grid": [
            {"null": {"kind": "identity"}, "alt": {"kind": "identity"}},
            {"null": {"kind": "identity"}, "alt": {"kind": "alt_stripper"}}
        ],
        "detector": {"kind": "degree", "threshold": {"source": "calibrated", "alpha": 0.1}},
        "trials": 30,
        "seed": 4
    }"#;

    #[test]
    fn missing_trials_is_config_error() {
        let text = BASE.replace(r#""trials": 30,"#, "");
        assert!(matches!(ExperimentConfig::from_json(&text), Err(LabError::Config(_))));
    }

    #[test]
    fn rows_per_pair_and_family() {
        let mut cfg = ExperimentConfig::from_json(BASE).unwrap();
        cfg.sweep = vec![FamilySpec::Clique { k: 3 }, FamilySpec::Clique { k: 4 }, FamilySpec::Clique { k: 5 }];
        let s = run_experiment(&cfg).unwrap();
        assert_eq!(s.rows.len(), 6);
        assert_eq!(s.max_risk_over_grid.len(), 3);
        for (fam, worst) in &s.max_risk_over_grid {
            let rows: Vec<_> = s.rows.iter().filter(|r| &r.family == fam).collect();
            assert_eq!(*worst, rows.iter().map(|r| r.risk).fold(f64::NEG_INFINITY, f64::max));
        }
    }

    #[test]
    fn byte_identical_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::from_json(BASE).unwrap();
        cfg.output = Some(dir.path().join("a"));
        run_experiment(&cfg).unwrap();
        cfg.output = Some(dir.path().join("b"));
        run_experiment(&cfg).unwrap();
        let a = std::fs::read(dir.path().join("a.csv")).unwrap();
        let b = std::fs::read(dir.path().join("b.csv")).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("detector,adversary_null,adversary_alt,n,p,q,family,tau,type1,type2,risk,ci,trials,seed"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn worst_case_grows_with_grid() {
        let cfg = ExperimentConfig::from_json(BASE).unwrap();
        let mut small = cfg.clone();
        small.adversary_grid.truncate(1);
        let a = run_experiment(&small).unwrap().max_risk_over_grid[0].1;
        let b = run_experiment(&cfg).unwrap().max_risk_over_grid[0].1;
        assert!(b >= a);
    }

    #[test]
    fn rejects_null_only_adversary_on_alt() {
        let text = BASE.replace(
            r#"{"kind": "alt_stripper"}"#,
            r#"{"kind": "null_copy_planter", "gamma_family": {"kind": "clique", "k": 4}, "p": 1.0}"#,
        );
        assert!(matches!(ExperimentConfig::from_json(&text), Err(LabError::Config(_))));
    }
}
