//! Parameter grid sweeps driven by a JSON config file.
//!
//! Two modes: `samples` evaluates the closed-form sample sizes only (fast,
//! no randomness), `simulate` additionally runs the Monte Carlo experiment
//! at every grid point, calibrating through the cache as needed. Grid
//! points with `eps2 > eps1` are skipped rather than rejected, so full
//! cross products stay convenient.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{
    calibrate::calibrate_or_load, report, required_samples, ExperimentSpec, Model,
    ModelConstants, TrialReport,
};
use crate::dist::FamilyKind;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    #[default]
    Samples,
    Simulate,
}

/// JSON-file schema for a sweep. Only `ks` is required; everything else
/// has a sensible default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_models")]
    pub models: Vec<Model>,
    #[serde(default = "default_family")]
    pub family: FamilyKind,
    pub ks: Vec<usize>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps1s: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps2s: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_multiplier")]
    pub multiplier: f64,
    #[serde(default)]
    pub mode: SweepMode,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_quantile")]
    pub quantile: f64,
    #[serde(default)]
    pub csv_out: Option<PathBuf>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            models: default_models(),
            family: default_family(),
            ks: Vec::new(),
            alphas: default_alphas(),
            eps1s: default_eps(),
            eps2s: default_eps(),
            delta: default_delta(),
            multiplier: default_multiplier(),
            mode: SweepMode::default(),
            trials: default_trials(),
            seed: 0,
            quantile: default_quantile(),
            csv_out: None,
            cache_dir: None,
        }
    }
}

fn default_models() -> Vec<Model> {
    Model::ALL.to_vec()
}
fn default_family() -> FamilyKind {
    FamilyKind::TwoSpike
}
fn default_alphas() -> Vec<f64> {
    vec![0.5]
}
fn default_eps() -> Vec<f64> {
    vec![1.0]
}
fn default_delta() -> f64 {
    1e-6
}
fn default_multiplier() -> f64 {
    1.0
}
fn default_trials() -> usize {
    500
}
fn default_quantile() -> f64 {
    2.0 / 3.0
}

/// One grid point's outcome. The rate fields stay `None` in samples mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: Model,
    pub family: FamilyKind,
    pub k: usize,
    pub alpha: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
    pub n1: u64,
    pub n2: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accept_rate_null: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reject_rate_far: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se_null: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se_far: Option<f64>,
}

impl SweepRow {
    fn from_report(report: &TrialReport) -> Self {
        let s = &report.spec;
        SweepRow {
            model: s.model,
            family: s.family,
            k: s.k,
            alpha: s.alpha,
            eps1: s.eps1,
            eps2: s.eps2,
            delta: s.delta,
            n1: report.n1,
            n2: report.n2,
            accept_rate_null: Some(report.accept_rate_null),
            reject_rate_far: Some(report.reject_rate_far),
            se_null: Some(report.se_null),
            se_far: Some(report.se_far),
        }
    }
}

impl SweepConfig {
    fn spec_at(&self, model: Model, k: usize, alpha: f64, eps1: f64, eps2: f64) -> ExperimentSpec {
        ExperimentSpec {
            model,
            family: self.family,
            k,
            alpha,
            eps1,
            eps2,
            delta: self.delta,
            trials: self.trials,
            seed: self.seed,
            constant_multiplier: self.multiplier,
            output_path: None,
        }
    }

    /// Grid points in a fixed nesting order (model, k, alpha, eps1, eps2),
    /// with the infeasible `eps2 > eps1` corner dropped.
    fn grid(&self) -> Vec<(Model, usize, f64, f64, f64)> {
        let mut points = Vec::new();
        for &model in &self.models {
            for &k in &self.ks {
                for &alpha in &self.alphas {
                    for &eps1 in &self.eps1s {
                        for &eps2 in &self.eps2s {
                            if eps2 <= eps1 {
                                points.push((model, k, alpha, eps1, eps2));
                            }
                        }
                    }
                }
            }
        }
        points
    }
}

/// Run the sweep; rows come back in grid order. In simulate mode each
/// completed point is also appended to `csv_out` when that is set.
pub fn run_sweep(config: &SweepConfig, jobs: Option<usize>) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for (model, k, alpha, eps1, eps2) in config.grid() {
        let spec = config.spec_at(model, k, alpha, eps1, eps2);
        match config.mode {
            SweepMode::Samples => {
                let (n1, n2) = required_samples(
                    model,
                    k,
                    alpha,
                    eps1,
                    eps2,
                    config.delta,
                    config.multiplier,
                )?;
                rows.push(SweepRow {
                    model,
                    family: config.family,
                    k,
                    alpha,
                    eps1,
                    eps2,
                    delta: config.delta,
                    n1,
                    n2,
                    accept_rate_null: None,
                    reject_rate_far: None,
                    se_null: None,
                    se_far: None,
                });
            }
            SweepMode::Simulate => {
                let constants = if model.needs_calibration() {
                    let mut calib_spec = spec.clone();
                    calib_spec.trials = spec.trials.max(500);
                    let record = calibrate_or_load(
                        &calib_spec,
                        config.quantile,
                        config.cache_dir.as_deref(),
                    )?;
                    ModelConstants::from_record(&record)
                } else {
                    ModelConstants::default()
                };
                let report = super::run_experiment(&spec, &constants, jobs, false)?;
                if let Some(csv) = &config.csv_out {
                    report::append_csv_row(csv, &report)?;
                }
                rows.push(SweepRow::from_report(&report));
            }
        }
    }
    Ok(rows)
}
