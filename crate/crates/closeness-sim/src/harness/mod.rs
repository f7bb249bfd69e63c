//! Experiment orchestration: sample-size formulas, null-quantile
//! calibration, Monte Carlo power runs with reproducible per-trial RNG
//! substreams, privacy audits, and JSON/CSV persistence.
//!
//! The split between calibration and experiments is deliberate. Analyses
//! leave leading constants unstated, so thresholds and shift constants are
//! found once per parameter point from null runs, cached as
//! [`CalibrationRecord`]s, and then *referenced* by power experiments;
//! `run_experiment` never recalibrates silently.

pub mod audit;
pub mod calibrate;
pub mod report;
pub mod samples;
pub mod sweep;

pub use audit::{privacy_audit, AuditReport, GroupAudit};
pub use calibrate::{calibrate, calibrate_or_load, load_record, store_record, CalibrationRecord};
pub use report::{append_csv_row, csv_row, write_json_report, CSV_HEADER};
pub use samples::required_samples;
pub use sweep::{run_sweep, SweepConfig, SweepMode, SweepRow};

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::central::CentralConfig;
use crate::dist::{make_family, FamilyKind, TestVerdict};
use crate::error::{Error, Result};
use crate::hadamard::LocalConfig;
use crate::rng::substream;
use crate::shuffle::{compressed_domain_size, poisson_mu, ShuffleConfig};

/// The five protocol variants the harness can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    LocalPrivate,
    LocalPublic,
    ShufflePrivate,
    ShufflePublic,
    Central,
}

impl Model {
    pub const ALL: [Model; 5] = [
        Model::LocalPrivate,
        Model::LocalPublic,
        Model::ShufflePrivate,
        Model::ShufflePublic,
        Model::Central,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::LocalPrivate => "local-private",
            Model::LocalPublic => "local-public",
            Model::ShufflePrivate => "shuffle-private",
            Model::ShufflePublic => "shuffle-public",
            Model::Central => "central",
        }
    }

    /// Shuffle variants consume the approximate-DP slack `delta`.
    pub fn needs_delta(self) -> bool {
        matches!(self, Model::ShufflePrivate | Model::ShufflePublic)
    }

    /// Models whose accept threshold has no closed form and must come from
    /// a calibration record (or an explicit override).
    pub fn needs_calibration(self) -> bool {
        matches!(
            self,
            Model::ShufflePrivate | Model::ShufflePublic | Model::Central
        )
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::param(
                    "model",
                    format!(
                        "unknown model {s:?}; expected one of {}",
                        Model::ALL.map(Model::name).join(", ")
                    ),
                )
            })
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Full description of one Monte Carlo power experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: Model,
    pub family: FamilyKind,
    pub k: usize,
    pub alpha: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Scales the closed-form sample sizes; found by calibration sweeps.
    pub constant_multiplier: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials", "need at least one trial"));
        }
        if !(self.constant_multiplier > 0.0 && self.constant_multiplier.is_finite()) {
            return Err(Error::param(
                "multiplier",
                format!("must be positive, got {}", self.constant_multiplier),
            ));
        }
        samples::validate_common(self.k, self.alpha, self.eps1, self.eps2)?;
        if self.model.needs_delta() && !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param(
                "delta",
                format!("must be in (0, 1) for shuffle models, got {}", self.delta),
            ));
        }
        Ok(())
    }
}

/// Constants that close the gap between the asymptotic analysis and a
/// runnable test: a verdict threshold for the local and shuffle models, the
/// shift pair `(c1, c2)` for the central model. Resolved from a calibration
/// record or explicit overrides before an experiment starts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
}

impl ModelConstants {
    pub fn from_record(record: &CalibrationRecord) -> Self {
        ModelConstants {
            threshold: record.constants.get("threshold").copied(),
            c1: record.constants.get("c1").copied(),
            c2: record.constants.get("c2").copied(),
        }
    }
}

/// Outcome of a power experiment, persisted as one JSON document and one
/// CSV summary row. Two reports from identical specs are byte-identical
/// apart from `wall_time_seconds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub spec: ExperimentSpec,
    /// Sample sizes actually consumed (after any coupling adjustment).
    pub n1: u64,
    pub n2: u64,
    pub accept_rate_null: f64,
    pub reject_rate_far: f64,
    /// Binomial standard errors for the two rates.
    pub se_null: f64,
    pub se_far: f64,
    pub calibrated_constants: BTreeMap<String, f64>,
    /// The certified per-group privacy backing this run.
    pub audit: AuditReport,
    pub wall_time_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdicts_null: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdicts_far: Option<Vec<bool>>,
}

impl TrialReport {
    /// Both rates clear the 2/3 success criterion up to twice their
    /// standard error.
    pub fn meets_success_criterion(&self) -> bool {
        self.accept_rate_null >= 2.0 / 3.0 - 2.0 * self.se_null
            && self.reject_rate_far >= 2.0 / 3.0 - 2.0 * self.se_far
    }
}

fn binomial_se(rate: f64, trials: usize) -> f64 {
    (rate * (1.0 - rate) / trials as f64).sqrt()
}

/// Per-model protocol configuration assembled from a spec, the closed-form
/// sample sizes, and resolved constants.
#[derive(Debug, Clone)]
pub enum ProtocolConfig {
    LocalPrivate(LocalConfig),
    LocalPublic(LocalConfig),
    ShufflePrivate(ShuffleConfig),
    ShufflePublic(ShuffleConfig),
    Central(CentralConfig),
}

impl ProtocolConfig {
    pub fn model(&self) -> Model {
        match self {
            ProtocolConfig::LocalPrivate(_) => Model::LocalPrivate,
            ProtocolConfig::LocalPublic(_) => Model::LocalPublic,
            ProtocolConfig::ShufflePrivate(_) => Model::ShufflePrivate,
            ProtocolConfig::ShufflePublic(_) => Model::ShufflePublic,
            ProtocolConfig::Central(_) => Model::Central,
        }
    }

    /// Sample sizes a single trial consumes per group (for the public-coin
    /// models these are per repetition).
    pub fn group_sizes(&self) -> Result<(u64, u64)> {
        match self {
            ProtocolConfig::LocalPrivate(c) | ProtocolConfig::LocalPublic(c) => {
                Ok((c.n1 as u64, c.n2 as u64))
            }
            ProtocolConfig::ShufflePrivate(c) | ProtocolConfig::ShufflePublic(c) => {
                let m = c.mixture()?;
                Ok((m.n1, m.n2))
            }
            ProtocolConfig::Central(c) => Ok((c.n1, c.n2)),
        }
    }
}

/// Build the runnable configuration for `spec` with the given constants.
/// Models without a closed-form threshold refuse to run uncalibrated.
pub fn build_config(spec: &ExperimentSpec, constants: &ModelConstants) -> Result<ProtocolConfig> {
    spec.validate()?;
    let (n1, n2) = required_samples(
        spec.model,
        spec.k,
        spec.alpha,
        spec.eps1,
        spec.eps2,
        spec.delta,
        spec.constant_multiplier,
    )?;
    match spec.model {
        Model::LocalPrivate => {
            let mut c = LocalConfig::new(
                spec.k, spec.alpha, spec.eps1, spec.eps2, n1 as usize, n2 as usize,
            );
            c.threshold = constants.threshold;
            Ok(ProtocolConfig::LocalPrivate(c))
        }
        Model::LocalPublic => {
            let mut c = LocalConfig::new(
                spec.k, spec.alpha, spec.eps1, spec.eps2, n1 as usize, n2 as usize,
            );
            c.threshold = constants.threshold;
            // Constant-size compressed domain; the per-group formula
            // already reflects the k'/k distance tradeoff.
            c.compressed_size = 2;
            Ok(ProtocolConfig::LocalPublic(c))
        }
        Model::ShufflePrivate | Model::ShufflePublic => {
            let threshold = constants.threshold.ok_or_else(|| {
                Error::CalibrationRequired(format!(
                    "model {} has no closed-form threshold; run `calibrate` first or pass --threshold",
                    spec.model
                ))
            })?;
            let mut c = ShuffleConfig::new(
                spec.k, spec.alpha, spec.eps1, spec.eps2, spec.delta, n1, threshold,
            );
            if spec.model == Model::ShufflePublic {
                let mu1 = poisson_mu(spec.eps1, spec.delta, 1.0)?;
                c.compressed_size = compressed_domain_size(spec.k, spec.alpha, mu1);
                Ok(ProtocolConfig::ShufflePublic(c))
            } else {
                Ok(ProtocolConfig::ShufflePrivate(c))
            }
        }
        Model::Central => {
            let (c1, c2) = match (constants.c1, constants.c2) {
                (Some(c1), Some(c2)) => (c1, c2),
                _ => {
                    return Err(Error::CalibrationRequired(format!(
                        "model {} needs shift constants; run `calibrate` first or pass --c1/--c2",
                        spec.model
                    )))
                }
            };
            Ok(ProtocolConfig::Central(CentralConfig::new(
                spec.k, spec.alpha, spec.eps1, spec.eps2, n1, n2, c1, c2,
            )))
        }
    }
}

/// Run one verdict trial of the configured protocol.
pub fn run_trial<R: rand::Rng>(
    config: &ProtocolConfig,
    p: &crate::dist::Distribution,
    q: &crate::dist::Distribution,
    rng: &mut R,
) -> Result<TestVerdict> {
    match config {
        ProtocolConfig::LocalPrivate(c) => crate::hadamard::run_local_private_coin(c, p, q, rng),
        ProtocolConfig::LocalPublic(c) => crate::hadamard::run_local_public_coin(c, p, q, rng),
        ProtocolConfig::ShufflePrivate(c) => crate::shuffle::run_shuffle_private_coin(c, p, q, rng),
        ProtocolConfig::ShufflePublic(c) => crate::shuffle::run_shuffle_public_coin(c, p, q, rng),
        ProtocolConfig::Central(c) => crate::central::run_central(c, p, q, rng),
    }
}

/// Monte Carlo power experiment: `trials` independent null trials (both
/// groups sample `p`) and far trials (groups sample `p` and `q` with
/// `TV = alpha`). Trial `i` uses RNG substreams `2i` and `2i + 1` of the
/// spec seed, so results do not depend on `jobs` or scheduling.
pub fn run_experiment(
    spec: &ExperimentSpec,
    constants: &ModelConstants,
    jobs: Option<usize>,
    keep_verdicts: bool,
) -> Result<TrialReport> {
    let started = Instant::now();
    let config = build_config(spec, constants)?;
    let audit = privacy_audit(&config)?;
    if !audit.pass {
        return Err(Error::AuditFailed(audit.first_failure()));
    }
    let (p, q) = make_family(spec.family, spec.k, spec.alpha)?;

    let run_all = || -> Result<Vec<(bool, bool)>> {
        (0..spec.trials as u64)
            .into_par_iter()
            .map(|i| {
                let mut null_rng = substream(spec.seed, 2 * i);
                let mut far_rng = substream(spec.seed, 2 * i + 1);
                let null = run_trial(&config, &p, &p, &mut null_rng)?;
                let far = run_trial(&config, &p, &q, &mut far_rng)?;
                Ok((null == TestVerdict::Accept, far == TestVerdict::Reject))
            })
            .collect()
    };
    let outcomes = match jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::param("jobs", e.to_string()))?;
            pool.install(run_all)?
        }
        None => run_all()?,
    };

    let trials = spec.trials;
    let accepts = outcomes.iter().filter(|o| o.0).count();
    let rejects = outcomes.iter().filter(|o| o.1).count();
    let accept_rate_null = accepts as f64 / trials as f64;
    let reject_rate_far = rejects as f64 / trials as f64;
    let (n1, n2) = config.group_sizes()?;

    let mut calibrated_constants = BTreeMap::new();
    calibrated_constants.insert("multiplier".to_string(), spec.constant_multiplier);
    if let Some(t) = constants.threshold {
        calibrated_constants.insert("threshold".to_string(), t);
    }
    if let Some(c1) = constants.c1 {
        calibrated_constants.insert("c1".to_string(), c1);
    }
    if let Some(c2) = constants.c2 {
        calibrated_constants.insert("c2".to_string(), c2);
    }

    Ok(TrialReport {
        spec: spec.clone(),
        n1,
        n2,
        accept_rate_null,
        reject_rate_far,
        se_null: binomial_se(accept_rate_null, trials),
        se_far: binomial_se(reject_rate_far, trials),
        calibrated_constants,
        audit,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        verdicts_null: keep_verdicts.then(|| outcomes.iter().map(|o| o.0).collect()),
        verdicts_far: keep_verdicts.then(|| outcomes.iter().map(|o| o.1).collect()),
    })
}
