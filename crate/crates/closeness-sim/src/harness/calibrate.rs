//! Null-quantile calibration of the constants the analyses leave open.
//!
//! For the threshold models the calibrated constant is an empirical null
//! quantile of the decision statistic at the exact experiment parameters.
//! For the central model two constants are found: `c1` recenters the
//! statistic (a null quantile of `Z / sqrt(n1)`) and `c2` is the smallest
//! widening, in steps of 1/4, that pushes the expected null reject
//! probability of the sigmoid verdict below 1/3.
//!
//! Records are cached one file per parameter point (model, family, k,
//! alpha, eps1, eps2, delta, multiplier); the evidence backing the record
//! (trials, seed, quantile) is stored inside it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_config, ExperimentSpec, Model, ModelConstants, ProtocolConfig};
use crate::central::{central_trial_statistic, sigmoid};
use crate::compression::random_partition;
use crate::dist::{make_family, Distribution, FamilyKind};
use crate::error::{Error, Result};
use crate::hadamard::{local_compressed_trial_statistic, local_trial_statistic};
use crate::rng::substream;
use crate::shuffle::{shuffle_compressed_trial_statistic, shuffle_trial_statistic};

/// Calibrated constants for one parameter point, with the null-run evidence
/// that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub model: Model,
    pub family: FamilyKind,
    pub k: usize,
    pub alpha: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
    pub multiplier: f64,
    /// Group sizes the calibration ran at (after coupling adjustment).
    pub n1: u64,
    pub n2: u64,
    pub quantile: f64,
    pub trials: usize,
    pub seed: u64,
    pub constants: BTreeMap<String, f64>,
}

impl CalibrationRecord {
    pub fn matches(&self, spec: &ExperimentSpec) -> bool {
        self.model == spec.model
            && self.family == spec.family
            && self.k == spec.k
            && self.alpha.to_bits() == spec.alpha.to_bits()
            && self.eps1.to_bits() == spec.eps1.to_bits()
            && self.eps2.to_bits() == spec.eps2.to_bits()
            && (self.delta.to_bits() == spec.delta.to_bits() || !spec.model.needs_delta())
            && self.multiplier.to_bits() == spec.constant_multiplier.to_bits()
    }

    fn file_name(&self) -> String {
        point_file_name(
            self.model,
            self.family,
            self.k,
            self.alpha,
            self.eps1,
            self.eps2,
            self.delta,
            self.multiplier,
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn point_file_name(
    model: Model,
    family: FamilyKind,
    k: usize,
    alpha: f64,
    eps1: f64,
    eps2: f64,
    delta: f64,
    multiplier: f64,
) -> String {
    format!(
        "{}-{}-k{}-a{}-e1-{}-e2-{}-d{}-m{}.json",
        model,
        family.name(),
        k,
        alpha,
        eps1,
        eps2,
        delta,
        multiplier
    )
}

/// Cache file a record for `spec` lives at under `dir`.
pub fn record_path(dir: &Path, spec: &ExperimentSpec) -> PathBuf {
    dir.join(point_file_name(
        spec.model,
        spec.family,
        spec.k,
        spec.alpha,
        spec.eps1,
        spec.eps2,
        spec.delta,
        spec.constant_multiplier,
    ))
}

/// Draw one null statistic of the configured protocol (both groups sample
/// `p`). The public-coin models draw a fresh shared partition first, so the
/// calibrated threshold refers to the per-repetition compressed statistic.
fn null_statistic<R: rand::Rng>(
    config: &ProtocolConfig,
    p: &Distribution,
    rng: &mut R,
) -> Result<f64> {
    match config {
        ProtocolConfig::LocalPrivate(c) => local_trial_statistic(c, p, p, rng),
        ProtocolConfig::LocalPublic(c) => {
            let partition = random_partition(c.k, c.compressed_size, rng)?;
            local_compressed_trial_statistic(c, p, p, &partition, rng)
        }
        ProtocolConfig::ShufflePrivate(c) => shuffle_trial_statistic(c, p, p, rng),
        ProtocolConfig::ShufflePublic(c) => {
            let partition = random_partition(c.k, c.compressed_size, rng)?;
            shuffle_compressed_trial_statistic(c, p, p, &partition, rng)
        }
        ProtocolConfig::Central(c) => central_trial_statistic(c, p, p, rng).map(|z| z as f64),
    }
}

/// Empirical `q`-quantile: smallest observed value with at least a `q`
/// fraction of the sample at or below it.
fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((sorted.len() as f64 * q).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Run `spec.trials` null trials and record the requested quantile as the
/// model's constant(s). Deterministic given `spec.seed`.
pub fn calibrate(spec: &ExperimentSpec, quantile: f64) -> Result<CalibrationRecord> {
    spec.validate()?;
    if !spec.model.needs_calibration() {
        return Err(Error::param(
            "model",
            format!("{} uses a fixed threshold and has no calibratable constant", spec.model),
        ));
    }
    if spec.trials < 500 {
        return Err(Error::param(
            "trials",
            format!("calibration needs at least 500 null trials, got {}", spec.trials),
        ));
    }
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(Error::param("quantile", format!("must be in (0, 1), got {quantile}")));
    }
    // Placeholder constants: the statistic paths below never read them.
    let placeholder = ModelConstants {
        threshold: Some(0.0),
        c1: Some(0.0),
        c2: Some(0.0),
    };
    let config = build_config(spec, &placeholder)?;
    let (p, _) = make_family(spec.family, spec.k, spec.alpha)?;
    let zs: Vec<f64> = (0..spec.trials as u64)
        .into_par_iter()
        .map(|i| null_statistic(&config, &p, &mut substream(spec.seed, i)))
        .collect::<Result<_>>()?;
    let mut sorted = zs;
    sorted.sort_by(f64::total_cmp);

    let mut constants = BTreeMap::new();
    match &config {
        ProtocolConfig::Central(c) => {
            let scale = (c.n1 as f64).sqrt();
            let scaled: Vec<f64> = sorted.iter().map(|z| z / scale).collect();
            let c1 = empirical_quantile(&scaled, quantile).max(0.0);
            let c2 = solve_c2(&sorted, c.n1, c.eps1, c1)?;
            constants.insert("c1".to_string(), c1);
            constants.insert("c2".to_string(), c2);
        }
        _ => {
            constants.insert("threshold".to_string(), empirical_quantile(&sorted, quantile));
        }
    }
    let (n1, n2) = config.group_sizes()?;
    Ok(CalibrationRecord {
        model: spec.model,
        family: spec.family,
        k: spec.k,
        alpha: spec.alpha,
        eps1: spec.eps1,
        eps2: spec.eps2,
        delta: spec.delta,
        multiplier: spec.constant_multiplier,
        n1,
        n2,
        quantile,
        trials: spec.trials,
        seed: spec.seed,
        constants,
    })
}

/// Smallest `c2` (in steps of 1/4) whose expected null reject probability,
/// averaged over the observed null statistics, is at most 1/3.
fn solve_c2(null_zs: &[f64], n1: u64, eps1: f64, c1: f64) -> Result<f64> {
    let shift = c1 * (n1 as f64).sqrt();
    let reject_rate = |c2: f64| {
        null_zs
            .iter()
            .map(|z| sigmoid(eps1 * (z - shift - c2 / eps1) / 2.0))
            .sum::<f64>()
            / null_zs.len() as f64
    };
    let mut c2 = 0.0;
    for _ in 0..100_000 {
        if reject_rate(c2) <= 1.0 / 3.0 {
            return Ok(c2);
        }
        c2 += 0.25;
    }
    Err(Error::param(
        "c2",
        "null reject rate stayed above 1/3; statistic scale looks wrong",
    ))
}

/// Persist `record` under `dir` (created if missing), overwriting any
/// earlier record for the same parameter point.
pub fn store_record(dir: &Path, record: &CalibrationRecord) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(record.file_name());
    fs::write(&path, serde_json::to_string_pretty(record)? + "\n")?;
    Ok(path)
}

/// Load the cached record for `spec`'s parameter point, if one exists and
/// actually matches (a stale file for a different point is ignored).
pub fn load_record(dir: &Path, spec: &ExperimentSpec) -> Result<Option<CalibrationRecord>> {
    let path = record_path(dir, spec);
    if !path.exists() {
        return Ok(None);
    }
    let record: CalibrationRecord = serde_json::from_str(&fs::read_to_string(&path)?)?;
    Ok(record.matches(spec).then_some(record))
}

/// Cached calibration: return the stored record for this point if present,
/// otherwise calibrate and (when a cache directory is given) store it.
pub fn calibrate_or_load(
    spec: &ExperimentSpec,
    quantile: f64,
    dir: Option<&Path>,
) -> Result<CalibrationRecord> {
    if let Some(d) = dir {
        if let Some(record) = load_record(d, spec)? {
            return Ok(record);
        }
    }
    let record = calibrate(spec, quantile)?;
    if let Some(d) = dir {
        store_record(d, &record)?;
    }
    Ok(record)
}
