//! Calibration records are keyed by the parameter point, not by how much
//! evidence went into them: a cached threshold is reused by any later
//! run at the same point, and a run at a different point misses cleanly.

use closeness_sim::dist::FamilyKind;
use closeness_sim::harness::{calibrate_or_load, load_record, ExperimentSpec, Model};

fn main() -> closeness_sim::Result<()> {
    let dir = std::env::temp_dir().join("closeness-sim-calibration-demo");
    let spec = ExperimentSpec {
        model: Model::ShufflePrivate,
        family: FamilyKind::TwoSpike,
        k: 8,
        alpha: 0.5,
        eps1: 1.0,
        eps2: 0.5,
        delta: 1e-4,
        trials: 600,
        seed: 51,
        constant_multiplier: 20.0,
        output_path: None,
    };

    let record = calibrate_or_load(&spec, 2.0 / 3.0, Some(&dir))?;
    println!(
        "point {} k={} -> threshold {:.4} ({} null trials)",
        spec.model, spec.k, record.constants["threshold"], record.trials
    );

    // Same point, different requested evidence: still a cache hit.
    let again = ExperimentSpec { trials: 5000, seed: 99, ..spec.clone() };
    let hit = calibrate_or_load(&again, 2.0 / 3.0, Some(&dir))?;
    println!("second call reused the record: {}", hit == record);

    // A different k is a different point.
    let other = ExperimentSpec { k: 9, ..spec };
    println!(
        "record for k=9 cached? {}",
        load_record(&dir, &other)?.is_some()
    );
    Ok(())
}
