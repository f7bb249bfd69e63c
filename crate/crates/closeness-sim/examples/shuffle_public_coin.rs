//! Public-coin shuffle test: shared randomness compresses the domain
//! before shuffling, trading per-round power for smaller groups, with a
//! majority vote over fresh partitions on top.

use closeness_sim::dist::FamilyKind;
use closeness_sim::harness::{calibrate, run_experiment, ExperimentSpec, Model, ModelConstants};
use closeness_sim::shuffle::{compressed_domain_size, poisson_mu};

fn main() -> closeness_sim::Result<()> {
    let spec = ExperimentSpec {
        model: Model::ShufflePublic,
        family: FamilyKind::TwoSpike,
        k: 24,
        alpha: 0.5,
        eps1: 1.0,
        eps2: 0.5,
        delta: 1e-4,
        trials: 800,
        seed: 31,
        constant_multiplier: 20.0,
        output_path: None,
    };
    let mu1 = poisson_mu(spec.eps1, spec.delta, 1.0)?;
    println!(
        "k={} compressed to {} parts at mu1={mu1}",
        spec.k,
        compressed_domain_size(spec.k, spec.alpha, mu1)
    );

    let record = calibrate(&spec, 2.0 / 3.0)?;
    println!("calibrated per-round threshold {:.4}", record.constants["threshold"]);

    let run_spec = ExperimentSpec { trials: 200, seed: 32, ..spec };
    let report = run_experiment(&run_spec, &ModelConstants::from_record(&record), None, false)?;
    println!(
        "n=({}, {})  accept (null) {:.4}  reject (far) {:.4}",
        report.n1, report.n2, report.accept_rate_null, report.reject_rate_far
    );
    Ok(())
}
