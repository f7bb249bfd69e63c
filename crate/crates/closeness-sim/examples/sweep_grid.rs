//! Drive a parameter sweep from code instead of the CLI. Samples mode
//! only sizes the groups; simulate mode would also calibrate and run
//! each point (see the JSON schema in the README for file-driven runs).

use closeness_sim::dist::FamilyKind;
use closeness_sim::harness::{run_sweep, Model, SweepConfig, SweepMode};

fn main() -> closeness_sim::Result<()> {
    let config = SweepConfig {
        mode: SweepMode::Samples,
        models: vec![Model::LocalPrivate, Model::ShufflePrivate, Model::Central],
        family: FamilyKind::TwoSpike,
        ks: vec![10, 40, 160],
        alphas: vec![0.5],
        eps1s: vec![1.0],
        eps2s: vec![1.0, 0.5],
        ..SweepConfig::default()
    };

    // The grid nests model > k > alpha > eps1 > eps2 and skips corners
    // with eps2 > eps1.
    for row in run_sweep(&config, None)? {
        println!(
            "{:<16} k={:<4} eps=({}, {})  n1={:<8} n2={}",
            row.model.name(),
            row.k,
            row.eps1,
            row.eps2,
            row.n1,
            row.n2
        );
    }
    Ok(())
}
