//! Two-sample closeness testing under heterogeneous differential privacy.
//!
//! Given sample access to two unknown distributions `p` and `q` over `[k]`,
//! a closeness tester decides between `p = q` and `TV(p, q) > alpha`, each
//! with probability at least 2/3. Here the two sample sets belong to two
//! user groups with *different* privacy demands: group 1 (samples from `p`)
//! is protected at `eps1`, group 2 (samples from `q`) at `eps2 <= eps1`.
//!
//! Three trust models are implemented end to end:
//!
//! * **Local**: every user randomizes their own report via Hadamard response
//!   ([`hadamard`]), with private-coin and public-coin (domain compression,
//!   [`compression`]) variants.
//! * **Shuffle**: per-group shufflers release anonymized histograms padded
//!   with Poisson decoys ([`shuffle`]); the analyzer runs an uneven-sample
//!   chi-squared style tester on two noisy mixtures.
//! * **Central**: a curator computes a low-sensitivity statistic over raw
//!   histograms and randomizes the verdict through a sigmoid ([`central`]);
//!   group 2's stronger demand is met by amplification via subsampling.
//!
//! The [`harness`] module adds sample-size formulas, Monte Carlo calibration,
//! experiment execution with reproducible per-trial RNG substreams, privacy
//! audits, and JSON/CSV reporting. The `closeness-sim` binary exposes all of
//! it behind `simulate`, `calibrate`, `sweep`, `privacy-audit`, and `samples`
//! subcommands; the `examples/` directory has one runnable program per
//! capability.

pub mod central;
pub mod compression;
pub mod dist;
pub mod error;
pub mod hadamard;
pub mod harness;
pub mod rng;
pub mod shuffle;

pub use central::{amplified_epsilon, CentralConfig};
pub use compression::Partition;
pub use dist::{Distribution, Group, Histogram, SampleSet, TestVerdict};
pub use error::{Error, Result};
pub use hadamard::{HadamardDesign, LocalConfig};
pub use harness::{ExperimentSpec, Model, TrialReport};
pub use shuffle::{MixtureParams, ShuffleConfig};
