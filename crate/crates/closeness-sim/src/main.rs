//! Command-line front end: simulate, calibrate, sweep, privacy-audit, and
//! samples subcommands over the library. Exit codes: 0 success, 1 a
//! statistical criterion failed, 2 configuration error, 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use closeness_sim::dist::{FamilyKind, Group};
use closeness_sim::error::{Error, Result};
use closeness_sim::harness::{
    build_config, calibrate, load_record, privacy_audit, report, run_experiment, run_sweep,
    store_record, ExperimentSpec, Model, ModelConstants, SweepConfig,
};

#[derive(Parser)]
#[command(
    name = "closeness-sim",
    version,
    about = "Two-sample closeness testing under heterogeneous differential privacy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo power experiment and persist a report.
    Simulate(SimulateArgs),
    /// Find a model's threshold or shift constants from null runs.
    Calibrate(CalibrateArgs),
    /// Evaluate a parameter grid described by a JSON config file.
    Sweep(SweepArgs),
    /// Print the certified per-group privacy of a configuration.
    PrivacyAudit(PointArgs),
    /// Print the closed-form sample sizes, without simulating.
    Samples(PointArgs),
}

/// One parameter point; shared by every subcommand.
#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    model: Model,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    eps1: f64,
    #[arg(long)]
    eps2: f64,
    /// Approximate-DP slack; only the shuffle models consume it.
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    #[arg(long, default_value = "two-spike")]
    family: FamilyKind,
    /// Scale on the closed-form sample sizes.
    #[arg(long, default_value_t = 1.0)]
    multiplier: f64,
}

impl PointArgs {
    fn spec(&self, trials: usize, seed: u64, out: Option<PathBuf>) -> ExperimentSpec {
        ExperimentSpec {
            model: self.model,
            family: self.family,
            k: self.k,
            alpha: self.alpha,
            eps1: self.eps1,
            eps2: self.eps2,
            delta: self.delta,
            trials,
            seed,
            constant_multiplier: self.multiplier,
            output_path: out,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Where the JSON report goes.
    #[arg(long)]
    out: PathBuf,
    /// Also append a summary row to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Calibration records live here; simulate only reads, never writes.
    #[arg(long, default_value = "calibrations")]
    cache_dir: PathBuf,
    /// Explicit threshold, bypassing the calibration cache.
    #[arg(long)]
    threshold: Option<f64>,
    /// Explicit central-model shift constants, bypassing the cache.
    #[arg(long, requires = "c2")]
    c1: Option<f64>,
    #[arg(long, requires = "c1")]
    c2: Option<f64>,
    /// Trial-level parallelism (defaults to the rayon global pool).
    #[arg(long)]
    jobs: Option<usize>,
    /// Keep per-trial verdicts in the JSON report.
    #[arg(long)]
    verdicts: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Null trials backing the quantile estimate (at least 500).
    #[arg(long)]
    trials: usize,
    /// Null quantile to record (the central model uses it for c1).
    #[arg(long, default_value_t = 2.0 / 3.0)]
    quantile: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "calibrations")]
    cache_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep description; see the library docs for the schema.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
}

fn resolve_constants(args: &SimulateArgs, spec: &ExperimentSpec) -> Result<ModelConstants> {
    if args.threshold.is_some() || args.c1.is_some() {
        return Ok(ModelConstants {
            threshold: args.threshold,
            c1: args.c1,
            c2: args.c2,
        });
    }
    if !spec.model.needs_calibration() {
        return Ok(ModelConstants::default());
    }
    match load_record(&args.cache_dir, spec)? {
        Some(record) => Ok(ModelConstants::from_record(&record)),
        None => Err(Error::CalibrationRequired(format!(
            "no cached record for this parameter point in {:?}; run `calibrate` with the same \
             parameters first, or pass --threshold (or --c1/--c2) explicitly",
            args.cache_dir
        ))),
    }
}

fn simulate(args: SimulateArgs) -> Result<u8> {
    let spec = args
        .point
        .spec(args.trials, args.seed, Some(args.out.clone()));
    let constants = resolve_constants(&args, &spec)?;
    let report_data = run_experiment(&spec, &constants, args.jobs, args.verdicts)?;
    report::write_json_report(&args.out, &report_data)?;
    if let Some(csv) = &args.csv {
        report::append_csv_row(csv, &report_data)?;
    }
    println!(
        "model {} k={} alpha={} eps=({}, {}) n=({}, {})",
        spec.model, spec.k, spec.alpha, spec.eps1, spec.eps2, report_data.n1, report_data.n2
    );
    println!(
        "accept rate (null) {:.4} +/- {:.4}   reject rate (far) {:.4} +/- {:.4}",
        report_data.accept_rate_null,
        report_data.se_null,
        report_data.reject_rate_far,
        report_data.se_far
    );
    println!("report written to {}", args.out.display());
    if report_data.meets_success_criterion() {
        Ok(0)
    } else {
        eprintln!("statistical criterion failed: a rate fell below 2/3 - 2*SE");
        Ok(1)
    }
}

fn run_calibrate(args: CalibrateArgs) -> Result<u8> {
    let spec = args.point.spec(args.trials, args.seed, None);
    let record = calibrate(&spec, args.quantile)?;
    let path = store_record(&args.cache_dir, &record)?;
    println!("{}", serde_json::to_string_pretty(&record)?);
    println!("stored at {}", path.display());
    Ok(0)
}

fn sweep(args: SweepArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&args.config)?;
    let config: SweepConfig =
        serde_json::from_str(&text).map_err(|e| Error::param("config", e.to_string()))?;
    let rows = run_sweep(&config, args.jobs)?;
    for row in &rows {
        let rates = match (row.accept_rate_null, row.reject_rate_far) {
            (Some(a), Some(r)) => format!("  accept_null={a:.4} reject_far={r:.4}"),
            _ => String::new(),
        };
        println!(
            "{} {} k={} alpha={} eps=({}, {}) n1={} n2={}{rates}",
            row.model, row.family.name(), row.k, row.alpha, row.eps1, row.eps2, row.n1, row.n2
        );
    }
    Ok(0)
}

fn audit(args: PointArgs) -> Result<u8> {
    let spec = args.spec(1, 0, None);
    // The audit inspects mechanism parameters, never the decision
    // constants, so placeholder constants are fine here.
    let placeholder = ModelConstants {
        threshold: Some(0.0),
        c1: Some(0.0),
        c2: Some(0.0),
    };
    let config = build_config(&spec, &placeholder)?;
    let report = privacy_audit(&config)?;
    for g in &report.groups {
        println!(
            "group {}: target eps={} certified eps={:.6} delta={} {}  ({})",
            match g.group {
                Group::One => 1,
                Group::Two => 2,
            },
            g.eps_target,
            g.eps_certified,
            g.delta,
            if g.pass { "PASS" } else { "FAIL" },
            g.detail
        );
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn samples(args: PointArgs) -> Result<u8> {
    let spec = args.spec(1, 0, None);
    spec.validate()?;
    let (n1, n2) = closeness_sim::harness::required_samples(
        spec.model, spec.k, spec.alpha, spec.eps1, spec.eps2, spec.delta, spec.constant_multiplier,
    )?;
    println!(
        "model {} k={} alpha={} eps=({}, {}) delta={} multiplier={}",
        spec.model, spec.k, spec.alpha, spec.eps1, spec.eps2, spec.delta, spec.constant_multiplier
    );
    println!("n1={n1} n2={n2}");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Calibrate(args) => run_calibrate(args),
        Command::Sweep(args) => sweep(args),
        Command::PrivacyAudit(args) => audit(args),
        Command::Samples(args) => samples(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
