//! Result persistence: one pretty JSON document per experiment for
//! provenance, plus an appendable CSV summary row for sweeps and plotting.
//! Number formatting uses the shortest round-trip representation, so
//! identical runs produce byte-identical rows.

use std::fs::OpenOptions;
use std::path::Path;

use super::TrialReport;
use crate::error::Result;

pub const CSV_HEADER: [&str; 13] = [
    "model",
    "k",
    "alpha",
    "eps1",
    "eps2",
    "delta",
    "n1",
    "n2",
    "accept_rate_null",
    "reject_rate_far",
    "se_null",
    "se_far",
    "seed",
];

/// The 13 summary fields of a report, in header order.
pub fn csv_row(report: &TrialReport) -> [String; 13] {
    let s = &report.spec;
    [
        s.model.to_string(),
        s.k.to_string(),
        s.alpha.to_string(),
        s.eps1.to_string(),
        s.eps2.to_string(),
        s.delta.to_string(),
        report.n1.to_string(),
        report.n2.to_string(),
        report.accept_rate_null.to_string(),
        report.reject_rate_far.to_string(),
        report.se_null.to_string(),
        report.se_far.to_string(),
        s.seed.to_string(),
    ]
}

/// Append one summary row to `path`, writing the header first iff the file
/// is new or empty.
pub fn append_csv_row(path: &Path, report: &TrialReport) -> Result<()> {
    let fresh = match std::fs::metadata(path) {
        Ok(m) => m.len() == 0,
        Err(_) => true,
    };
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut writer = csv::Writer::from_writer(file);
    if fresh {
        writer.write_record(CSV_HEADER)?;
    }
    writer.write_record(csv_row(report))?;
    writer.flush()?;
    Ok(())
}

/// Write the full report as pretty JSON.
pub fn write_json_report(path: &Path, report: &TrialReport) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, serde_json::to_string_pretty(report)? + "\n")?;
    Ok(())
}

/// Read a report back from JSON.
pub fn read_json_report(path: &Path) -> Result<TrialReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
