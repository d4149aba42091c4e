//! Analyze a records CSV (written by `lhvtest simulate`) with per-angle or
//! shared background and a measured R_tot.
//!
//! `cargo run --example analyze_records -- records.csv`

use lhvtest::inequalities::RTot;
use lhvtest::pipeline::{
    file_digest, ingest_records, report_json, run_report, save_records, BackgroundMode, Provenance, RecordSet,
    ReportOptions,
};
use lhvtest::sim::simulate_scan;
use lhvtest::{ExperimentConfig, UncertainValue};

fn main() -> lhvtest::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => std::path::PathBuf::from(p),
        None => {
            // nothing given: write a short run first
            let cfg = ExperimentConfig {
                acquisitions: 5,
                acquisition_duration_s: 5.0,
                ..ExperimentConfig::reference()
            };
            let (s, b) = simulate_scan(&cfg, 8, 1)?;
            let p = std::env::temp_dir().join("lhvtest_records.csv");
            save_records(&p, &RecordSet::from_runs(&s, &b))?;
            println!("wrote {}", p.display());
            p
        }
    };
    let set = ingest_records(&path)?;
    println!(
        "{} signal records at {} angles, {} background records",
        set.signal_records(),
        set.signal.len(),
        set.background_records()
    );
    let provenance = Provenance {
        input_sha256: Some(file_digest(&path)?),
        ..Default::default()
    };
    let options = ReportOptions {
        r_tot: RTot::Measured(UncertainValue::new(460.0, 3.0)?),
        background: BackgroundMode::Shared,
        ..Default::default()
    };
    let report = run_report(&set, &options, provenance)?;
    println!("{}", report_json(&report));
    Ok(())
}
