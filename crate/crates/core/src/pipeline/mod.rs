//! From count records to a report: ingestion, aggregation, background
//! subtraction, fringe fit and the inequality verdicts.

mod records;
mod report;
mod stats;

pub use records::{
    file_digest, ingest_records, read_records, save_records, write_records, AngleGroup, RecordSet, COLUMNS,
};
pub use report::{
    plot_data, report_json, run_report, BackgroundMode, DeltaSigmaMethod, Provenance, ReportOptions, ReportVariant,
    RunReport, ScanPoint,
};
pub use stats::{aggregate_acquisitions, fit_cos_squared, subtract_background, CosSquaredFit};
