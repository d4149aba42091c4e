//! Local-realism tests for polarization-entangled photon pairs without the
//! fair-sampling assumption.
//!
//! The crate covers the quantum prediction for a beamsplitter-prepared Bell
//! state, quadrature of local hidden-variable models, the inequality
//! statistics that bound such models, an event-level coincidence simulator,
//! and the pipeline from count records to a report.

pub mod angle;
pub mod config;
pub mod conformance;
pub mod error;
pub mod inequalities;
pub mod lhv;
pub mod pipeline;
pub mod qm;
pub mod rng;
pub mod scan;
pub mod sim;
pub mod uncertain;

pub use angle::{fold_distance, normalize_angle, Angle, DetectionEfficiency};
pub use config::{ConfigFile, ExperimentConfig, GridSettings};
pub use error::{Error, Result};
pub use scan::{scan_validate, AngleScan, CountRecord, Label};
pub use uncertain::UncertainValue;
