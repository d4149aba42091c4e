//! Polarizer angles and detector efficiencies.
//!
//! Polarization directions are period-π quantities, so every [`Angle`] is
//! stored in radians on the canonical range `[0, π)`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A polarization angle in radians, canonicalised to `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(theta: f64) -> Result<Self> {
        normalize_angle(theta)
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        normalize_angle(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// `self + delta`, wrapped back into `[0, π)`.
    pub fn offset(self, delta: f64) -> Result<Self> {
        normalize_angle(self.0 + delta)
    }
}

impl TryFrom<f64> for Angle {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        normalize_angle(value)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} rad", self.0)
    }
}

/// Map any finite real onto `[0, π)`.
pub fn normalize_angle(theta: f64) -> Result<Angle> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("angle must be finite, got {theta}")));
    }
    let mut r = theta.rem_euclid(PI);
    // rem_euclid can round up to exactly PI for tiny negative inputs
    if r >= PI {
        r = 0.0;
    }
    Ok(Angle(r))
}

/// Period-π angular distance between two directions, in `[0, π/2]`.
pub fn fold_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Detection efficiency `η ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DetectionEfficiency(f64);

impl DetectionEfficiency {
    /// Nominal data-sheet efficiency of the silicon APDs at 796 nm.
    pub const NOMINAL: DetectionEfficiency = DetectionEfficiency(0.62);

    pub fn new(eta: f64) -> Result<Self> {
        if eta.is_finite() && eta > 0.0 && eta <= 1.0 {
            Ok(DetectionEfficiency(eta))
        } else {
            Err(Error::Domain(format!(
                "detection efficiency must lie in (0, 1], got {eta}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for DetectionEfficiency {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        DetectionEfficiency::new(value)
    }
}

impl From<DetectionEfficiency> for f64 {
    fn from(e: DetectionEfficiency) -> f64 {
        e.0
    }
}
