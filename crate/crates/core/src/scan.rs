//! Count records and coincidence-rate scans over the polarizer angle grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::uncertain::UncertainValue;

/// Grid points must sit within this distance of `π(j−1)/n`.
pub const GRID_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Signal,
    Background,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Signal => "signal",
            Label::Background => "background",
        }
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "signal" => Ok(Label::Signal),
            "background" => Ok(Label::Background),
            other => Err(Error::Domain(format!("unknown record label {other:?}"))),
        }
    }
}

/// Counts accumulated over one acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub singles_t: u64,
    pub singles_r: u64,
    pub coincidences: u64,
    pub valid_starts: u64,
    pub duration_s: f64,
    pub label: Label,
}

impl CountRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::Domain(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        if self.coincidences > self.valid_starts {
            return Err(Error::Domain(format!(
                "coincidences ({}) exceed valid starts ({})",
                self.coincidences, self.valid_starts
            )));
        }
        if self.coincidences > self.singles_t.min(self.singles_r) {
            return Err(Error::Domain(format!(
                "coincidences ({}) exceed singles ({}, {})",
                self.coincidences, self.singles_t, self.singles_r
            )));
        }
        Ok(())
    }

    pub fn coincidence_rate(&self) -> f64 {
        self.coincidences as f64 / self.duration_s
    }

    pub fn singles_t_rate(&self) -> f64 {
        self.singles_t as f64 / self.duration_s
    }

    pub fn singles_r_rate(&self) -> f64 {
        self.singles_r as f64 / self.duration_s
    }
}

/// Coincidence rates on the uniform grid `φ_j = π(j−1)/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleScan {
    pub n: usize,
    pub angles: Vec<Angle>,
    pub rates: Vec<UncertainValue>,
}

pub fn grid_angle(j: usize, n: usize) -> f64 {
    PI * j as f64 / n as f64
}

impl AngleScan {
    /// Build a scan on the uniform grid implied by `rates.len()`.
    pub fn uniform(rates: Vec<UncertainValue>) -> Result<Self> {
        let n = rates.len();
        if n < 4 {
            return Err(Error::Domain(format!("scan needs n >= 4 points, got {n}")));
        }
        let angles = (0..n)
            .map(|j| Angle::new(grid_angle(j, n)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, angles, rates })
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::uniform(values.iter().map(|&v| UncertainValue::exact(v)).collect())
    }

    pub fn values(&self) -> Vec<f64> {
        self.rates.iter().map(|r| r.value).collect()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.rates.iter().map(|r| r.sigma).collect()
    }

    /// Same grid, every rate multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            n: self.n,
            angles: self.angles.clone(),
            rates: self.rates.iter().map(|r| r.scale(k)).collect(),
        }
    }

    /// Grid shape check without the sign condition on the rates.
    pub fn check_grid(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::Grid(format!("scan needs n >= 4 points, got {}", self.n)));
        }
        if self.angles.len() != self.n || self.rates.len() != self.n {
            return Err(Error::Grid(format!(
                "scan has n = {} but {} angles and {} rates",
                self.n,
                self.angles.len(),
                self.rates.len()
            )));
        }
        for (j, a) in self.angles.iter().enumerate() {
            let expected = grid_angle(j, self.n);
            if (a.radians() - expected).abs() > GRID_TOLERANCE {
                return Err(Error::Grid(format!(
                    "angle {j} is {} rad, expected {expected}",
                    a.radians()
                )));
            }
        }
        Ok(())
    }

    /// Index of the grid point at `phi`, if `phi` is on the grid.
    pub fn index_of(&self, phi: f64) -> Option<usize> {
        let x = phi.rem_euclid(PI) * self.n as f64 / PI;
        let j = x.round();
        ((x - j).abs() < 1e-9).then_some(j as usize % self.n)
    }

    pub fn rate_at(&self, phi: f64) -> Result<UncertainValue> {
        self.index_of(phi)
            .map(|j| self.rates[j])
            .ok_or_else(|| Error::Grid(format!("φ = {phi} is not on the n = {} grid", self.n)))
    }
}

/// True iff the grid matches `π(j−1)/n` within [`GRID_TOLERANCE`] and every rate is nonnegative.
pub fn scan_validate(scan: &AngleScan) -> bool {
    scan.check_grid().is_ok() && scan.rates.iter().all(|r| r.value >= 0.0 && r.sigma >= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_is_valid() {
        let scan = AngleScan::from_values(&[8.0, 7.0, 5.0, 2.0, 1.0, 2.0, 5.0, 7.0]).unwrap();
        assert!(scan_validate(&scan));
        assert_eq!(scan.index_of(3.0 * PI / 8.0), Some(3));
        assert_eq!(scan.index_of(PI / 7.0), None);
    }

    #[test]
    fn non_uniform_grid_is_rejected() {
        let scan = AngleScan {
            n: 3,
            angles: [0.0, PI / 7.0, PI / 4.0]
                .iter()
                .map(|&a| Angle::new(a).unwrap())
                .collect(),
            rates: vec![UncertainValue::exact(1.0); 3],
        };
        assert!(!scan_validate(&scan));

        let mut scan = AngleScan::from_values(&[1.0; 4]).unwrap();
        scan.angles[2] = Angle::new(PI / 3.0).unwrap();
        assert!(!scan_validate(&scan));
    }

    #[test]
    fn negative_rate_is_rejected() {
        for j in 0..8 {
            let mut v = vec![1.0; 8];
            v[j] = -1.0;
            assert!(!scan_validate(&AngleScan::from_values(&v).unwrap()));
        }
    }

    #[test]
    fn record_invariants() {
        let mut rec = CountRecord {
            singles_t: 100,
            singles_r: 90,
            coincidences: 50,
            valid_starts: 100,
            duration_s: 1.0,
            label: Label::Signal,
        };
        assert!(rec.validate().is_ok());
        rec.coincidences = 95;
        assert!(rec.validate().is_err());
        rec.coincidences = 10;
        rec.duration_s = 0.0;
        assert!(rec.validate().is_err());
    }
}
