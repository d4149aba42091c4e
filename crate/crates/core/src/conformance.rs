//! Empirical check of the two bounds against sampled hidden-variable models.
//!
//! Each sampled model is turned into an exact (quadrature) scan and run
//! through the same statistics as measured data. The visibility-ratio bound
//! is only claimed for one-tier models; for two-tier models its outcome is
//! reported but not counted as a failure.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::{Angle, DetectionEfficiency};
use crate::error::Result;
use crate::inequalities::{evaluate_santos1, evaluate_santos2};
use crate::lhv::{
    lhv_singles_ratio, model_scan, sample_admissible_model, Arm, Family, HiddenVariableModel, QuadratureSpec,
};

/// Allowance for quadrature error in the bound checks.
pub const QUADRATURE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelVerdict {
    pub seed: u64,
    /// `F − V_B/V_A`; `None` when `V_A = 0`.
    pub santos1_violation: Option<f64>,
    /// `D − Δ_min`.
    pub santos2_violation: f64,
    pub bound_d: f64,
    /// Largest `|R_j/R_0 − η/2|` over both arms.
    pub singles_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    /// Whether the bound is claimed for this family.
    pub applies: bool,
    pub max_violation: f64,
    /// Models whose violation exceeds [`QUADRATURE_SLACK`].
    pub exceeding: usize,
    pub undefined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub family: Family,
    pub eta: f64,
    pub models: usize,
    pub santos1: BoundSummary,
    pub santos2: BoundSummary,
    /// Models with `D(η) > 0`, i.e. where the fringe-shape bound has teeth.
    pub positive_bound_d: usize,
    pub max_singles_error: f64,
    pub verdicts: Vec<ModelVerdict>,
}

impl SuiteSummary {
    /// No claimed bound is exceeded and every singles ratio is `η/2`.
    pub fn passed(&self) -> bool {
        let ok = |b: &BoundSummary| !b.applies || (b.exceeding == 0 && b.undefined == 0);
        ok(&self.santos1) && ok(&self.santos2) && self.max_singles_error <= QUADRATURE_SLACK
    }
}

/// Verdicts for one explicit model.
pub fn check_model(
    model: &HiddenVariableModel,
    eta: DetectionEfficiency,
    quad: &QuadratureSpec,
    seed: u64,
) -> Result<ModelVerdict> {
    let scan = model_scan(model, 8, quad)?;
    let santos1_violation = evaluate_santos1(&scan, eta).ok().map(|r| r.violation.value);
    let s2 = evaluate_santos2(&scan, eta)?;
    let mut singles_error: f64 = 0.0;
    for arm in [Arm::First, Arm::Second] {
        let r = lhv_singles_ratio(model, Angle::ZERO, arm, quad)?;
        singles_error = singles_error.max((r - eta.value() / 2.0).abs());
    }
    Ok(ModelVerdict {
        seed,
        santos1_violation,
        santos2_violation: s2.violation.value,
        bound_d: s2.bound_d.value,
        singles_error,
    })
}

fn summarize(applies: bool, values: impl Iterator<Item = Option<f64>>) -> BoundSummary {
    let mut s = BoundSummary {
        applies,
        max_violation: f64::NEG_INFINITY,
        exceeding: 0,
        undefined: 0,
    };
    for v in values {
        match v {
            Some(x) => {
                s.max_violation = s.max_violation.max(x);
                s.exceeding += usize::from(x > QUADRATURE_SLACK);
            }
            None => s.undefined += 1,
        }
    }
    s
}

/// Sample `seeds` models of `family` (seeds `0..seeds`) and check both bounds.
pub fn verify_lhv(seeds: u64, eta: DetectionEfficiency, family: Family, quad: &QuadratureSpec) -> Result<SuiteSummary> {
    let verdicts = (0..seeds)
        .into_par_iter()
        .map(|seed| check_model(&sample_admissible_model(seed, eta, family)?, eta, quad, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteSummary {
        family,
        eta: eta.value(),
        models: verdicts.len(),
        santos1: summarize(family == Family::OneTier, verdicts.iter().map(|v| v.santos1_violation)),
        santos2: summarize(true, verdicts.iter().map(|v| Some(v.santos2_violation))),
        positive_bound_d: verdicts.iter().filter(|v| v.bound_d > 0.0).count(),
        max_singles_error: verdicts.iter().map(|v| v.singles_error).fold(0.0, f64::max),
        verdicts,
    })
}
