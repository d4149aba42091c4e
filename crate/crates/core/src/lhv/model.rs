//! One-tier hidden-variable models: a correlation density `ρ(|λ₁−λ₂|)` over
//! `[0, π)²` and detection probabilities `P_j(|λ_j − φ_j|)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::{Nodes, QuadratureSpec};
use super::series::AngularSeries;
use crate::angle::{fold_distance, Angle};
use crate::error::{Error, Result};
use crate::scan::{grid_angle, AngleScan};
use crate::uncertain::UncertainValue;

/// Slack allowed on the `[0, 1]` and `ρ ≥ 0` checks for floating-point rounding.
const BOUND_SLACK: f64 = 1e-12;
/// Points on `[0, π/2]` used to check the response bounds.
const RANGE_SAMPLES: usize = 2049;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Correlation {
    /// Density `ρ(u) = c₀ + Σ cₖ cos 2ku` on `[0, π)²`; normalized when `π² c₀ = 1`.
    Series { coeffs: AngularSeries },
    /// `λ₁ = λ₂` with a uniform marginal.
    Perfect,
}

impl Correlation {
    pub fn uniform() -> Self {
        Correlation::Series {
            coeffs: AngularSeries::constant(1.0 / (PI * PI)),
        }
    }

    /// Density of `λ₁ − λ₂` when `λ₁ = λ + ε₁`, `λ₂ = λ + ε₂` share `λ` and carry
    /// independent wrapped-normal jitter of width `jitter` (radians of `2λ`),
    /// mixed with weight `1 − weight` into the uncorrelated density.
    pub fn common_cause(weight: f64, jitter: f64) -> Self {
        let norm = 1.0 / (PI * PI);
        let mut coeffs = vec![norm];
        for k in 1.. {
            let c = 2.0 * norm * weight * (-(k as f64).powi(2) * jitter * jitter).exp();
            if c < 1e-18 || k > 512 {
                break;
            }
            coeffs.push(c);
        }
        Correlation::Series {
            coeffs: AngularSeries::new(coeffs),
        }
    }

    pub fn density(&self, u: f64) -> Option<f64> {
        match self {
            Correlation::Series { coeffs } => Some(coeffs.eval(u)),
            Correlation::Perfect => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arm {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenVariableModel {
    pub rho: Correlation,
    pub p1: AngularSeries,
    pub p2: AngularSeries,
}

impl HiddenVariableModel {
    pub fn new(rho: Correlation, p1: AngularSeries, p2: AngularSeries) -> Self {
        Self { rho, p1, p2 }
    }

    pub fn symmetric(rho: Correlation, p: AngularSeries) -> Self {
        Self {
            rho,
            p1: p.clone(),
            p2: p,
        }
    }

    pub fn response(&self, arm: Arm) -> &AngularSeries {
        match arm {
            Arm::First => &self.p1,
            Arm::Second => &self.p2,
        }
    }

    /// Constraint check on the evaluation grid of `quad`.
    pub fn check_admissible(&self, quad: &QuadratureSpec) -> Result<()> {
        quad.validate()?;
        for (name, p) in [("P1", &self.p1), ("P2", &self.p2)] {
            let (lo, hi) = p.range_on_grid(RANGE_SAMPLES);
            if lo < -BOUND_SLACK || hi > 1.0 + BOUND_SLACK {
                return Err(Error::Domain(format!(
                    "{name} leaves [0, 1] on the grid: range [{lo}, {hi}]"
                )));
            }
        }
        if let Correlation::Series { coeffs } = &self.rho {
            let nodes = quad.angle_nodes();
            let (lo, _) = coeffs.range_on_grid(RANGE_SAMPLES.max(2 * nodes.len() + 1));
            if lo < -BOUND_SLACK {
                return Err(Error::Domain(format!("ρ is negative on the grid: min {lo}")));
            }
            let total = integrate_pair(&self.rho, &nodes, |_| 1.0, |_| 1.0);
            if (total - 1.0).abs() > quad.tolerance.max(1e-12) {
                return Err(Error::Domain(format!("∬ρ = {total}, expected 1")));
            }
        }
        Ok(())
    }

    fn singles_on(&self, nodes: &Nodes, phi: f64, arm: Arm) -> f64 {
        let p = self.response(arm);
        let f = |l: f64| p.eval(fold_distance(l, phi));
        match arm {
            Arm::First => integrate_pair(&self.rho, nodes, f, |_| 1.0),
            Arm::Second => integrate_pair(&self.rho, nodes, |_| 1.0, f),
        }
    }

    fn coincidence_on(&self, nodes: &Nodes, phi1: f64, phi2: f64) -> f64 {
        integrate_pair(
            &self.rho,
            nodes,
            |l| self.p1.eval(fold_distance(l, phi1)),
            |l| self.p2.eval(fold_distance(l, phi2)),
        )
    }
}

/// `∬ ρ(|λ₁−λ₂|) f₁(λ₁) f₂(λ₂) dλ₁ dλ₂` over `[0, π)²`.
fn integrate_pair(rho: &Correlation, nodes: &Nodes, f1: impl Fn(f64) -> f64, f2: impl Fn(f64) -> f64) -> f64 {
    let n = nodes.len();
    let a: Vec<f64> = nodes.x.iter().zip(&nodes.w).map(|(&x, &w)| w * f1(x)).collect();
    let b: Vec<f64> = nodes.x.iter().zip(&nodes.w).map(|(&x, &w)| w * f2(x)).collect();
    match rho {
        Correlation::Perfect => {
            // ρ = δ(λ₁ − λ₂)/π: one integral over the shared angle
            nodes
                .x
                .iter()
                .zip(&nodes.w)
                .map(|(&x, &w)| w * f1(x) * f2(x))
                .sum::<f64>()
                / PI
        }
        Correlation::Series { coeffs } if nodes.uniform => {
            // ρ depends only on (i − j) mod n on an equally spaced periodic grid
            let h = PI / n as f64;
            let circ: Vec<f64> = (0..n).map(|d| coeffs.eval(fold_distance(d as f64 * h, 0.0))).collect();
            (0..n)
                .map(|i| {
                    let inner: f64 = (0..n).map(|j| circ[(i + n - j) % n] * b[j]).sum();
                    a[i] * inner
                })
                .sum()
        }
        Correlation::Series { coeffs } => (0..n)
            .map(|i| {
                let inner: f64 = (0..n)
                    .map(|j| coeffs.eval(fold_distance(nodes.x[i], nodes.x[j])) * b[j])
                    .sum();
                a[i] * inner
            })
            .sum(),
    }
}

/// `R_j / R_0` for one arm.
pub fn lhv_singles_ratio(model: &HiddenVariableModel, phi: Angle, arm: Arm, quad: &QuadratureSpec) -> Result<f64> {
    model.check_admissible(quad)?;
    let coarse = model.singles_on(&quad.angle_nodes(), phi.radians(), arm);
    let fine = model.singles_on(&quad.refined().angle_nodes(), phi.radians(), arm);
    quad.check_converged(coarse, fine, "singles ratio")
}

/// `R_12 / R_0` for polarizer angles `phi1`, `phi2`.
pub fn lhv_coincidence_ratio(
    model: &HiddenVariableModel,
    phi1: Angle,
    phi2: Angle,
    quad: &QuadratureSpec,
) -> Result<f64> {
    model.check_admissible(quad)?;
    coincidence_checked(model, phi1.radians(), phi2.radians(), quad)
}

fn coincidence_checked(model: &HiddenVariableModel, phi1: f64, phi2: f64, quad: &QuadratureSpec) -> Result<f64> {
    let coarse = model.coincidence_on(&quad.angle_nodes(), phi1, phi2);
    let fine = model.coincidence_on(&quad.refined().angle_nodes(), phi1, phi2);
    quad.check_converged(coarse, fine, "coincidence ratio")
}

/// Coincidence ratios on the grid `φ_j = π(j−1)/n`, with `φ₁ = 0` and `φ₂ = φ_j`.
///
/// Every entry carries the quadrature tolerance as its sigma.
pub fn model_scan(model: &HiddenVariableModel, n: usize, quad: &QuadratureSpec) -> Result<AngleScan> {
    if n < 4 {
        return Err(Error::Domain(format!("scan needs n >= 4, got {n}")));
    }
    model.check_admissible(quad)?;
    let rates = (0..n)
        .into_par_iter()
        .map(|j| {
            coincidence_checked(model, 0.0, grid_angle(j, n), quad).map(|v| UncertainValue {
                value: v,
                sigma: quad.tolerance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    AngleScan::uniform(rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhv::quadrature::Rule;

    fn a(x: f64) -> Angle {
        Angle::new(x).unwrap()
    }

    fn quads() -> Vec<QuadratureSpec> {
        [Rule::Midpoint, Rule::Trapezoid, Rule::GaussLegendre]
            .into_iter()
            .map(|rule| QuadratureSpec {
                nodes_per_axis: if rule == Rule::GaussLegendre { 96 } else { 64 },
                rule,
                ..Default::default()
            })
            .collect()
    }

    fn cos2() -> AngularSeries {
        AngularSeries::new(vec![0.5, 0.5])
    }

    #[test]
    fn singles_examples() {
        for q in quads() {
            let m = HiddenVariableModel::symmetric(Correlation::uniform(), AngularSeries::constant(0.5));
            assert!((lhv_singles_ratio(&m, a(0.3), Arm::First, &q).unwrap() - 0.5).abs() < 1e-12);
            let m = HiddenVariableModel::symmetric(Correlation::uniform(), cos2());
            for arm in [Arm::First, Arm::Second] {
                assert!((lhv_singles_ratio(&m, a(1.0), arm, &q).unwrap() - 0.5).abs() < 1e-12);
            }
            let m = HiddenVariableModel::symmetric(Correlation::uniform(), AngularSeries::constant(0.0));
            assert_eq!(lhv_singles_ratio(&m, a(0.0), Arm::First, &q).unwrap(), 0.0);
        }
    }

    #[test]
    fn coincidence_examples() {
        for q in quads() {
            let m = HiddenVariableModel::symmetric(Correlation::uniform(), AngularSeries::constant(0.5));
            for (p1, p2) in [(0.0, 0.0), (0.2, 1.3), (2.0, 0.1)] {
                let r = lhv_coincidence_ratio(&m, a(p1), a(p2), &q).unwrap();
                assert!((r - 0.25).abs() < 1e-12);
            }
            // perfectly correlated Malus model: (2 + cos 2(φ₁ − φ₂))/8
            let m = HiddenVariableModel::symmetric(Correlation::Perfect, cos2());
            for (p1, p2) in [(0.0, 0.0), (0.3, 1.0), (0.0, PI / 2.0), (2.5, 0.7)] {
                let r = lhv_coincidence_ratio(&m, a(p1), a(p2), &q).unwrap();
                let expected = (2.0 + (2.0 * (p1 - p2)).cos()) / 8.0;
                assert!((r - expected).abs() < 1e-12, "{r} vs {expected}");
            }
            let m = HiddenVariableModel::new(Correlation::uniform(), AngularSeries::constant(0.0), cos2());
            assert_eq!(lhv_coincidence_ratio(&m, a(0.4), a(0.9), &q).unwrap(), 0.0);
        }
    }

    #[test]
    fn inadmissible_models_are_rejected() {
        let q = QuadratureSpec::default();
        let too_big = HiddenVariableModel::symmetric(Correlation::uniform(), AngularSeries::new(vec![0.6, 0.5]));
        assert!(matches!(
            lhv_singles_ratio(&too_big, a(0.0), Arm::First, &q),
            Err(Error::Domain(_))
        ));
        let negative_rho = HiddenVariableModel::symmetric(
            Correlation::Series {
                coeffs: AngularSeries::new(vec![1.0 / (PI * PI), 3.0 / (PI * PI)]),
            },
            cos2(),
        );
        assert!(lhv_coincidence_ratio(&negative_rho, a(0.0), a(0.0), &q).is_err());
        let unnormalized = HiddenVariableModel::symmetric(
            Correlation::Series {
                coeffs: AngularSeries::constant(0.2),
            },
            cos2(),
        );
        assert!(lhv_coincidence_ratio(&unnormalized, a(0.0), a(0.0), &q).is_err());
    }

    #[test]
    fn scan_examples() {
        let q = QuadratureSpec::default();
        let m = HiddenVariableModel::symmetric(Correlation::Perfect, cos2());
        let scan = model_scan(&m, 8, &q).unwrap();
        for (j, r) in scan.rates.iter().enumerate() {
            let phi = grid_angle(j, 8);
            assert!((r.value - (2.0 + (2.0 * phi).cos()) / 8.0).abs() < 1e-12);
            assert_eq!(r.sigma, q.tolerance);
        }
        let flat = HiddenVariableModel::symmetric(Correlation::common_cause(0.7, 0.4), AngularSeries::constant(0.31));
        let scan = model_scan(&flat, 8, &q).unwrap();
        assert!(scan.rates.iter().all(|r| (r.value - 0.31 * 0.31).abs() < 1e-12));
    }

    #[test]
    fn common_cause_density_is_normalized_and_positive() {
        for (w, s) in [(1.0, 0.15), (0.5, 0.8), (0.0, 1.0), (1.0, 2.0)] {
            let rho = Correlation::common_cause(w, s);
            let m = HiddenVariableModel::symmetric(rho, cos2());
            m.check_admissible(&QuadratureSpec::default()).unwrap();
        }
    }
}
