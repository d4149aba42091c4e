//! Two-tier models: angular variables `χ_j` correlated through `ρ_χ`, plus
//! local variables `μ_j ∈ [0, 1]` with densities `g_j` that modulate the
//! detection probability `Q_j(μ_j, |χ_j − φ_j|)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::model::{Correlation, HiddenVariableModel};
use super::quadrature::QuadratureSpec;
use super::series::AngularSeries;
use crate::error::{Error, Result};

const BOUND_SLACK: f64 = 1e-12;
const X_SAMPLES: usize = 513;

/// Density on `[0, 1]`: `g(μ) = Σₘ dₘ cos(mπμ)`, normalized when `d₀ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MuDensity {
    pub coeffs: Vec<f64>,
}

impl MuDensity {
    pub fn uniform() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn eval(&self, mu: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, d)| d * (m as f64 * PI * mu).cos())
            .sum()
    }
}

/// `Q(μ, x) = Σₖ bₖ(μ) cos(2kx)` with polynomial `bₖ(μ) = Σₘ e[k][m] μᵐ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResponseKernel {
    pub coeffs: Vec<Vec<f64>>,
}

impl ResponseKernel {
    pub fn harmonic(&self, k: usize, mu: f64) -> f64 {
        self.coeffs[k].iter().rev().fold(0.0, |acc, e| acc * mu + e)
    }

    pub fn at_mu(&self, mu: f64) -> AngularSeries {
        AngularSeries::new((0..self.coeffs.len()).map(|k| self.harmonic(k, mu)).collect())
    }

    pub fn eval(&self, mu: f64, x: f64) -> f64 {
        self.at_mu(mu).eval(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoTierModel {
    pub rho_chi: Correlation,
    pub g1: MuDensity,
    pub g2: MuDensity,
    pub q1: ResponseKernel,
    pub q2: ResponseKernel,
}

impl TwoTierModel {
    pub fn symmetric(rho_chi: Correlation, g: MuDensity, q: ResponseKernel) -> Self {
        Self {
            rho_chi,
            g1: g.clone(),
            g2: g,
            q1: q.clone(),
            q2: q,
        }
    }

    /// Constraint check on the `μ` nodes of `quad` crossed with an `x` grid.
    pub fn check_admissible(&self, quad: &QuadratureSpec) -> Result<()> {
        quad.validate()?;
        let mu = quad.mu_nodes();
        for (name, g) in [("g1", &self.g1), ("g2", &self.g2)] {
            let total = mu.integrate(|m| g.eval(m));
            if (total - 1.0).abs() > quad.tolerance.max(1e-12) {
                return Err(Error::Domain(format!("∫{name} = {total}, expected 1")));
            }
            if let Some(m) = mu.x.iter().find(|&&m| g.eval(m) < -BOUND_SLACK) {
                return Err(Error::Domain(format!("{name} is negative at μ = {m}")));
            }
        }
        for (name, q) in [("Q1", &self.q1), ("Q2", &self.q2)] {
            if q.coeffs.is_empty() {
                return Err(Error::Domain(format!("{name} has no harmonics")));
            }
            for &m in &mu.x {
                let (lo, hi) = q.at_mu(m).range_on_grid(X_SAMPLES);
                if lo < -BOUND_SLACK || hi > 1.0 + BOUND_SLACK {
                    return Err(Error::Domain(format!(
                        "{name} leaves [0, 1] at μ = {m}: range [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn integrate_out(q: &ResponseKernel, g: &MuDensity, quad: &QuadratureSpec) -> Vec<f64> {
    let mu = quad.mu_nodes();
    (0..q.coeffs.len())
        .map(|k| mu.integrate(|m| q.harmonic(k, m) * g.eval(m)))
        .collect()
}

/// Integrate the `μ_j` out: `P_j(x) = ∫ Q_j(μ, x) g_j(μ) dμ`, with `ρ = ρ_χ`.
pub fn effective_response(model: &TwoTierModel, quad: &QuadratureSpec) -> Result<HiddenVariableModel> {
    model.check_admissible(quad)?;
    let fine = quad.refined();
    let mut responses = Vec::with_capacity(2);
    for (q, g) in [(&model.q1, &model.g1), (&model.q2, &model.g2)] {
        let coarse = integrate_out(q, g, quad);
        let refined = integrate_out(q, g, &fine);
        let coeffs = coarse
            .iter()
            .zip(&refined)
            .map(|(&c, &f)| quad.check_converged(c, f, "μ integral"))
            .collect::<Result<Vec<_>>>()?;
        responses.push(AngularSeries::new(coeffs));
    }
    let p2 = responses.pop().expect("two arms");
    let p1 = responses.pop().expect("two arms");
    Ok(HiddenVariableModel::new(model.rho_chi.clone(), p1, p2))
}
