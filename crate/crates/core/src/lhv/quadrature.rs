use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Midpoint,
    Trapezoid,
    GaussLegendre,
}

/// Numerical rule for the hidden-variable integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
    pub rule: Rule,
    pub tolerance: f64,
    /// Gauss–Legendre nodes for the `μ` integrals of two-tier models.
    #[serde(default = "default_mu_nodes")]
    pub mu_nodes: usize,
}

fn default_mu_nodes() -> usize {
    128
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_axis: 256,
            rule: Rule::Midpoint,
            tolerance: 1e-9,
            mu_nodes: default_mu_nodes(),
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 32 {
            return Err(Error::Domain(format!(
                "nodes_per_axis must be >= 32, got {}",
                self.nodes_per_axis
            )));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.mu_nodes < 2 {
            return Err(Error::Domain("mu_nodes must be >= 2".into()));
        }
        Ok(())
    }

    /// Same rule with twice the nodes, for convergence checks.
    pub fn refined(&self) -> Self {
        Self {
            nodes_per_axis: self.nodes_per_axis * 2,
            mu_nodes: self.mu_nodes * 2,
            ..*self
        }
    }

    /// Nodes and weights on `[0, π)`.
    pub fn angle_nodes(&self) -> Nodes {
        nodes(self.rule, 0.0, PI, self.nodes_per_axis)
    }

    /// Nodes and weights for `μ ∈ [0, 1]`.
    pub fn mu_nodes(&self) -> Nodes {
        nodes(Rule::GaussLegendre, 0.0, 1.0, self.mu_nodes)
    }

    /// Fail when two estimates of one integral disagree by more than the tolerance.
    pub fn check_converged(&self, coarse: f64, fine: f64, what: &str) -> Result<f64> {
        let diff = (fine - coarse).abs();
        if diff.is_finite() && diff <= self.tolerance {
            Ok(fine)
        } else {
            Err(Error::Numeric(format!(
                "{what} not converged: doubling the nodes moved it by {diff:e} (tolerance {:e})",
                self.tolerance
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nodes {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    /// Nodes are equally spaced over a full period (midpoint or periodic trapezoid).
    pub uniform: bool,
}

impl Nodes {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.x.iter().zip(&self.w).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

pub fn nodes(rule: Rule, a: f64, b: f64, n: usize) -> Nodes {
    let h = (b - a) / n as f64;
    match rule {
        Rule::Midpoint => Nodes {
            x: (0..n).map(|i| a + (i as f64 + 0.5) * h).collect(),
            w: vec![h; n],
            uniform: true,
        },
        Rule::Trapezoid => {
            let mut w = vec![h; n + 1];
            w[0] = 0.5 * h;
            w[n] = 0.5 * h;
            Nodes {
                x: (0..=n).map(|i| a + i as f64 * h).collect(),
                w,
                uniform: false,
            }
        }
        Rule::GaussLegendre => {
            let (x, w) = gauss_legendre(n);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            Nodes {
                x: x.iter().map(|t| mid + half * t).collect(),
                w: w.iter().map(|wi| half * wi).collect(),
                uniform: false,
            }
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
