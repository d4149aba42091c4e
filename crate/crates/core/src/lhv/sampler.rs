//! Random admissible hidden-variable models for property testing.
//!
//! Both families are rotationally invariant with identical apparatus on the
//! two arms (`P₁ = P₂`), a common-cause correlation density, and detection
//! probabilities whose period-π mean is fixed at `η/2` so the singles rate is
//! `½ η R₀` exactly.
//!
//! * One-tier: `P(x) = η/2 + β Σₖ aₖ cos 2kx` with `aₖ ~ N(0, 1)/k` over the
//!   first [`SamplerSpec::harmonics`] harmonics and `β` drawn uniformly below
//!   the largest value that keeps `P` inside `[0, 1]`.
//! * Two-tier: half the draws use a smooth random kernel `Q(μ, x)` with
//!   quadratic `μ` dependence; the other half use a Fejér-smoothed top-hat in
//!   `x` whose contrast is damped by a random polynomial in `μ`, which reaches
//!   fringe parameters above `sin²(πη/2)/(πη/2)²` and so exercises the
//!   fringe-shape bound non-trivially.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::model::{Correlation, HiddenVariableModel};
use super::quadrature::QuadratureSpec;
use super::series::AngularSeries;
use super::two_tier::{effective_response, MuDensity, ResponseKernel, TwoTierModel};
use crate::angle::DetectionEfficiency;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

const RANGE_SAMPLES: usize = 2049;
/// Keeps sampled amplitudes strictly inside the admissible range.
const MARGIN: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    OneTier,
    TwoTier,
}

impl Family {
    fn tag(self) -> u64 {
        match self {
            Family::OneTier => 1,
            Family::TwoTier => 2,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::OneTier => "one-tier",
            Family::TwoTier => "two-tier",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-tier" => Ok(Family::OneTier),
            "two-tier" => Ok(Family::TwoTier),
            other => Err(Error::Domain(format!("unknown model family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    /// Harmonics of `cos 2kx` in the sampled detection probabilities.
    pub harmonics: usize,
    /// Harmonics of the Fejér top-hat used by the sharp two-tier draws.
    pub sharp_harmonics: usize,
    /// Smallest wrapped-normal jitter of the correlation density.
    pub min_jitter: f64,
    pub quadrature: QuadratureSpec,
}

impl SamplerSpec {
    pub fn for_family(family: Family) -> Self {
        Self {
            harmonics: match family {
                Family::OneTier => 2,
                Family::TwoTier => 3,
            },
            sharp_harmonics: 16,
            min_jitter: 0.15,
            quadrature: QuadratureSpec::default(),
        }
    }
}

fn rng_for(seed: u64, eta: DetectionEfficiency, family: Family) -> ChaCha8Rng {
    stream_rng(seed, &[family.tag(), eta.value().to_bits()])
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn sample_correlation(rng: &mut ChaCha8Rng, min_jitter: f64, strong: bool) -> Correlation {
    let (weight, jitter) = if strong {
        (
            rng.gen_range(0.7..=1.0),
            rng.gen_range(min_jitter..=min_jitter.max(0.5)),
        )
    } else {
        (rng.gen_range(0.0..=1.0), rng.gen_range(min_jitter..=2.0))
    };
    Correlation::common_cause(weight, jitter)
}

/// Largest `β` with `mean + β·[lo, hi] ⊂ [0, 1]`.
fn amplitude_limit(mean: f64, lo: f64, hi: f64) -> Result<f64> {
    let up = if hi > 0.0 { (1.0 - mean) / hi } else { f64::INFINITY };
    let down = if lo < 0.0 { mean / -lo } else { f64::INFINITY };
    let beta = up.min(down);
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Sampling(format!(
            "no admissible amplitude for mean {mean} and shape range [{lo}, {hi}]"
        )));
    }
    Ok(beta)
}

fn singles_mean(eta: DetectionEfficiency) -> Result<f64> {
    let m = 0.5 * eta.value();
    if m <= 0.0 || m >= 1.0 {
        return Err(Error::Sampling(format!("η = {} leaves no room for P", eta.value())));
    }
    Ok(m)
}

fn sample_one_tier(rng: &mut ChaCha8Rng, eta: DetectionEfficiency, spec: &SamplerSpec) -> Result<HiddenVariableModel> {
    let mean = singles_mean(eta)?;
    let mut shape = vec![0.0];
    shape.extend((1..=spec.harmonics).map(|k| normal(rng) / k as f64));
    let (lo, hi) = AngularSeries::new(shape.clone()).range_on_grid(RANGE_SAMPLES);
    let beta = rng.gen_range(0.0..=1.0) * amplitude_limit(mean, lo, hi)? * MARGIN;
    let mut coeffs: Vec<f64> = shape.iter().map(|a| beta * a).collect();
    coeffs[0] = mean;
    let rho = sample_correlation(rng, spec.min_jitter, false);
    Ok(HiddenVariableModel::symmetric(rho, AngularSeries::new(coeffs)))
}

fn sample_mu_density(rng: &mut ChaCha8Rng, quad: &QuadratureSpec) -> Result<MuDensity> {
    let d: Vec<f64> = (1..=3).map(|m| normal(rng) / m as f64).collect();
    let shape = |mu: f64| {
        d.iter()
            .enumerate()
            .map(|(i, dm)| dm * ((i + 1) as f64 * PI * mu).cos())
            .sum::<f64>()
    };
    let lo = check_mus(quad).map(shape).fold(f64::INFINITY, f64::min);
    let limit = if lo < 0.0 { 1.0 / -lo } else { 1.0 };
    let gamma = rng.gen_range(0.0..=1.0) * limit * MARGIN;
    let mut coeffs = vec![1.0];
    coeffs.extend(d.iter().map(|x| gamma * x));
    Ok(MuDensity { coeffs })
}

/// `μ` values where kernel and density bounds are enforced.
fn check_mus(quad: &QuadratureSpec) -> impl Iterator<Item = f64> {
    let mut mus: Vec<f64> = (0..=256).map(|i| i as f64 / 256.0).collect();
    mus.extend(quad.mu_nodes().x);
    mus.extend(quad.refined().mu_nodes().x);
    mus.into_iter()
}

fn smooth_kernel(rng: &mut ChaCha8Rng, mean: f64, spec: &SamplerSpec) -> Result<ResponseKernel> {
    let shape: Vec<Vec<f64>> = (1..=spec.harmonics)
        .map(|k| (0..3).map(|_| normal(rng) / k as f64).collect())
        .collect();
    let at = |mu: f64| {
        let mut c = vec![0.0];
        c.extend(shape.iter().map(|e| e.iter().rev().fold(0.0, |acc, x| acc * mu + x)));
        AngularSeries::new(c)
    };
    let (lo, hi) = check_mus(&spec.quadrature)
        .map(|mu| at(mu).range_on_grid(RANGE_SAMPLES))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (l, h)| {
            (a.min(l), b.max(h))
        });
    let beta = rng.gen_range(0.0..=1.0) * amplitude_limit(mean, lo, hi)? * MARGIN;
    let mut coeffs = vec![vec![mean]];
    coeffs.extend(shape.iter().map(|e| e.iter().map(|x| beta * x).collect()));
    Ok(ResponseKernel { coeffs })
}

/// Fejér mean of the indicator of `|x| < w/2` with `w = πη/2`, contrast damped by `1 − α μᵖ`.
fn sharp_kernel(rng: &mut ChaCha8Rng, mean: f64, spec: &SamplerSpec) -> ResponseKernel {
    let width = PI * mean;
    let big_k = spec.sharp_harmonics;
    let alpha: f64 = rng.gen_range(0.0..=1.0);
    let power = rng.gen_range(1..=3usize);
    let mut coeffs = vec![vec![mean]];
    for k in 1..=big_k {
        let kf = k as f64;
        let t = 2.0 * (kf * width).sin() / (PI * kf) * (1.0 - kf / (big_k as f64 + 1.0)) * MARGIN;
        let mut e = vec![0.0; power + 1];
        e[0] = t;
        e[power] -= alpha * t;
        coeffs.push(e);
    }
    ResponseKernel { coeffs }
}

/// A symmetric two-tier model with singles ratio `η/2`.
pub fn sample_two_tier(seed: u64, eta: DetectionEfficiency, spec: &SamplerSpec) -> Result<TwoTierModel> {
    let mut rng = rng_for(seed, eta, Family::TwoTier);
    let mean = singles_mean(eta)?;
    let sharp = rng.gen_bool(0.5);
    let q = if sharp {
        sharp_kernel(&mut rng, mean, spec)
    } else {
        smooth_kernel(&mut rng, mean, spec)?
    };
    let g = sample_mu_density(&mut rng, &spec.quadrature)?;
    let rho = sample_correlation(&mut rng, spec.min_jitter, sharp);
    let model = TwoTierModel::symmetric(rho, g, q);
    model
        .check_admissible(&spec.quadrature)
        .map_err(|e| Error::Sampling(format!("projection failed: {e}")))?;
    Ok(model)
}

/// A random admissible model of `family`, deterministic in `(seed, η, family)`.
pub fn sample_admissible_model(seed: u64, eta: DetectionEfficiency, family: Family) -> Result<HiddenVariableModel> {
    sample_with(seed, eta, family, &SamplerSpec::for_family(family))
}

pub fn sample_with(
    seed: u64,
    eta: DetectionEfficiency,
    family: Family,
    spec: &SamplerSpec,
) -> Result<HiddenVariableModel> {
    let model = match family {
        Family::OneTier => sample_one_tier(&mut rng_for(seed, eta, family), eta, spec)?,
        Family::TwoTier => effective_response(&sample_two_tier(seed, eta, spec)?, &spec.quadrature)?,
    };
    model
        .check_admissible(&spec.quadrature)
        .map_err(|e| Error::Sampling(format!("projection failed: {e}")))?;
    Ok(model)
}
