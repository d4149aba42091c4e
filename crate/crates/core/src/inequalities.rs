//! Visibility, fringe-shape and CH statistics with their local-realist bounds.
//!
//! Sign convention: `violation > 0` means the data lie outside what the
//! corresponding hidden-variable family (or, for CH, local realism under fair
//! sampling) allows. All sigmas are statistical only, and the detection
//! efficiency is taken as exact.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::angle::DetectionEfficiency;
use crate::error::{Error, Result};
use crate::scan::AngleScan;
use crate::uncertain::{contrast, UncertainValue};

/// Rounding allowance on the `Δ²` radicand before it counts as negative.
pub const DELTA_RADICAND_TOLERANCE: f64 = 1e-12;
pub const CH_BOUND: f64 = 0.25;

fn significance(v: &UncertainValue) -> f64 {
    v.significance().unwrap_or(f64::NAN)
}

/// `sin²x / x²` at `x = πη/2`.
fn sinc2(eta: DetectionEfficiency) -> f64 {
    let x = FRAC_PI_2 * eta.value();
    (x.sin() / x).powi(2)
}

/// Sigma of `f(R)` for independent rates, given `∂f/∂R_j`.
fn propagate(scan: &AngleScan, value: f64, grad: impl Fn(usize) -> f64) -> UncertainValue {
    let var: f64 = scan
        .rates
        .iter()
        .enumerate()
        .map(|(j, r)| (grad(j) * r.sigma).powi(2))
        .sum();
    UncertainValue {
        value,
        sigma: var.sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityPair {
    pub v_a: UncertainValue,
    pub v_b: UncertainValue,
}

/// `(R(0) − R(π/2)) / (R(0) + R(π/2))`.
pub fn visibility_va(scan: &AngleScan) -> Result<UncertainValue> {
    contrast(scan.rate_at(0.0)?, scan.rate_at(FRAC_PI_2)?)
}

/// `√2 (R(π/8) − R(3π/8)) / (R(π/8) + R(3π/8))`.
pub fn visibility_vb(scan: &AngleScan) -> Result<UncertainValue> {
    Ok(contrast(scan.rate_at(FRAC_PI_8)?, scan.rate_at(3.0 * FRAC_PI_8)?)?.scale(SQRT_2))
}

pub fn visibilities(scan: &AngleScan) -> Result<VisibilityPair> {
    Ok(VisibilityPair {
        v_a: visibility_va(scan)?,
        v_b: visibility_vb(scan)?,
    })
}

/// `F = 1 + cos²(πη/2) [V_B − sin²(πη/2)/(πη/2)²]`.
pub fn bound_f(eta: DetectionEfficiency, v_b: UncertainValue) -> UncertainValue {
    let c2 = (FRAC_PI_2 * eta.value()).cos().powi(2);
    let s = sinc2(eta);
    v_b.map(|v| 1.0 + c2 * (v - s), |_| c2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SantosIResult {
    pub visibilities: VisibilityPair,
    /// `V_B / V_A`.
    pub ratio: UncertainValue,
    pub bound_f: UncertainValue,
    /// `F − V_B/V_A`.
    pub violation: UncertainValue,
    pub significance: f64,
}

/// The visibility-ratio test from two visibilities.
///
/// `V_B/V_A` and `F` share `V_B`, and the visibilities share the scan, so
/// their sigmas are combined linearly rather than in quadrature.
pub fn santos1_from_visibilities(v: VisibilityPair, eta: DetectionEfficiency) -> Result<SantosIResult> {
    let ratio = v
        .v_b
        .div_worst_case(v.v_a)
        .map_err(|_| Error::Division("V_A is zero; the visibility ratio is undefined".into()))?;
    let f = bound_f(eta, v.v_b);
    let violation = f.sub_worst_case(ratio);
    Ok(SantosIResult {
        visibilities: v,
        ratio,
        bound_f: f,
        violation,
        significance: significance(&violation),
    })
}

pub fn evaluate_santos1(scan: &AngleScan, eta: DetectionEfficiency) -> Result<SantosIResult> {
    santos1_from_visibilities(visibilities(scan)?, eta)
}

struct Sums {
    n: f64,
    total: f64,
    squares: f64,
    cosine: f64,
    cos: Vec<f64>,
}

fn sums(scan: &AngleScan) -> Result<Sums> {
    scan.check_grid()?;
    let cos: Vec<f64> = scan.angles.iter().map(|a| (2.0 * a.radians()).cos()).collect();
    let r = scan.values();
    let total: f64 = r.iter().sum();
    if total == 0.0 {
        return Err(Error::Division("total coincidence rate of the scan is zero".into()));
    }
    Ok(Sums {
        n: scan.n as f64,
        total,
        squares: r.iter().map(|x| x * x).sum(),
        cosine: r.iter().zip(&cos).map(|(x, c)| x * c).sum(),
        cos,
    })
}

/// `V = 2 Σ R(φ_j) cos 2φ_j / Σ R(φ_j)`.
pub fn fringe_v(scan: &AngleScan) -> Result<UncertainValue> {
    let s = sums(scan)?;
    let v = 2.0 * s.cosine / s.total;
    Ok(propagate(scan, v, |j| {
        2.0 * s.cos[j] / s.total - 2.0 * s.cosine / (s.total * s.total)
    }))
}

/// `D(η) = (4/3π) √(2/3η − ½ − sin⁴x/x⁴) (V − sin²x/x²)₊^{3/2}` with `x = πη/2`.
pub fn bound_d(eta: DetectionEfficiency, v: UncertainValue) -> Result<UncertainValue> {
    let s = sinc2(eta);
    let radicand = 2.0 / (3.0 * eta.value()) - 0.5 - s * s;
    if radicand < 0.0 {
        return Err(Error::Domain(format!(
            "D(η) radicand is negative ({radicand}) at η = {}",
            eta.value()
        )));
    }
    let k = 4.0 / (3.0 * PI) * radicand.sqrt();
    Ok(v.map(
        |x| if x > s { k * (x - s).powf(1.5) } else { 0.0 },
        |x| if x > s { 1.5 * k * (x - s).sqrt() } else { 0.0 },
    ))
}

/// `Δ_min² = n ΣR²/(ΣR)² − 2 (ΣR cos 2φ)²/(ΣR)² − 1`.
///
/// On the uniform grid this equals `n Σ eⱼ² / (ΣR)²` with `eⱼ` the residuals of
/// the least-squares fit `a + b cos 2φ`, which is how it is evaluated: the
/// direct form loses about eight digits to cancellation on pure fringes. The
/// direct form is still computed as a consistency check.
fn delta_squared(scan: &AngleScan, s: &Sums) -> Result<f64> {
    let t2 = s.total * s.total;
    let direct = s.n * s.squares / t2 - 2.0 * s.cosine * s.cosine / t2 - 1.0;
    if direct < -DELTA_RADICAND_TOLERANCE {
        return Err(Error::Statistics(format!("Δ_min² = {direct} is negative")));
    }
    let mean = s.total / s.n;
    let amp = 2.0 * s.cosine / s.n;
    let rss: f64 = scan
        .rates
        .iter()
        .zip(&s.cos)
        .map(|(r, c)| (r.value - mean - amp * c).powi(2))
        .sum();
    Ok(s.n * rss / t2)
}

/// Fringe-shape statistic `Δ_min`.
///
/// The sigma comes from first-order propagation of `Δ²` and is reported as
/// `√(Δ² + σ²_{Δ²}) − Δ`, which tends to `σ_{Δ²}/2Δ` for well-resolved `Δ` and
/// stays finite at `Δ = 0`. Prefer [`delta_min_resampled`] when
/// per-acquisition scans exist.
pub fn delta_min(scan: &AngleScan) -> Result<UncertainValue> {
    let s = sums(scan)?;
    let d2 = delta_squared(scan, &s)?;
    let t = s.total;
    let var = propagate(scan, d2, |j| {
        let r = scan.rates[j].value;
        2.0 * s.n * r / (t * t) - 2.0 * s.n * s.squares / t.powi(3) - 4.0 * s.cosine * s.cos[j] / (t * t)
            + 4.0 * s.cosine * s.cosine / t.powi(3)
    })
    .sigma;
    let d = d2.sqrt();
    Ok(UncertainValue {
        value: d,
        sigma: (d2 + var).sqrt() - d,
    })
}

/// `Δ_min` of `aggregate`, with sigma = spread of per-acquisition `Δ_min` / √N.
pub fn delta_min_resampled(aggregate: &AngleScan, per_acquisition: &[AngleScan]) -> Result<UncertainValue> {
    let value = delta_min(aggregate)?.value;
    let n = per_acquisition.len();
    if n < 2 {
        return Err(Error::Statistics(format!(
            "resampled Δ_min needs at least 2 acquisitions, got {n}"
        )));
    }
    let ds = per_acquisition
        .iter()
        .map(|s| delta_min(s).map(|d| d.value))
        .collect::<Result<Vec<_>>>()?;
    let mean = ds.iter().sum::<f64>() / n as f64;
    let var = ds.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(UncertainValue {
        value,
        sigma: (var / n as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SantosIIResult {
    pub fringe_v: UncertainValue,
    pub delta_min: UncertainValue,
    pub bound_d: UncertainValue,
    /// `D − Δ_min`.
    pub violation: UncertainValue,
    pub significance: f64,
    pub n: usize,
}

/// The fringe-shape test with a caller-supplied `Δ_min` (for example resampled).
pub fn santos2_with_delta(scan: &AngleScan, eta: DetectionEfficiency, delta: UncertainValue) -> Result<SantosIIResult> {
    let v = fringe_v(scan)?;
    let d = bound_d(eta, v)?;
    // D and Δ_min are functions of the same rates
    let violation = d.sub_worst_case(delta);
    Ok(SantosIIResult {
        fringe_v: v,
        delta_min: delta,
        bound_d: d,
        violation,
        significance: significance(&violation),
        n: scan.n,
    })
}

pub fn evaluate_santos2(scan: &AngleScan, eta: DetectionEfficiency) -> Result<SantosIIResult> {
    santos2_with_delta(scan, eta, delta_min(scan)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RTot {
    /// Four times the mean rate of the full scan.
    ScanMean,
    /// Coincidence rate with the polarizers removed.
    Measured(UncertainValue),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RTotConvention {
    Measured,
    FourTimesScanMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CHResult {
    pub statistic: UncertainValue,
    pub bound: f64,
    /// `statistic − ¼`.
    pub violation: UncertainValue,
    pub significance: f64,
    pub r_tot: UncertainValue,
    pub r_tot_convention: RTotConvention,
}

/// `|R(π/8) − R(3π/8)| / R_tot`.
pub fn ch_statistic(scan: &AngleScan, r_tot: RTot) -> Result<CHResult> {
    let ia = scan
        .index_of(FRAC_PI_8)
        .ok_or_else(|| Error::Grid(format!("π/8 is not on the n = {} grid", scan.n)))?;
    let ib = scan
        .index_of(3.0 * FRAC_PI_8)
        .ok_or_else(|| Error::Grid(format!("3π/8 is not on the n = {} grid", scan.n)))?;
    let (a, b) = (scan.rates[ia], scan.rates[ib]);
    let diff = a.value - b.value;
    let sign = diff.signum();
    let (statistic, tot, convention) = match r_tot {
        RTot::ScanMean => {
            scan.check_grid()?;
            let total: f64 = scan.values().iter().sum();
            let n = scan.n as f64;
            let tot = 4.0 * total / n;
            if tot == 0.0 {
                return Err(Error::Division("R_tot is zero".into()));
            }
            let stat = propagate(scan, diff.abs() / tot, |j| {
                let direct = if j == ia {
                    sign
                } else if j == ib {
                    -sign
                } else {
                    0.0
                };
                direct / tot - diff.abs() * 4.0 / (n * tot * tot)
            });
            let tot_sigma = 4.0 / n * scan.sigmas().iter().map(|s| s * s).sum::<f64>().sqrt();
            (
                stat,
                UncertainValue {
                    value: tot,
                    sigma: tot_sigma,
                },
                RTotConvention::FourTimesScanMean,
            )
        }
        RTot::Measured(t) => {
            if t.value == 0.0 {
                return Err(Error::Division("R_tot is zero".into()));
            }
            let d = UncertainValue {
                value: diff.abs(),
                sigma: a.sigma.hypot(b.sigma),
            };
            (d.checked_div(t)?, t, RTotConvention::Measured)
        }
    };
    let violation = UncertainValue {
        value: statistic.value - CH_BOUND,
        sigma: statistic.sigma,
    };
    Ok(CHResult {
        statistic,
        bound: CH_BOUND,
        violation,
        significance: significance(&violation),
        r_tot: tot,
        r_tot_convention: convention,
    })
}
