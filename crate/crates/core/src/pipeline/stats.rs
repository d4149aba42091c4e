use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scan::{AngleScan, CountRecord};
use crate::uncertain::UncertainValue;

/// Mean coincidence rate over acquisitions, sigma = sample std / √N.
///
/// A single record falls back to the Poisson sigma `√C / T`.
pub fn aggregate_acquisitions(records: &[CountRecord]) -> Result<UncertainValue> {
    aggregate_by(records, CountRecord::coincidence_rate, |r| r.coincidences)
}

pub(crate) fn aggregate_by(
    records: &[CountRecord],
    rate: impl Fn(&CountRecord) -> f64,
    counts: impl Fn(&CountRecord) -> u64,
) -> Result<UncertainValue> {
    for r in records {
        r.validate()?;
    }
    match records {
        [] => Err(Error::Domain("no records to aggregate".into())),
        [one] => Ok(UncertainValue {
            value: rate(one),
            sigma: (counts(one) as f64).sqrt() / one.duration_s,
        }),
        _ => {
            let rates: Vec<f64> = records.iter().map(rate).collect();
            Ok(mean_and_error(&rates))
        }
    }
}

/// Sample mean with sigma = sample std / √N (N ≥ 2).
pub(crate) fn mean_and_error(xs: &[f64]) -> UncertainValue {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    UncertainValue {
        value: mean,
        sigma: (var / n).sqrt(),
    }
}

/// `signal − background` with sigmas in quadrature. Negative results are kept.
pub fn subtract_background(signal: UncertainValue, background: UncertainValue) -> UncertainValue {
    signal - background
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosSquaredFit {
    pub amplitude: f64,
    pub offset: f64,
    /// Pearson correlation between fitted and observed rates; NaN when undefined.
    pub correlation_r: f64,
    pub correlation_defined: bool,
    pub residual_rms: f64,
}

impl CosSquaredFit {
    pub fn eval(&self, phi: f64) -> f64 {
        self.amplitude * phi.cos().powi(2) + self.offset
    }
}

/// Least-squares `a cos²φ + b` through the scan values (unweighted).
pub fn fit_cos_squared(scan: &AngleScan) -> Result<CosSquaredFit> {
    if scan.n < 4 {
        return Err(Error::Domain(format!("fit needs n >= 4, got {}", scan.n)));
    }
    let x: Vec<f64> = scan.angles.iter().map(|a| a.radians().cos().powi(2)).collect();
    let y = scan.values();
    let n = y.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let amplitude = sxy / sxx;
    let offset = my - amplitude * mx;
    let fitted: Vec<f64> = x.iter().map(|v| amplitude * v + offset).collect();
    let residual_rms = (y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n).sqrt();
    let correlation_r = pearson(&fitted, &y);
    Ok(CosSquaredFit {
        amplitude,
        offset,
        correlation_r,
        correlation_defined: correlation_r.is_finite(),
        residual_rms,
    })
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    // relative to the data scale, a spread this small is rounding noise
    let scale = ma.abs().max(mb.abs()).max(f64::MIN_POSITIVE);
    if va.sqrt() <= 1e-12 * scale * n || vb.sqrt() <= 1e-12 * scale * n {
        return f64::NAN;
    }
    cov / (va * vb).sqrt()
}
