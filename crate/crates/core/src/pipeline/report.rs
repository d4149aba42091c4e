use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::records::{AngleGroup, RecordSet};
use super::stats::{aggregate_acquisitions, fit_cos_squared, subtract_background, CosSquaredFit};
use crate::angle::DetectionEfficiency;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::inequalities::{
    ch_statistic, delta_min, delta_min_resampled, evaluate_santos1, santos2_with_delta, CHResult, RTot, SantosIIResult,
    SantosIResult,
};
use crate::scan::{grid_angle, AngleScan};
use crate::uncertain::UncertainValue;

const ANGLE_MATCH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackgroundMode {
    /// Every background record is pooled into one rate applied to all angles.
    Shared,
    /// Background records are matched to signal angles.
    PerAngle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub eta: DetectionEfficiency,
    pub r_tot: RTot,
    pub background: BackgroundMode,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            eta: DetectionEfficiency::NOMINAL,
            r_tot: RTot::ScanMean,
            background: BackgroundMode::Shared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub config: Option<ExperimentConfig>,
    pub seed: Option<u64>,
    pub input_sha256: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub phi_rad: f64,
    pub rate: UncertainValue,
    /// Set when background subtraction drove the rate below zero.
    pub negative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaSigmaMethod {
    /// Spread of per-acquisition values over √N.
    AcquisitionSpread,
    /// First-order propagation of the aggregated rates.
    Propagated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportVariant {
    pub background_subtracted: bool,
    pub scan: Vec<ScanPoint>,
    pub fit: CosSquaredFit,
    pub santos1: SantosIResult,
    pub santos2: SantosIIResult,
    pub delta_sigma: DeltaSigmaMethod,
    pub ch: CHResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub eta: f64,
    pub n: usize,
    pub acquisitions: usize,
    pub background_mode: BackgroundMode,
    /// Pooled background rate, or one per angle.
    pub background: Vec<ScanPoint>,
    pub sigmas: String,
    /// Subtracted variant first.
    pub variants: Vec<ReportVariant>,
    pub provenance: Provenance,
}

impl RunReport {
    pub fn variant(&self, background_subtracted: bool) -> &ReportVariant {
        self.variants
            .iter()
            .find(|v| v.background_subtracted == background_subtracted)
            .expect("both variants are always present")
    }
}

fn check_grid(groups: &[AngleGroup]) -> Result<()> {
    let n = groups.len();
    if n < 4 {
        return Err(Error::Grid(format!("need at least 4 signal angles, got {n}")));
    }
    for (j, g) in groups.iter().enumerate() {
        if (g.angle_rad - grid_angle(j, n)).abs() > ANGLE_MATCH {
            return Err(Error::Grid(format!(
                "signal angle {} is not on the uniform n = {n} grid (expected {})",
                g.angle_rad,
                grid_angle(j, n)
            )));
        }
    }
    Ok(())
}

/// Background rate to subtract at each signal angle.
fn background_rates(inputs: &RecordSet, mode: BackgroundMode) -> Result<Vec<ScanPoint>> {
    if inputs.background.is_empty() {
        return Err(Error::EmptyInput("no background records".into()));
    }
    let point = |phi_rad, rate: UncertainValue| ScanPoint {
        phi_rad,
        rate,
        negative: rate.value < 0.0,
    };
    match mode {
        BackgroundMode::Shared => {
            let all: Vec<_> = inputs
                .background
                .iter()
                .flat_map(|g| g.records.iter().copied())
                .collect();
            Ok(vec![point(f64::NAN, aggregate_acquisitions(&all)?)])
        }
        BackgroundMode::PerAngle => inputs
            .signal
            .iter()
            .map(|s| {
                let g = inputs
                    .background
                    .iter()
                    .find(|b| (b.angle_rad - s.angle_rad).abs() < ANGLE_MATCH)
                    .ok_or_else(|| Error::Grid(format!("no background records at angle {}", s.angle_rad)))?;
                Ok(point(s.angle_rad, aggregate_acquisitions(&g.records)?))
            })
            .collect(),
    }
}

fn variant(
    inputs: &RecordSet,
    aggregated: &[UncertainValue],
    background: &[UncertainValue],
    subtract: bool,
    options: &ReportOptions,
) -> Result<ReportVariant> {
    let rates: Vec<UncertainValue> = aggregated
        .iter()
        .zip(background)
        .map(|(&s, &b)| if subtract { subtract_background(s, b) } else { s })
        .collect();
    let scan = AngleScan::uniform(rates.clone())?;
    let per_acq = per_acquisition_scans(inputs, background, subtract)?;
    let (delta, delta_sigma) = match per_acq {
        Some(scans) => (delta_min_resampled(&scan, &scans)?, DeltaSigmaMethod::AcquisitionSpread),
        None => (delta_min(&scan)?, DeltaSigmaMethod::Propagated),
    };
    Ok(ReportVariant {
        background_subtracted: subtract,
        scan: inputs
            .signal
            .iter()
            .zip(&rates)
            .map(|(g, &rate)| ScanPoint {
                phi_rad: g.angle_rad,
                rate,
                negative: rate.value < 0.0,
            })
            .collect(),
        fit: fit_cos_squared(&scan)?,
        santos1: evaluate_santos1(&scan, options.eta)?,
        santos2: santos2_with_delta(&scan, options.eta, delta)?,
        delta_sigma,
        ch: ch_statistic(&scan, options.r_tot)?,
    })
}

/// One scan per acquisition index, when every angle has the same N ≥ 2 acquisitions.
fn per_acquisition_scans(
    inputs: &RecordSet,
    background: &[UncertainValue],
    subtract: bool,
) -> Result<Option<Vec<AngleScan>>> {
    let n_acq = inputs.signal[0].records.len();
    if n_acq < 2 || inputs.signal.iter().any(|g| g.records.len() != n_acq) {
        return Ok(None);
    }
    (0..n_acq)
        .map(|a| {
            let rates = inputs
                .signal
                .iter()
                .zip(background)
                .map(|(g, b)| {
                    let r = g.records[a].coincidence_rate();
                    UncertainValue::exact(if subtract { r - b.value } else { r })
                })
                .collect();
            AngleScan::uniform(rates)
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// Full report with background-subtracted and raw variants.
pub fn run_report(inputs: &RecordSet, options: &ReportOptions, provenance: Provenance) -> Result<RunReport> {
    check_grid(&inputs.signal)?;
    let aggregated = inputs
        .signal
        .iter()
        .map(|g| aggregate_acquisitions(&g.records))
        .collect::<Result<Vec<_>>>()?;
    let background = background_rates(inputs, options.background)?;
    let per_angle: Vec<UncertainValue> = match options.background {
        BackgroundMode::Shared => vec![background[0].rate; aggregated.len()],
        BackgroundMode::PerAngle => background.iter().map(|p| p.rate).collect(),
    };
    let variants = [true, false]
        .into_iter()
        .map(|subtract| variant(inputs, &aggregated, &per_angle, subtract, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunReport {
        eta: options.eta.value(),
        n: inputs.signal.len(),
        acquisitions: inputs.signal.iter().map(|g| g.records.len()).max().unwrap_or(0),
        background_mode: options.background,
        background,
        sigmas: "statistical only".into(),
        variants,
        provenance,
    })
}

/// Round every float to 6 significant digits; non-finite values become null.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(num) if num.is_f64() => {
            let x = num.as_f64().expect("checked f64");
            let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
            *v = serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn report_json(report: &RunReport) -> String {
    let mut v = serde_json::to_value(report).expect("report serializes");
    round_floats(&mut v);
    serde_json::to_string_pretty(&v).expect("value serializes")
}

/// `phi_rad, rate, sigma, model_rate` for the background-subtracted scan.
pub fn plot_data(report: &RunReport) -> String {
    let v = report.variant(true);
    let mut out = String::from("phi_rad,rate,sigma,model_rate\n");
    for p in &v.scan {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.phi_rad,
            p.rate.value,
            p.rate.sigma,
            v.fit.eval(p.phi_rad)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::{CountRecord, Label};

    fn rec(c: u64, label: Label) -> CountRecord {
        CountRecord {
            singles_t: 100_000,
            singles_r: 100_000,
            coincidences: c,
            valid_starts: 90_000,
            duration_s: 10.0,
            label,
        }
    }

    fn group(phi: f64, counts: &[u64], label: Label) -> AngleGroup {
        AngleGroup {
            angle_rad: phi,
            records: counts.iter().map(|&c| rec(c, label)).collect(),
        }
    }

    fn noisy_set() -> RecordSet {
        let signal = (0..8)
            .map(|j| {
                let phi = grid_angle(j, 8);
                let base = 20.0 + 2000.0 * phi.cos().powi(2);
                let counts: Vec<u64> = (0..5).map(|a| (base + 7.0 * ((a * 3 + j) % 5) as f64) as u64).collect();
                group(phi, &counts, Label::Signal)
            })
            .collect();
        RecordSet {
            signal,
            background: vec![group(0.0, &[20, 22, 18, 21, 19], Label::Background)],
        }
    }

    #[test]
    fn report_has_both_variants() {
        let r = run_report(&noisy_set(), &ReportOptions::default(), Provenance::default()).unwrap();
        assert_eq!(r.variants.len(), 2);
        assert!(r.variant(true).background_subtracted);
        assert!(!r.variant(false).background_subtracted);
        assert_eq!(r.variant(true).delta_sigma, DeltaSigmaMethod::AcquisitionSpread);
        assert_eq!((r.n, r.acquisitions), (8, 5));
        let sub = r.variant(true).scan[0].rate.value;
        let raw = r.variant(false).scan[0].rate.value;
        assert!((raw - sub - 2.0).abs() < 1e-12);
    }

    #[test]
    fn report_is_deterministic_and_rounded() {
        let a = report_json(&run_report(&noisy_set(), &ReportOptions::default(), Provenance::default()).unwrap());
        let b = report_json(&run_report(&noisy_set(), &ReportOptions::default(), Provenance::default()).unwrap());
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        let x = v["variants"][0]["santos1"]["ratio"]["value"].as_f64().unwrap();
        assert_eq!(format!("{x:.5e}").parse::<f64>().unwrap(), x);
        // the pooled background has no angle
        assert!(v["background"][0]["phi_rad"].is_null());
    }

    #[test]
    fn off_grid_signal_is_rejected() {
        let mut set = noisy_set();
        set.signal[3].angle_rad += 0.01;
        assert!(matches!(
            run_report(&set, &ReportOptions::default(), Provenance::default()),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn per_angle_background_needs_matching_angles() {
        let opts = ReportOptions {
            background: BackgroundMode::PerAngle,
            ..Default::default()
        };
        assert!(matches!(
            run_report(&noisy_set(), &opts, Provenance::default()),
            Err(Error::Grid(_))
        ));
        let mut set = noisy_set();
        set.background = set
            .signal
            .iter()
            .map(|g| group(g.angle_rad, &[20, 21], Label::Background))
            .collect();
        let r = run_report(&set, &opts, Provenance::default()).unwrap();
        assert_eq!(r.background.len(), 8);
    }

    #[test]
    fn missing_background_is_an_error() {
        let mut set = noisy_set();
        set.background.clear();
        assert!(matches!(
            run_report(&set, &ReportOptions::default(), Provenance::default()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn plot_data_rows() {
        let r = run_report(&noisy_set(), &ReportOptions::default(), Provenance::default()).unwrap();
        let text = plot_data(&r);
        assert_eq!(text.lines().count(), 9);
        assert!(text.starts_with("phi_rad,rate,sigma,model_rate\n0,"));
    }
}
