//! Event-level Monte Carlo of the pulsed coincidence experiment.
//!
//! Per laser pulse the number of emitted pairs is Poisson. A pair leaves the
//! beamsplitter by different ports with probability ½ (pairs sharing a port
//! are dropped), then passes the two analyzers according to
//! [`joint_passage`] and is detected with probability `η` per arm. Emission
//! runs at `2 R₀` so that the post-selected pair rate is `R₀`. Detectors do
//! not resolve photon number: several photons in one pulse give one click.
//! Background clicks are a Poisson process per detector.
//!
//! Every `t` click outside an open window is a valid TAC start and opens a
//! window of `window_ns`; the first `r` click at or after the start and before
//! the window closes is a coincidence.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::DetectionEfficiency;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::qm::{joint_passage, AnalyzerSetting, JointPassage};
use crate::rng::stream_rng;
use crate::scan::{grid_angle, CountRecord, Label};

const PAIRS: u64 = 0;
const BACKGROUND_T: u64 = 1;
const BACKGROUND_R: u64 = 2;
/// Angle index used for the background run's random streams.
const BACKGROUND_RUN: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseTrainConfig {
    pub repetition_rate: f64,
    /// Mean number of emitted pairs per pulse, before post-selection.
    pub pairs_per_pulse_mean: f64,
    pub duration_s: f64,
}

impl PulseTrainConfig {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            repetition_rate: cfg.repetition_rate,
            pairs_per_pulse_mean: 2.0 * cfg.pair_rate_r0 / cfg.repetition_rate,
            duration_s: cfg.acquisition_duration_s,
        }
    }

    pub fn pulses(&self) -> u64 {
        (self.duration_s * self.repetition_rate).round() as u64
    }

    fn period_ns(&self) -> f64 {
        1e9 / self.repetition_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub eta: DetectionEfficiency,
    pub dark_rate: f64,
    pub dead_time_ns: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TacModel {
    pub window_ns: f64,
}

/// The acquisitions taken at one analyzer setting (or with the pump rotated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedRun {
    /// `None` for a background run.
    pub phi: Option<f64>,
    pub records: Vec<CountRecord>,
    pub config: ExperimentConfig,
    pub seed: u64,
}

struct Arms {
    t: Vec<f64>,
    r: Vec<f64>,
}

fn zero_truncated_poisson(rng: &mut ChaCha8Rng, mean: f64) -> u32 {
    // inversion from k = 1; the loop almost never runs past 2 at these means
    let mut u = rng.gen::<f64>() * -(-mean).exp_m1();
    let mut p = mean * (-mean).exp();
    let mut k = 1;
    while u > p && k < 1000 {
        u -= p;
        k += 1;
        p *= mean / k as f64;
    }
    k
}

/// Click times (ns) of photons from pairs, one entry per clicking pulse.
fn pair_clicks(
    rng: &mut ChaCha8Rng,
    pulses: &PulseTrainConfig,
    passage: &JointPassage,
    eta_t: f64,
    eta_r: f64,
) -> Arms {
    let mut arms = Arms {
        t: Vec::new(),
        r: Vec::new(),
    };
    let mean = pulses.pairs_per_pulse_mean;
    if mean <= 0.0 {
        return arms;
    }
    let p_active = -(-mean).exp_m1();
    let gap = Geometric::new(p_active).expect("0 < p <= 1");
    let total = pulses.pulses();
    let period = pulses.period_ns();
    let mut k: u64 = 0;
    loop {
        k = match k.checked_add(gap.sample(rng)) {
            Some(next) if next < total => next,
            _ => break,
        };
        let (mut click_t, mut click_r) = (false, false);
        for _ in 0..zero_truncated_poisson(rng, mean) {
            if rng.gen::<f64>() >= 0.5 {
                continue;
            }
            let u: f64 = rng.gen();
            let (pass_t, pass_r) = if u < passage.both {
                (true, true)
            } else if u < passage.both + passage.t_only {
                (true, false)
            } else if u < passage.both + passage.t_only + passage.r_only {
                (false, true)
            } else {
                (false, false)
            };
            click_t |= pass_t && rng.gen::<f64>() < eta_t;
            click_r |= pass_r && rng.gen::<f64>() < eta_r;
        }
        let time = k as f64 * period;
        if click_t {
            arms.t.push(time);
        }
        if click_r {
            arms.r.push(time);
        }
        k += 1;
    }
    arms
}

fn background_clicks(rng: &mut ChaCha8Rng, rate: f64, duration_ns: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let gap = Exp::new(rate * 1e-9).expect("positive rate");
    let mut t = gap.sample(rng);
    while t < duration_ns {
        out.push(t);
        t += gap.sample(rng);
    }
    out
}

fn merge(a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Non-paralyzable dead time: clicks within `dead_ns` of the last recorded one are lost.
fn apply_dead_time(clicks: Vec<f64>, dead_ns: f64) -> Vec<f64> {
    if dead_ns <= 0.0 {
        return clicks;
    }
    let mut out = Vec::with_capacity(clicks.len());
    let mut free_at = f64::NEG_INFINITY;
    for c in clicks {
        if c >= free_at {
            out.push(c);
            free_at = c + dead_ns;
        }
    }
    out
}

/// `(valid_starts, coincidences)` for sorted click times.
fn tac(t: &[f64], r: &[f64], tac: &TacModel) -> (u64, u64) {
    let (mut starts, mut coincidences) = (0, 0);
    let mut closes = f64::NEG_INFINITY;
    let mut j = 0;
    for &start in t {
        if start < closes {
            continue;
        }
        starts += 1;
        closes = start + tac.window_ns;
        while j < r.len() && r[j] < start {
            j += 1;
        }
        if j < r.len() && r[j] < closes {
            coincidences += 1;
            // a stop is consumed by the window it closes
            j += 1;
        }
    }
    (starts, coincidences)
}

fn detectors(cfg: &ExperimentConfig) -> (DetectorModel, DetectorModel) {
    let d = |eta| DetectorModel {
        eta,
        dark_rate: cfg.background_rate,
        dead_time_ns: cfg.dead_time_ns,
    };
    (d(cfg.eta_t), d(cfg.eta_r))
}

fn acquisition(cfg: &ExperimentConfig, setting: Option<&AnalyzerSetting>, seed: u64, path: [u64; 2]) -> CountRecord {
    let pulses = PulseTrainConfig::from_config(cfg);
    let (det_t, det_r) = detectors(cfg);
    let duration_ns = cfg.acquisition_duration_s * 1e9;
    let stream = |purpose| stream_rng(seed, &[path[0], path[1], purpose]);
    let pairs = match setting {
        Some(s) => pair_clicks(
            &mut stream(PAIRS),
            &pulses,
            &joint_passage(cfg.state_visibility, s),
            det_t.eta.value(),
            det_r.eta.value(),
        ),
        None => Arms {
            t: Vec::new(),
            r: Vec::new(),
        },
    };
    let t = merge(
        pairs.t,
        background_clicks(&mut stream(BACKGROUND_T), det_t.dark_rate, duration_ns),
    );
    let r = merge(
        pairs.r,
        background_clicks(&mut stream(BACKGROUND_R), det_r.dark_rate, duration_ns),
    );
    let t = apply_dead_time(t, det_t.dead_time_ns);
    let r = apply_dead_time(r, det_r.dead_time_ns);
    let (valid_starts, coincidences) = tac(
        &t,
        &r,
        &TacModel {
            window_ns: cfg.window_ns,
        },
    );
    CountRecord {
        singles_t: t.len() as u64,
        singles_r: r.len() as u64,
        coincidences,
        valid_starts,
        duration_s: cfg.acquisition_duration_s,
        label: if setting.is_some() {
            Label::Signal
        } else {
            Label::Background
        },
    }
}

fn checked(cfg: &ExperimentConfig) -> Result<()> {
    cfg.validate()?;
    for w in cfg.warnings() {
        log::warn!("{w}");
    }
    Ok(())
}

/// One acquisition of `cfg.acquisition_duration_s` at `setting`.
pub fn simulate_acquisition(cfg: &ExperimentConfig, setting: &AnalyzerSetting, seed: u64) -> Result<CountRecord> {
    checked(cfg)?;
    Ok(acquisition(cfg, Some(setting), seed, [0, 0]))
}

/// One acquisition with pair generation off; only background clicks remain.
pub fn simulate_background_run(cfg: &ExperimentConfig, seed: u64) -> Result<CountRecord> {
    checked(cfg)?;
    Ok(acquisition(cfg, None, seed, [BACKGROUND_RUN, 0]))
}

fn run(
    cfg: &ExperimentConfig,
    setting: Option<AnalyzerSetting>,
    phi: Option<f64>,
    index: u64,
    seed: u64,
) -> SimulatedRun {
    let records = (0..cfg.acquisitions as u64)
        .into_par_iter()
        .map(|a| acquisition(cfg, setting.as_ref(), seed, [index, a]))
        .collect();
    SimulatedRun {
        phi,
        records,
        config: cfg.clone(),
        seed,
    }
}

/// A full scan: one run per grid angle (`t` at π/4, `r` at π/4 + φ_j) plus one background run.
pub fn simulate_scan(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<(Vec<SimulatedRun>, SimulatedRun)> {
    if n < 4 {
        return Err(Error::Domain(format!("scan needs n >= 4, got {n}")));
    }
    checked(cfg)?;
    let settings = (0..n)
        .map(|j| AnalyzerSetting::scan_point(grid_angle(j, n)))
        .collect::<Result<Vec<_>>>()?;
    let signal = settings
        .into_par_iter()
        .enumerate()
        .map(|(j, s)| run(cfg, Some(s), Some(grid_angle(j, n)), j as u64, seed))
        .collect();
    let background = run(cfg, None, None, BACKGROUND_RUN, seed);
    Ok((signal, background))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            pair_rate_r0: 2000.0,
            window_ns: 10.0,
            acquisitions: 4,
            acquisition_duration_s: 5.0,
            background_rate: 0.0,
            ..ExperimentConfig::reference()
        }
    }

    fn at(phi: f64) -> AnalyzerSetting {
        AnalyzerSetting::scan_point(phi).unwrap()
    }

    #[test]
    fn tac_semantics() {
        let w = TacModel { window_ns: 10.0 };
        // simultaneous stop counts; a start inside an open window is ignored
        assert_eq!(tac(&[0.0, 5.0, 20.0], &[0.0, 25.0], &w), (2, 2));
        // only the first stop in a window counts, stops before the start never do
        assert_eq!(tac(&[10.0], &[1.0, 12.0, 13.0], &w), (1, 1));
        // the window is half-open
        assert_eq!(tac(&[0.0], &[10.0], &w), (1, 0));
        assert_eq!(tac(&[], &[1.0], &w), (0, 0));
    }

    #[test]
    fn dead_time_is_non_paralyzable() {
        assert_eq!(
            apply_dead_time(vec![0.0, 10.0, 40.0, 55.0, 85.0], 50.0),
            vec![0.0, 55.0]
        );
        assert_eq!(apply_dead_time(vec![0.0, 1.0], 0.0), vec![0.0, 1.0]);
    }

    #[test]
    fn zero_truncated_poisson_mean() {
        let mut rng = stream_rng(3, &[]);
        let mean = 0.8;
        let n = 200_000;
        let s: u64 = (0..n).map(|_| zero_truncated_poisson(&mut rng, mean) as u64).sum();
        let expected = mean / -(-mean).exp_m1();
        assert!((s as f64 / n as f64 - expected).abs() < 0.01);
    }

    #[test]
    fn fringe_null_has_no_true_coincidences() {
        let cfg = ExperimentConfig {
            state_visibility: 1.0,
            ..small()
        };
        let rec = simulate_acquisition(&cfg, &at(FRAC_PI_2), 1).unwrap();
        assert_eq!(rec.coincidences, 0);
        assert!(rec.singles_t > 1000);
    }

    #[test]
    fn fringe_maximum_matches_rate_model() {
        let cfg = ExperimentConfig {
            state_visibility: 1.0,
            acquisition_duration_s: 30.0,
            ..small()
        };
        let rec = simulate_acquisition(&cfg, &at(0.0), 11).unwrap();
        let expected = crate::qm::predicted_rates(&cfg, 0.0).coincidences * 30.0;
        assert!((rec.coincidences as f64 - expected).abs() < 3.0 * expected.sqrt());
        rec.validate().unwrap();
    }

    #[test]
    fn background_examples() {
        let quiet = simulate_background_run(&small(), 5).unwrap();
        assert_eq!(
            (quiet.singles_t, quiet.singles_r, quiet.coincidences, quiet.valid_starts),
            (0, 0, 0, 0)
        );
        let cfg = ExperimentConfig {
            background_rate: 1000.0,
            acquisition_duration_s: 30.0,
            ..small()
        };
        let rec = simulate_background_run(&cfg, 9).unwrap();
        assert_eq!(rec.label, Label::Background);
        for s in [rec.singles_t, rec.singles_r] {
            assert!((s as f64 - 30_000.0).abs() < 3.0 * 30_000f64.sqrt(), "{s}");
        }
    }

    #[test]
    fn determinism() {
        let cfg = ExperimentConfig {
            background_rate: 500.0,
            ..small()
        };
        assert_eq!(
            simulate_acquisition(&cfg, &at(0.3), 77).unwrap(),
            simulate_acquisition(&cfg, &at(0.3), 77).unwrap()
        );
        assert_ne!(
            simulate_acquisition(&cfg, &at(0.3), 77).unwrap(),
            simulate_acquisition(&cfg, &at(0.3), 78).unwrap()
        );
    }

    #[test]
    fn scan_shape() {
        let (signal, background) = simulate_scan(&small(), 8, 4).unwrap();
        assert_eq!(signal.len(), 8);
        assert!(signal.iter().all(|r| r.records.len() == 4));
        assert_eq!(background.phi, None);
        assert!(background.records.iter().all(|r| r.label == Label::Background));
        assert!(matches!(simulate_scan(&small(), 3, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = ExperimentConfig {
            window_ns: 0.0,
            ..small()
        };
        assert!(matches!(simulate_acquisition(&cfg, &at(0.0), 1), Err(Error::Config(_))));
    }
}
