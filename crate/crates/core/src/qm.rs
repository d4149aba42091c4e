//! Quantum predictions for the beamsplitter source.
//!
//! A collinear type-II pair `|H V⟩` enters one port of a lossless 50/50
//! non-polarizing beamsplitter. Keeping only the events where the photons
//! leave by different ports leaves the Bell state
//! `|ψ+⟩ = (|V_r H_t⟩ + |H_r V_t⟩)/√2` with probability ½.
//!
//! States live in the two-photon Fock space over the modes
//! `{in, r, t} × {H, V}`. Each creation operator on the input port maps as
//! `a†_in → (a†_r + a†_t)/√2`, a real phase convention under which the
//! different-path part is exactly `|ψ+⟩`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::scan::{grid_angle, AngleScan};
use crate::uncertain::UncertainValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Path {
    In,
    R,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub path: Path,
    pub pol: Pol,
}

impl Mode {
    pub const fn new(path: Path, pol: Pol) -> Self {
        Self { path, pol }
    }
}

/// Two-photon Fock state; keys are sorted mode pairs, `(m, m)` is double occupancy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TwoPhotonState {
    amplitudes: BTreeMap<(Mode, Mode), Complex64>,
}

fn key(a: Mode, b: Mode) -> (Mode, Mode) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TwoPhotonState {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_amplitudes(terms: impl IntoIterator<Item = ((Mode, Mode), Complex64)>) -> Self {
        let mut s = Self::zero();
        for ((a, b), amp) in terms {
            s.add(a, b, amp);
        }
        s
    }

    /// Both photons in the input port with polarizations `p1`, `p2`.
    pub fn input(p1: Pol, p2: Pol) -> Self {
        Self::from_amplitudes([(
            (Mode::new(Path::In, p1), Mode::new(Path::In, p2)),
            Complex64::new(1.0, 0.0),
        )])
    }

    pub fn psi_plus() -> Self {
        let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::from_amplitudes([
            ((Mode::new(Path::R, Pol::V), Mode::new(Path::T, Pol::H)), c),
            ((Mode::new(Path::R, Pol::H), Mode::new(Path::T, Pol::V)), c),
        ])
    }

    fn add(&mut self, a: Mode, b: Mode, amp: Complex64) {
        *self.amplitudes.entry(key(a, b)).or_default() += amp;
    }

    pub fn amplitude(&self, a: Mode, b: Mode) -> Complex64 {
        self.amplitudes.get(&key(a, b)).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Mode, Mode), &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    fn scaled(&self, k: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|(m, a)| (*m, a * k)).collect(),
        }
    }

    /// Largest amplitude difference against `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut keys: Vec<_> = self.amplitudes.keys().chain(other.amplitudes.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|&(a, b)| (self.amplitude(a, b) - other.amplitude(a, b)).norm())
            .fold(0.0, f64::max)
    }
}

/// Send a two-photon state through the splitter from the input port.
pub fn apply_beamsplitter(input: &TwoPhotonState) -> Result<TwoPhotonState> {
    let split = |m: Mode| {
        [
            (Mode::new(Path::R, m.pol), FRAC_1_SQRT_2),
            (Mode::new(Path::T, m.pol), FRAC_1_SQRT_2),
        ]
    };
    let mut out = TwoPhotonState::zero();
    for (&(a, b), &amp) in input.terms() {
        if a.path != Path::In || b.path != Path::In {
            return Err(Error::Domain(format!(
                "beamsplitter input has a photon outside the input port: {a:?}, {b:?}"
            )));
        }
        // |1a 1b⟩ = a†b†|0⟩ and |2a⟩ = (a†)²/√2 |0⟩
        let op_coeff = if a == b { FRAC_1_SQRT_2 } else { 1.0 };
        for (u, cu) in split(a) {
            for (v, cv) in split(b) {
                // a†u a†v |0⟩ is |1u 1v⟩, or √2 |2u⟩ when u = v
                let fock = if u == v { SQRT_2 } else { 1.0 };
                out.add(u, v, amp * (op_coeff * cu * cv * fock));
            }
        }
    }
    Ok(out)
}

/// Keep the components with one photon in `r` and one in `t`.
///
/// Returns the renormalized kept state and its weight relative to the input norm.
pub fn postselect_different_paths(state: &TwoPhotonState) -> Result<(TwoPhotonState, f64)> {
    let total = state.norm();
    let kept = TwoPhotonState {
        amplitudes: state
            .terms()
            .filter(|((a, b), _)| a.path == Path::R && b.path == Path::T)
            .map(|(k, v)| (*k, *v))
            .collect(),
    };
    let weight = kept.norm();
    if total == 0.0 || weight <= f64::EPSILON * total {
        return Err(Error::PostSelectionEmpty);
    }
    Ok((kept.scaled(1.0 / weight.sqrt()), weight / total))
}

/// Polarizer orientations on the two arms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerSetting {
    pub theta_t: Angle,
    pub theta_r: Angle,
}

impl AnalyzerSetting {
    /// `t` polarizer fixed at π/4, `r` polarizer at π/4 + φ.
    pub fn scan_point(phi: f64) -> Result<Self> {
        Ok(Self {
            theta_t: Angle::new(FRAC_PI_4)?,
            theta_r: Angle::new(FRAC_PI_4 + phi)?,
        })
    }

    /// Relative orientation `θ_r − θ_t`.
    pub fn phi(&self) -> f64 {
        self.theta_r.radians() - self.theta_t.radians()
    }
}

fn projection(pol: Pol, theta: f64) -> f64 {
    match pol {
        Pol::H => theta.cos(),
        Pol::V => theta.sin(),
    }
}

/// `|⟨θ_t, θ_r|state⟩|²` over the one-photon-per-arm components.
pub fn coincidence_probability(state: &TwoPhotonState, setting: &AnalyzerSetting) -> f64 {
    let (tt, tr) = (setting.theta_t.radians(), setting.theta_r.radians());
    let amp: Complex64 = state
        .terms()
        .filter(|((a, b), _)| a.path == Path::R && b.path == Path::T)
        .map(|((r, t), amp)| amp * (projection(r.pol, tr) * projection(t.pol, tt)))
        .sum();
    amp.norm_sqr()
}

/// Joint analyzer outcome probabilities for one post-selected pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointPassage {
    pub both: f64,
    pub t_only: f64,
    pub r_only: f64,
    pub neither: f64,
}

/// `|ψ+⟩` statistics with visibility `v` mixed in at the probability level.
///
/// Each marginal is ½ and `both = (1 + v cos 2φ)/4`.
pub fn joint_passage(visibility: f64, setting: &AnalyzerSetting) -> JointPassage {
    let quantum = coincidence_probability(&TwoPhotonState::psi_plus(), setting);
    let both = visibility * quantum + (1.0 - visibility) * 0.25;
    let single = 0.5 - both;
    JointPassage {
        both,
        t_only: single,
        r_only: single,
        neither: 1.0 - both - 2.0 * single,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedRates {
    pub singles_t: f64,
    pub singles_r: f64,
    pub coincidences: f64,
}

/// Mean detection rates: `½ η R0` per arm and `¼ η_t η_r R0 [1 + V cos 2φ]`.
pub fn predicted_rates(cfg: &ExperimentConfig, phi: f64) -> PredictedRates {
    let (et, er) = (cfg.eta_t.value(), cfg.eta_r.value());
    let r0 = cfg.pair_rate_r0;
    PredictedRates {
        singles_t: 0.5 * et * r0,
        singles_r: 0.5 * er * r0,
        coincidences: 0.25 * et * er * r0 * (1.0 + cfg.state_visibility * (2.0 * phi).cos()),
    }
}

/// Predicted coincidence rates on the `n`-point grid, zero sigma.
pub fn fringe_curve(cfg: &ExperimentConfig, n: usize) -> Result<AngleScan> {
    if n < 4 {
        return Err(Error::Domain(format!("fringe curve needs n >= 4, got {n}")));
    }
    AngleScan::uniform(
        (0..n)
            .map(|j| UncertainValue::exact(predicted_rates(cfg, grid_angle(j, n)).coincidences))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn m(path: Path, pol: Pol) -> Mode {
        Mode::new(path, pol)
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hv_splits_into_four_equal_terms() {
        let out = apply_beamsplitter(&TwoPhotonState::input(Pol::H, Pol::V)).unwrap();
        let expected = TwoPhotonState::from_amplitudes([
            ((m(Path::R, Pol::H), m(Path::R, Pol::V)), c(0.5)),
            ((m(Path::T, Pol::H), m(Path::T, Pol::V)), c(0.5)),
            ((m(Path::R, Pol::V), m(Path::T, Pol::H)), c(0.5)),
            ((m(Path::R, Pol::H), m(Path::T, Pol::V)), c(0.5)),
        ]);
        assert!(out.distance(&expected) < 1e-15);
        assert!((out.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hh_matches_hand_expanded_tensor_product() {
        // (a†_H)²/√2 → ((r† + t†)/√2)²/√2 = (r†² + 2 r†t† + t†²)/(2√2)
        //            = ½|2 H_r⟩ + (1/√2)|H_r H_t⟩ + ½|2 H_t⟩
        let out = apply_beamsplitter(&TwoPhotonState::input(Pol::H, Pol::H)).unwrap();
        let (hr, ht) = (m(Path::R, Pol::H), m(Path::T, Pol::H));
        let expected =
            TwoPhotonState::from_amplitudes([((hr, hr), c(0.5)), ((hr, ht), c(FRAC_1_SQRT_2)), ((ht, ht), c(0.5))]);
        assert!(out.distance(&expected) < 1e-15);
    }

    #[test]
    fn zero_state_stays_zero() {
        let out = apply_beamsplitter(&TwoPhotonState::zero()).unwrap();
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn output_modes_are_rejected_as_input() {
        assert!(matches!(
            apply_beamsplitter(&TwoPhotonState::psi_plus()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn postselection_yields_psi_plus_with_half() {
        let out = apply_beamsplitter(&TwoPhotonState::input(Pol::H, Pol::V)).unwrap();
        let (state, p) = postselect_different_paths(&out).unwrap();
        assert_eq!(p, 0.5);
        assert!(state.distance(&TwoPhotonState::psi_plus()) < 1e-15);
    }

    #[test]
    fn postselection_edge_cases() {
        let (state, p) = postselect_different_paths(&TwoPhotonState::psi_plus()).unwrap();
        assert_eq!(p, 1.0);
        assert!(state.distance(&TwoPhotonState::psi_plus()) < 1e-15);

        let bunched = TwoPhotonState::from_amplitudes([((m(Path::R, Pol::H), m(Path::R, Pol::V)), c(1.0))]);
        assert!(matches!(
            postselect_different_paths(&bunched),
            Err(Error::PostSelectionEmpty)
        ));
    }

    #[test]
    fn coincidence_probability_examples() {
        let psi = TwoPhotonState::psi_plus();
        let at = |tr: f64| {
            let s = AnalyzerSetting {
                theta_t: Angle::new(PI / 4.0).unwrap(),
                theta_r: Angle::new(tr).unwrap(),
            };
            coincidence_probability(&psi, &s)
        };
        assert!((at(PI / 4.0) - 0.5).abs() < 1e-15);
        assert!(at(3.0 * PI / 4.0).abs() < 1e-15);
        // |sin(θt + θr)|²/2 at θt = π/4, θr = 3π/8
        let direct = (PI / 4.0 + 3.0 * PI / 8.0).sin().powi(2) / 2.0;
        assert!((at(3.0 * PI / 8.0) - direct).abs() < 1e-15);
        assert!((direct - 0.426_776_695_296_636_9).abs() < 1e-15);
    }

    #[test]
    fn joint_passage_is_a_distribution() {
        for v in [0.0, 0.5, 0.978, 1.0] {
            for j in 0..16 {
                let s = AnalyzerSetting::scan_point(PI * j as f64 / 16.0).unwrap();
                let jp = joint_passage(v, &s);
                let all = [jp.both, jp.t_only, jp.r_only, jp.neither];
                assert!(all.iter().all(|&p| p >= -1e-15));
                assert!((all.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                assert!((jp.both + jp.t_only - 0.5).abs() < 1e-15);
                let phi = s.phi();
                assert!((jp.both - (1.0 + v * (2.0 * phi).cos()) / 4.0).abs() < 1e-14);
            }
        }
    }

    fn cfg(eta: f64, r0: f64, v: f64) -> ExperimentConfig {
        let e = crate::angle::DetectionEfficiency::new(eta).unwrap();
        ExperimentConfig {
            pair_rate_r0: r0,
            eta_t: e,
            eta_r: e,
            state_visibility: v,
            ..ExperimentConfig::reference()
        }
    }

    #[test]
    fn predicted_rate_examples() {
        let r = predicted_rates(&cfg(0.62, 1e6, 1.0), 0.0);
        assert!((r.singles_t - 3.1e5).abs() < 1e-6 && (r.singles_r - 3.1e5).abs() < 1e-6);
        let r = predicted_rates(&cfg(0.62, 1e6, 1.0), PI / 2.0);
        assert!(r.coincidences.abs() < 1e-9);
        let r = predicted_rates(&cfg(0.62, 1e6, 0.978), 0.0);
        // 0.25 * 0.3844 * 1e6 * 1.978
        assert!((r.coincidences - 190_085.8).abs() < 1e-6);
    }

    #[test]
    fn fringe_curve_examples() {
        let scan = fringe_curve(&cfg(0.62, 1e6, 1.0), 8).unwrap();
        let max = scan.rates[0].value;
        let shape = [
            1.0,
            0.853_553_390_593_273_8,
            0.5,
            0.146_446_609_406_726_24,
            0.0,
            0.146_446_609_406_726_24,
            0.5,
            0.853_553_390_593_273_8,
        ];
        for (r, s) in scan.rates.iter().zip(shape) {
            assert!((r.value / max - s).abs() < 1e-12);
            assert_eq!(r.sigma, 0.0);
        }
        let flat = fringe_curve(&cfg(0.62, 1e6, 0.0), 8).unwrap();
        assert!(flat.rates.iter().all(|r| (r.value - flat.rates[0].value).abs() < 1e-9));
        let quarter = fringe_curve(&cfg(0.62, 1e6, 1.0), 4).unwrap();
        let q0 = quarter.rates[0].value;
        for (r, s) in quarter.rates.iter().zip([1.0, 0.5, 0.0, 0.5]) {
            assert!((r.value / q0 - s).abs() < 1e-12);
        }
        assert!(matches!(fringe_curve(&cfg(0.62, 1e6, 1.0), 3), Err(Error::Domain(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn beamsplitter_preserves_norm(
            re in prop::array::uniform3(-1.0f64..1.0),
            im in prop::array::uniform3(-1.0f64..1.0),
        ) {
            let (h, v) = (m(Path::In, Pol::H), m(Path::In, Pol::V));
            let input = TwoPhotonState::from_amplitudes([
                ((h, h), Complex64::new(re[0], im[0])),
                ((h, v), Complex64::new(re[1], im[1])),
                ((v, v), Complex64::new(re[2], im[2])),
            ]);
            let out = apply_beamsplitter(&input).unwrap();
            prop_assert!((out.norm() - input.norm()).abs() < 1e-12);
        }

        #[test]
        fn psi_plus_fringe_is_cos_squared(phi in 0.0f64..PI) {
            let s = AnalyzerSetting::scan_point(phi).unwrap();
            let p = coincidence_probability(&TwoPhotonState::psi_plus(), &s);
            prop_assert!((p - phi.cos().powi(2) / 2.0).abs() < 1e-12);
        }

        #[test]
        fn coincidence_rate_is_even_in_phi(phi in -PI..PI) {
            let c = cfg(0.62, 1e4, 0.9);
            let a = predicted_rates(&c, phi).coincidences;
            let b = predicted_rates(&c, -phi).coincidences;
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
