//! Hidden-variable rates against independent evaluations.

use std::f64::consts::PI;

use lhvtest::lhv::{
    effective_response, lhv_coincidence_ratio, lhv_singles_ratio, model_scan, nodes, sample_admissible_model,
    sample_two_tier, AngularSeries, Arm, Correlation, Family, HiddenVariableModel, ModelDocument, QuadratureSpec, Rule,
    SamplerSpec,
};
use lhvtest::scan::grid_angle;
use lhvtest::{Angle, DetectionEfficiency};

fn eta(x: f64) -> DetectionEfficiency {
    DetectionEfficiency::new(x).unwrap()
}

/// `R₁₂(φ)/R₀` from the Fourier coefficients alone.
fn spectral(model: &HiddenVariableModel, phi: f64) -> f64 {
    let (p, q) = (&model.p1.coeffs, &model.p2.coeffs);
    // ρ coefficients relative to the uncorrelated density; perfect correlation is 2 for every k
    let c = |k: usize| match &model.rho {
        Correlation::Series { coeffs } => coeffs.coeffs.get(k).map_or(0.0, |c| c * PI * PI),
        Correlation::Perfect => 2.0,
    };
    let mut r = p[0] * q[0];
    for k in 1..p.len().min(q.len()) {
        r += c(k) * p[k] * q[k] / 4.0 * (2.0 * k as f64 * phi).cos();
    }
    r
}

#[test]
fn sampled_models_match_spectral_rates() {
    let quad = QuadratureSpec::default();
    for family in [Family::OneTier, Family::TwoTier] {
        for e in [0.3, 0.62, 0.95] {
            for seed in 0..15 {
                let m = sample_admissible_model(seed, eta(e), family).unwrap();
                let scan = model_scan(&m, 8, &quad).unwrap();
                for (j, r) in scan.rates.iter().enumerate() {
                    let want = spectral(&m, grid_angle(j, 8));
                    assert!(
                        (r.value - want).abs() < 1e-12,
                        "{family:?} η={e} seed {seed} j={j}: {} vs {want}",
                        r.value
                    );
                }
            }
        }
    }
}

#[test]
fn perfect_correlation_with_cos_squared_response() {
    // P(x) = η cos²x gives R₁₂ = η²/4 + η²/8 cos 2φ and singles η/2
    let e = 0.7;
    let m = HiddenVariableModel::symmetric(Correlation::Perfect, AngularSeries::new(vec![e / 2.0, e / 2.0]));
    let quad = QuadratureSpec::default();
    for phi in [0.0, 0.3, PI / 4.0, 1.4] {
        let r = lhv_coincidence_ratio(&m, Angle::ZERO, Angle::new(phi).unwrap(), &quad).unwrap();
        assert!((r - (e * e / 4.0 + e * e / 8.0 * (2.0 * phi).cos())).abs() < 1e-13);
        assert!((r - spectral(&m, phi)).abs() < 1e-13);
    }
    let s = lhv_singles_ratio(&m, Angle::new(0.9).unwrap(), Arm::Second, &quad).unwrap();
    assert!((s - e / 2.0).abs() < 1e-13);
}

/// `R₁₂(φ)/R₀` of a two-tier model by quadrature over all four variables `χ₁, χ₂, μ₁, μ₂`.
fn direct_two_tier(m: &lhvtest::lhv::TwoTierModel, phi: f64) -> f64 {
    let chi = nodes(Rule::Midpoint, 0.0, PI, 160);
    let mu = nodes(Rule::GaussLegendre, 0.0, 1.0, 32);
    let rho: Vec<Vec<f64>> = chi
        .x
        .iter()
        .map(|&a| chi.x.iter().map(|&b| m.rho_chi.density(a - b).unwrap()).collect())
        .collect();
    let arm = |q: &lhvtest::lhv::ResponseKernel, g: &lhvtest::lhv::MuDensity, shift: f64| -> Vec<Vec<f64>> {
        mu.x.iter()
            .zip(&mu.w)
            .map(|(&u, &w)| chi.x.iter().map(|&x| w * g.eval(u) * q.eval(u, x - shift)).collect())
            .collect()
    };
    let a1 = arm(&m.q1, &m.g1, 0.0);
    let a2 = arm(&m.q2, &m.g2, phi);
    let h = chi.w[0];
    let mut total = 0.0;
    for (i, row) in rho.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            for f1 in &a1 {
                for f2 in &a2 {
                    total += r * f1[i] * f2[j];
                }
            }
        }
    }
    total * h * h
}

#[test]
fn two_tier_rates_match_four_variable_integration() {
    let quad = QuadratureSpec::default();
    let spec = SamplerSpec::for_family(Family::TwoTier);
    let mut checked = 0;
    for seed in 0..6 {
        let m = sample_two_tier(seed, eta(0.62), &spec).unwrap();
        if !matches!(m.rho_chi, Correlation::Series { .. }) {
            continue;
        }
        let eff = effective_response(&m, &quad).unwrap();
        for phi in [0.0, PI / 8.0, 3.0 * PI / 8.0, PI / 2.0] {
            let fast = lhv_coincidence_ratio(&eff, Angle::ZERO, Angle::new(phi).unwrap(), &quad).unwrap();
            let slow = direct_two_tier(&m, phi);
            assert!((fast - slow).abs() < 1e-10, "seed {seed} φ={phi}: {fast} vs {slow}");
        }
        checked += 1;
    }
    assert!(checked >= 3);
}

#[test]
fn doubling_nodes_changes_nothing() {
    let coarse = QuadratureSpec::default();
    let fine = QuadratureSpec {
        nodes_per_axis: 2 * coarse.nodes_per_axis,
        mu_nodes: 2 * coarse.mu_nodes,
        ..coarse
    };
    for family in [Family::OneTier, Family::TwoTier] {
        for seed in 0..10 {
            let m = sample_admissible_model(seed, eta(0.5), family).unwrap();
            let a = model_scan(&m, 8, &coarse).unwrap();
            let b = model_scan(&m, 8, &fine).unwrap();
            for (x, y) in a.rates.iter().zip(&b.rates) {
                assert!((x.value - y.value).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn gauss_legendre_angles_agree_with_midpoint() {
    let mid = QuadratureSpec::default();
    let gl = QuadratureSpec {
        rule: Rule::GaussLegendre,
        ..mid
    };
    for seed in 0..5 {
        let m = sample_admissible_model(seed, eta(0.62), Family::OneTier).unwrap();
        let a = model_scan(&m, 8, &mid).unwrap();
        let b = model_scan(&m, 8, &gl).unwrap();
        for (x, y) in a.rates.iter().zip(&b.rates) {
            assert!((x.value - y.value).abs() < 1e-9);
        }
    }
}

#[test]
fn model_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let quad = QuadratureSpec::default();
    let spec = SamplerSpec::for_family(Family::TwoTier);
    let docs: Vec<ModelDocument> = vec![
        sample_admissible_model(3, eta(0.62), Family::OneTier).unwrap().into(),
        sample_two_tier(4, eta(0.62), &spec).unwrap().into(),
    ];
    for (i, doc) in docs.iter().enumerate() {
        let path = dir.path().join(format!("model{i}.json"));
        doc.save(&path).unwrap();
        let back = ModelDocument::load(&path).unwrap();
        assert_eq!(&back, doc);
        let a = model_scan(&doc.resolve(&quad).unwrap(), 8, &quad).unwrap();
        let b = model_scan(&back.resolve(&quad).unwrap(), 8, &quad).unwrap();
        assert_eq!(a, b);
    }
}
