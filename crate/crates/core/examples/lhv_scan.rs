//! Rates predicted by one sampled hidden-variable model, and what the two
//! bounds say about them.

use lhvtest::inequalities::{evaluate_santos1, evaluate_santos2};
use lhvtest::lhv::{model_scan, sample_admissible_model, Family, ModelDocument, QuadratureSpec};
use lhvtest::DetectionEfficiency;

fn main() -> lhvtest::Result<()> {
    let eta = DetectionEfficiency::NOMINAL;
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let quad = QuadratureSpec::default();
    let model = sample_admissible_model(seed, eta, Family::OneTier)?;
    println!("P(x) harmonics {:?}", model.p1.coeffs);

    let scan = model_scan(&model, 8, &quad)?;
    for (a, r) in scan.angles.iter().zip(&scan.rates) {
        println!("phi {:.4}  R12/R0 {:.8}", a.radians(), r.value);
    }
    let s1 = evaluate_santos1(&scan, eta)?;
    let s2 = evaluate_santos2(&scan, eta)?;
    println!(
        "V_B/V_A = {:.5}  F = {:.5}  (F - ratio = {:+.5})",
        s1.ratio.value, s1.bound_f.value, s1.violation.value
    );
    println!(
        "V = {:.5}  D = {:.5}  Delta_min = {:.5}",
        s2.fringe_v.value, s2.bound_d.value, s2.delta_min.value
    );

    // models are plain JSON
    let doc = ModelDocument::from(model);
    println!("\n{}", doc.to_json());
    Ok(())
}
