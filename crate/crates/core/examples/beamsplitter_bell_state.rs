//! Orthogonally polarized photons on a 50/50 splitter, post-selected on
//! different output ports, give the Bell state |ψ+⟩ with weight ½.

use std::f64::consts::PI;

use lhvtest::qm::{
    apply_beamsplitter, coincidence_probability, postselect_different_paths, AnalyzerSetting, Pol, TwoPhotonState,
};

fn main() -> lhvtest::Result<()> {
    let out = apply_beamsplitter(&TwoPhotonState::input(Pol::H, Pol::V))?;
    for ((a, b), amp) in out.terms() {
        println!("{:?}{:?} {:?}{:?}  {:+.4}", a.path, a.pol, b.path, b.pol, amp);
    }
    let (kept, weight) = postselect_different_paths(&out)?;
    println!("post-selection weight {weight:.4}");
    println!("distance to psi+ {:.2e}", kept.distance(&TwoPhotonState::psi_plus()));

    println!("\n{:>8} {:>10}", "phi/pi", "P(t, r)");
    for j in 0..=8 {
        let phi = PI * j as f64 / 8.0;
        let p = coincidence_probability(&kept, &AnalyzerSetting::scan_point(phi)?);
        println!("{:>8.3} {:>10.6}", j as f64 / 8.0, p);
    }
    Ok(())
}
