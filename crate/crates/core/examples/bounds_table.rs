//! Tabulate both bounds over detection efficiency.
//!
//! `cargo run --example bounds_table`

use lhvtest::inequalities::{bound_d, bound_f};
use lhvtest::{DetectionEfficiency, UncertainValue};

fn main() -> lhvtest::Result<()> {
    let v = UncertainValue::exact(1.0);
    println!("{:>6} {:>10} {:>10} {:>10}", "eta", "sinc^2", "F(eta,1)", "D(eta,1)");
    for i in 1..=20 {
        let eta = DetectionEfficiency::new(i as f64 * 0.05)?;
        let x = std::f64::consts::FRAC_PI_2 * eta.value();
        let sinc2 = (x.sin() / x).powi(2);
        println!(
            "{:>6.2} {:>10.6} {:>10.6} {:>10.6}",
            eta.value(),
            sinc2,
            bound_f(eta, v).value,
            bound_d(eta, v)?.value
        );
    }
    // the nominal efficiency
    let eta = DetectionEfficiency::NOMINAL;
    println!("\nat eta = {}: F = {:.6}", eta.value(), bound_f(eta, v).value);
    Ok(())
}
