use serde::{Deserialize, Serialize};

/// Even period-π function `f(x) = c₀ + Σₖ cₖ cos(2kx)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngularSeries {
    pub coeffs: Vec<f64>,
}

impl AngularSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "series needs a constant term");
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// Period-π mean.
    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn harmonics(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        if c.len() == 1 {
            return c[0];
        }
        // cos(2kx) by the Chebyshev recurrence
        let t = (2.0 * x).cos();
        let (mut prev, mut cur) = (1.0, t);
        let mut sum = c[0] + c[1] * t;
        for &ck in &c[2..] {
            let next = 2.0 * t * cur - prev;
            prev = cur;
            cur = next;
            sum += ck * cur;
        }
        sum
    }

    /// Minimum and maximum over `samples` equally spaced points of `[0, π/2]`.
    pub fn range_on_grid(&self, samples: usize) -> (f64, f64) {
        let step = std::f64::consts::FRAC_PI_2 / (samples - 1) as f64;
        (0..samples)
            .map(|i| self.eval(i as f64 * step))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eval_matches_direct_sum() {
        let s = AngularSeries::new(vec![0.3, -0.2, 0.05, 0.01, -0.004]);
        for i in 0..50 {
            let x = i as f64 * PI / 50.0;
            let direct: f64 = s
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * (2.0 * k as f64 * x).cos())
                .sum();
            assert!((s.eval(x) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn cos_squared() {
        let s = AngularSeries::new(vec![0.5, 0.5]);
        for x in [0.0, 0.3, 1.1, 2.9] {
            assert!((s.eval(x) - x.cos().powi(2)).abs() < 1e-15);
        }
        let (lo, hi) = s.range_on_grid(101);
        assert!(lo.abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
    }
}
