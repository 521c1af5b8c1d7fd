//! Smooth parameter paths `f: [0, 1] → ℝ` with `f(0) = 0` and analytic
//! derivatives: `f(s) = f₁ s + Σ_k b_k sin(kπ s)`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFunction {
    end: f64,
    sine: Vec<f64>,
}

impl PathFunction {
    pub fn linear(end: f64) -> Self {
        Self { end, sine: Vec::new() }
    }

    pub fn fourier(end: f64, sine: Vec<f64>) -> Self {
        Self { end, sine }
    }

    /// Endpoint `f₁` followed by the sine amplitudes `b_1, b_2, …`.
    pub fn from_coefficients(coeffs: &[f64]) -> Option<Self> {
        let (&end, rest) = coeffs.split_first()?;
        Some(Self::fourier(end, rest.to_vec()))
    }

    pub fn coefficients(&self) -> Vec<f64> {
        std::iter::once(self.end).chain(self.sine.iter().copied()).collect()
    }

    /// Random endpoint in `range` and `terms` sine amplitudes bounded by
    /// `amplitude / k`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, range: (f64, f64), terms: usize, amplitude: f64) -> Self {
        let end = rng.gen_range(range.0..range.1);
        let sine = (1..=terms)
            .map(|k| rng.gen_range(-amplitude..amplitude) / k as f64)
            .collect();
        Self { end, sine }
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn is_linear(&self) -> bool {
        self.sine.iter().all(|&b| b == 0.0)
    }

    pub fn value(&self, s: f64) -> f64 {
        self.end * s
            + self
                .sine
                .iter()
                .enumerate()
                .map(|(k, b)| b * ((k + 1) as f64 * PI * s).sin())
                .sum::<f64>()
    }

    pub fn derivative(&self, s: f64) -> f64 {
        self.end
            + self
                .sine
                .iter()
                .enumerate()
                .map(|(k, b)| {
                    let w = (k + 1) as f64 * PI;
                    b * w * (w * s).cos()
                })
                .sum::<f64>()
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        -self
            .sine
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let w = (k + 1) as f64 * PI;
                b * w * w * (w * s).sin()
            })
            .sum::<f64>()
    }
}
