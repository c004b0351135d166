use crate::numerics::{Matrix, Rng};

/// Scalar-target regression samples; `x` is `n × 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    pub x: Matrix,
    pub y: Vec<f64>,
}

pub const SINE_DOMAIN: (f64, f64) = (-3.0, 3.0);

/// Noise standard deviation of [`heteroscedastic_sine`] at `x`.
pub fn noise_std(x: f64) -> f64 {
    0.1 + 0.1 * x.abs()
}

fn sine_with(n: usize, rng: &mut Rng, sigma: impl Fn(f64) -> f64) -> RegressionData {
    let xs: Vec<f64> = (0..n)
        .map(|_| rng.uniform_range(SINE_DOMAIN.0, SINE_DOMAIN.1))
        .collect();
    let y = xs.iter().map(|&x| x.sin() + sigma(x) * rng.gaussian()).collect();
    RegressionData {
        x: Matrix::column_vector(xs),
        y,
    }
}

/// `y = sin x + ε`, `ε ~ N(0, (0.1 + 0.1|x|)²)`, `x ~ U[−3, 3]`.
pub fn heteroscedastic_sine(n: usize, rng: &mut Rng) -> RegressionData {
    sine_with(n, rng, noise_std)
}

/// `y = sin x + ε` with constant noise `sigma`.
pub fn homoscedastic_sine(n: usize, sigma: f64, rng: &mut Rng) -> RegressionData {
    sine_with(n, rng, |_| sigma)
}

/// Noise-free constant targets over the same input domain.
pub fn constant_targets(n: usize, value: f64, rng: &mut Rng) -> RegressionData {
    sine_with(n, rng, |_| 0.0).with_targets(vec![value; n])
}

impl RegressionData {
    fn with_targets(mut self, y: Vec<f64>) -> Self {
        self.y = y;
        self
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}
