//! Elementwise activations and their derivatives.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::numerics::Matrix;

/// Negative-side slope of the leaky ReLU.
pub const LEAKY_RELU_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Elu,
    LeakyRelu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    pub const ALL: [Activation; 5] = [
        Activation::Elu,
        Activation::LeakyRelu,
        Activation::Tanh,
        Activation::Sigmoid,
        Activation::Identity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Activation::Elu => "elu",
            Activation::LeakyRelu => "leaky_relu",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Activation::Elu => 0,
            Activation::LeakyRelu => 1,
            Activation::Tanh => 2,
            Activation::Sigmoid => 3,
            Activation::Identity => 4,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.code() == code)
    }

    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Activation::Elu => {
                if x >= 0.0 {
                    x
                } else {
                    x.exp_m1()
                }
            }
            Activation::LeakyRelu => {
                if x >= 0.0 {
                    x
                } else {
                    LEAKY_RELU_SLOPE * x
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative at pre-activation `x`.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Elu => {
                if x >= 0.0 {
                    1.0
                } else {
                    x.exp()
                }
            }
            Activation::LeakyRelu => {
                if x >= 0.0 {
                    1.0
                } else {
                    LEAKY_RELU_SLOPE
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn forward(self, x: &Matrix) -> Matrix {
        if self == Activation::Identity {
            return x.clone();
        }
        x.map(|v| self.eval(v))
    }

    /// `upstream ⊙ f'(x)` for pre-activation `x`.
    pub fn backward(self, x: &Matrix, upstream: &Matrix) -> Matrix {
        if self == Activation::Identity {
            return upstream.clone();
        }
        upstream.zip_map(x, |g, v| g * self.derivative(v))
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown activation tag {s:?}")))
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff_grad, Rng};

    #[test]
    fn point_values() {
        assert_eq!(Activation::Sigmoid.eval(0.0), 0.5);
        assert_eq!(Activation::Elu.eval(2.5), 2.5);
        assert!((Activation::Elu.eval(-1.0) - (-0.632_120_558_828_557_7)).abs() < 1e-12);
        assert_eq!(Activation::LeakyRelu.eval(-2.0), -0.02);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn unknown_tag() {
        assert!("relu6".parse::<Activation>().is_err());
        for a in Activation::ALL {
            assert_eq!(a.name().parse::<Activation>().unwrap(), a);
            assert_eq!(Activation::from_code(a.code()), Some(a));
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = Rng::new(21);
        for act in Activation::ALL {
            let mut xs = Vec::new();
            while xs.len() < 100 {
                let v = rng.uniform_range(-4.0, 4.0);
                if v.abs() > 1e-3 {
                    xs.push(v);
                }
            }
            let x = Matrix::row_vector(xs);
            let up = Matrix::row_vector((0..100).map(|_| rng.uniform_range(-1.0, 1.0)).collect());
            let analytic = act.backward(&x, &up);
            let numeric = finite_diff_grad(
                |m| act.forward(m).hadamard(&up).sum(),
                &x,
                1e-6,
            )
            .unwrap();
            assert!(
                analytic.max_abs_diff(&numeric) < 1e-6,
                "{act}: {}",
                analytic.max_abs_diff(&numeric)
            );
        }
    }
}
