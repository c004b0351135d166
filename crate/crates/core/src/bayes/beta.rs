//! Beta distributions: conjugate updates, the regularized incomplete beta
//! function, and equal-tailed credible intervals.

use crate::error::{Error, Result};
use crate::numerics::ln_gamma_pos;

const CF_MAX_ITER: usize = 1_000_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;
const BISECTION_TOL: f64 = 1e-15;

/// `Beta(a, b)` over the positive-class probability. `a` and `b` read as
/// (pseudo-)counts of positive and negative observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPosterior {
    a: f64,
    b: f64,
}

impl BetaPosterior {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::Domain(format!(
                "Beta shape parameters must be finite and positive, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    /// `Beta(1, 1)`.
    pub fn uniform() -> Self {
        Self { a: 1.0, b: 1.0 }
    }

    /// Base-rate prior with mean `positive_rate` and total pseudo-count
    /// `concentration`.
    pub fn from_base_rate(positive_rate: f64, concentration: f64) -> Result<Self> {
        if !(positive_rate > 0.0 && positive_rate < 1.0) {
            return Err(Error::Domain(format!("base rate {positive_rate} outside (0, 1)")));
        }
        Self::new(concentration * positive_rate, concentration * (1.0 - positive_rate))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn variance(&self) -> f64 {
        let s = self.a + self.b;
        self.a * self.b / (s * s * (s + 1.0))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        beta_cdf(x, self.a, self.b)
    }

    /// Smallest `x` with `I_x(a, b) >= p`, by bisection.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("quantile level {p} outside [0, 1]")));
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if beta_cdf(mid, self.a, self.b)? < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Conjugate update: `Beta(a + positives, b + negatives)`.
pub fn beta_update(prior: BetaPosterior, positives: f64, negatives: f64) -> Result<BetaPosterior> {
    if !(positives >= 0.0 && negatives >= 0.0) {
        return Err(Error::Domain(format!(
            "counts must be non-negative, got ({positives}, {negatives})"
        )));
    }
    BetaPosterior::new(prior.a + positives, prior.b + negatives)
}

/// Regularized incomplete beta function `I_x(a, b)`.
///
/// Continued fraction (modified Lentz), evaluated on whichever side of
/// `(a + 1) / (a + b + 2)` converges fastest.
pub fn beta_cdf(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("beta_cdf needs a, b > 0, got ({a}, {b})")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("beta_cdf argument {x} outside [0, 1]")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() + ln_gamma_pos(a + b)
        - ln_gamma_pos(a)
        - ln_gamma_pos(b);
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok((ln_front.exp() * continued_fraction(x, a, b)? / a).clamp(0.0, 1.0))
    } else {
        Ok((1.0 - ln_front.exp() * continued_fraction(1.0 - x, b, a)? / b).clamp(0.0, 1.0))
    }
}

fn continued_fraction(x: f64, a: f64, b: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // even step
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // odd step
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::Numeric(format!(
        "incomplete beta continued fraction did not converge for x={x}, a={a}, b={b}"
    )))
}

/// Equal-tailed credible interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CredibleInterval {
    pub lo: f64,
    pub hi: f64,
}

impl CredibleInterval {
    pub fn range(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Equal-tailed interval holding `mass` of the posterior.
pub fn credible_interval(post: &BetaPosterior, mass: f64) -> Result<CredibleInterval> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::Domain(format!("credible mass {mass} outside (0, 1)")));
    }
    let tail = 0.5 * (1.0 - mass);
    Ok(CredibleInterval {
        lo: post.quantile(tail)?,
        hi: post.quantile(1.0 - tail)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_updates() {
        let p = beta_update(BetaPosterior::uniform(), 1.0, 0.0).unwrap();
        assert_eq!((p.a(), p.b()), (2.0, 1.0));
        assert!((p.mean() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(beta_update(p, 0.0, 0.0).unwrap(), p);
        let p = beta_update(BetaPosterior::uniform(), 10.0, 30.0).unwrap();
        assert!((p.mean() - 11.0 / 42.0).abs() < 1e-15);
        assert!(beta_update(p, -1.0, 0.0).is_err());
    }

    #[test]
    fn symmetric_cdf_values() {
        assert!((beta_cdf(0.5, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((beta_cdf(0.5, 2.0, 2.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((beta_cdf(0.5, 50.0, 50.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn closed_forms() {
        // I_x(a, 1) = x^a and I_x(1, b) = 1 − (1 − x)^b
        for &x in &[0.01, 0.2, 0.5, 0.77, 0.99] {
            for &k in &[0.5, 2.0, 7.5] {
                assert!((beta_cdf(x, k, 1.0).unwrap() - x.powf(k)).abs() < 1e-13);
                assert!((beta_cdf(x, 1.0, k).unwrap() - (1.0 - (1.0 - x).powf(k))).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(beta_cdf(1.1, 1.0, 1.0).is_err());
        assert!(beta_cdf(-0.1, 1.0, 1.0).is_err());
        assert!(beta_cdf(0.5, 0.0, 1.0).is_err());
        assert!(BetaPosterior::new(1.0, -2.0).is_err());
        assert!(BetaPosterior::new(f64::INFINITY, 1.0).is_err());
        assert!(credible_interval(&BetaPosterior::uniform(), 1.0).is_err());
    }

    #[test]
    fn uniform_interval() {
        let ci = credible_interval(&BetaPosterior::uniform(), 0.95).unwrap();
        assert!((ci.lo - 0.025).abs() < 1e-9);
        assert!((ci.hi - 0.975).abs() < 1e-9);
        assert!((ci.range() - 0.95).abs() < 1e-9);
    }

    #[test]
    fn large_counts_converge() {
        let p = BetaPosterior::new(1e8, 3e8).unwrap();
        let ci = credible_interval(&p, 0.95).unwrap();
        assert!(ci.lo < 0.25 && ci.hi > 0.25 && ci.range() < 1e-3);
    }

    #[test]
    fn base_rate_prior() {
        let p = BetaPosterior::from_base_rate(0.2, 10.0).unwrap();
        assert!((p.a() - 2.0).abs() < 1e-15 && (p.b() - 8.0).abs() < 1e-15);
        assert!(BetaPosterior::from_base_rate(1.0, 10.0).is_err());
    }
}
