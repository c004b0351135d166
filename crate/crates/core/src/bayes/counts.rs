//! Density-derived pseudo-counts.

use crate::error::{Error, Result};
use crate::numerics::{log_ball_volume, Matrix, Rng};

/// `exp(-700)` is the smallest count kept; anything below is zero.
pub const LOG_COUNT_FLOOR: f64 = -700.0;
/// Counts saturate here so posterior quantiles stay computable.
pub const COUNT_CEILING: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    Pointwise,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoCounts {
    pub counts: Vec<f64>,
    pub volume: f64,
    pub mode: CountMode,
}

/// `c_k = V · N_k · p_k(x)` for every class `k`.
pub fn pseudo_counts(log_densities: &[f64], class_counts: &[f64], volume: f64) -> Result<PseudoCounts> {
    if !(volume > 0.0 && volume.is_finite()) {
        return Err(Error::Domain(format!("neighborhood volume must be positive, got {volume}")));
    }
    if log_densities.len() != class_counts.len() {
        return Err(Error::shape(
            "pseudo_counts",
            (1, log_densities.len()),
            (1, class_counts.len()),
        ));
    }
    let counts = log_densities
        .iter()
        .zip(class_counts)
        .map(|(&lp, &n)| {
            if !(n >= 0.0) {
                return Err(Error::Domain(format!("class count must be non-negative, got {n}")));
            }
            if n == 0.0 || lp.is_nan() {
                return Ok(0.0);
            }
            let log_c = volume.ln() + n.ln() + lp;
            Ok(if log_c < LOG_COUNT_FLOOR {
                0.0
            } else {
                log_c.exp().min(COUNT_CEILING)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PseudoCounts {
        counts,
        volume,
        mode: CountMode::Pointwise,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McCountEstimate {
    pub count: f64,
    pub std_error: f64,
}

/// `N_k · Vol(B(x, r)) · E[p_k(u)]` for `u` uniform in the ball of radius `r`
/// around `x`, estimated from `n_draws` samples.
pub fn mc_count_estimate<F>(
    log_density: F,
    x: &[f64],
    radius: f64,
    n_draws: usize,
    rng: &mut Rng,
    class_count: f64,
) -> Result<McCountEstimate>
where
    F: Fn(&Matrix) -> Result<Vec<f64>>,
{
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    if n_draws < 100 {
        return Err(Error::Domain(format!("need at least 100 draws, got {n_draws}")));
    }
    if class_count == 0.0 {
        return Ok(McCountEstimate {
            count: 0.0,
            std_error: 0.0,
        });
    }
    let dim = x.len();
    let mut points = Matrix::zeros(n_draws, dim);
    for i in 0..n_draws {
        let dir: Vec<f64> = (0..dim).map(|_| rng.gaussian()).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r = radius * rng.uniform().powf(1.0 / dim as f64);
        for (j, p) in points.row_mut(i).iter_mut().enumerate() {
            *p = x[j] + r * dir[j] / norm;
        }
    }
    let dens: Vec<f64> = log_density(&points)?.into_iter().map(f64::exp).collect();
    let n = n_draws as f64;
    let mean = dens.iter().sum::<f64>() / n;
    let var = dens.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let scale = class_count * log_ball_volume(dim, radius).exp();
    Ok(McCountEstimate {
        count: scale * mean,
        std_error: scale * (var / n).sqrt(),
    })
}
