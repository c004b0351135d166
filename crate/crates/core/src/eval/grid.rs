use crate::error::{Error, Result};
use crate::model::CccpDeModel;
use crate::numerics::{log_sum_exp, Matrix};

/// Inclusive axis ranges of a 2-D evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBounds {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

/// Log-densities on a regular grid, row-major with `y` outer.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub resolution: usize,
    /// `res² × 2` grid coordinates.
    pub points: Matrix,
    /// `res² × M` class-conditional log-densities.
    pub log_densities: Matrix,
    /// Prior-weighted mixture `ln Σ_k π_k p_k`.
    pub total: Vec<f64>,
    pub cell_area: f64,
}

impl DensityGrid {
    /// `Σ cell_area · exp(total)`: close to 1 when the grid covers the data.
    pub fn total_mass(&self) -> f64 {
        self.total.iter().map(|v| v.exp()).sum::<f64>() * self.cell_area
    }

    /// Same sum for one class-conditional density.
    pub fn class_mass(&self, class: usize) -> f64 {
        self.log_densities.column(class).iter().map(|v| v.exp()).sum::<f64>() * self.cell_area
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { hi } else { lo + step * i as f64 }).collect()
}

pub fn density_grid(model: &CccpDeModel, bounds: GridBounds, resolution: usize, threads: usize) -> Result<DensityGrid> {
    if model.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "density grids need 2-D inputs, model has {} dimensions",
            model.dim()
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidConfig(format!("grid resolution {resolution} must be ≥ 2")));
    }
    for (lo, hi) in [bounds.x, bounds.y] {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidConfig(format!("invalid grid range ({lo}, {hi})")));
        }
    }
    let xs = linspace(bounds.x.0, bounds.x.1, resolution);
    let ys = linspace(bounds.y.0, bounds.y.1, resolution);
    let mut coords = Vec::with_capacity(2 * resolution * resolution);
    for &y in &ys {
        for &x in &xs {
            coords.extend([x, y]);
        }
    }
    let points = Matrix::new(resolution * resolution, 2, coords)?;
    let log_densities = model.forward_parallel(&points, threads)?.log_densities;
    let log_priors: Vec<f64> = model.class_priors().iter().map(|p| p.ln()).collect();
    let total = (0..log_densities.rows())
        .map(|i| {
            let terms: Vec<f64> = log_densities.row(i).iter().zip(&log_priors).map(|(a, b)| a + b).collect();
            log_sum_exp(&terms)
        })
        .collect();
    let step = |(lo, hi): (f64, f64)| (hi - lo) / (resolution - 1) as f64;
    Ok(DensityGrid {
        resolution,
        points,
        log_densities,
        total,
        cell_area: step(bounds.x) * step(bounds.y),
    })
}
