//! Central finite differences, used as the oracle for analytic gradients.

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Central-difference gradient of a scalar function of a matrix.
pub fn finite_diff_grad<F>(mut f: F, x: &Matrix, h: f64) -> Result<Matrix>
where
    F: FnMut(&Matrix) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step h must be positive, got {h}")));
    }
    let mut probe = x.clone();
    let mut grad = Matrix::zeros(x.rows(), x.cols());
    for idx in 0..x.len() {
        let orig = probe.data()[idx];
        probe.data_mut()[idx] = orig + h;
        let plus = f(&probe);
        probe.data_mut()[idx] = orig - h;
        let minus = f(&probe);
        probe.data_mut()[idx] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite function value near entry {idx}: f(+h)={plus}, f(-h)={minus}"
            )));
        }
        grad.data_mut()[idx] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

/// `max |a − b| / max(1, max |b|)`: relative to the gradient scale, absolute
/// when gradients are small.
pub fn relative_error(analytic: &Matrix, numeric: &Matrix) -> f64 {
    let scale = numeric
        .data()
        .iter()
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    analytic.max_abs_diff(numeric) / scale
}
