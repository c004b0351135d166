use crate::numerics::{Matrix, Rng};

/// Inverted dropout. In training mode each entry is zeroed with probability
/// `rate` and survivors are scaled by `1 / (1 - rate)`; the returned mask holds
/// those per-entry multipliers. Outside training the input passes through and
/// no mask is produced.
pub fn dropout(x: &Matrix, rate: f64, rng: &mut Rng, training: bool) -> (Matrix, Option<Matrix>) {
    assert!((0.0..1.0).contains(&rate), "dropout rate {rate} outside [0, 1)");
    if !training || rate == 0.0 {
        return (x.clone(), None);
    }
    let keep = 1.0 / (1.0 - rate);
    let mask = Matrix::new(
        x.rows(),
        x.cols(),
        (0..x.len())
            .map(|_| if rng.uniform() < rate { 0.0 } else { keep })
            .collect(),
    )
    .expect("same size as input");
    (x.hadamard(&mask), Some(mask))
}
