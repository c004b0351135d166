//! Benchmark fixtures; the benchmarks themselves live in `benches/`.

use cccpde_core::flow::FlowStack;
use cccpde_core::nn::Parameterized;
use cccpde_core::{Matrix, Rng};

pub fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.gaussian()).collect()).expect("sizes agree")
}

/// A stack with every weight perturbed, so the zero-initialized output
/// layers do not turn the flow into a permutation.
pub fn perturbed_stack(dim: usize, depth: usize, hidden: usize, seed: u64) -> FlowStack {
    let mut rng = Rng::new(seed);
    let mut stack = FlowStack::new(dim, depth, hidden, &mut rng).expect("valid stack");
    stack.visit_params(&mut |p| {
        for v in p.value.data_mut() {
            *v += 0.1 * rng.gaussian();
        }
    });
    stack
}
