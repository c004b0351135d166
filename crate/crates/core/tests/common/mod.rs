//! Test-only oracles, independent of the library code paths they check.
#![allow(dead_code)]

use cccpde_core::nn::Parameterized;
use cccpde_core::{Matrix, Rng};

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(m: &Matrix) -> f64 {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Central-difference Jacobian `J[i][j] = ∂f_i/∂x_j` of a row-vector map.
pub fn numeric_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Matrix {
    let n = x.len();
    let out = f(x).len();
    let mut j = Matrix::zeros(out, n);
    let mut probe = x.to_vec();
    for c in 0..n {
        probe[c] = x[c] + h;
        let plus = f(&probe);
        probe[c] = x[c] - h;
        let minus = f(&probe);
        probe[c] = x[c];
        for r in 0..out {
            j[(r, c)] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    j
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Brute-force Mann–Whitney AUC: correctly ordered pos/neg pairs, ties half.
pub fn pair_counting_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut twice_wins = 0u64;
    let pos = labels.iter().filter(|&&l| l == 1).count() as u64;
    let neg = labels.len() as u64 - pos;
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li != 1 || lj != 0 {
                continue;
            }
            if scores[i] > scores[j] {
                twice_wins += 2;
            } else if scores[i] == scores[j] {
                twice_wins += 1;
            }
        }
    }
    twice_wins as f64 / (2 * pos * neg) as f64
}

/// Adds Gaussian noise of scale `scale` to every parameter.
pub fn jitter(model: &mut dyn Parameterized, rng: &mut Rng, scale: f64) {
    model.visit_params(&mut |p| {
        for v in p.value.data_mut() {
            *v += scale * rng.gaussian();
        }
    });
}

pub fn random_matrix(rng: &mut Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| scale * rng.gaussian()).collect()).unwrap()
}

/// Largest per-tensor relative error between the gradients currently stored
/// in `model` and central differences of `loss` over every parameter entry.
pub fn param_grad_error<M: Parameterized + Clone>(model: &M, loss: impl Fn(&M) -> f64, h: f64) -> f64 {
    let mut owned = model.clone();
    let mut analytic = Vec::new();
    owned.visit_params(&mut |p| analytic.push(p.grad.clone()));
    let mut worst: f64 = 0.0;
    for (k, grad) in analytic.iter().enumerate() {
        let mut numeric = Matrix::zeros(grad.rows(), grad.cols());
        for e in 0..grad.len() {
            let eval = |delta: f64| {
                let mut m = model.clone();
                let mut idx = 0;
                m.visit_params(&mut |p| {
                    if idx == k {
                        p.value.data_mut()[e] += delta;
                    }
                    idx += 1;
                });
                loss(&m)
            };
            numeric.data_mut()[e] = (eval(h) - eval(-h)) / (2.0 * h);
        }
        let scale = numeric.data().iter().fold(1.0f64, |a, v| a.max(v.abs()));
        worst = worst.max(grad.max_abs_diff(&numeric) / scale);
    }
    worst
}

/// `∫₀ˣ t^{a−1}(1−t)^{b−1} dt` for `x <= 0.5`, substituting `t = u^{1/a}`
/// when `a < 1` to remove the endpoint singularity.
fn lower_integral(x: f64, a: f64, b: f64) -> f64 {
    let (f, upper): (Box<dyn Fn(f64) -> f64>, f64) = if a < 1.0 {
        (
            Box::new(move |u: f64| (1.0 - u.powf(1.0 / a)).powf(b - 1.0) / a),
            x.powf(a),
        )
    } else {
        (
            Box::new(move |t: f64| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0)),
            x,
        )
    };
    // composite Simpson pass to set a relative tolerance
    let n = 2000;
    let h = upper / n as f64;
    let coarse: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(i as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    adaptive_simpson(&*f, 0.0, upper, coarse.abs().max(1e-300) * 1e-13)
}

pub fn oracle_beta_cdf(x: f64, a: f64, b: f64) -> f64 {
    let total = lower_integral(0.5, a, b) + lower_integral(0.5, b, a);
    if x <= 0.5 {
        lower_integral(x, a, b) / total
    } else {
        1.0 - lower_integral(1.0 - x, b, a) / total
    }
}

pub fn oracle_beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if oracle_beta_cdf(mid, a, b) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(a, b, x)` evaluation points covering a, b ∈ {0.5, 1, 2, 50}.
pub const BETA_GRID: [(f64, f64, f64); 20] = [
    (0.5, 0.5, 0.1),
    (0.5, 0.5, 0.7),
    (0.5, 1.0, 0.3),
    (0.5, 2.0, 0.05),
    (0.5, 50.0, 0.002),
    (1.0, 0.5, 0.9),
    (1.0, 1.0, 0.42),
    (1.0, 2.0, 0.6),
    (1.0, 50.0, 0.01),
    (2.0, 0.5, 0.8),
    (2.0, 1.0, 0.25),
    (2.0, 2.0, 0.5),
    (2.0, 5.0, 0.3),
    (2.0, 50.0, 0.03),
    (50.0, 0.5, 0.995),
    (50.0, 1.0, 0.97),
    (50.0, 2.0, 0.95),
    (50.0, 50.0, 0.45),
    (50.0, 50.0, 0.55),
    (0.5, 2.0, 0.6),
];

