mod common;

use cccpde_core::data::{constant_targets, heteroscedastic_sine, homoscedastic_sine, Dataset, Preset, SINE_DOMAIN};
use cccpde_core::eval::{in_set_scores, normalized_log_priors, ratio_test_classify};
use cccpde_core::model::{
    decode_model, encode_model, glm_config, glm_fit_and_predict, load_model, save_model, train, CccpDeModel,
    FfnnModel, GlmRegressor, LossWeights, SavedModel, TrainConfig,
};
use cccpde_core::nn::Parameterized;
use cccpde_core::{Error, Matrix, ModelFileError, Rng};
use common::{jitter, param_grad_error, random_matrix};
use proptest::prelude::*;

fn small_config() -> TrainConfig {
    TrainConfig {
        hidden: 6,
        block_width: 5,
        base_depth: 3,
        dropout: 0.0,
        ..TrainConfig::default()
    }
}

fn jittered_model(dim: usize, classes: usize, seed: u64) -> CccpDeModel {
    let mut rng = Rng::new(seed);
    let mut m = CccpDeModel::new(dim, classes, &small_config(), &mut rng).unwrap();
    jitter(&mut m, &mut rng, 0.3);
    m
}

/// Largest relative error of the joint-loss parameter gradients.
fn joint_gradient_error(dim: usize, classes: usize, weights: LossWeights, seed: u64) -> f64 {
    let mut model = jittered_model(dim, classes, seed);
    let mut rng = Rng::new(seed ^ 0x55);
    let x = random_matrix(&mut rng, 8, dim, 1.0);
    let labels: Vec<usize> = (0..8).map(|i| i % classes).collect();
    model.loss_and_grad(&x, &labels, weights, None).unwrap();
    param_grad_error(&model, |m| m.loss(&x, &labels, weights).unwrap().total, 1e-6)
}

#[test]
fn joint_gradient_matches_finite_differences_d4() {
    let err = joint_gradient_error(4, 2, LossWeights::default(), 3);
    assert!(err < 1e-4, "relative error {err}");
}

#[test]
fn multiclass_nll_gradient() {
    let err = joint_gradient_error(3, 3, LossWeights { nll: 1.0, bce: 0.0 }, 8);
    assert!(err < 1e-5, "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]
    #[test]
    fn joint_gradient_property(
        dim in 2usize..6,
        seed in 0u64..10_000,
        w in prop::sample::select(vec![(1.0, 1.0), (1.0, 0.0), (0.0, 1.0), (0.3, 2.0)]),
    ) {
        let mut model = jittered_model(dim, 2, seed);
        let mut rng = Rng::new(seed + 1);
        let x = random_matrix(&mut rng, 8, dim, 1.0);
        let labels: Vec<usize> = (0..8).map(|_| rng.below(2)).collect();
        let weights = LossWeights { nll: w.0, bce: w.1 };
        model.loss_and_grad(&x, &labels, weights, None).unwrap();
        let err = param_grad_error(&model, |m| m.loss(&x, &labels, weights).unwrap().total, 1e-6);
        prop_assert!(err < 1e-4, "relative error {}", err);
    }
}

#[test]
fn ffnn_gradient_matches_finite_differences() {
    let mut rng = Rng::new(21);
    let mut m = FfnnModel::new(3, &small_config(), &mut rng).unwrap();
    jitter(&mut m, &mut rng, 0.2);
    let x = random_matrix(&mut rng, 7, 3, 1.0);
    let labels = [0, 1, 1, 0, 1, 0, 0];
    m.loss_and_grad(&x, &labels, None).unwrap();
    let err = param_grad_error(&m, |mm| mm.loss(&x, &labels).unwrap(), 1e-6);
    assert!(err < 1e-5, "{err}");
}

#[test]
fn glm_gradient_matches_finite_differences() {
    let mut rng = Rng::new(22);
    let mut m = GlmRegressor::new(2, &[5, 4], &mut rng).unwrap();
    let x = random_matrix(&mut rng, 9, 2, 1.0);
    let y: Vec<f64> = (0..9).map(|_| rng.gaussian()).collect();
    m.loss_and_grad(&x, &y).unwrap();
    let err = param_grad_error(&m, |mm| mm.loss(&x, &y).unwrap(), 1e-6);
    assert!(err < 1e-5, "{err}");
}

fn toy(seed: u64) -> (Dataset, Dataset) {
    let p = Preset::Separable.generate(1000, 1000, seed).unwrap();
    (p.train, p.test)
}

fn trained(ds: &Dataset, config: &TrainConfig) -> CccpDeModel {
    let mut m = CccpDeModel::new(2, 2, config, &mut Rng::derive(config.seed, "init")).unwrap();
    train(&mut m, ds, config, &mut Rng::derive(config.seed, "shuffle")).unwrap();
    m
}

fn accuracy(model: &CccpDeModel, ds: &Dataset) -> f64 {
    let out = model.forward(&ds.features).unwrap();
    let lp = normalized_log_priors(model.class_priors()).unwrap();
    let correct = (0..ds.len())
        .filter(|&i| ratio_test_classify(out.log_densities.row(i), &lp).unwrap().class() == Some(ds.labels[i]))
        .count();
    correct as f64 / ds.len() as f64
}

#[test]
fn early_full_batch_steps_mostly_decrease_the_loss() {
    let (train_set, _) = toy(1);
    let config = TrainConfig {
        epochs: 50,
        minibatch: train_set.len(),
        dropout: 0.0,
        ..TrainConfig::default()
    };
    let mut m = CccpDeModel::new(2, 2, &config, &mut Rng::new(5)).unwrap();
    let report = train(&mut m, &train_set, &config, &mut Rng::new(6)).unwrap();
    let losses = &report.step_losses;
    assert_eq!(losses.len(), 50);
    let decreasing = losses.windows(2).filter(|w| w[1] < w[0]).count();
    assert!(decreasing as f64 >= 0.8 * 49.0, "{decreasing} of 49 steps decreased");
}

#[test]
fn training_separates_toy_clusters() {
    let (train_set, test_set) = toy(2);
    let config = TrainConfig::default();
    let mut m = CccpDeModel::new(2, 2, &config, &mut Rng::new(1)).unwrap();
    let report = train(&mut m, &train_set, &config, &mut Rng::new(2)).unwrap();
    assert!(report.epoch_losses.last() < report.epoch_losses.first());
    assert_eq!(report.epoch_losses.len(), config.epochs);
    let acc = accuracy(&m, &test_set);
    assert!(acc > 0.9, "ratio-test accuracy {acc}");
    assert!(m.forward(&test_set.features).unwrap().log_densities.is_finite());
}

#[test]
fn overlap_is_a_coin_flip() {
    let p = Preset::Overlap.generate(2000, 2000, 3).unwrap();
    let config = TrainConfig { epochs: 10, ..TrainConfig::default() };
    let m = trained(&p.train, &config);
    let acc = accuracy(&m, &p.test);
    assert!((0.4..=0.6).contains(&acc), "accuracy {acc}");
}

#[test]
fn training_points_score_above_far_points() {
    let (train_set, _) = toy(4);
    let config = TrainConfig { epochs: 10, ..TrainConfig::default() };
    let m = trained(&train_set, &config);
    let near = in_set_scores(&m.forward(&train_set.features).unwrap());
    // clusters have std 0.5; shift 10 std along y
    let mut far = train_set.features.clone();
    for r in 0..far.rows() {
        far.row_mut(r)[1] += 5.0;
    }
    let far_scores = in_set_scores(&m.forward(&far).unwrap());
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&near) > mean(&far_scores));
}

#[test]
fn same_seed_gives_bit_identical_models() {
    let (train_set, _) = toy(5);
    let config = TrainConfig { epochs: 3, seed: 17, ..TrainConfig::default() };
    let a = trained(&train_set, &config);
    let b = trained(&train_set, &config);
    assert_eq!(encode_model(&SavedModel::Cccpde(a)), encode_model(&SavedModel::Cccpde(b)));
}

#[test]
fn saved_model_reproduces_outputs_bit_exactly() {
    let (train_set, test_set) = toy(6);
    let config = TrainConfig { epochs: 3, ..TrainConfig::default() };
    let m = trained(&train_set, &config);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    save_model(&SavedModel::Cccpde(m.clone()), &path).unwrap();
    let SavedModel::Cccpde(back) = load_model(&path).unwrap() else {
        panic!("wrong model kind");
    };
    let probes = test_set.features.select_rows(&(0..100).collect::<Vec<_>>());
    let (a, b) = (m.forward(&probes).unwrap(), back.forward(&probes).unwrap());
    for (x, y) in a.log_densities.data().iter().zip(b.log_densities.data()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    for (x, y) in a.disc_scores.iter().zip(&b.disc_scores) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    for (p, q) in m.base.layers.iter().zip(&back.base.layers) {
        assert_eq!(p.permutation(), q.permutation());
    }
    assert_eq!(back.class_counts(), m.class_counts());

    let mut bytes = std::fs::read(&path).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x01;
    assert!(matches!(
        decode_model(&bytes),
        Err(Error::ModelFile(ModelFileError::Checksum { .. }))
    ));
}

#[test]
fn model_parameter_count_is_stable() {
    let mut m = CccpDeModel::new(2, 2, &TrainConfig::default(), &mut Rng::new(0)).unwrap();
    // coupling nets 1→64→64→1: 64+64 + 64·64+64 + 64+1 per net
    let net = 128 + 4160 + 65;
    let coupling = 2 * net;
    let disc = (2 * 64 + 64 + 128) + 2 * (64 * 64 + 64 + 128) + 65;
    assert_eq!(m.param_count(), 5 * coupling + disc);
}

fn sine_grid(n: usize) -> Matrix {
    let (lo, hi) = SINE_DOMAIN;
    Matrix::column_vector((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[s.len() / 2]
}

#[test]
fn glm_intervals_cover_heteroscedastic_noise() {
    let config = TrainConfig { seed: 11, ..glm_config() };
    let data = heteroscedastic_sine(2000, &mut Rng::derive(11, "data/train"));
    let held_out = heteroscedastic_sine(4000, &mut Rng::derive(11, "data/test"));
    let (model, _, report) = glm_fit_and_predict(&data, &sine_grid(101), &config).unwrap();
    assert!(report.final_loss.is_finite());
    let pred = model.predict(&held_out.x).unwrap();
    let covered = (0..held_out.len())
        .filter(|&i| (held_out.y[i] - pred.mean[i]).abs() <= 2.0 * pred.std[i])
        .count() as f64
        / held_out.len() as f64;
    assert!((0.88..=0.99).contains(&covered), "coverage {covered}");
    // noise grows with |x|, so the edges should be wider than the middle
    let edge = model.predict(&Matrix::column_vector(vec![-2.8, 2.8])).unwrap();
    let middle = model.predict(&Matrix::column_vector(vec![0.0])).unwrap();
    assert!(edge.std.iter().all(|&s| s > 1.5 * middle.std[0]), "{:?} vs {:?}", edge.std, middle.std);
}

#[test]
fn glm_constant_targets_shrink_sigma() {
    let data = constant_targets(1000, 2.0, &mut Rng::new(3));
    let (_, pred, _) = glm_fit_and_predict(&data, &sine_grid(61), &glm_config()).unwrap();
    let worst = pred.std.iter().copied().fold(0.0, f64::max);
    assert!(worst < 0.1, "max sigma {worst}");
    assert!(pred.mean.iter().all(|m| (m - 2.0).abs() < 0.1));
}

#[test]
fn glm_recovers_homoscedastic_noise_level() {
    let data = homoscedastic_sine(2000, 0.5, &mut Rng::new(4));
    let (_, pred, _) = glm_fit_and_predict(&data, &sine_grid(101), &glm_config()).unwrap();
    let m = median(&pred.std);
    assert!((0.4..=0.6).contains(&m), "median sigma {m}");
}
