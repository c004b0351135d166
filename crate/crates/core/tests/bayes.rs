mod common;

use cccpde_core::bayes::{
    beta_cdf, beta_update, credible_interval, mc_count_estimate, pseudo_counts, BetaPosterior,
};
use cccpde_core::flow::FlowStack;
use cccpde_core::numerics::log_ball_volume;
use cccpde_core::{Matrix, Rng};
use common::{jitter, oracle_beta_cdf, oracle_beta_quantile, BETA_GRID};
use proptest::prelude::*;

#[test]
fn beta_cdf_matches_quadrature() {
    for &(a, b, x) in &BETA_GRID {
        let got = beta_cdf(x, a, b).unwrap();
        let want = oracle_beta_cdf(x, a, b);
        assert!((got - want).abs() < 1e-8, "I_{x}({a},{b}) = {got}, oracle {want}");
    }
}

#[test]
fn specific_point_against_quadrature() {
    let got = beta_cdf(0.3, 2.0, 5.0).unwrap();
    assert!((got - oracle_beta_cdf(0.3, 2.0, 5.0)).abs() < 1e-8);
    // closed form: I_x(2,5) = 1 − (1−x)^5 (1 + 5x)
    let exact = 1.0 - 0.7f64.powi(5) * (1.0 + 5.0 * 0.3);
    assert!((got - exact).abs() < 1e-13);
}

#[test]
fn interval_mass_is_exact() {
    for &(a, b, _) in &BETA_GRID {
        let post = BetaPosterior::new(a, b).unwrap();
        let ci = credible_interval(&post, 0.95).unwrap();
        let mass = beta_cdf(ci.hi, a, b).unwrap() - beta_cdf(ci.lo, a, b).unwrap();
        assert!((mass - 0.95).abs() < 1e-8, "({a},{b}): mass {mass}");
    }
}

#[test]
fn narrow_posterior_against_oracle_quantiles() {
    let post = BetaPosterior::new(200.0, 200.0).unwrap();
    let ci = credible_interval(&post, 0.95).unwrap();
    let (lo, hi) = (oracle_beta_quantile(0.025, 200.0, 200.0), oracle_beta_quantile(0.975, 200.0, 200.0));
    assert!((ci.lo - lo).abs() < 1e-8 && (ci.hi - hi).abs() < 1e-8);
    assert!(ci.range() < 0.1);
}

#[test]
fn strong_evidence_report_interval_against_oracle() {
    let post = beta_update(BetaPosterior::uniform(), 500.0, 0.0).unwrap();
    let ci = credible_interval(&post, 0.95).unwrap();
    let (lo, hi) = (oracle_beta_quantile(0.025, 501.0, 1.0), oracle_beta_quantile(0.975, 501.0, 1.0));
    assert!((ci.lo - lo).abs() < 1e-8 && (ci.hi - hi).abs() < 1e-8);
    assert!(ci.range() < 0.02);
}

#[test]
fn range_shrinks_with_total_count() {
    for ratio in [0.1, 0.3, 0.5, 0.8] {
        let mut last = f64::INFINITY;
        for total in [1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 300.0, 1000.0] {
            let post = beta_update(BetaPosterior::uniform(), ratio * total, (1.0 - ratio) * total)
                .unwrap();
            let r = credible_interval(&post, 0.95).unwrap().range();
            assert!(r < last, "ratio {ratio}, total {total}: {r} !< {last}");
            last = r;
        }
    }
}

#[test]
fn prior_injection_is_monotone() {
    let (pos, neg) = (3.0, 7.0);
    let mut last = f64::NEG_INFINITY;
    for a0 in [0.5, 1.0, 2.0, 5.0, 20.0, 100.0] {
        let post = beta_update(BetaPosterior::new(a0, 1.0).unwrap(), pos, neg).unwrap();
        assert!(post.mean() > last);
        last = post.mean();
    }
    let target = 0.9;
    let weak = beta_update(BetaPosterior::from_base_rate(target, 2.0).unwrap(), pos, neg).unwrap();
    let strong = beta_update(BetaPosterior::from_base_rate(target, 200.0).unwrap(), pos, neg).unwrap();
    assert!((strong.mean() - target).abs() < (weak.mean() - target).abs());
}

#[test]
fn equal_densities_keep_uniform_prior_centered() {
    let c = pseudo_counts(&[-1.3, -1.3], &[40.0, 40.0], 0.2).unwrap();
    let post = beta_update(BetaPosterior::uniform(), c.counts[1], c.counts[0]).unwrap();
    assert!((post.mean() - 0.5).abs() < 1e-15);
}

fn smooth_stack() -> FlowStack {
    let mut rng = Rng::new(90);
    let mut stack = FlowStack::new(2, 2, 8, &mut rng).unwrap();
    jitter(&mut stack, &mut rng, 0.1);
    stack
}

#[test]
fn mc_counts_converge_to_pointwise_for_small_radius() {
    let stack = smooth_stack();
    let n_k = 1000.0;
    for x in [[0.0, 0.0], [0.5, -0.3], [-1.0, 0.8]] {
        let r = 0.02;
        let est = mc_count_estimate(|m| stack.log_density(m), &x, r, 4000, &mut Rng::new(4), n_k)
            .unwrap();
        let lp = stack.log_density(&Matrix::row_vector(x.to_vec())).unwrap()[0];
        let pointwise = pseudo_counts(&[lp], &[n_k], log_ball_volume(2, r).exp()).unwrap().counts[0];
        let ratio = est.count / pointwise;
        assert!((ratio - 1.0).abs() < 0.05, "x={x:?}: ratio {ratio}");
    }
}

#[test]
fn pointwise_and_mc_counts_agree_for_matched_area() {
    // square neighborhood of side 0.05 against a disk of the same area
    let stack = smooth_stack();
    let v = 0.05f64 * 0.05;
    let r = (v / std::f64::consts::PI).sqrt();
    for x in [[0.2, 0.1], [-0.6, -0.4]] {
        let lp = stack.log_density(&Matrix::row_vector(x.to_vec())).unwrap()[0];
        let pointwise = pseudo_counts(&[lp], &[500.0], v).unwrap().counts[0];
        let mc = mc_count_estimate(|m| stack.log_density(m), &x, r, 2000, &mut Rng::new(2), 500.0)
            .unwrap()
            .count;
        let ratio = mc / pointwise;
        assert!((0.5..2.0).contains(&ratio), "ratio {ratio}");
    }
}

proptest! {
    #[test]
    fn updates_commute_with_batching(
        a in 0.1f64..10.0, b in 0.1f64..10.0,
        p1 in 0.0f64..100.0, n1 in 0.0f64..100.0,
        p2 in 0.0f64..100.0, n2 in 0.0f64..100.0,
    ) {
        let prior = BetaPosterior::new(a, b).unwrap();
        let seq = beta_update(beta_update(prior, p1, n1).unwrap(), p2, n2).unwrap();
        let once = beta_update(prior, p1 + p2, n1 + n2).unwrap();
        prop_assert!((seq.a() - once.a()).abs() < 1e-12 && (seq.b() - once.b()).abs() < 1e-12);
    }

    #[test]
    fn cdf_is_monotone(a in 0.2f64..60.0, b in 0.2f64..60.0, x in 0.0f64..1.0, dx in 0.0f64..0.2) {
        let x2 = (x + dx).min(1.0);
        prop_assert!(beta_cdf(x, a, b).unwrap() <= beta_cdf(x2, a, b).unwrap() + 1e-15);
    }
}
