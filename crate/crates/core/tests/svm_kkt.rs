mod common;

use common::fixtures::{linear_gram, overlapping_points, rbf_gram, separable_points};
use qrerank_core::svm::{decision, train_smo, train_smo_traced, TrainConfig, TrainedModel};
use qrerank_core::Gram;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Checks box, equality and complementary-slackness conditions; returns the
/// worst violation found.
fn kkt_violation(g: &Gram, y: &[i8], m: &TrainedModel, cfg: &TrainConfig) -> f64 {
    let mut worst: f64 = 0.0;
    let mut balance = 0.0;
    for i in 0..y.len() {
        let yi = f64::from(y[i]);
        let c = cfg.c * if yi > 0.0 { cfg.positive_weight } else { cfg.negative_weight };
        let a = m.alpha(i);
        assert!((0.0..=c).contains(&a), "alpha {i} = {a} outside [0, {c}]");
        balance += a * yi;
        let margin = yi * m.decision_full(g.row(i)).unwrap();
        let v = if a == 0.0 {
            1.0 - margin
        } else if a < c {
            (margin - 1.0).abs()
        } else {
            margin - 1.0
        };
        worst = worst.max(v);
    }
    assert!(balance.abs() <= 1e-6, "sum alpha_i y_i = {balance}");
    worst
}

#[test]
fn analytic_two_point_problem() {
    let g = linear_gram(&[[-1.0, 0.0], [1.0, 0.0]]);
    let m = train_smo(&g, &[-1, 1], &TrainConfig::default()).unwrap();
    assert!((m.alpha(0) - 0.5).abs() < 1e-6 && (m.alpha(1) - 0.5).abs() < 1e-6);
    assert!(m.bias.abs() < 1e-6);
    // x = 0.5 against the support vectors -1 and +1
    let f = decision(&m, &[-0.5, 0.5]).unwrap();
    assert!((f - 0.5).abs() < 1e-6);
}

#[test]
fn kkt_on_separable_and_overlapping_sets() {
    let cfg = TrainConfig::default();
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (xs, ys) = separable_points(&mut rng, 50, 0.2);
        for g in [linear_gram(&xs), rbf_gram(&xs, 0.5)] {
            let m = train_smo(&g, &ys, &cfg).unwrap();
            assert!(kkt_violation(&g, &ys, &m, &cfg) <= cfg.tol);
        }
        let (xs, ys) = overlapping_points(&mut rng, 50);
        for g in [linear_gram(&xs), rbf_gram(&xs, 0.5)] {
            let m = train_smo(&g, &ys, &cfg).unwrap();
            assert!(kkt_violation(&g, &ys, &m, &cfg) <= cfg.tol);
            assert!((0..50).any(|i| m.alpha(i) == cfg.c), "overlapping data should hit the bound");
        }
    }
}

#[test]
fn class_weighted_kkt() {
    let cfg = TrainConfig { positive_weight: 2.0, negative_weight: 0.5, ..TrainConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (xs, ys) = overlapping_points(&mut rng, 40);
    let g = rbf_gram(&xs, 1.0);
    let m = train_smo(&g, &ys, &cfg).unwrap();
    assert!(kkt_violation(&g, &ys, &m, &cfg) <= cfg.tol);
}

#[test]
fn dual_objective_never_decreases() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (xs, ys) = overlapping_points(&mut rng, 50);
    let (m, trace) = train_smo_traced(&rbf_gram(&xs, 0.5), &ys, &TrainConfig::default()).unwrap();
    assert_eq!(trace.len(), m.iterations + 1);
    for w in trace.windows(2) {
        assert!(w[1] >= w[0], "objective dropped from {} to {}", w[0], w[1]);
    }
    assert_eq!(*trace.last().unwrap(), m.dual_objective);
}

#[test]
fn separable_toy_set_has_no_training_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (xs, ys) = separable_points(&mut rng, 20, 0.3);
    let xs: Vec<[f64; 2]> = xs.iter().map(|p| [4.0 * p[0], 4.0 * p[1]]).collect();
    let g = linear_gram(&xs);
    let m = train_smo(&g, &ys, &TrainConfig::default()).unwrap();
    for i in 0..20 {
        assert!(f64::from(ys[i]) * m.decision_full(g.row(i)).unwrap() > 0.0);
    }
}

#[test]
fn duplicating_examples_keeps_the_decision_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (xs, ys) = separable_points(&mut rng, 20, 0.3);
    let xs: Vec<[f64; 2]> = xs.iter().map(|p| [4.0 * p[0], 4.0 * p[1]]).collect();
    let cfg = TrainConfig { tol: 1e-6, ..TrainConfig::default() };
    let single = train_smo(&linear_gram(&xs), &ys, &cfg).unwrap();
    // below C/2 the duplicated problem has the halved solution
    assert!((0..20).all(|i| single.alpha(i) < 0.5 * cfg.c));
    let doubled_x: Vec<[f64; 2]> = xs.iter().chain(&xs).copied().collect();
    let doubled_y: Vec<i8> = ys.iter().chain(&ys).copied().collect();
    let g2 = linear_gram(&doubled_x);
    let double = train_smo(&g2, &doubled_y, &cfg).unwrap();
    for (i, p) in xs.iter().enumerate() {
        let row1: Vec<f64> = xs.iter().map(|q| p[0] * q[0] + p[1] * q[1]).collect();
        let row2: Vec<f64> = doubled_x.iter().map(|q| p[0] * q[0] + p[1] * q[1]).collect();
        let (f1, f2) = (single.decision_full(&row1).unwrap(), double.decision_full(&row2).unwrap());
        assert!((f1 - f2).abs() <= 1e-3, "point {i}: {f1} vs {f2}");
    }
}

#[test]
fn free_support_vectors_sit_on_the_margin() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (xs, ys) = overlapping_points(&mut rng, 50);
    let g = rbf_gram(&xs, 0.5);
    let cfg = TrainConfig::default();
    let m = train_smo(&g, &ys, &cfg).unwrap();
    let mut free = 0;
    for i in 0..50 {
        let a = m.alpha(i);
        if a > 0.0 && a < cfg.c {
            free += 1;
            let f = m.decision_full(g.row(i)).unwrap();
            assert!((f - f64::from(ys[i])).abs() <= cfg.tol);
        }
    }
    assert!(free > 0);
}

#[test]
fn fixed_seed_is_bit_identical_and_seeds_agree_on_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (xs, ys) = overlapping_points(&mut rng, 50);
    let g = rbf_gram(&xs, 0.5);
    let a = train_smo(&g, &ys, &TrainConfig { seed: 4, ..TrainConfig::default() }).unwrap();
    let b = train_smo(&g, &ys, &TrainConfig { seed: 4, ..TrainConfig::default() }).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.bias.to_bits(), b.bias.to_bits());
}
