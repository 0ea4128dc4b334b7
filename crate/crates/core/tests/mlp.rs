use hhl_depth::metrics::balanced_accuracy;
use hhl_depth::mlp::{best_threshold, Mlp, MlpError, TrainConfig, HIDDEN_LAYERS};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr_free::normal;

/// Box-Muller normals, so the tests need no extra distribution crate.
mod rand_distr_free {
    use rand::Rng;

    pub fn normal<R: Rng>(rng: &mut R) -> f64 {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        let v: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }
}

fn blobs(n: usize, dim: usize, sep: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let c = (i % 2) as u8;
        let shift = if c == 1 { sep } else { -sep };
        x.push((0..dim).map(|_| shift + normal(&mut rng)).collect());
        y.push(c);
    }
    (x, y)
}

fn finite_difference_check(dims: &[usize], seed: u64) -> f64 {
    let m = Mlp::with_layers(dims, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
    let x = Array2::from_shape_fn((6, dims[0]), |_| rng.gen_range(-2.0..2.0));
    let y: Vec<f64> = (0..6).map(|i| (i % 2) as f64).collect();
    let (loss, g) = m.loss_and_gradients(&x, &y);
    assert!((loss - m.loss_std(&x, &y)).abs() < 1e-14);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for l in 0..m.weights.len() {
        let (r, c) = m.weights[l].dim();
        for k in 0..(r * c).min(40) {
            let (i, j) = ((k * 7919) % r, (k * 104_729) % c);
            let mut p = m.clone();
            p.weights[l][(i, j)] += h;
            let up = p.loss_std(&x, &y);
            p.weights[l][(i, j)] -= 2.0 * h;
            let num = (up - p.loss_std(&x, &y)) / (2.0 * h);
            worst = worst.max(rel(g.weights[l][(i, j)], num));
        }
        for j in 0..c.min(10) {
            let mut p = m.clone();
            p.biases[l][j] += h;
            let up = p.loss_std(&x, &y);
            p.biases[l][j] -= 2.0 * h;
            let num = (up - p.loss_std(&x, &y)) / (2.0 * h);
            worst = worst.max(rel(g.biases[l][j], num));
        }
    }
    worst
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-10)
}

#[test]
fn gradients_match_finite_differences() {
    for (dims, seed) in [
        (vec![3, 1], 1),
        (vec![4, 5, 1], 2),
        (vec![5, 8, 6, 4, 1], 3),
        (vec![6, 16, 12, 10, 8, 6, 1], 4),
    ] {
        let w = finite_difference_check(&dims, seed);
        assert!(w <= 1e-5, "{dims:?}: worst relative error {w:e}");
    }
    let mut dims = vec![6];
    dims.extend(HIDDEN_LAYERS);
    dims.push(1);
    let w = finite_difference_check(&dims, 5);
    assert!(w <= 1e-5, "standard architecture: {w:e}");
}

#[test]
fn separates_gaussian_blobs() {
    let (x, y) = blobs(600, 4, 1.5, 8);
    let (tx, ty) = (&x[..400], &y[..400]);
    let (vx, vy) = (&x[400..500], &y[400..500]);
    let (ex, ey) = (&x[500..], &y[500..]);
    let mut m = Mlp::new(4, 3);
    let cfg = TrainConfig {
        max_epochs: 60,
        ..Default::default()
    };
    m.train(tx, ty, vx, vy, &cfg).unwrap();
    let pred = m.predict(ex).unwrap();
    let acc = pred.iter().zip(ey).filter(|(p, t)| p == t).count() as f64 / ey.len() as f64;
    assert!(acc >= 0.99, "accuracy {acc}");
}

#[test]
fn full_batch_loss_is_non_increasing_at_small_lr() {
    let (x, y) = blobs(64, 3, 1.0, 2);
    let mut m = Mlp::with_layers(&[3, 32, 16, 1], 9);
    let cfg = TrainConfig {
        lr0: 1e-4,
        max_epochs: 50,
        batch_size: 64,
        patience: 1000,
        ..Default::default()
    };
    m.train(&x, &y, &x, &y, &cfg).unwrap();
    let h = &m.train_meta.history;
    assert_eq!(h.len(), 50);
    for w in h.windows(2) {
        assert!(w[1].train_loss <= w[0].train_loss + 1e-15, "{} -> {}", w[0].train_loss, w[1].train_loss);
    }
    assert!(h[49].train_loss < h[0].train_loss);
}

#[test]
fn training_is_deterministic() {
    let (x, y) = blobs(120, 3, 0.7, 4);
    let cfg = TrainConfig {
        max_epochs: 8,
        seed: 5,
        ..Default::default()
    };
    let run = || {
        let mut m = Mlp::with_layers(&[3, 20, 10, 1], 6);
        m.train(&x[..100], &y[..100], &x[100..], &y[100..], &cfg).unwrap();
        m
    };
    assert_eq!(run(), run());
}

#[test]
fn save_load_round_trip_and_corruption() {
    let (x, y) = blobs(80, 3, 1.0, 5);
    let mut m = Mlp::with_layers(&[3, 7, 1], 2);
    m.train(&x[..60], &y[..60], &x[60..], &y[60..], &TrainConfig { max_epochs: 3, ..Default::default() })
        .unwrap();
    let mut buf = Vec::new();
    m.save(&mut buf).unwrap();
    let back = Mlp::load(buf.as_slice()).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.scores(&x).unwrap(), m.scores(&x).unwrap());

    let truncated = &buf[..buf.len() / 2];
    assert!(matches!(Mlp::load(truncated), Err(MlpError::Json(_))));

    let text = String::from_utf8(buf).unwrap();
    let bumped = text.replacen("\"schema_version\":1", "\"schema_version\":9", 1);
    assert!(matches!(Mlp::load(bumped.as_bytes()), Err(MlpError::Schema { found: 9, .. })));
    let bad_dims = text.replacen("\"layer_dims\":[3,7,1]", "\"layer_dims\":[3,8,1]", 1);
    assert!(matches!(Mlp::load(bad_dims.as_bytes()), Err(MlpError::Corrupt(_))));
}

#[test]
fn rejects_degenerate_training_sets() {
    let mut m = Mlp::with_layers(&[2, 3, 1], 0);
    let x = vec![vec![0.0, 1.0]; 4];
    let cfg = TrainConfig::default();
    assert!(matches!(m.train(&x, &[1, 1, 1, 1], &x, &[1, 1, 1, 1], &cfg), Err(MlpError::MissingClass { .. })));
    assert!(matches!(m.train(&x, &[1, 0], &x, &[1, 0], &cfg), Err(MlpError::LabelCount { .. })));
    let bad = TrainConfig { lr0: -1.0, ..cfg };
    assert!(matches!(m.train(&x, &[1, 0, 1, 0], &x, &[1, 0, 1, 0], &bad), Err(MlpError::InvalidConfig(_))));
    assert!(m.predict(&[vec![1.0]]).is_err());
}

fn balanced_at(scores: &[f64], labels: &[u8], t: f64) -> f64 {
    let preds: Vec<u8> = scores.iter().map(|&s| u8::from(s > t)).collect();
    balanced_accuracy(&preds, labels).unwrap()
}

proptest! {
    #[test]
    fn tuned_threshold_is_at_least_as_good_as_any_sweep_point(
        pairs in proptest::collection::vec((0.0f64..1.0, 0u8..2), 2..80)
    ) {
        let (scores, labels): (Vec<f64>, Vec<u8>) = pairs.into_iter().unzip();
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let t = best_threshold(&scores, &labels).unwrap();
        let tuned = balanced_at(&scores, &labels, t);
        prop_assert!(tuned >= balanced_at(&scores, &labels, 0.5) - 1e-12);
        // brute-force oracle: every score value and a fine grid
        let mut sweep: Vec<f64> = scores.clone();
        sweep.extend((0..=1000).map(|i| i as f64 / 1000.0));
        for s in sweep {
            prop_assert!(tuned >= balanced_at(&scores, &labels, s) - 1e-12);
        }
    }
}
