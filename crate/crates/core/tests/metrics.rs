use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use hhl_depth::dataset::{attach_depths, build_corpus, featurize, label_corpus, CorpusSpec, DepthCutoff};
use hhl_depth::features::Variant;
use hhl_depth::metrics::{
    confusion, default_grid, f1_score, learning_curve, precision_from_f1, report, score,
    write_curve_csv, write_report_csv, BinaryClassifier, ConfusionMatrix, MetricsError, ReportRow,
};
use hhl_depth::mlp::{MlpClassifier, TrainConfig};
use proptest::prelude::*;

#[test]
fn confusion_examples() {
    let cm = confusion(&[1, 0], &[1, 0]).unwrap();
    assert_eq!((cm.tp, cm.tn, cm.fp, cm.fn_), (1, 1, 0, 0));
    let cm = confusion(&[0, 1], &[1, 0]).unwrap();
    assert_eq!((cm.tp, cm.tn), (0, 0));
    assert!(matches!(confusion(&[1], &[1, 0]), Err(MetricsError::LengthMismatch { .. })));
    assert!(matches!(confusion(&[2], &[1]), Err(MetricsError::NonBinary(2))));
}

#[test]
fn report_examples() {
    let r = report(&ConfusionMatrix { tp: 8, fp: 9, tn: 1, fn_: 2 }).unwrap();
    assert!((r.recall - 0.8).abs() < 1e-12);
    assert!((r.specificity - 0.1).abs() < 1e-12);
    assert!((r.balanced_accuracy - 0.45).abs() < 1e-12);
    let p = precision_from_f1(0.753, 0.691).unwrap();
    assert!((p - 0.827).abs() < 1e-3, "{p}");
    assert!((f1_score(p, 0.691).unwrap() - 0.753).abs() < 1e-12);
    assert!(report(&ConfusionMatrix::default()).is_err());
}

#[test]
fn always_positive_predictor_has_half_balanced_accuracy() {
    for labels in [vec![1, 0], vec![1, 1, 0], vec![0, 0, 0, 1]] {
        let r = score(&vec![1; labels.len()], &labels).unwrap();
        assert!((r.balanced_accuracy - 0.5).abs() < 1e-12);
    }
}

#[test]
fn report_csv_layout() {
    let r = score(&[1, 0, 1], &[1, 0, 0]).unwrap();
    let mut buf = Vec::new();
    write_report_csv(
        &[ReportRow {
            dataset_variant: "d1".into(),
            split_name: "Test".into(),
            report: r,
        }],
        &mut buf,
    )
    .unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "dataset_variant,split_name,accuracy,f1,recall,specificity,balanced_accuracy,undefined"
    );
    assert!(lines.next().unwrap().starts_with("d1,Test,0.666667,0.666667,1.000000,0.500000,0.750000"));
}

/// Predicts the training majority and counts fitted rows.
struct Majority {
    class: u8,
    seen: Arc<AtomicUsize>,
}

impl BinaryClassifier for Majority {
    fn fit(&mut self, _x: &[Vec<f64>], y: &[u8]) -> Result<(), String> {
        self.seen.fetch_add(y.len(), Ordering::SeqCst);
        let pos = y.iter().filter(|&&v| v == 1).count();
        self.class = u8::from(2 * pos > y.len());
        Ok(())
    }

    fn predict(&self, x: &[Vec<f64>]) -> Vec<u8> {
        vec![self.class; x.len()]
    }
}

#[test]
fn learning_curve_arithmetic_and_determinism() {
    let y: Vec<u8> = (0..100).map(|i| u8::from(i % 3 == 0)).collect();
    let x: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64]).collect();
    let seen = Arc::new(AtomicUsize::new(0));
    let factory = |_seed: u64| Majority {
        class: 0,
        seen: seen.clone(),
    };
    let curve = learning_curve(factory, &x, &y, 5, &[1.0], 3).unwrap();
    assert_eq!(curve[0].train_size, 80);
    assert_eq!(seen.load(Ordering::SeqCst), 5 * 80);
    let again = learning_curve(factory, &x, &y, 5, &[0.3, 1.0], 3).unwrap();
    assert_eq!(again, learning_curve(factory, &x, &y, 5, &[0.3, 1.0], 3).unwrap());
    assert!(learning_curve(factory, &x, &y, 1, &[1.0], 3).is_err());
    assert!(learning_curve(factory, &x, &y, 5, &[0.0], 3).is_err());
    assert!(matches!(
        learning_curve(factory, &x[..6], &y[..6], 5, &[1.0], 3),
        Err(MetricsError::FoldTooSmall { .. })
    ));
    let mut buf = Vec::new();
    write_curve_csv(&curve, &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("fraction,train_mean,train_std,val_mean,val_std\n1,"));
}

/// The 4x4 slice of the default corpus; per-sample seeds do not depend on the other sizes.
#[test]
fn raw_entry_learning_curve_plateaus() {
    let spec = CorpusSpec {
        sizes: vec![4],
        per_config: 200,
        kappa_max: 1000.0,
        seed: 7,
    };
    let mut corpus = build_corpus(&spec).unwrap();
    attach_depths(&mut corpus).unwrap();
    label_corpus(&mut corpus, DepthCutoff::Quantile(0.476)).unwrap();
    let table = featurize(&corpus, Variant::D4).unwrap();
    let y = table.labels().unwrap();
    let factory = |seed: u64| MlpClassifier::new(TrainConfig { seed, ..Default::default() });
    let grid = default_grid();
    let c = learning_curve(factory, &table.rows, &y, 5, &grid, 11).unwrap();
    let first = (c[1].val_mean - c[0].val_mean) / (grid[1] - grid[0]);
    let last = (c[9].val_mean - c[8].val_mean) / (grid[9] - grid[8]);
    assert!(last < first, "slopes first {first:.3} last {last:.3}: {c:?}");
}

proptest! {
    #[test]
    fn metrics_match_brute_force_recount(
        pairs in proptest::collection::vec((0u8..2, 0u8..2), 1000)
    ) {
        let (p, l): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let cm = confusion(&p, &l).unwrap();
        prop_assert_eq!(cm.total(), 1000);
        let count = |a: u8, b: u8| p.iter().zip(&l).filter(|&(&x, &y)| x == a && y == b).count();
        prop_assert_eq!((cm.tp, cm.fp, cm.tn, cm.fn_), (count(1, 1), count(1, 0), count(0, 0), count(0, 1)));
        let r = report(&cm).unwrap();
        let correct = p.iter().zip(&l).filter(|(a, b)| a == b).count() as f64;
        prop_assert!((r.accuracy - correct / 1000.0).abs() < 1e-12);
        let pos = l.iter().filter(|&&v| v == 1).count() as f64;
        if pos > 0.0 {
            prop_assert!((r.recall - count(1, 1) as f64 / pos).abs() < 1e-12);
        }
    }

    #[test]
    fn self_comparison_scores_one(labels in proptest::collection::vec(0u8..2, 2..200)) {
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let r = score(&labels, &labels).unwrap();
        for v in [r.accuracy, r.precision, r.recall, r.specificity, r.f1, r.balanced_accuracy] {
            prop_assert_eq!(v, 1.0);
        }
        prop_assert!(r.undefined.is_empty());
    }

    #[test]
    fn f1_lies_between_precision_and_recall(p in 0.0f64..=1.0, r in 0.0f64..=1.0) {
        prop_assume!(p + r > 0.0);
        let f = f1_score(p, r).unwrap();
        prop_assert!(f <= p.max(r) + 1e-12 && f >= p.min(r) - 1e-12);
    }
}
