//! Confusion-matrix scores and cross-validated learning curves.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::derive_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("{preds} predictions for {labels} labels")]
    LengthMismatch { preds: usize, labels: usize },
    #[error("value {0} is not a binary label")]
    NonBinary(u8),
    #[error("no samples to score")]
    Empty,
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("train-size fraction {0} outside (0, 1]")]
    BadFraction(f64),
    #[error("class {class} has {count} samples, fewer than {folds} folds")]
    FoldTooSmall { class: u8, count: usize, folds: usize },
    #[error("training failed: {0}")]
    Training(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Counts with label 1 (well suited) as the positive class.
pub fn confusion(preds: &[u8], labels: &[u8]) -> Result<ConfusionMatrix, MetricsError> {
    if preds.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            preds: preds.len(),
            labels: labels.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &l) in preds.iter().zip(labels) {
        match (p, l) {
            (1, 1) => cm.tp += 1,
            (1, 0) => cm.fp += 1,
            (0, 0) => cm.tn += 1,
            (0, 1) => cm.fn_ += 1,
            (x, 0 | 1) => return Err(MetricsError::NonBinary(x)),
            (_, y) => return Err(MetricsError::NonBinary(y)),
        }
    }
    Ok(cm)
}

/// Scores in `[0, 1]`. Ratios with a zero denominator are reported as 0.0
/// and named in `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
    pub balanced_accuracy: f64,
    pub undefined: Vec<String>,
}

fn ratio(num: usize, den: usize, name: &str, undefined: &mut Vec<String>) -> f64 {
    if den == 0 {
        undefined.push(name.to_string());
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1_score(precision: f64, recall: f64) -> Option<f64> {
    let s = precision + recall;
    (s > 0.0).then(|| 2.0 * precision * recall / s)
}

/// Precision implied by an F1 score and recall.
pub fn precision_from_f1(f1: f64, recall: f64) -> Option<f64> {
    let den = 2.0 * recall - f1;
    (den > 0.0).then(|| f1 * recall / den)
}

pub fn report(cm: &ConfusionMatrix) -> Result<ScoreReport, MetricsError> {
    if cm.total() == 0 {
        return Err(MetricsError::Empty);
    }
    let mut undefined = Vec::new();
    let accuracy = (cm.tp + cm.tn) as f64 / cm.total() as f64;
    let precision = ratio(cm.tp, cm.tp + cm.fp, "precision", &mut undefined);
    let recall = ratio(cm.tp, cm.tp + cm.fn_, "recall", &mut undefined);
    let specificity = ratio(cm.tn, cm.tn + cm.fp, "specificity", &mut undefined);
    let f1 = match f1_score(precision, recall) {
        Some(f) if !undefined.iter().any(|u| u == "precision" || u == "recall") => f,
        _ => {
            undefined.push("f1".to_string());
            0.0
        }
    };
    Ok(ScoreReport {
        accuracy,
        precision,
        recall,
        specificity,
        f1,
        balanced_accuracy: 0.5 * (recall + specificity),
        undefined,
    })
}

/// `score(preds, labels)` in one call.
pub fn score(preds: &[u8], labels: &[u8]) -> Result<ScoreReport, MetricsError> {
    report(&confusion(preds, labels)?)
}

pub fn balanced_accuracy(preds: &[u8], labels: &[u8]) -> Result<f64, MetricsError> {
    Ok(score(preds, labels)?.balanced_accuracy)
}

/// One row of a score table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset_variant: String,
    pub split_name: String,
    pub report: ScoreReport,
}

pub fn write_report_csv<W: Write>(rows: &[ReportRow], w: W) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "dataset_variant",
        "split_name",
        "accuracy",
        "f1",
        "recall",
        "specificity",
        "balanced_accuracy",
        "undefined",
    ])?;
    for r in rows {
        let s = &r.report;
        wtr.write_record([
            r.dataset_variant.clone(),
            r.split_name.clone(),
            format!("{:.6}", s.accuracy),
            format!("{:.6}", s.f1),
            format!("{:.6}", s.recall),
            format!("{:.6}", s.specificity),
            format!("{:.6}", s.balanced_accuracy),
            s.undefined.join(";"),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// A model that can be refit from scratch on any training subset.
pub trait BinaryClassifier {
    fn fit(&mut self, x: &[Vec<f64>], y: &[u8]) -> Result<(), String>;
    fn predict(&self, x: &[Vec<f64>]) -> Vec<u8>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fraction: f64,
    pub train_size: usize,
    pub train_mean: f64,
    pub train_std: f64,
    pub val_mean: f64,
    pub val_std: f64,
}

/// `0.1, 0.2, ..., 1.0`.
pub fn default_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
pub fn stratified_folds(y: &[u8], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>, MetricsError> {
    if folds < 2 {
        return Err(MetricsError::TooFewFolds(folds));
    }
    let mut out = vec![Vec::new(); folds];
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if idx.len() < folds {
            return Err(MetricsError::FoldTooSmall {
                class,
                count: idx.len(),
                folds,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[class as u64]));
        idx.shuffle(&mut rng);
        for (k, i) in idx.into_iter().enumerate() {
            out[k % folds].push(i);
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

fn accuracy(preds: &[u8], labels: &[u8]) -> f64 {
    let hits = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    hits as f64 / labels.len().max(1) as f64
}

/// K-fold learning curve. For each fraction of the training complement, a
/// fresh model from `factory(seed)` is fit on that leading share of a
/// shuffled complement and scored on the training subset and on the held-out
/// fold.
pub fn learning_curve<C, F>(
    factory: F,
    x: &[Vec<f64>],
    y: &[u8],
    folds: usize,
    grid: &[f64],
    seed: u64,
) -> Result<Vec<CurvePoint>, MetricsError>
where
    C: BinaryClassifier,
    F: Fn(u64) -> C + Sync,
{
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch {
            preds: x.len(),
            labels: y.len(),
        });
    }
    if let Some(&f) = grid.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(MetricsError::BadFraction(f));
    }
    let parts = stratified_folds(y, folds, seed)?;
    let mut out = Vec::with_capacity(grid.len());
    for (gi, &frac) in grid.iter().enumerate() {
        let scores = (0..folds)
            .into_par_iter()
            .map(|f| {
                let mut pool: Vec<usize> = (0..folds)
                    .filter(|&g| g != f)
                    .flat_map(|g| parts[g].iter().copied())
                    .collect();
                pool.sort_unstable();
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1, f as u64]));
                pool.shuffle(&mut rng);
                let size = ((pool.len() as f64 * frac).round() as usize).max(1);
                let sub = &pool[..size];
                let tx: Vec<Vec<f64>> = sub.iter().map(|&i| x[i].clone()).collect();
                let ty: Vec<u8> = sub.iter().map(|&i| y[i]).collect();
                let vx: Vec<Vec<f64>> = parts[f].iter().map(|&i| x[i].clone()).collect();
                let vy: Vec<u8> = parts[f].iter().map(|&i| y[i]).collect();
                let mut model = factory(derive_seed(seed, &[2, gi as u64, f as u64]));
                model.fit(&tx, &ty).map_err(MetricsError::Training)?;
                Ok((
                    size,
                    accuracy(&model.predict(&tx), &ty),
                    accuracy(&model.predict(&vx), &vy),
                ))
            })
            .collect::<Result<Vec<_>, MetricsError>>()?;
        let train: Vec<f64> = scores.iter().map(|s| s.1).collect();
        let val: Vec<f64> = scores.iter().map(|s| s.2).collect();
        let (train_mean, train_std) = mean_std(&train);
        let (val_mean, val_std) = mean_std(&val);
        out.push(CurvePoint {
            fraction: frac,
            train_size: scores.iter().map(|s| s.0).sum::<usize>() / folds,
            train_mean,
            train_std,
            val_mean,
            val_std,
        });
    }
    Ok(out)
}

pub fn write_curve_csv<W: Write>(points: &[CurvePoint], w: W) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["fraction", "train_mean", "train_std", "val_mean", "val_std"])?;
    for p in points {
        wtr.write_record([
            format!("{}", p.fraction),
            format!("{:.6}", p.train_mean),
            format!("{:.6}", p.train_std),
            format!("{:.6}", p.val_mean),
            format!("{:.6}", p.val_std),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
