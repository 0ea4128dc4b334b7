//! Fully connected ReLU network with a logistic output, trained by mini-batch
//! SGD with momentum on binary cross-entropy.
//!
//! Inputs are z-scored with statistics fit on the training set and stored in
//! the model. The learning rate is divided by `lr_decay_divisor` after
//! `patience` consecutive epochs without a validation-loss improvement larger
//! than `early_stop_tolerance`; training stops when the rate falls below
//! `min_lr` or after `max_epochs`, and the best-validation weights are kept.

use std::io::{Read, Write};

use ndarray::{Array1, Array2, Axis};
use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{derive_seed, split};
use crate::metrics::{balanced_accuracy, BinaryClassifier};

pub const SCHEMA_VERSION: u32 = 1;
pub const HIDDEN_LAYERS: [usize; 5] = [512, 256, 256, 256, 256];
pub const LOGIT_CLAMP: f64 = 30.0;

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("input has {got} features, model expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("{0} set is empty")]
    EmptySet(&'static str),
    #[error("{set} set lacks class {class}")]
    MissingClass { set: &'static str, class: u8 },
    #[error("{x} rows but {y} labels")]
    LabelCount { x: usize, y: usize },
    #[error("loss became non-finite ({loss}) at epoch {epoch} with learning rate {lr}")]
    NonFinite { epoch: usize, loss: f64, lr: f64 },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("model schema version {found}, expected {expected}")]
    Schema { found: u32, expected: u32 },
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr0: f64,
    pub momentum: f64,
    pub patience: usize,
    pub lr_decay_divisor: f64,
    pub min_lr: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub early_stop_tolerance: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr0: 0.01,
            momentum: 0.9,
            patience: 15,
            lr_decay_divisor: 5.0,
            min_lr: 1e-6,
            max_epochs: 500,
            batch_size: 64,
            early_stop_tolerance: 1e-4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), MlpError> {
        let bad = |m: &str| Err(MlpError::InvalidConfig(m.to_string()));
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return bad("lr0 must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if !(self.lr_decay_divisor > 1.0) {
            return bad("lr_decay_divisor must exceed 1");
        }
        if self.patience == 0 || self.batch_size == 0 || self.max_epochs == 0 {
            return bad("patience, batch_size and max_epochs must be positive");
        }
        if !(self.early_stop_tolerance >= 0.0) || !(self.min_lr >= 0.0) {
            return bad("tolerances must be non-negative");
        }
        Ok(())
    }
}

/// Learning-rate rule driven by validation loss.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauSchedule {
    pub lr: f64,
    pub best: f64,
    pub stagnant: usize,
    patience: usize,
    divisor: f64,
    tolerance: f64,
}

impl PlateauSchedule {
    pub fn new(cfg: &TrainConfig) -> Self {
        Self {
            lr: cfg.lr0,
            best: f64::INFINITY,
            stagnant: 0,
            patience: cfg.patience,
            divisor: cfg.lr_decay_divisor,
            tolerance: cfg.early_stop_tolerance,
        }
    }

    /// Records one epoch's validation loss; returns whether it is a new best.
    pub fn step(&mut self, val_loss: f64) -> bool {
        if val_loss < self.best - self.tolerance {
            self.best = val_loss;
            self.stagnant = 0;
            return true;
        }
        self.stagnant += 1;
        if self.stagnant >= self.patience {
            self.lr /= self.divisor;
            self.stagnant = 0;
        }
        false
    }
}

/// Per-feature z-score parameters; zero-variance features keep unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn fit(x: &[Vec<f64>]) -> Self {
        let dim = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut std = vec![0.0; dim];
        for row in x {
            for ((s, v), m) in std.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        let std = std
            .into_iter()
            .map(|v| if v.sqrt() > 1e-12 { v.sqrt() } else { 1.0 })
            .collect();
        Self { mean, std }
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Array2<f64> {
        let dim = self.mean.len();
        Array2::from_shape_fn((x.len(), dim), |(i, j)| (x[i][j] - self.mean[j]) / self.std[j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainMeta {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub final_lr: f64,
    pub stop_reason: String,
    pub history: Vec<EpochRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<TrainConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layer_dims: Vec<usize>,
    /// `weights[l]` has shape `fan_in x fan_out`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub scaler: Scaler,
    pub threshold: f64,
    pub train_meta: TrainMeta,
}

/// Gradients in the same layout as the parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Binary cross-entropy of one clamped logit.
fn bce(z: f64, y: f64) -> f64 {
    let z = z.clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

impl Mlp {
    /// Standard architecture: `input_dim -> 512 -> 256 x4 -> 1`.
    pub fn new(input_dim: usize, seed: u64) -> Self {
        let mut dims = vec![input_dim];
        dims.extend(HIDDEN_LAYERS);
        dims.push(1);
        Self::with_layers(&dims, seed)
    }

    /// He-uniform weights, zero biases.
    pub fn with_layers(dims: &[usize], seed: u64) -> Self {
        assert!(dims.len() >= 2 && dims.iter().all(|&d| d >= 1), "bad layer dims");
        assert_eq!(*dims.last().unwrap(), 1, "single output unit");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in dims.windows(2) {
            let bound = (6.0 / w[0] as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            weights.push(Array2::from_shape_simple_fn((w[0], w[1]), || dist.sample(&mut rng)));
            biases.push(Array1::zeros(w[1]));
        }
        Self {
            layer_dims: dims.to_vec(),
            weights,
            biases,
            scaler: Scaler::identity(dims[0]),
            threshold: 0.5,
            train_meta: TrainMeta::default(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    fn check_dim(&self, x: &[Vec<f64>]) -> Result<(), MlpError> {
        if let Some(row) = x.iter().find(|r| r.len() != self.input_dim()) {
            return Err(MlpError::Dimension {
                expected: self.input_dim(),
                got: row.len(),
            });
        }
        Ok(())
    }

    /// Pre-activations of every layer for standardized input.
    fn pre_activations(&self, x: &Array2<f64>) -> Vec<Array2<f64>> {
        let last = self.weights.len() - 1;
        let mut zs = Vec::with_capacity(self.weights.len());
        let mut a = x.clone();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let z = a.dot(w) + b;
            if l < last {
                a = z.mapv(|v| v.max(0.0));
            }
            zs.push(z);
        }
        zs
    }

    /// Output logits for standardized input.
    pub fn logits_std(&self, x: &Array2<f64>) -> Vec<f64> {
        self.pre_activations(x).pop().unwrap().column(0).to_vec()
    }

    /// Confidence scores in `(0, 1)` for raw (unstandardized) feature rows.
    pub fn scores(&self, x: &[Vec<f64>]) -> Result<Vec<f64>, MlpError> {
        self.check_dim(x)?;
        let xs = self.scaler.transform(x);
        Ok(self
            .logits_std(&xs)
            .into_iter()
            .map(|z| sigmoid(z.clamp(-LOGIT_CLAMP, LOGIT_CLAMP)))
            .collect())
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64, MlpError> {
        Ok(self.scores(&[x.to_vec()])?[0])
    }

    /// `score > threshold`.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<u8>, MlpError> {
        Ok(self
            .scores(x)?
            .into_iter()
            .map(|s| u8::from(s > self.threshold))
            .collect())
    }

    /// Mean cross-entropy on standardized input.
    pub fn loss_std(&self, x: &Array2<f64>, y: &[f64]) -> f64 {
        let z = self.logits_std(x);
        z.iter().zip(y).map(|(&z, &y)| bce(z, y)).sum::<f64>() / y.len() as f64
    }

    /// Mean cross-entropy and its gradient on standardized input.
    pub fn loss_and_gradients(&self, x: &Array2<f64>, y: &[f64]) -> (f64, Gradients) {
        let n = y.len() as f64;
        let zs = self.pre_activations(x);
        let layers = self.weights.len();
        let out = &zs[layers - 1];
        let mut loss = 0.0;
        let mut dz = Array2::zeros(out.raw_dim());
        for i in 0..y.len() {
            let z = out[(i, 0)];
            loss += bce(z, y[i]);
            dz[(i, 0)] = (sigmoid(z.clamp(-LOGIT_CLAMP, LOGIT_CLAMP)) - y[i]) / n;
        }
        let mut gw = vec![Array2::zeros((0, 0)); layers];
        let mut gb = vec![Array1::zeros(0); layers];
        for l in (0..layers).rev() {
            let input = if l == 0 {
                x.clone()
            } else {
                zs[l - 1].mapv(|v| v.max(0.0))
            };
            gw[l] = input.t().dot(&dz);
            gb[l] = dz.sum_axis(Axis(0));
            if l > 0 {
                let mut da = dz.dot(&self.weights[l].t());
                da.zip_mut_with(&zs[l - 1], |d, &z| {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                });
                dz = da;
            }
        }
        (loss / n, Gradients { weights: gw, biases: gb })
    }

    /// Trains in place; the scaler is refit on `train_x`.
    pub fn train(
        &mut self,
        train_x: &[Vec<f64>],
        train_y: &[u8],
        val_x: &[Vec<f64>],
        val_y: &[u8],
        cfg: &TrainConfig,
    ) -> Result<&TrainMeta, MlpError> {
        cfg.validate()?;
        check_set("training", train_x, train_y, true)?;
        check_set("validation", val_x, val_y, false)?;
        self.check_dim(train_x)?;
        self.check_dim(val_x)?;

        self.scaler = Scaler::fit(train_x);
        let xt = self.scaler.transform(train_x);
        let xv = self.scaler.transform(val_x);
        let yt: Vec<f64> = train_y.iter().map(|&v| v as f64).collect();
        let yv: Vec<f64> = val_y.iter().map(|&v| v as f64).collect();

        let mut vw: Vec<Array2<f64>> = self.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect();
        let mut vb: Vec<Array1<f64>> = self.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect();
        let mut sched = PlateauSchedule::new(cfg);
        let mut best = (self.weights.clone(), self.biases.clone());
        let mut meta = TrainMeta {
            config: Some(*cfg),
            ..TrainMeta::default()
        };
        let mut order: Vec<usize> = (0..yt.len()).collect();
        let mut stop = "max_epochs";

        for epoch in 0..cfg.max_epochs {
            let lr = sched.lr;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[epoch as u64]));
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for batch in order.chunks(cfg.batch_size) {
                let xb = xt.select(Axis(0), batch);
                let yb: Vec<f64> = batch.iter().map(|&i| yt[i]).collect();
                let (loss, g) = self.loss_and_gradients(&xb, &yb);
                if !loss.is_finite() {
                    return Err(MlpError::NonFinite { epoch, loss, lr });
                }
                total += loss * batch.len() as f64;
                for l in 0..self.weights.len() {
                    vw[l].zip_mut_with(&g.weights[l], |v, &d| *v = cfg.momentum * *v - lr * d);
                    vb[l].zip_mut_with(&g.biases[l], |v, &d| *v = cfg.momentum * *v - lr * d);
                    self.weights[l] += &vw[l];
                    self.biases[l] += &vb[l];
                }
            }
            let train_loss = total / yt.len() as f64;
            let val_loss = self.loss_std(&xv, &yv);
            if !val_loss.is_finite() {
                return Err(MlpError::NonFinite { epoch, loss: val_loss, lr });
            }
            meta.history.push(EpochRecord {
                epoch,
                train_loss,
                val_loss,
                lr,
            });
            meta.epochs_run = epoch + 1;
            if sched.step(val_loss) {
                best = (self.weights.clone(), self.biases.clone());
                meta.best_epoch = epoch;
                meta.best_val_loss = val_loss;
            }
            if sched.lr < cfg.min_lr {
                stop = "lr_floor";
                break;
            }
        }
        self.weights = best.0;
        self.biases = best.1;
        meta.final_lr = sched.lr;
        meta.stop_reason = stop.to_string();
        self.train_meta = meta;
        Ok(&self.train_meta)
    }

    /// Sets and returns the threshold maximizing balanced accuracy on `(x, y)`.
    pub fn tune_threshold(&mut self, x: &[Vec<f64>], y: &[u8]) -> Result<f64, MlpError> {
        check_set("validation", x, y, true)?;
        let s = self.scores(x)?;
        self.threshold = best_threshold(&s, y)?;
        Ok(self.threshold)
    }

    pub fn save<W: Write>(&self, w: W) -> Result<(), MlpError> {
        let file = ModelFile {
            schema_version: SCHEMA_VERSION,
            input_dim: self.input_dim(),
            layer_dims: self.layer_dims.clone(),
            weights: self
                .weights
                .iter()
                .map(|w| w.rows().into_iter().map(|r| r.to_vec()).collect())
                .collect(),
            biases: self.biases.iter().map(|b| b.to_vec()).collect(),
            scaler_mean: self.scaler.mean.clone(),
            scaler_std: self.scaler.std.clone(),
            threshold: self.threshold,
            train_meta: self.train_meta.clone(),
        };
        serde_json::to_writer(w, &file)?;
        Ok(())
    }

    pub fn load<R: Read>(r: R) -> Result<Self, MlpError> {
        let f: ModelFile = serde_json::from_reader(r)?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(MlpError::Schema {
                found: f.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let corrupt = |m: String| Err(MlpError::Corrupt(m));
        let dims = &f.layer_dims;
        if dims.len() < 2 || dims[0] != f.input_dim || *dims.last().unwrap() != 1 {
            return corrupt(format!("layer dims {dims:?} with input_dim {}", f.input_dim));
        }
        if f.weights.len() != dims.len() - 1 || f.biases.len() != dims.len() - 1 {
            return corrupt("parameter count does not match layer dims".to_string());
        }
        if f.scaler_mean.len() != f.input_dim || f.scaler_std.len() != f.input_dim {
            return corrupt("scaler length does not match input_dim".to_string());
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (l, (w, b)) in f.weights.iter().zip(&f.biases).enumerate() {
            let (rows, cols) = (dims[l], dims[l + 1]);
            if w.len() != rows || w.iter().any(|r| r.len() != cols) || b.len() != cols {
                return corrupt(format!("layer {l} has the wrong shape"));
            }
            let flat: Vec<f64> = w.iter().flatten().copied().collect();
            if flat.iter().chain(b).any(|v| !v.is_finite()) {
                return corrupt(format!("layer {l} holds non-finite values"));
            }
            weights.push(Array2::from_shape_vec((rows, cols), flat).expect("checked shape"));
            biases.push(Array1::from(b.clone()));
        }
        if !(f.threshold.is_finite()) || f.scaler_std.iter().any(|&s| !(s > 0.0)) {
            return corrupt("invalid threshold or scaler".to_string());
        }
        Ok(Self {
            layer_dims: f.layer_dims,
            weights,
            biases,
            scaler: Scaler {
                mean: f.scaler_mean,
                std: f.scaler_std,
            },
            threshold: f.threshold,
            train_meta: f.train_meta,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema_version: u32,
    input_dim: usize,
    layer_dims: Vec<usize>,
    weights: Vec<Vec<Vec<f64>>>,
    biases: Vec<Vec<f64>>,
    scaler_mean: Vec<f64>,
    scaler_std: Vec<f64>,
    threshold: f64,
    train_meta: TrainMeta,
}

fn check_set(name: &'static str, x: &[Vec<f64>], y: &[u8], both: bool) -> Result<(), MlpError> {
    if x.is_empty() {
        return Err(MlpError::EmptySet(name));
    }
    if x.len() != y.len() {
        return Err(MlpError::LabelCount { x: x.len(), y: y.len() });
    }
    if both {
        for class in [0u8, 1] {
            if !y.contains(&class) {
                return Err(MlpError::MissingClass { set: name, class });
            }
        }
    }
    Ok(())
}

/// Threshold maximizing balanced accuracy of `score > t`. Candidates are 0,
/// the midpoints of consecutive distinct scores, and 1; ties go to the
/// smallest candidate.
pub fn best_threshold(scores: &[f64], labels: &[u8]) -> Result<f64, MlpError> {
    check_set(
        "validation",
        &scores.iter().map(|&s| vec![s]).collect::<Vec<_>>(),
        labels,
        true,
    )?;
    let mut uniq: Vec<f64> = scores.to_vec();
    uniq.sort_by(f64::total_cmp);
    uniq.dedup();
    let mut candidates = vec![0.0];
    candidates.extend(uniq.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    candidates.push(1.0);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for t in candidates {
        let preds: Vec<u8> = scores.iter().map(|&s| u8::from(s > t)).collect();
        let ba = balanced_accuracy(&preds, labels).expect("checked lengths");
        if ba > best.0 {
            best = (ba, t);
        }
    }
    Ok(best.1)
}

/// Adapter that trains a fresh network on each `fit`, holding out a stratified
/// validation share for the learning-rate schedule.
#[derive(Debug, Clone)]
pub struct MlpClassifier {
    pub cfg: TrainConfig,
    pub hidden: Vec<usize>,
    pub val_fraction: f64,
    pub tune: bool,
    pub model: Option<Mlp>,
}

impl MlpClassifier {
    pub fn new(cfg: TrainConfig) -> Self {
        Self {
            cfg,
            hidden: HIDDEN_LAYERS.to_vec(),
            val_fraction: 0.1,
            tune: false,
            model: None,
        }
    }
}

/// Trains the standard network on `(x, y)` with a stratified validation
/// hold-out drawn from it.
pub fn fit_with_holdout(
    x: &[Vec<f64>],
    y: &[u8],
    hidden: &[usize],
    val_fraction: f64,
    tune: bool,
    cfg: &TrainConfig,
) -> Result<Mlp, String> {
    let (tr, va) = split(y, val_fraction, derive_seed(cfg.seed, &[0xA11])).map_err(|e| e.to_string())?;
    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<u8>) {
        (idx.iter().map(|&i| x[i].clone()).collect(), idx.iter().map(|&i| y[i]).collect())
    };
    let (tx, ty) = pick(&tr);
    let (vx, vy) = pick(&va);
    let mut dims = vec![x.first().map_or(0, Vec::len)];
    dims.extend_from_slice(hidden);
    dims.push(1);
    let mut m = Mlp::with_layers(&dims, derive_seed(cfg.seed, &[0x1417]));
    m.train(&tx, &ty, &vx, &vy, cfg).map_err(|e| e.to_string())?;
    if tune {
        m.tune_threshold(&vx, &vy).map_err(|e| e.to_string())?;
    }
    Ok(m)
}

impl BinaryClassifier for MlpClassifier {
    fn fit(&mut self, x: &[Vec<f64>], y: &[u8]) -> Result<(), String> {
        self.model = Some(fit_with_holdout(x, y, &self.hidden, self.val_fraction, self.tune, &self.cfg)?);
        Ok(())
    }

    fn predict(&self, x: &[Vec<f64>]) -> Vec<u8> {
        match &self.model {
            Some(m) => m.predict(x).unwrap_or_else(|_| vec![0; x.len()]),
            None => vec![0; x.len()],
        }
    }
}
