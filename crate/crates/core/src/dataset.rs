//! Corpus generation, depth labeling, splitting, Iris sampling and
//! condition-number histogram matching.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{extract, FeatureError, Variant};
use crate::hhl::{build_hhl, labeling_depth, HhlError};
use crate::matrix::{
    condition_number, dilate, generate_random_sparse, normalize, sparsity, GenSpec, MatrixError,
    Provenance, SystemMatrix,
};

/// Number of condition-number bins over `[1, 1000]`.
pub const KAPPA_BINS: usize = 5;
pub const KAPPA_RANGE: (f64, f64) = (1.0, 1000.0);

/// Iris draws are rejected when `|det| < IRIS_DET_RTOL * prod ||row||`.
pub const IRIS_DET_RTOL: f64 = 1e-10;
/// Iris draws above this condition number would need more than 21
/// eigenvalue qubits and are rejected.
pub const IRIS_KAPPA_LIMIT: f64 = 1_048_576.0;
/// Attempts allowed per requested Iris matrix.
pub const IRIS_ATTEMPTS_PER_MATRIX: usize = 1000;

static BUNDLED_IRIS: &str = include_str!("../data/iris.csv");

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("empty input")]
    Empty,
    #[error("class {0} absent; both labels are required")]
    MissingClass(u8),
    #[error("fraction {0} outside (0, 1)")]
    InvalidFraction(f64),
    #[error("invalid cutoff {0:?} (expected absolute:<layers> or quantile:<fraction>)")]
    InvalidCutoff(String),
    #[error("sample {0} has no depth; run the depth stage first")]
    MissingDepth(String),
    #[error("malformed iris table: {0}")]
    Iris(String),
    #[error("only {accepted} of {requested} invertible iris matrices after {attempts} draws")]
    Unreachable {
        requested: usize,
        accepted: usize,
        attempts: usize,
    },
    #[error("pool too small for the requested histogram: {}", format_shortfall(.0))]
    Shortfall(Vec<BinShortfall>),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Hhl(#[from] HhlError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinShortfall {
    pub bin: usize,
    pub needed: usize,
    pub available: usize,
}

fn format_shortfall(v: &[BinShortfall]) -> String {
    v.iter()
        .map(|b| format!("bin {} needs {} has {}", b.bin, b.needed, b.available))
        .collect::<Vec<_>>()
        .join(", ")
}

/// SplitMix64 finalizer; combines a base seed with stream tags.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut z = base;
    for &t in tags {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(t.wrapping_mul(0xD6E8_FEB8_6659_FD93));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// One corpus line: the matrix interchange object plus pipeline annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub n: usize,
    pub elements: Vec<f64>,
    pub provenance: Provenance,
    pub s: usize,
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
}

impl Sample {
    pub fn from_matrix(id: String, a: &SystemMatrix) -> Result<Self, MatrixError> {
        Ok(Self {
            id,
            n: a.n(),
            elements: a.elements().to_vec(),
            provenance: a.provenance(),
            s: sparsity(a),
            kappa: condition_number(a)?,
            n_l: None,
            depth: None,
            label: None,
        })
    }

    pub fn matrix(&self) -> Result<SystemMatrix, MatrixError> {
        SystemMatrix::new(self.n, self.elements.clone(), self.provenance)
    }

    pub fn depth(&self) -> Result<usize, DatasetError> {
        self.depth.ok_or_else(|| DatasetError::MissingDepth(self.id.clone()))
    }
}

/// Random corpus layout: every `(n, s)` with `s in 1..=n` gets `per_config` matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub sizes: Vec<usize>,
    pub per_config: usize,
    pub kappa_max: f64,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn configs(&self) -> Vec<(usize, usize)> {
        self.sizes
            .iter()
            .flat_map(|&n| (1..=n).map(move |s| (n, s)))
            .collect()
    }

    pub fn total(&self) -> usize {
        self.configs().len() * self.per_config
    }
}

pub fn sample_id(n: usize, s: usize, k: usize) -> String {
    format!("r{n:02}-s{s:02}-{k:05}")
}

/// Generates the random corpus, sorted by id.
pub fn build_corpus(spec: &CorpusSpec) -> Result<Vec<Sample>, DatasetError> {
    for &n in &spec.sizes {
        GenSpec::new(n, 1, 0).validate()?;
    }
    let jobs: Vec<(usize, usize, usize)> = spec
        .configs()
        .into_iter()
        .flat_map(|(n, s)| (0..spec.per_config).map(move |k| (n, s, k)))
        .collect();
    let mut out = jobs
        .par_iter()
        .map(|&(n, s, k)| {
            let g = GenSpec {
                n,
                s,
                kappa_max: spec.kappa_max,
                seed: derive_seed(spec.seed, &[n as u64, s as u64, k as u64]),
            };
            let a = generate_random_sparse(&g)?;
            Ok(Sample::from_matrix(sample_id(n, s, k), &a)?)
        })
        .collect::<Result<Vec<_>, DatasetError>>()?;
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

/// Sample counts per `(n, s)`.
pub fn config_counts(samples: &[Sample]) -> BTreeMap<(usize, usize), usize> {
    let mut m = BTreeMap::new();
    for s in samples {
        *m.entry((s.n, s.s)).or_insert(0) += 1;
    }
    m
}

/// Fills `n_l` and `depth` for every sample (non-symmetric inputs are dilated).
pub fn attach_depths(samples: &mut [Sample]) -> Result<(), DatasetError> {
    let results = samples
        .par_iter()
        .map(|s| Ok(labeling_depth(&s.matrix()?)?))
        .collect::<Result<Vec<_>, DatasetError>>()?;
    for (s, (n_l, d)) in samples.iter_mut().zip(results) {
        s.n_l = Some(n_l);
        s.depth = Some(d);
    }
    Ok(())
}

/// Like [`attach_depths`] but always measures the dilation, as for Iris
/// matrices and the pool matched against them.
pub fn attach_dilated_depths(samples: &mut [Sample]) -> Result<(), DatasetError> {
    let results = samples
        .par_iter()
        .map(|s| {
            let r = build_hhl(&dilate(&s.matrix()?))?;
            Ok((r.config.n_l, r.full_depth))
        })
        .collect::<Result<Vec<_>, DatasetError>>()?;
    for (s, (n_l, d)) in samples.iter_mut().zip(results) {
        s.n_l = Some(n_l);
        s.depth = Some(d);
    }
    Ok(())
}

pub fn write_jsonl<W: Write>(samples: &[Sample], mut w: W) -> Result<(), DatasetError> {
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<Sample>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: Sample = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        s.matrix().map_err(|e| DatasetError::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(s);
    }
    Ok(out)
}

/// Depth boundary: absolute layer count or target positive fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum DepthCutoff {
    Absolute(f64),
    Quantile(f64),
}

impl FromStr for DepthCutoff {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DatasetError::InvalidCutoff(s.to_string());
        let (mode, value) = s.split_once(':').ok_or_else(bad)?;
        let v: f64 = value.trim().parse().map_err(|_| bad())?;
        match mode.trim() {
            "absolute" if v > 0.0 => Ok(DepthCutoff::Absolute(v)),
            "quantile" if v > 0.0 && v < 1.0 => Ok(DepthCutoff::Quantile(v)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for DepthCutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepthCutoff::Absolute(v) => write!(f, "absolute:{v}"),
            DepthCutoff::Quantile(v) => write!(f, "quantile:{v}"),
        }
    }
}

/// Threshold in layers induced by a cutoff on a set of depths; label 1 iff
/// `depth < threshold`.
///
/// Quantile mode picks, among the distinct depth values (and one past the
/// maximum), the threshold whose positive fraction is nearest the target;
/// ties go to the smaller threshold.
pub fn resolve_cutoff(cutoff: DepthCutoff, depths: &[usize]) -> Result<f64, DatasetError> {
    if depths.is_empty() {
        return Err(DatasetError::Empty);
    }
    match cutoff {
        DepthCutoff::Absolute(v) => Ok(v),
        DepthCutoff::Quantile(q) => {
            if !(q > 0.0 && q < 1.0) {
                return Err(DatasetError::InvalidFraction(q));
            }
            let mut sorted = depths.to_vec();
            sorted.sort_unstable();
            let n = sorted.len() as f64;
            let mut best = (f64::INFINITY, 0.0);
            let mut i = 0;
            // candidate threshold sorted[i]: exactly i samples lie below it
            loop {
                let thr = if i < sorted.len() {
                    sorted[i] as f64
                } else {
                    (sorted[sorted.len() - 1] + 1) as f64
                };
                let gap = (i as f64 / n - q).abs();
                if gap < best.0 {
                    best = (gap, thr);
                }
                if i >= sorted.len() {
                    break;
                }
                let d = sorted[i];
                while i < sorted.len() && sorted[i] == d {
                    i += 1;
                }
            }
            Ok(best.1)
        }
    }
}

pub fn label_depth(depth: usize, threshold: f64) -> u8 {
    u8::from((depth as f64) < threshold)
}

/// Labels every sample in place; returns the threshold used.
pub fn label_corpus(samples: &mut [Sample], cutoff: DepthCutoff) -> Result<f64, DatasetError> {
    let depths = samples
        .iter()
        .map(Sample::depth)
        .collect::<Result<Vec<_>, _>>()?;
    let thr = resolve_cutoff(cutoff, &depths)?;
    for (s, d) in samples.iter_mut().zip(depths) {
        s.label = Some(label_depth(d, thr));
    }
    Ok(thr)
}

pub fn positive_fraction(labels: &[u8]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    labels.iter().filter(|&&l| l == 1).count() as f64 / labels.len() as f64
}

/// Stratified split into `(train, test)` index lists, each sorted.
pub fn split(
    labels: &[u8],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(test_fraction));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            return Err(DatasetError::MissingClass(class));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[class as u64]));
        idx.shuffle(&mut rng);
        let k = (idx.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Parses the four measurement columns of an Iris table (header required,
/// species column optional and ignored).
pub fn parse_iris<R: std::io::Read>(r: R) -> Result<Vec<[f64; 4]>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(r);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() < 4 {
            return Err(DatasetError::Iris(format!("row {} has {} columns", i + 1, rec.len())));
        }
        let mut row = [0.0; 4];
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = rec[j].trim().parse::<f64>().map_err(|_| {
                DatasetError::Iris(format!("row {}: bad number {:?}", i + 1, &rec[j]))
            })?;
            if !slot.is_finite() {
                return Err(DatasetError::Iris(format!("row {}: non-finite value", i + 1)));
            }
        }
        rows.push(row);
    }
    if rows.len() < 4 {
        return Err(DatasetError::Iris(format!("{} rows, need at least 4", rows.len())));
    }
    Ok(rows)
}

pub fn bundled_iris() -> Vec<[f64; 4]> {
    parse_iris(BUNDLED_IRIS.as_bytes()).expect("bundled iris table parses")
}

fn det4(m: &[f64]) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for k in 0..4 {
        let p = (k..4)
            .max_by(|&i, &j| a[i * 4 + k].abs().total_cmp(&a[j * 4 + k].abs()))
            .unwrap();
        if a[p * 4 + k] == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..4 {
                a.swap(k * 4 + j, p * 4 + j);
            }
            det = -det;
        }
        det *= a[k * 4 + k];
        for i in k + 1..4 {
            let f = a[i * 4 + k] / a[k * 4 + k];
            for j in k..4 {
                a[i * 4 + j] -= f * a[k * 4 + j];
            }
        }
    }
    det
}

/// Whether a 4x4 matrix built from Iris rows is accepted: numerically
/// invertible and within [`IRIS_KAPPA_LIMIT`].
pub fn iris_accepts(m: &SystemMatrix) -> bool {
    let scale: f64 = (0..4)
        .map(|i| m.row(i).iter().map(|x| x * x).sum::<f64>().sqrt())
        .product();
    if det4(m.elements()).abs() < IRIS_DET_RTOL * scale {
        return false;
    }
    matches!(condition_number(m), Ok(k) if k <= IRIS_KAPPA_LIMIT)
}

/// Draws `count` invertible matrices whose rows are four distinct Iris
/// samples, normalized to unit spectral norm. Ids are `iris-00000`, ...
pub fn iris_matrices(
    rows: &[[f64; 4]],
    count: usize,
    seed: u64,
) -> Result<Vec<Sample>, DatasetError> {
    if rows.len() < 4 {
        return Err(DatasetError::Iris(format!("{} rows, need at least 4", rows.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = count.saturating_mul(IRIS_ATTEMPTS_PER_MATRIX).max(IRIS_ATTEMPTS_PER_MATRIX);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == budget {
            return Err(DatasetError::Unreachable {
                requested: count,
                accepted: out.len(),
                attempts,
            });
        }
        attempts += 1;
        let pick = sample(&mut rng, rows.len(), 4);
        let elements: Vec<f64> = pick.iter().flat_map(|i| rows[i]).collect();
        let m = SystemMatrix::new(4, elements, Provenance::Iris)?;
        if !iris_accepts(&m) {
            continue;
        }
        let m = normalize(&m)?.with_provenance(Provenance::Iris);
        out.push(Sample::from_matrix(format!("iris-{:05}", out.len()), &m)?);
    }
    Ok(out)
}

/// Five equal-width condition-number bins over `[1, 1000]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaHistogram {
    pub counts: [usize; KAPPA_BINS],
    pub proportions: [f64; KAPPA_BINS],
    /// Samples above 1000 counted in the top bin.
    pub clipped: usize,
}

pub fn kappa_bin(kappa: f64) -> usize {
    let width = (KAPPA_RANGE.1 - KAPPA_RANGE.0) / KAPPA_BINS as f64;
    (((kappa - KAPPA_RANGE.0) / width).floor().max(0.0) as usize).min(KAPPA_BINS - 1)
}

pub fn bin_edges(bin: usize) -> (f64, f64) {
    let width = (KAPPA_RANGE.1 - KAPPA_RANGE.0) / KAPPA_BINS as f64;
    (
        KAPPA_RANGE.0 + bin as f64 * width,
        KAPPA_RANGE.0 + (bin + 1) as f64 * width,
    )
}

pub fn kappa_histogram(kappas: &[f64]) -> Result<KappaHistogram, DatasetError> {
    if kappas.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut counts = [0usize; KAPPA_BINS];
    let mut clipped = 0;
    for &k in kappas {
        if k > KAPPA_RANGE.1 {
            clipped += 1;
        }
        counts[kappa_bin(k)] += 1;
    }
    let total = kappas.len() as f64;
    let proportions = counts.map(|c| c as f64 / total);
    Ok(KappaHistogram {
        counts,
        proportions,
        clipped,
    })
}

/// Total-variation distance between two histograms.
pub fn tv_distance(a: &KappaHistogram, b: &KappaHistogram) -> f64 {
    0.5 * a
        .proportions
        .iter()
        .zip(&b.proportions)
        .map(|(p, q)| (p - q).abs())
        .sum::<f64>()
}

/// Per-bin draw counts: `total * p` rounded by largest remainder so that they
/// sum to `total`.
pub fn bin_quotas(target: &KappaHistogram, total: usize) -> [usize; KAPPA_BINS] {
    let raw = target.proportions.map(|p| p * total as f64);
    let mut quota = raw.map(|x| x.floor() as usize);
    let assigned: usize = quota.iter().sum();
    let mut order: Vec<usize> = (0..KAPPA_BINS).collect();
    order.sort_by(|&a, &b| {
        (raw[b] - raw[b].floor())
            .total_cmp(&(raw[a] - raw[a].floor()))
            .then(a.cmp(&b))
    });
    for &b in order.iter().take(total.saturating_sub(assigned)) {
        quota[b] += 1;
    }
    quota
}

/// Selects `total` pool indices whose condition-number histogram follows
/// `target`. Returned indices are sorted.
pub fn distribution_match(
    pool_kappas: &[f64],
    target: &KappaHistogram,
    total: usize,
    seed: u64,
) -> Result<Vec<usize>, DatasetError> {
    if pool_kappas.is_empty() || total == 0 {
        return Err(DatasetError::Empty);
    }
    let quota = bin_quotas(target, total);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); KAPPA_BINS];
    for (i, &k) in pool_kappas.iter().enumerate() {
        members[kappa_bin(k)].push(i);
    }
    let short: Vec<BinShortfall> = (0..KAPPA_BINS)
        .filter(|&b| members[b].len() < quota[b])
        .map(|b| BinShortfall {
            bin: b,
            needed: quota[b],
            available: members[b].len(),
        })
        .collect();
    if !short.is_empty() {
        return Err(DatasetError::Shortfall(short));
    }
    let mut out = Vec::with_capacity(total);
    for (b, m) in members.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[b as u64]));
        m.shuffle(&mut rng);
        out.extend_from_slice(&m[..quota[b]]);
    }
    out.sort_unstable();
    Ok(out)
}

/// Draws per augmentation round in [`matching_pool`].
pub const POOL_BATCH: usize = 10_000;

/// The 4x4, s=4 members of `corpus`, topped up with fresh 4x4, s=4 draws
/// until every bin of `target` can supply its quota for `total` selections.
/// Added samples have ids `pool-0000000`, ... Fails with the per-bin
/// shortfall once `max_draws` extra matrices did not suffice.
pub fn matching_pool(
    corpus: &[Sample],
    target: &KappaHistogram,
    total: usize,
    kappa_max: f64,
    seed: u64,
    max_draws: usize,
) -> Result<Vec<Sample>, DatasetError> {
    let quota = bin_quotas(target, total);
    let mut pool: Vec<Sample> = corpus.iter().filter(|s| s.n == 4 && s.s == 4).cloned().collect();
    let mut have = [0usize; KAPPA_BINS];
    for s in &pool {
        have[kappa_bin(s.kappa)] += 1;
    }
    let mut drawn = 0;
    while (0..KAPPA_BINS).any(|b| have[b] < quota[b]) {
        if drawn >= max_draws {
            return Err(DatasetError::Shortfall(
                (0..KAPPA_BINS)
                    .filter(|&b| have[b] < quota[b])
                    .map(|b| BinShortfall {
                        bin: b,
                        needed: quota[b],
                        available: have[b],
                    })
                    .collect(),
            ));
        }
        let batch = POOL_BATCH.min(max_draws - drawn);
        let fresh = (drawn..drawn + batch)
            .into_par_iter()
            .map(|k| {
                let g = GenSpec {
                    n: 4,
                    s: 4,
                    kappa_max,
                    seed: derive_seed(seed, &[0x9001, k as u64]),
                };
                Ok(Sample::from_matrix(format!("pool-{k:07}"), &generate_random_sparse(&g)?)?)
            })
            .collect::<Result<Vec<_>, DatasetError>>()?;
        for s in &fresh {
            have[kappa_bin(s.kappa)] += 1;
        }
        pool.extend(fresh);
        drawn += batch;
    }
    Ok(pool)
}

/// Histogram rows `(bin_low, bin_high, proportion, set_name)` as CSV.
pub fn write_histogram_csv<W: Write>(
    sets: &[(&str, &KappaHistogram)],
    w: W,
) -> Result<(), DatasetError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["bin_low", "bin_high", "proportion", "set_name"])?;
    for (name, h) in sets {
        for b in 0..KAPPA_BINS {
            let (lo, hi) = bin_edges(b);
            wtr.write_record([
                lo.to_string(),
                hi.to_string(),
                h.proportions[b].to_string(),
                name.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Feature matrix with optional labels, as stored in feature CSV files.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub ids: Vec<String>,
    pub depths: Vec<Option<usize>>,
    pub labels: Vec<Option<u8>>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Labels, failing if any row is unlabeled.
    pub fn labels(&self) -> Result<Vec<u8>, DatasetError> {
        self.labels
            .iter()
            .zip(&self.ids)
            .map(|(l, id)| l.ok_or_else(|| DatasetError::MissingDepth(id.clone())))
            .collect()
    }

    pub fn subset(&self, idx: &[usize]) -> FeatureTable {
        FeatureTable {
            names: self.names.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            depths: idx.iter().map(|&i| self.depths[i]).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DatasetError> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = self.names.clone();
        header.extend(["label".to_string(), "depth".to_string(), "id".to_string()]);
        wtr.write_record(&header)?;
        for i in 0..self.rows.len() {
            let mut rec: Vec<String> = self.rows[i].iter().map(|v| v.to_string()).collect();
            rec.push(self.labels[i].map(|l| l.to_string()).unwrap_or_default());
            rec.push(self.depths[i].map(|d| d.to_string()).unwrap_or_default());
            rec.push(self.ids[i].clone());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let k = header.len();
        if k < 4 || header[k - 3..] != ["label", "depth", "id"] {
            return Err(DatasetError::Parse {
                line: 1,
                msg: "header must end with label,depth,id".to_string(),
            });
        }
        let names = header[..k - 3].to_vec();
        let mut t = FeatureTable {
            names,
            rows: Vec::new(),
            ids: Vec::new(),
            depths: Vec::new(),
            labels: Vec::new(),
        };
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let bad = |msg: String| DatasetError::Parse { line, msg };
            let row = (0..k - 3)
                .map(|j| {
                    rec[j]
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| bad(format!("bad value {:?} in column {}", &rec[j], header[j])))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let label = match &rec[k - 3] {
                "" => None,
                "0" => Some(0),
                "1" => Some(1),
                other => return Err(bad(format!("bad label {other:?}"))),
            };
            let depth = match &rec[k - 2] {
                "" => None,
                d => Some(d.parse().map_err(|_| bad(format!("bad depth {d:?}")))?),
            };
            t.rows.push(row);
            t.labels.push(label);
            t.depths.push(depth);
            t.ids.push(rec[k - 1].to_string());
        }
        Ok(t)
    }
}

/// Extracts `variant` features for every sample (features use the stored,
/// pre-dilation matrix).
pub fn featurize(samples: &[Sample], variant: Variant) -> Result<FeatureTable, DatasetError> {
    let rows = samples
        .par_iter()
        .map(|s| Ok(extract(&s.matrix()?, variant)?.values))
        .collect::<Result<Vec<_>, DatasetError>>()?;
    Ok(FeatureTable {
        names: crate::features::feature_names(variant),
        rows,
        ids: samples.iter().map(|s| s.id.clone()).collect(),
        depths: samples.iter().map(|s| s.depth).collect(),
        labels: samples.iter().map(|s| s.label).collect(),
    })
}
