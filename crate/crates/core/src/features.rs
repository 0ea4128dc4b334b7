//! Matrix feature catalog: structure, value, diagonal and condition-number
//! estimate features, and the four dataset variants built from them.
//!
//! Degenerate statistics (empty sets, single elements) evaluate to 0.0 so that
//! every vector is finite and has a fixed length. Standard deviations are
//! population standard deviations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{spectrum, MatrixError, SystemMatrix, ZERO_TOL};

/// Floor applied to lower eigenvalue-magnitude bounds.
pub const BOUND_FLOOR: f64 = 1e-12;

const POWER_ITERS: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("variant d4 needs a 4x4 matrix, got {0}x{0}")]
    RawSize(usize),
    #[error("unknown dataset variant {0:?} (expected d1, d2, d3 or d4)")]
    UnknownVariant(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Dataset variants: base catalog plus exact kappa (d1), plus kappa
/// estimates (d2), base catalog only (d3), raw 4x4 elements (d4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    D1,
    D2,
    D3,
    D4,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::D1, Variant::D2, Variant::D3, Variant::D4];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::D1 => "d1",
            Variant::D2 => "d2",
            Variant::D3 => "d3",
            Variant::D4 => "d4",
        })
    }
}

impl FromStr for Variant {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(Variant::D1),
            "d2" => Ok(Variant::D2),
            "d3" => Ok(Variant::D3),
            "d4" => Ok(Variant::D4),
            _ => Err(FeatureError::UnknownVariant(s.to_string())),
        }
    }
}

/// Named feature values in registry order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub variant: Variant,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }
}

/// Eigenvalue-magnitude bounds from Gershgorin disks and Cassini ovals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondEstimates {
    pub gersh_max: f64,
    pub gersh_min: f64,
    pub gersh_ratio: f64,
    pub gersh_overlap: f64,
    pub cassini_max: f64,
    pub cassini_min: f64,
    pub cassini_ratio: f64,
}

const STATS: [&str; 4] = ["min", "max", "mean", "std"];

fn push_stats(names: &mut Vec<String>, prefix: &str) {
    for s in STATS {
        names.push(format!("{prefix}_{s}"));
    }
}

/// Structure feature names, in order.
pub fn structure_names() -> Vec<String> {
    let mut n: Vec<String> = ["struct_sparsity", "struct_sparsity_ratio", "struct_nnz", "struct_fill_rate"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    push_stats(&mut n, "struct_row_nnz");
    push_stats(&mut n, "struct_col_nnz");
    for s in ["struct_nonvoid_diagonals", "struct_symmetric", "struct_relative_symmetric_rate"] {
        n.push(s.to_string());
    }
    n
}

/// Value feature names, in order.
pub fn value_names() -> Vec<String> {
    let mut n = Vec::new();
    for nz in ["", "_nz"] {
        for fam in ["elem", "row_mean", "col_mean", "row_std", "col_std"] {
            push_stats(&mut n, &format!("value_{fam}{nz}"));
        }
    }
    push_stats(&mut n, "value_row_sum");
    push_stats(&mut n, "value_col_sum");
    for s in [
        "value_diag_mean",
        "value_diag_std",
        "value_upper_mean",
        "value_upper_std",
        "value_lower_mean",
        "value_lower_std",
        "value_norm_one",
        "value_norm_two",
        "value_norm_inf",
        "value_norm_frobenius",
        "value_sym_frobenius",
        "value_asym_frobenius",
    ] {
        n.push(s.to_string());
    }
    n
}

/// Diagonal feature names, in order.
pub fn diagonal_names() -> Vec<String> {
    [
        "diag_lower_bandwidth",
        "diag_upper_bandwidth",
        "diag_col_width_mean",
        "diag_col_width_max",
        "diag_dist_mean",
        "diag_dist_std",
        "diag_diff_mean",
        "diag_diff_std",
        "diag_rowmax_diff_mean",
        "diag_rowmax_diff_std",
        "diag_dominant_rows_pct",
        "diag_dominant_cols_pct",
        "diag_value_rate",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

pub fn estimate_names() -> Vec<String> {
    [
        "cond_gersh_max",
        "cond_gersh_min",
        "cond_gersh_ratio",
        "cond_gersh_overlap",
        "cond_cassini_max",
        "cond_cassini_min",
        "cond_cassini_ratio",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Base catalog (structure, value, diagonal).
pub fn base_names() -> Vec<String> {
    let mut n = structure_names();
    n.extend(value_names());
    n.extend(diagonal_names());
    n
}

/// Full ordered registry for a variant.
pub fn feature_names(variant: Variant) -> Vec<String> {
    match variant {
        Variant::D1 => {
            let mut n = base_names();
            n.push("cond_kappa".to_string());
            n
        }
        Variant::D2 => {
            let mut n = base_names();
            n.extend(estimate_names());
            n
        }
        Variant::D3 => base_names(),
        Variant::D4 => (0..4)
            .flat_map(|i| (0..4).map(move |j| format!("raw_r{i}_c{j}")))
            .collect(),
    }
}

/// Every distinct feature in the catalog (base + estimates + kappa).
pub fn catalog_size() -> usize {
    base_names().len() + estimate_names().len() + 1
}

fn nz(x: f64) -> bool {
    x.abs() >= ZERO_TOL
}

/// `[min, max, mean, std]`; all zero for an empty slice.
fn stats(v: &[f64]) -> [f64; 4] {
    if v.is_empty() {
        return [0.0; 4];
    }
    let n = v.len() as f64;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    [min, max, mean, var.sqrt()]
}

fn mean_std(v: &[f64]) -> [f64; 2] {
    let s = stats(v);
    [s[2], s[3]]
}

pub fn structure_features(a: &SystemMatrix) -> Vec<f64> {
    let n = a.n();
    let row_nnz: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| nz(a.get(i, j))).count() as f64)
        .collect();
    let col_nnz: Vec<f64> = (0..n)
        .map(|j| (0..n).filter(|&i| nz(a.get(i, j))).count() as f64)
        .collect();
    let nnz: f64 = row_nnz.iter().sum();
    let s = row_nnz.iter().copied().fold(0.0, f64::max);
    let nonvoid = (0..2 * n - 1)
        .filter(|&d| {
            // offset k = d - (n-1), entries with j - i = k
            let k = d as isize - (n as isize - 1);
            (0..n).any(|i| {
                let j = i as isize + k;
                j >= 0 && (j as usize) < n && nz(a.get(i, j as usize))
            })
        })
        .count() as f64;
    let mut matching = 0usize;
    for i in 0..n {
        for j in 0..n {
            if nz(a.get(i, j)) && nz(a.get(j, i)) {
                matching += 1;
            }
        }
    }
    let rel_sym = if nnz > 0.0 { matching as f64 / nnz } else { 0.0 };
    let symmetric = if a.is_symmetric(0.0) { 1.0 } else { 0.0 };

    let mut out = vec![s, s / n as f64, nnz, nnz / (n * n) as f64];
    out.extend(stats(&row_nnz));
    out.extend(stats(&col_nnz));
    out.extend([nonvoid, symmetric, rel_sym]);
    out
}

/// Largest singular value by power iteration on `A^T A`.
pub fn two_norm(a: &SystemMatrix) -> f64 {
    let n = a.n();
    let at = a.transpose();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * i as f64).collect();
    let mut sigma2 = 0.0;
    for _ in 0..POWER_ITERS {
        let w = at.matvec(&a.matvec(&v).expect("square")).expect("square");
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let next = norm / vnorm;
        v = w.iter().map(|x| x / norm).collect();
        if (next - sigma2).abs() <= 1e-15 * next {
            sigma2 = next;
            break;
        }
        sigma2 = next;
    }
    sigma2.sqrt()
}

pub fn value_features(a: &SystemMatrix) -> Vec<f64> {
    let n = a.n();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| a.get(i, j)).collect()).collect();
    let nz_only = |v: &[f64]| -> Vec<f64> { v.iter().copied().filter(|x| nz(*x)).collect() };

    let mut out = Vec::with_capacity(60);
    for nonzero in [false, true] {
        let pick = |v: &[f64]| if nonzero { nz_only(v) } else { v.to_vec() };
        let elems = pick(a.elements());
        out.extend(stats(&elems));
        let line_stat = |lines: &[Vec<f64>], k: usize| -> Vec<f64> {
            lines
                .iter()
                .map(|l| pick(l))
                .filter(|l| !l.is_empty())
                .map(|l| stats(&l)[k])
                .collect()
        };
        out.extend(stats(&line_stat(&rows, 2)));
        out.extend(stats(&line_stat(&cols, 2)));
        out.extend(stats(&line_stat(&rows, 3)));
        out.extend(stats(&line_stat(&cols, 3)));
    }
    let row_sums: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = cols.iter().map(|c| c.iter().sum()).collect();
    out.extend(stats(&row_sums));
    out.extend(stats(&col_sums));

    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let upper: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| a.get(i, j))
        .collect();
    let lower: Vec<f64> = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| a.get(i, j))
        .collect();
    out.extend(mean_std(&diag));
    out.extend(mean_std(&upper));
    out.extend(mean_std(&lower));

    let one = cols
        .iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let inf = rows
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut sym = 0.0;
    let mut asym = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = 0.5 * (a.get(i, j) + a.get(j, i));
            let k = 0.5 * (a.get(i, j) - a.get(j, i));
            sym += s * s;
            asym += k * k;
        }
    }
    out.extend([
        one,
        two_norm(a),
        inf,
        a.frobenius_norm(),
        sym.sqrt(),
        asym.sqrt(),
    ]);
    out
}

pub fn diagonal_features(a: &SystemMatrix) -> Vec<f64> {
    let n = a.n();
    let mut b_low = 0usize;
    let mut b_up = 0usize;
    let mut dist = Vec::new();
    let mut diff = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = a.get(i, j);
            if !nz(x) {
                continue;
            }
            if i > j {
                b_low = b_low.max(i - j);
            } else {
                b_up = b_up.max(j - i);
            }
            dist.push(i.abs_diff(j) as f64);
            diff.push(x - a.get(i, i));
        }
    }
    let widths: Vec<f64> = (0..n)
        .map(|j| {
            let rows: Vec<usize> = (0..n).filter(|&i| nz(a.get(i, j))).collect();
            match (rows.first(), rows.last()) {
                (Some(lo), Some(hi)) => (hi - lo) as f64,
                _ => 0.0,
            }
        })
        .collect();
    let width_stats = stats(&widths);
    let rowmax: Vec<f64> = (0..n)
        .map(|i| a.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max) - a.get(i, i))
        .collect();
    let dom_rows = (0..n)
        .filter(|&i| {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| a.get(i, j).abs()).sum();
            a.get(i, i).abs() > off
        })
        .count();
    let dom_cols = (0..n)
        .filter(|&j| {
            let off: f64 = (0..n).filter(|&i| i != j).map(|i| a.get(i, j).abs()).sum();
            a.get(j, j).abs() > off
        })
        .count();
    let dmag: Vec<f64> = (0..n)
        .map(|i| a.get(i, i).abs())
        .filter(|x| nz(*x))
        .collect();
    let rate = if dmag.is_empty() {
        0.0
    } else {
        let lo = dmag.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = dmag.iter().copied().fold(0.0, f64::max);
        lo / hi
    };

    let mut out = vec![b_low as f64, b_up as f64, width_stats[2], width_stats[1]];
    out.extend(mean_std(&dist));
    out.extend(mean_std(&diff));
    out.extend(mean_std(&rowmax));
    out.extend([
        100.0 * dom_rows as f64 / n as f64,
        100.0 * dom_cols as f64 / n as f64,
        rate,
    ]);
    out
}

fn radii(a: &SystemMatrix) -> Vec<f64> {
    (0..a.n())
        .map(|i| {
            (0..a.n())
                .filter(|&j| j != i)
                .map(|j| a.get(i, j).abs())
                .sum()
        })
        .collect()
}

/// Gershgorin bounds `(max, min, ratio, overlap)`.
pub fn gershgorin(a: &SystemMatrix) -> [f64; 4] {
    let n = a.n();
    let r = radii(a);
    let c: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let hi = (0..n).map(|i| c[i].abs() + r[i]).fold(0.0, f64::max);
    let lo = (0..n)
        .map(|i| c[i].abs() - r[i])
        .fold(f64::INFINITY, f64::min)
        .max(BOUND_FLOOR);
    let mut overlap = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let left = (c[i] - r[i]).max(c[j] - r[j]);
            let right = (c[i] + r[i]).min(c[j] + r[j]);
            overlap += (right - left).max(0.0);
        }
    }
    [hi, lo, hi / lo, overlap]
}

/// Real cross-section of the oval `|x - a| |x - b| <= p` as one or two intervals.
fn oval_intervals(a: f64, b: f64, p: f64) -> Vec<(f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a).abs();
    let outer = (half * half + p).sqrt();
    let (lo, hi) = (mid - outer, mid + outer);
    if p < half * half {
        let inner = (half * half - p).sqrt();
        vec![(lo, mid - inner), (mid + inner, hi)]
    } else {
        vec![(lo, hi)]
    }
}

/// Cassini (Brauer) oval bounds `(max, min, ratio)`.
pub fn cassini(a: &SystemMatrix) -> [f64; 3] {
    let n = a.n();
    if n < 2 {
        let g = gershgorin(a);
        return [g[0], g[1], g[2]];
    }
    let r = radii(a);
    let mut hi = 0.0f64;
    let mut lo = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            for (x0, x1) in oval_intervals(a.get(i, i), a.get(j, j), r[i] * r[j]) {
                hi = hi.max(x0.abs()).max(x1.abs());
                let closest = if x0 <= 0.0 && x1 >= 0.0 {
                    0.0
                } else {
                    x0.abs().min(x1.abs())
                };
                lo = lo.min(closest);
            }
        }
    }
    let lo = lo.max(BOUND_FLOOR);
    [hi, lo, hi / lo]
}

pub fn cond_estimates(a: &SystemMatrix) -> CondEstimates {
    let g = gershgorin(a);
    let c = cassini(a);
    CondEstimates {
        gersh_max: g[0],
        gersh_min: g[1],
        gersh_ratio: g[2],
        gersh_overlap: g[3],
        cassini_max: c[0],
        cassini_min: c[1],
        cassini_ratio: c[2],
    }
}

/// Base catalog values in registry order.
pub fn base_features(a: &SystemMatrix) -> Vec<f64> {
    let mut v = structure_features(a);
    v.extend(value_features(a));
    v.extend(diagonal_features(a));
    v
}

/// Exact condition number: eigenvalue ratio for symmetric input, singular
/// value ratio otherwise.
pub fn exact_kappa(a: &SystemMatrix) -> Result<f64, MatrixError> {
    if a.is_symmetric(1e-12 * a.max_abs().max(1.0)) {
        Ok(spectrum(a)?.kappa)
    } else {
        crate::matrix::condition_number(a)
    }
}

pub fn extract(a: &SystemMatrix, variant: Variant) -> Result<FeatureVector, FeatureError> {
    let values = match variant {
        Variant::D1 => {
            let mut v = base_features(a);
            v.push(exact_kappa(a)?);
            v
        }
        Variant::D2 => {
            let mut v = base_features(a);
            let e = cond_estimates(a);
            v.extend([
                e.gersh_max,
                e.gersh_min,
                e.gersh_ratio,
                e.gersh_overlap,
                e.cassini_max,
                e.cassini_min,
                e.cassini_ratio,
            ]);
            v
        }
        Variant::D3 => base_features(a),
        Variant::D4 => {
            if a.n() != 4 {
                return Err(FeatureError::RawSize(a.n()));
            }
            a.elements().to_vec()
        }
    };
    Ok(FeatureVector {
        names: feature_names(variant),
        values,
        variant,
    })
}
