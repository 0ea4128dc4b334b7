//! Dense real system matrices: generation, normalization, dilation and
//! spectral analysis.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Magnitude below which an element counts as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Relative magnitude of the smallest eigenvalue below which a matrix is singular.
pub const SINGULAR_RTOL: f64 = 1e-13;

/// Consecutive rejected candidates before generation gives up.
pub const RESAMPLE_BUDGET: usize = 10_000;

const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("expected {expected} elements for a {n}x{n} matrix, got {got}")]
    NotSquare { n: usize, expected: usize, got: usize },
    #[error("matrix element {index} is not finite")]
    NonFinite { index: usize },
    #[error("matrix is singular (min |lambda| / max |lambda| = {ratio:e})")]
    Singular { ratio: f64 },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("cannot normalize the zero matrix")]
    ZeroMatrix,
    #[error("dimension mismatch: matrix is {n}x{n}, vector has length {len}")]
    DimensionMismatch { n: usize, len: usize },
    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),
    #[error("no acceptable matrix after {0} consecutive candidates")]
    ResampleBudgetExhausted(usize),
    #[error("eigensolver did not converge in {0} sweeps")]
    NoConvergence(usize),
}

/// Where a matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Random,
    Ideal,
    Iris,
    Dilated,
    Gram,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Random => "random",
            Provenance::Ideal => "ideal",
            Provenance::Iris => "iris",
            Provenance::Dilated => "dilated",
            Provenance::Gram => "gram",
        };
        f.write_str(s)
    }
}

/// Square real matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrix {
    n: usize,
    elements: Vec<f64>,
    provenance: Provenance,
}

impl SystemMatrix {
    pub fn new(n: usize, elements: Vec<f64>, provenance: Provenance) -> Result<Self, MatrixError> {
        if elements.len() != n * n {
            return Err(MatrixError::NotSquare {
                n,
                expected: n * n,
                got: elements.len(),
            });
        }
        if let Some(index) = elements.iter().position(|x| !x.is_finite()) {
            return Err(MatrixError::NonFinite { index });
        }
        Ok(Self {
            n,
            elements,
            provenance,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], provenance: Provenance) -> Result<Self, MatrixError> {
        let n = rows.len();
        let elements: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(n, elements, provenance)
    }

    pub fn identity(n: usize) -> Self {
        let mut elements = vec![0.0; n * n];
        for i in 0..n {
            elements[i * n + i] = 1.0;
        }
        Self {
            n,
            elements,
            provenance: Provenance::Ideal,
        }
    }

    pub fn diagonal(values: &[f64], provenance: Provenance) -> Result<Self, MatrixError> {
        let n = values.len();
        let mut elements = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            elements[i * n + i] = *v;
        }
        Self::new(n, elements, provenance)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.elements[i * self.n + j]
    }

    pub fn elements(&self) -> &[f64] {
        &self.elements
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.elements[i * self.n..(i + 1) * self.n]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut elements = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                elements[j * n + i] = self.elements[i * n + j];
            }
        }
        Self {
            n,
            elements,
            provenance: self.provenance,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            elements: self.elements.iter().map(|x| x * c).collect(),
            provenance: self.provenance,
        }
    }

    pub fn matmul(&self, other: &SystemMatrix) -> Result<Self, MatrixError> {
        if other.n != self.n {
            return Err(MatrixError::DimensionMismatch {
                n: self.n,
                len: other.n,
            });
        }
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.elements[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.elements[k * n + j];
                }
            }
        }
        Ok(Self {
            n,
            elements: out,
            provenance: self.provenance,
        })
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>, MatrixError> {
        if v.len() != self.n {
            return Err(MatrixError::DimensionMismatch {
                n: self.n,
                len: v.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.n;
        (0..n).all(|i| (i + 1..n).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.elements.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.elements.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Number of nonzeros in each row.
    pub fn row_nonzeros(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| self.row(i).iter().filter(|x| x.abs() >= ZERO_TOL).count())
            .collect()
    }
}

/// Eigenvalues sorted by magnitude (descending) with matching eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Column-major: `eigenvectors[k]` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub kappa: f64,
}

impl Spectrum {
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0].abs()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1].abs()
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Returns unsorted eigenvalues and the column eigenvector matrix (row-major `n*n`).
pub fn symmetric_eigen(a: &SystemMatrix) -> Result<(Vec<f64>, Vec<f64>), MatrixError> {
    let n = a.n;
    let mut m = a.elements.clone();
    let mut v = SystemMatrix::identity(n).elements;
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            let eig = (0..n).map(|i| m[i * n + i]).collect();
            return Ok((eig, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(MatrixError::NoConvergence(MAX_JACOBI_SWEEPS))
}

/// Full eigen-analysis of a symmetric matrix, with the condition number as the
/// ratio of extreme eigenvalue magnitudes.
pub fn spectrum(a: &SystemMatrix) -> Result<Spectrum, MatrixError> {
    if !a.is_symmetric(1e-12 * a.max_abs().max(1.0)) {
        return Err(MatrixError::NotSymmetric);
    }
    let n = a.n;
    let (vals, vecs) = symmetric_eigen(a)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| vals[y].abs().total_cmp(&vals[x].abs()).then(x.cmp(&y)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| vals[k]).collect();
    let eigenvectors = order
        .iter()
        .map(|&k| (0..n).map(|i| vecs[i * n + k]).collect())
        .collect();
    let max = eigenvalues[0].abs();
    let min = eigenvalues[n - 1].abs();
    if max == 0.0 || min < SINGULAR_RTOL * max {
        return Err(MatrixError::Singular {
            ratio: if max == 0.0 { 0.0 } else { min / max },
        });
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        kappa: max / min,
    })
}

/// Singular values (descending) by one-sided Jacobi orthogonalization.
pub fn singular_values(a: &SystemMatrix) -> Vec<f64> {
    let n = a.n;
    // columns of A stored contiguously
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| a.get(i, j)).collect()).collect();
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let xp = *x;
                    let yq = *y;
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Spectral (two-) norm.
pub fn spectral_norm(a: &SystemMatrix) -> f64 {
    singular_values(a)[0]
}

/// Condition number: eigenvalue-magnitude ratio for symmetric input, singular
/// value ratio otherwise.
pub fn condition_number(a: &SystemMatrix) -> Result<f64, MatrixError> {
    if a.is_symmetric(1e-12 * a.max_abs().max(1.0)) {
        return spectrum(a).map(|s| s.kappa);
    }
    let sv = singular_values(a);
    let max = sv[0];
    let min = sv[sv.len() - 1];
    if max == 0.0 || min < SINGULAR_RTOL * max {
        return Err(MatrixError::Singular {
            ratio: if max == 0.0 { 0.0 } else { min / max },
        });
    }
    Ok(max / min)
}

/// Divides every element by the spectral norm.
pub fn normalize(a: &SystemMatrix) -> Result<SystemMatrix, MatrixError> {
    if a.max_abs() == 0.0 {
        return Err(MatrixError::ZeroMatrix);
    }
    let norm = spectral_norm(a);
    Ok(a.scaled(1.0 / norm))
}

/// Hermitian embedding `[[0, A], [A^T, 0]]`.
pub fn dilate(a: &SystemMatrix) -> SystemMatrix {
    let n = a.n;
    let m = 2 * n;
    let mut elements = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let v = a.get(i, j);
            elements[i * m + n + j] = v;
            elements[(n + j) * m + i] = v;
        }
    }
    SystemMatrix {
        n: m,
        elements,
        provenance: Provenance::Dilated,
    }
}

/// Normal-equations transform `(A^T A, A^T b)`.
pub fn gram_transform(a: &SystemMatrix, b: &[f64]) -> Result<(SystemMatrix, Vec<f64>), MatrixError> {
    if b.len() != a.n {
        return Err(MatrixError::DimensionMismatch { n: a.n, len: b.len() });
    }
    let at = a.transpose();
    let gram = at.matmul(a)?.with_provenance(Provenance::Gram);
    let rhs = at.matvec(b)?;
    Ok((gram, rhs))
}

/// Diagonal matrix alternating 1 and 1/2.
pub fn ideal_matrix(n: usize) -> SystemMatrix {
    let values: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.5 }).collect();
    SystemMatrix::diagonal(&values, Provenance::Ideal).expect("finite diagonal")
}

/// Maximum number of nonzeros in any row.
pub fn sparsity(a: &SystemMatrix) -> usize {
    a.row_nonzeros().into_iter().max().unwrap_or(0)
}

/// Parameters for random sparse symmetric matrix generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub s: usize,
    pub kappa_max: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(n: usize, s: usize, seed: u64) -> Self {
        Self {
            n,
            s,
            kappa_max: 1000.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), MatrixError> {
        if ![2, 4, 8, 16].contains(&self.n) {
            return Err(MatrixError::InvalidSpec(format!(
                "size {} not in {{2, 4, 8, 16}}",
                self.n
            )));
        }
        if self.s == 0 || self.s > self.n {
            return Err(MatrixError::InvalidSpec(format!(
                "sparsity {} outside [1, {}]",
                self.s, self.n
            )));
        }
        if !(self.kappa_max >= 1.0) {
            return Err(MatrixError::InvalidSpec(format!(
                "kappa_max {} below 1",
                self.kappa_max
            )));
        }
        Ok(())
    }
}

/// Symmetric support pattern whose densest row holds at most `s` entries.
fn symmetric_support(n: usize, s: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut mask = vec![false; n * n];
    let mut counts = vec![0usize; n];
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    for &i in &rows {
        let need = s - counts[i];
        if need == 0 {
            continue;
        }
        let mut free: Vec<usize> = (0..n)
            .filter(|&j| !mask[i * n + j] && (j == i || counts[j] < s))
            .collect();
        free.shuffle(rng);
        let mut added = 0;
        for j in free {
            if added == need {
                break;
            }
            mask[i * n + j] = true;
            mask[j * n + i] = true;
            counts[i] += 1;
            if j != i {
                counts[j] += 1;
            }
            added += 1;
        }
    }
    mask
}

/// Random real symmetric matrix with exact sparsity `s`, condition number at
/// most `kappa_max`, normalized to unit spectral norm.
pub fn generate_random_sparse(spec: &GenSpec) -> Result<SystemMatrix, MatrixError> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..RESAMPLE_BUDGET {
        let mask = symmetric_support(n, spec.s, &mut rng);
        let mut raw = vec![0.0; n * n];
        for (slot, &on) in raw.iter_mut().zip(&mask) {
            if on {
                *slot = rng.gen_range(-1.0..=1.0);
            }
        }
        let mut elements = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                elements[i * n + j] = 0.5 * (raw[i * n + j] + raw[j * n + i]);
            }
        }
        let candidate = SystemMatrix {
            n,
            elements,
            provenance: Provenance::Random,
        };
        if sparsity(&candidate) != spec.s {
            continue;
        }
        let spec_info = match spectrum(&candidate) {
            Ok(sp) => sp,
            Err(MatrixError::Singular { .. }) => continue,
            Err(e) => return Err(e),
        };
        if spec_info.kappa > spec.kappa_max {
            continue;
        }
        let normalized = candidate.scaled(1.0 / spec_info.lambda_max());
        if sparsity(&normalized) != spec.s {
            continue;
        }
        return Ok(normalized);
    }
    Err(MatrixError::ResampleBudgetExhausted(RESAMPLE_BUDGET))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SystemMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        SystemMatrix::from_rows(&rows, Provenance::Random).unwrap()
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(matches!(
            SystemMatrix::new(2, vec![1.0; 3], Provenance::Random),
            Err(MatrixError::NotSquare { .. })
        ));
        assert!(matches!(
            SystemMatrix::new(2, vec![1.0, f64::NAN, 0.0, 1.0], Provenance::Random),
            Err(MatrixError::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn identity_spectrum() {
        let sp = spectrum(&SystemMatrix::identity(4)).unwrap();
        assert!(sp.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-15));
        assert_eq!(sp.kappa, 1.0);
    }

    #[test]
    fn two_by_two_spectrum_by_hand() {
        // det([[2-l,1],[1,2-l]]) = (2-l)^2 - 1 -> l = 3, 1
        let sp = spectrum(&m(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!((sp.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((sp.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!((sp.kappa - 3.0).abs() < 1e-14);
    }

    #[test]
    fn ideal_matrix_properties() {
        assert_eq!(ideal_matrix(2).elements(), &[1.0, 0.0, 0.0, 0.5]);
        for n in [2, 4, 8, 16, 32] {
            let a = ideal_matrix(n);
            assert_eq!(sparsity(&a), 1);
            assert_eq!(spectrum(&a).unwrap().kappa, 2.0);
        }
    }

    #[test]
    fn singular_and_asymmetric_inputs() {
        let singular = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(spectrum(&singular), Err(MatrixError::Singular { .. })));
        let asym = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(spectrum(&asym).unwrap_err(), MatrixError::NotSymmetric);
    }

    #[test]
    fn sparsity_counts() {
        assert_eq!(sparsity(&SystemMatrix::identity(4)), 1);
        let ones = SystemMatrix::new(4, vec![1.0; 16], Provenance::Random).unwrap();
        assert_eq!(sparsity(&ones), 4);
        let tiny = m(&[&[1.0, 1e-13], &[0.0, 1.0]]);
        assert_eq!(sparsity(&tiny), 1);
    }

    #[test]
    fn normalize_examples() {
        let i4 = SystemMatrix::identity(4);
        assert_eq!(normalize(&i4).unwrap().elements(), i4.elements());
        let d = SystemMatrix::diagonal(&[2.0, 1.0], Provenance::Random).unwrap();
        let nd = normalize(&d).unwrap();
        assert!((nd.get(0, 0) - 1.0).abs() < 1e-15 && (nd.get(1, 1) - 0.5).abs() < 1e-15);
        let z = SystemMatrix::new(2, vec![0.0; 4], Provenance::Random).unwrap();
        assert_eq!(normalize(&z).unwrap_err(), MatrixError::ZeroMatrix);
    }

    #[test]
    fn dilation_block_layout() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let d = dilate(&a);
        assert_eq!(
            d.elements(),
            &[0., 0., 1., 2., 0., 0., 3., 4., 1., 3., 0., 0., 2., 4., 0., 0.]
        );
        assert!(d.is_symmetric(0.0));
        assert_eq!(d.provenance(), Provenance::Dilated);
    }

    #[test]
    fn gram_examples() {
        let rot = m(&[&[0.6, -0.8], &[0.8, 0.6]]);
        let (g, _) = gram_transform(&rot, &[1.0, 0.0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g.get(i, j) - want).abs() < 1e-15);
            }
        }
        let a = m(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let (g, rhs) = gram_transform(&a, &[1.0, 2.0]).unwrap();
        assert_eq!(g.elements(), &[2.0, 0.0, 0.0, 0.0]);
        assert_eq!(rhs, vec![3.0, 0.0]);
        assert!(matches!(spectrum(&g), Err(MatrixError::Singular { .. })));
        assert!(matches!(
            gram_transform(&a, &[1.0]),
            Err(MatrixError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn generation_spec_validation() {
        assert!(generate_random_sparse(&GenSpec::new(3, 1, 0)).is_err());
        assert!(generate_random_sparse(&GenSpec::new(4, 5, 0)).is_err());
        assert!(generate_random_sparse(&GenSpec::new(4, 0, 0)).is_err());
    }

    #[test]
    fn generation_s1_is_single_entry_per_row() {
        let a = generate_random_sparse(&GenSpec::new(2, 1, 3)).unwrap();
        let nonzero = a.elements().iter().filter(|x| x.abs() >= ZERO_TOL).count();
        assert_eq!(nonzero, 2);
        let diagonal = a.get(0, 1) == 0.0 && a.get(1, 0) == 0.0;
        let anti = a.get(0, 0) == 0.0 && a.get(1, 1) == 0.0;
        assert!(diagonal || anti);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GenSpec::new(4, 4, 42);
        assert_eq!(generate_random_sparse(&spec), generate_random_sparse(&spec));
    }

    #[test]
    fn impossible_kappa_exhausts_budget() {
        // kappa_max = 1 forces |lambda| all equal; a random draw essentially never hits it
        let spec = GenSpec {
            n: 4,
            s: 4,
            kappa_max: 1.0,
            seed: 1,
        };
        assert_eq!(
            generate_random_sparse(&spec).unwrap_err(),
            MatrixError::ResampleBudgetExhausted(RESAMPLE_BUDGET)
        );
    }
}
