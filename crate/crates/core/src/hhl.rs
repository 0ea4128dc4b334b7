//! Five-stage HHL circuit construction and depth measurement.
//!
//! Register layout (little-endian): solution register on qubits `0..n_b`,
//! eigenvalue register on `n_b..n_b+n_l`, flag qubit last.
//!
//! Eigen-register values decode as signed two's-complement multiples of the
//! bin width `c`, which is set to the smallest eigenvalue magnitude
//! (`|lambda_max| / kappa`) so that the dominant terms of `A^{-1} b` are
//! resolved exactly. The evolution time follows as `t = 2 pi / (c 2^n_l)`.
//! `n_l >= log2(kappa) + 1` keeps every eigenvalue within the signed range;
//! the single ambiguous value `2^(n_l-1)` takes the sign of the dominant
//! eigenvalue.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{
    basis_state, controlled, matrix_exponential, multiplexed_rotation, simulate, synthesize, Axis,
    Circuit, CircuitError, Gate, C64,
};
use crate::matrix::{spectrum, MatrixError, Spectrum, SystemMatrix};

/// Largest register the statevector check will simulate.
pub const MAX_SIM_QUBITS: usize = 6;

/// Largest eigenvalue register the builder accepts; the inversion stage
/// holds `2^n_l` rotations.
pub const MAX_EIGEN_QUBITS: usize = 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HhlError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("matrix size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("simulation needs {qubits} qubits, more than the supported {max}")]
    SimulationTooLarge { qubits: usize, max: usize },
    #[error("eigenvalue register of {0} qubits exceeds the limit of {MAX_EIGEN_QUBITS}")]
    RegisterTooLarge(usize),
    #[error("right-hand side has length {got}, expected {expected}")]
    RhsLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HhlConfig {
    pub n_b: usize,
    pub n_l: usize,
    /// Evolution time of the controlled `e^{iAt}` blocks.
    pub t: f64,
    /// `2^-n_l`.
    pub epsilon: f64,
    /// Eigenvalue bin width; also the inversion constant `C`.
    pub c: f64,
    /// Sign given to the ambiguous register value `2^(n_l-1)`.
    pub top_negative: bool,
}

impl HhlConfig {
    /// Register sizes and evolution time for `a` (symmetric, invertible).
    pub fn for_matrix(a: &SystemMatrix) -> Result<Self, HhlError> {
        let sp = spectrum(a)?;
        let n_b = register_bits(a.n())?;
        Ok(Self::from_spectrum(n_b, pe_register_size(sp.kappa, n_b), &sp))
    }

    /// Same as [`HhlConfig::for_matrix`] with a fixed eigenvalue register.
    pub fn with_register(a: &SystemMatrix, n_l: usize) -> Result<Self, HhlError> {
        let sp = spectrum(a)?;
        Ok(Self::from_spectrum(register_bits(a.n())?, n_l, &sp))
    }

    fn from_spectrum(n_b: usize, n_l: usize, sp: &Spectrum) -> Self {
        let c = sp.lambda_min();
        let size = (1u64 << n_l) as f64;
        Self {
            n_b,
            n_l,
            t: 2.0 * PI / (c * size),
            epsilon: 1.0 / size,
            c,
            top_negative: sp.eigenvalues[0] < 0.0,
        }
    }

    pub fn total_qubits(&self) -> usize {
        self.n_b + self.n_l + 1
    }

    pub fn flag_qubit(&self) -> usize {
        self.n_b + self.n_l
    }

    /// Eigenvalue represented by eigen-register value `j`.
    pub fn decode(&self, j: usize) -> f64 {
        let size = 1i64 << self.n_l;
        let j = j as i64;
        let v = if j < size / 2 || (j == size / 2 && !self.top_negative) {
            j
        } else {
            j - size
        };
        v as f64 * self.c
    }

    /// Flag rotation angle `2 asin(C / lambda_j)` for register value `j`.
    pub fn inversion_angle(&self, j: usize) -> f64 {
        let lam = self.decode(j);
        if lam == 0.0 {
            0.0
        } else {
            2.0 * (self.c / lam).clamp(-1.0, 1.0).asin()
        }
    }
}

#[derive(Debug, Clone)]
pub struct HhlResult {
    /// Peephole-optimized elementary-gate circuit (no measurement gates).
    pub circuit: Circuit,
    pub full_depth: usize,
    pub config: HhlConfig,
    pub success_probability: Option<f64>,
}

/// `max(n_b + 1, ceil(log2 kappa) + 1)`.
pub fn pe_register_size(kappa: f64, n_b: usize) -> usize {
    let bits = if kappa <= 1.0 {
        0
    } else {
        kappa.log2().ceil() as usize
    };
    (n_b + 1).max(bits + 1)
}

/// Hadamard on every solution qubit: loads the normalized all-ones vector.
pub fn prepare_b(n_b: usize) -> Circuit {
    let mut c = Circuit::new(n_b);
    for q in 0..n_b {
        c.push(Gate::h(q));
    }
    c
}

/// Inverse quantum Fourier transform on `qubits` (index bit `k` is
/// `qubits[k]`), over {U, CX}.
pub fn inverse_qft(num_qubits: usize, qubits: &[usize]) -> Circuit {
    qft(num_qubits, qubits).inverse()
}

/// Quantum Fourier transform `|j> -> sum_y e^{2 pi i j y / 2^n} |y> / sqrt(2^n)`.
pub fn qft(num_qubits: usize, qubits: &[usize]) -> Circuit {
    let n = qubits.len();
    let mut c = Circuit::new(num_qubits);
    for k in (0..n).rev() {
        c.push(Gate::h(qubits[k]));
        for j in (0..k).rev() {
            let theta = PI / (1u64 << (k - j)) as f64;
            controlled_phase(&mut c, qubits[j], qubits[k], theta);
        }
    }
    for i in 0..n / 2 {
        let (a, b) = (qubits[i], qubits[n - 1 - i]);
        c.push(Gate::cx(a, b));
        c.push(Gate::cx(b, a));
        c.push(Gate::cx(a, b));
    }
    c
}

fn controlled_phase(c: &mut Circuit, control: usize, target: usize, theta: f64) {
    c.push(Gate::p(control, theta / 2.0));
    c.push(Gate::cx(control, target));
    c.push(Gate::p(target, -theta / 2.0));
    c.push(Gate::cx(control, target));
    c.push(Gate::p(target, theta / 2.0));
}

/// Phase estimation of `e^{iAt}` onto the eigenvalue register.
fn phase_estimation(a: &SystemMatrix, cfg: &HhlConfig) -> Result<Circuit, HhlError> {
    let total = cfg.total_qubits();
    let mut c = Circuit::new(total);
    let l = |k: usize| cfg.n_b + k;
    for k in 0..cfg.n_l {
        c.push(Gate::h(l(k)));
    }
    for k in 0..cfg.n_l {
        let power = (1u64 << k) as f64;
        let u = matrix_exponential(a, cfg.t * power)?;
        let block = synthesize(&controlled(&u, 1)?)?;
        let mut mapping: Vec<usize> = (0..cfg.n_b).collect();
        mapping.push(l(k));
        c.append_mapped(&block, &mapping);
    }
    let reg: Vec<usize> = (0..cfg.n_l).map(l).collect();
    let iqft = inverse_qft(total, &reg);
    Ok(c.compose(&iqft))
}

fn eigenvalue_inversion(cfg: &HhlConfig) -> Circuit {
    let mut c = Circuit::new(cfg.total_qubits());
    let angles: Vec<f64> = (0..1usize << cfg.n_l)
        .map(|j| cfg.inversion_angle(j))
        .collect();
    let controls: Vec<usize> = (0..cfg.n_l).map(|k| cfg.n_b + k).collect();
    multiplexed_rotation(&mut c, Axis::Y, &angles, &controls, cfg.flag_qubit());
    c
}

/// Builds the full HHL circuit for a symmetric invertible `a`.
pub fn build_hhl(a: &SystemMatrix) -> Result<HhlResult, HhlError> {
    let cfg = HhlConfig::for_matrix(a)?;
    build_hhl_with_config(a, &cfg)
}

/// Builds the HHL circuit with explicit register sizes and evolution time.
pub fn build_hhl_with_config(a: &SystemMatrix, cfg: &HhlConfig) -> Result<HhlResult, HhlError> {
    register_bits(a.n())?;
    if cfg.n_l > MAX_EIGEN_QUBITS {
        return Err(HhlError::RegisterTooLarge(cfg.n_l));
    }
    if !a.is_symmetric(1e-12 * a.max_abs().max(1.0)) {
        return Err(MatrixError::NotSymmetric.into());
    }
    let total = cfg.total_qubits();
    let mut c = Circuit::new(total);
    let b_reg: Vec<usize> = (0..cfg.n_b).collect();
    c.append_mapped(&prepare_b(cfg.n_b), &b_reg);
    let qpe = phase_estimation(a, cfg)?;
    let c = c
        .compose(&qpe)
        .compose(&eigenvalue_inversion(cfg))
        .compose(&qpe.inverse());
    let circuit = c.without_identities();
    let full_depth = circuit.depth();
    Ok(HhlResult {
        circuit,
        full_depth,
        config: *cfg,
        success_probability: None,
    })
}

/// Depth of the optimized HHL circuit.
pub fn full_depth(a: &SystemMatrix) -> Result<usize, HhlError> {
    Ok(build_hhl(a)?.full_depth)
}

/// Depth label for any square input: non-symmetric matrices are dilated first.
pub fn labeling_depth(a: &SystemMatrix) -> Result<(usize, usize), HhlError> {
    let sym = if a.is_symmetric(1e-12 * a.max_abs().max(1.0)) {
        a.clone()
    } else {
        crate::matrix::dilate(a)
    };
    let r = build_hhl(&sym)?;
    Ok((r.config.n_l, r.full_depth))
}

/// Normalized `A^{-1} b`.
pub fn classical_solve(a: &SystemMatrix, b: &[f64]) -> Result<Vec<f64>, HhlError> {
    let n = a.n();
    if b.len() != n {
        return Err(HhlError::RhsLength {
            expected: n,
            got: b.len(),
        });
    }
    let x = solve_dense(a, b)?;
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(x.iter().map(|v| v / norm).collect())
}

/// Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &SystemMatrix, b: &[f64]) -> Result<Vec<f64>, HhlError> {
    let n = a.n();
    let mut m = a.elements().to_vec();
    let mut x = b.to_vec();
    let scale = a.max_abs();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap_or(col);
        if m[piv * n + col].abs() <= 1e-14 * scale {
            return Err(MatrixError::Singular { ratio: 0.0 }.into());
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r * n + k] * x[k]).sum();
        x[r] = (x[r] - s) / m[r * n + r];
    }
    Ok(x)
}

/// Statevector check of an HHL circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct HhlSimulation {
    /// Probability of measuring the flag qubit in `|1>`.
    pub success_probability: f64,
    /// `<x| rho |x>` for the post-selected solution-register state `rho` and the
    /// classical solution `x`.
    pub fidelity: f64,
}

/// Runs `result.circuit` from `|0...0>`, post-selects the flag and compares the
/// solution register with the classical solution for the uniform right-hand side.
pub fn simulate_hhl(a: &SystemMatrix, result: &HhlResult) -> Result<HhlSimulation, HhlError> {
    let cfg = &result.config;
    let q = cfg.total_qubits();
    if q > MAX_SIM_QUBITS {
        return Err(HhlError::SimulationTooLarge {
            qubits: q,
            max: MAX_SIM_QUBITS,
        });
    }
    let n = a.n();
    let b = vec![1.0 / (n as f64).sqrt(); n];
    let x = classical_solve(a, &b)?;
    let psi = simulate(&result.circuit, &basis_state(q, 0))?;
    let flag = 1usize << cfg.flag_qubit();
    let mut success = 0.0;
    let mut overlap = 0.0;
    for l in 0..1usize << cfg.n_l {
        let base = flag | (l << cfg.n_b);
        let amps: Vec<C64> = (0..n).map(|i| psi[base | i]).collect();
        success += amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let proj: C64 = amps.iter().zip(&x).map(|(z, xi)| z * *xi).sum();
        overlap += proj.norm_sqr();
    }
    let fidelity = if success > 0.0 { overlap / success } else { 0.0 };
    Ok(HhlSimulation {
        success_probability: success,
        fidelity,
    })
}

fn register_bits(n: usize) -> Result<usize, HhlError> {
    if n < 2 || !n.is_power_of_two() {
        return Err(HhlError::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, UnitaryMatrix};
    use crate::matrix::{ideal_matrix, Provenance};

    #[test]
    fn register_size_examples() {
        assert_eq!(pe_register_size(2.0, 1), 2);
        assert_eq!(pe_register_size(3.9, 2), 3);
        assert_eq!(pe_register_size(4.1, 2), 4);
        assert_eq!(pe_register_size(1000.0, 2), 11);
        assert_eq!(pe_register_size(1.0, 3), 4);
    }

    #[test]
    fn qft_matches_dft() {
        for n in 1..=4 {
            let reg: Vec<usize> = (0..n).collect();
            let u = circuit_unitary(&qft(n, &reg)).unwrap();
            let dim = 1usize << n;
            let norm = 1.0 / (dim as f64).sqrt();
            let dft = nalgebra::DMatrix::from_fn(dim, dim, |y, j| {
                C64::from_polar(norm, 2.0 * PI * (j * y) as f64 / dim as f64)
            });
            let d: f64 = u
                .matrix()
                .iter()
                .zip(dft.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(d < 1e-12, "n={n} d={d}");
            let _ = UnitaryMatrix::new(dft).unwrap();
        }
    }

    #[test]
    fn prepare_b_is_one_layer() {
        assert_eq!(prepare_b(1).depth(), 1);
        assert_eq!(prepare_b(3).depth(), 1);
        assert_eq!(prepare_b(3).len(), 3);
    }

    #[test]
    fn decoding_is_signed() {
        let a = ideal_matrix(2);
        let cfg = HhlConfig::with_register(&a, 3).unwrap();
        assert_eq!(cfg.c, 0.5);
        assert_eq!(cfg.decode(0), 0.0);
        assert_eq!(cfg.decode(4), 2.0);
        assert_eq!(cfg.decode(2), 1.0);
        assert_eq!(cfg.decode(7), -0.5);
        assert_eq!(cfg.inversion_angle(0), 0.0);
        assert!((cfg.inversion_angle(1) - PI).abs() < 1e-15);
        assert!((cfg.inversion_angle(7) + PI).abs() < 1e-15);
        let neg = SystemMatrix::diagonal(&[-1.0, 0.5], Provenance::Random).unwrap();
        let cfg = HhlConfig::for_matrix(&neg).unwrap();
        assert_eq!(cfg.n_l, 2);
        assert_eq!(cfg.decode(2), -1.0);
    }

    #[test]
    fn classical_solve_examples() {
        let id = SystemMatrix::identity(4);
        let x = classical_solve(&id, &[0.5; 4]).unwrap();
        assert!(x.iter().all(|v| (v - 0.5).abs() < 1e-15));
        let d = SystemMatrix::diagonal(&[1.0, 0.5], Provenance::Ideal).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let x = classical_solve(&d, &[r, r]).unwrap();
        let s5 = 5f64.sqrt();
        assert!((x[0] - 1.0 / s5).abs() < 1e-15 && (x[1] - 2.0 / s5).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let a = SystemMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]], Provenance::Random)
            .unwrap();
        assert!(matches!(build_hhl(&a), Err(HhlError::Matrix(_))));
        let (_, depth) = labeling_depth(&a).unwrap();
        assert!(depth > 0);
    }
}
