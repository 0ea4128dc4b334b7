use nalgebra::DMatrix;

use super::sim::apply_in_place;
use super::{Circuit, CircuitError, C64};
use crate::matrix::{symmetric_eigen, MatrixError, SystemMatrix};

/// Largest register for which dense unitaries are built.
pub const MAX_UNITARY_QUBITS: usize = 6;

const UNITARY_TOL: f64 = 1e-9;

/// Complex unitary of dimension `2^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    num_qubits: usize,
    m: DMatrix<C64>,
}

impl UnitaryMatrix {
    /// Wraps `m` after checking shape and `||U U^dag - I||_F <= 1e-9`.
    pub fn new(m: DMatrix<C64>) -> Result<Self, CircuitError> {
        let dim = m.nrows();
        if m.ncols() != dim {
            return Err(CircuitError::DimensionMismatch {
                expected: dim,
                got: m.ncols(),
            });
        }
        if !dim.is_power_of_two() {
            return Err(CircuitError::NotPowerOfTwo(dim));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        if num_qubits > MAX_UNITARY_QUBITS {
            return Err(CircuitError::TooManyQubits {
                qubits: num_qubits,
                max: MAX_UNITARY_QUBITS,
            });
        }
        let defect = unitarity_defect(&m);
        if !(defect <= UNITARY_TOL) {
            return Err(CircuitError::NotUnitary { defect });
        }
        Ok(Self { num_qubits, m })
    }

    #[cfg(test)]
    pub(crate) fn from_raw(m: DMatrix<C64>) -> Self {
        let num_qubits = m.nrows().trailing_zeros() as usize;
        Self { num_qubits, m }
    }

    pub fn identity(num_qubits: usize) -> Self {
        let dim = 1 << num_qubits;
        Self {
            num_qubits,
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            num_qubits: self.num_qubits,
            m: self.m.adjoint(),
        }
    }

    pub fn mul(&self, other: &UnitaryMatrix) -> Self {
        Self {
            num_qubits: self.num_qubits,
            m: &self.m * &other.m,
        }
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let v = nalgebra::DVector::from_column_slice(psi);
        (&self.m * v).iter().copied().collect()
    }

    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.m)
    }
}

pub(crate) fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let p = m * m.adjoint();
    let mut s = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            s += (p[(i, j)] - C64::new(target, 0.0)).norm_sqr();
        }
    }
    s.sqrt()
}

/// `e^{iAt}` for symmetric `A` via its eigendecomposition.
pub fn matrix_exponential(a: &SystemMatrix, t: f64) -> Result<UnitaryMatrix, CircuitError> {
    let n = a.n();
    if !n.is_power_of_two() {
        return Err(CircuitError::NotPowerOfTwo(n));
    }
    if !a.is_symmetric(1e-12 * a.max_abs().max(1.0)) {
        return Err(MatrixError::NotSymmetric.into());
    }
    let (vals, vecs) = symmetric_eigen(a)?;
    let phases: Vec<C64> = vals.iter().map(|l| C64::from_polar(1.0, l * t)).collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| phases[k] * (vecs[i * n + k] * vecs[j * n + k]))
            .sum()
    });
    let u = UnitaryMatrix::new(m)?;
    Ok(u)
}

/// Embeds `u` as `diag(I, ..., I, U)` with `num_controls` control qubits placed
/// above the target qubits.
pub fn controlled(u: &UnitaryMatrix, num_controls: usize) -> Result<UnitaryMatrix, CircuitError> {
    if num_controls == 0 {
        return Err(CircuitError::NoControls);
    }
    let qubits = u.num_qubits + num_controls;
    if qubits > MAX_UNITARY_QUBITS {
        return Err(CircuitError::TooManyQubits {
            qubits,
            max: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1 << qubits;
    let d = u.dim();
    let off = dim - d;
    let mut m = DMatrix::identity(dim, dim);
    m.view_mut((off, off), (d, d)).copy_from(&u.m);
    Ok(UnitaryMatrix {
        num_qubits: qubits,
        m,
    })
}

/// Dense unitary implemented by `c`.
pub fn circuit_unitary(c: &Circuit) -> Result<UnitaryMatrix, CircuitError> {
    let q = c.num_qubits();
    if q > MAX_UNITARY_QUBITS {
        return Err(CircuitError::TooManyQubits {
            qubits: q,
            max: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1 << q;
    let mut m = DMatrix::zeros(dim, dim);
    let mut col = vec![C64::new(0.0, 0.0); dim];
    for j in 0..dim {
        col.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
        col[j] = C64::new(1.0, 0.0);
        apply_in_place(c, &mut col);
        for i in 0..dim {
            m[(i, j)] = col[i];
        }
    }
    Ok(UnitaryMatrix { num_qubits: q, m })
}

/// `min_phi ||U - e^{i phi} V||_F`.
pub fn phase_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> f64 {
    if u.dim() != v.dim() {
        return f64::INFINITY;
    }
    let tr: C64 = u
        .m
        .iter()
        .zip(v.m.iter())
        .map(|(a, b)| b.conj() * a)
        .sum();
    let ph = if tr.norm() > 0.0 {
        tr / tr.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    u.m.iter()
        .zip(v.m.iter())
        .map(|(a, b)| (a - ph * b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::matrix::Provenance;
    use std::f64::consts::PI;

    #[test]
    fn exponential_of_zero_and_diagonal() {
        let zero = SystemMatrix::new(2, vec![0.0; 4], Provenance::Random).unwrap();
        let u = matrix_exponential(&zero, 1.3).unwrap();
        assert!(phase_distance(&u, &UnitaryMatrix::identity(1)) < 1e-15);
        assert!((u.matrix()[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);

        let d = SystemMatrix::diagonal(&[1.0, 0.5], Provenance::Ideal).unwrap();
        let u = matrix_exponential(&d, 2.0 * PI).unwrap();
        assert!((u.matrix()[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((u.matrix()[(1, 1)] - C64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn controlled_x_is_cnot() {
        let x = circuit_unitary(&Circuit::from_gates(1, vec![Gate::x(0)]).unwrap()).unwrap();
        let cx = controlled(&x, 1).unwrap();
        // control is qubit 1 (above the target)
        let cnot = circuit_unitary(&Circuit::from_gates(2, vec![Gate::cx(1, 0)]).unwrap()).unwrap();
        assert!(phase_distance(&cx, &cnot) < 1e-12);
        let ci = controlled(&UnitaryMatrix::identity(2), 2).unwrap();
        assert!(phase_distance(&ci, &UnitaryMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = DMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(matches!(UnitaryMatrix::new(m), Err(CircuitError::NotUnitary { .. })));
        let m = DMatrix::<C64>::identity(3, 3);
        assert!(matches!(UnitaryMatrix::new(m), Err(CircuitError::NotPowerOfTwo(3))));
        assert!(matches!(
            controlled(&UnitaryMatrix::identity(5), 2),
            Err(CircuitError::TooManyQubits { qubits: 7, .. })
        ));
        assert!(matches!(
            controlled(&UnitaryMatrix::identity(1), 0),
            Err(CircuitError::NoControls)
        ));
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let u = UnitaryMatrix::identity(2);
        let mut m = DMatrix::<C64>::identity(4, 4);
        m *= C64::from_polar(1.0, 0.9);
        let v = UnitaryMatrix::new(m).unwrap();
        assert!(phase_distance(&u, &v) < 1e-14);
    }
}
