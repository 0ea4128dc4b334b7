//! Exact unitary synthesis by recursive cosine-sine and multiplexor
//! decomposition (quantum Shannon decomposition).

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;

use super::unitary::unitarity_defect;
use super::{Circuit, CircuitError, Gate, OneQubit, UnitaryMatrix, C64};

const BLOCK_TOL: f64 = 1e-13;
const INPUT_TOL: f64 = 1e-9;
const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITER: usize = 100_000;

/// Rotation axis of a multiplexed rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Y,
    Z,
}

/// Circuit over {U, CX} implementing `u` (exactly, including global phase, up to
/// rounding).
pub fn synthesize(u: &UnitaryMatrix) -> Result<Circuit, CircuitError> {
    let defect = unitarity_defect(u.matrix());
    if !(defect <= INPUT_TOL) {
        return Err(CircuitError::NotUnitary { defect });
    }
    let q = u.num_qubits();
    let mut c = Circuit::new(q);
    if q == 0 {
        c.add_global_phase(u.matrix()[(0, 0)].arg());
        return Ok(c);
    }
    let qubits: Vec<usize> = (0..q).collect();
    qsd(&closest_unitary(u.matrix()), &qubits, &mut c);
    Ok(c)
}

/// Appends the uniformly controlled rotation that applies `R(angles[x])` to
/// `target` when the control register reads `x` (bit `j` of `x` is
/// `controls[j]`).
pub fn multiplexed_rotation(
    c: &mut Circuit,
    axis: Axis,
    angles: &[f64],
    controls: &[usize],
    target: usize,
) {
    let k = controls.len();
    assert_eq!(angles.len(), 1 << k, "need 2^k angles for k controls");
    let rot = |theta: f64| match axis {
        Axis::Y => Gate::ry(target, theta),
        Axis::Z => Gate::rz(target, theta),
    };
    if k == 0 {
        c.push(rot(angles[0]));
        return;
    }
    let n = angles.len();
    let coeffs = walsh_hadamard(angles);
    for m in 0..n {
        let theta = coeffs[m ^ (m >> 1)] / n as f64;
        c.push(rot(theta));
        let flip = if m + 1 == n {
            k - 1
        } else {
            (m + 1).trailing_zeros() as usize
        };
        c.push(Gate::cx(controls[flip], target));
    }
}

/// Unnormalized fast Walsh-Hadamard transform: `out[g] = sum_x (-1)^{|x & g|} v[x]`.
fn walsh_hadamard(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    let mut h = 1;
    while h < out.len() {
        for block in out.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    out
}

fn qsd(u: &DMatrix<C64>, qubits: &[usize], c: &mut Circuit) {
    let m = qubits.len();
    if m == 1 {
        let mm = [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]];
        let g = OneQubit::from_matrix(&mm);
        match g.identity_phase(1e-14) {
            Some(ph) => c.add_global_phase(ph),
            None => c.push(Gate::U {
                qubit: qubits[0],
                u: g,
            }),
        }
        return;
    }
    if let Some(ph) = scalar_phase(u) {
        c.add_global_phase(ph);
        return;
    }
    let h = u.nrows() / 2;
    let u00 = u.view((0, 0), (h, h)).clone_owned();
    let u01 = u.view((0, h), (h, h)).clone_owned();
    let u10 = u.view((h, 0), (h, h)).clone_owned();
    let u11 = u.view((h, h), (h, h)).clone_owned();
    let (l0, l1, r0h, r1h, theta) = cosine_sine(&u00, &u01, &u10, &u11);
    let lower = &qubits[..m - 1];
    let msb = qubits[m - 1];
    demultiplex(&r0h, &r1h, qubits, c);
    multiplexed_rotation(c, Axis::Y, &theta, lower, msb);
    demultiplex(&l0, &l1, qubits, c);
}

/// `[[u00,u01],[u10,u11]] = diag(L0,L1) [[C,-S],[S,C]] diag(R0h,R1h)`;
/// returns `(L0, L1, R0h, R1h, theta)` with `C = cos(theta/2)`.
#[allow(clippy::type_complexity)]
fn cosine_sine(
    u00: &DMatrix<C64>,
    u01: &DMatrix<C64>,
    u10: &DMatrix<C64>,
    u11: &DMatrix<C64>,
) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>, DMatrix<C64>, Vec<f64>) {
    let h = u00.nrows();
    let svd = u00.clone().svd(true, true);
    let w = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    let sv = svd.singular_values;
    // ascending cosines: columns with large sines go first into the QR
    let mut order: Vec<usize> = (0..h).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]).then(a.cmp(&b)));
    let l0 = DMatrix::from_fn(h, h, |i, j| w[(i, order[j])]);
    let r0h = DMatrix::from_fn(h, h, |i, j| vt[(order[i], j)]);
    let cos: Vec<f64> = order.iter().map(|&k| sv[k].min(1.0)).collect();

    let z = u10 * r0h.adjoint();
    let (q, r) = z.qr().unpack();
    let mut l1 = q;
    let mut sin = vec![0.0; h];
    for j in 0..h {
        let rjj = r[(j, j)];
        sin[j] = rjj.norm();
        if sin[j] > 0.0 {
            let ph = rjj / sin[j];
            for i in 0..h {
                l1[(i, j)] *= ph;
            }
        }
    }

    let a = -(l0.adjoint() * u01);
    let b = l1.adjoint() * u11;
    let mut r1h = DMatrix::zeros(h, h);
    for i in 0..h {
        if sin[i] >= cos[i] {
            for j in 0..h {
                r1h[(i, j)] = a[(i, j)] / sin[i];
            }
        } else {
            for j in 0..h {
                r1h[(i, j)] = b[(i, j)] / cos[i];
            }
        }
    }
    let r1h = closest_unitary(&r1h);
    let theta = (0..h).map(|i| 2.0 * sin[i].atan2(cos[i])).collect();
    (l0, l1, r0h, r1h, theta)
}

/// Implements `diag(u0, u1)` with the MSB of `qubits` selecting the block.
fn demultiplex(u0: &DMatrix<C64>, u1: &DMatrix<C64>, qubits: &[usize], c: &mut Circuit) {
    let m = qubits.len();
    let lower = &qubits[..m - 1];
    let msb = qubits[m - 1];
    // u0 u1^dag = V D^2 V^dag, u0 = V D W, u1 = V D^dag W
    let prod = u0 * u1.adjoint();
    let (v, t) = Schur::try_new(prod.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .map(Schur::unpack)
        .unwrap_or_else(|| fallback_eigen(&prod));
    let v = closest_unitary(&v);
    let h = u0.nrows();
    let d: Vec<C64> = (0..h)
        .map(|i| {
            let ph = t[(i, i)].arg() / 2.0;
            C64::from_polar(1.0, ph)
        })
        .collect();
    let mut w = v.adjoint() * u1;
    for i in 0..h {
        for j in 0..h {
            w[(i, j)] *= d[i];
        }
    }
    let w = closest_unitary(&w);
    qsd(&w, lower, c);
    let angles: Vec<f64> = d.iter().map(|di| -2.0 * di.arg()).collect();
    multiplexed_rotation(c, Axis::Z, &angles, lower, msb);
    qsd(&v, lower, c);
}

/// Eigenvectors of a unitary through its Hermitian part, used only if the
/// Schur iteration fails to converge.
fn fallback_eigen(u: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let herm = (u + u.adjoint()) * C64::new(0.5, 0.0)
        + (u - u.adjoint()) * C64::new(0.0, -0.5 * std::f64::consts::FRAC_1_SQRT_2);
    let eig = herm.symmetric_eigen();
    let v = eig.eigenvectors;
    let t = v.adjoint() * u * &v;
    (v, t)
}

/// Nearest unitary in Frobenius norm (polar factor).
fn closest_unitary(m: &DMatrix<C64>) -> DMatrix<C64> {
    let svd = m.clone().svd(true, true);
    svd.u.expect("svd u") * svd.v_t.expect("svd v_t")
}

/// `Some(arg)` if `u` is `e^{i arg} I`.
fn scalar_phase(u: &DMatrix<C64>) -> Option<f64> {
    let d = u[(0, 0)];
    for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            let target = if i == j { d } else { C64::new(0.0, 0.0) };
            if (u[(i, j)] - target).norm() > BLOCK_TOL {
                return None;
            }
        }
    }
    Some(d.arg())
}
