use super::{Circuit, CircuitError, Gate, C64};

pub type Statevector = Vec<C64>;

/// Computational basis state `|index>` on `num_qubits` qubits.
pub fn basis_state(num_qubits: usize, index: usize) -> Statevector {
    let mut psi = vec![C64::new(0.0, 0.0); 1 << num_qubits];
    psi[index] = C64::new(1.0, 0.0);
    psi
}

/// Applies `c` to `input` and returns the output state.
pub fn simulate(c: &Circuit, input: &[C64]) -> Result<Statevector, CircuitError> {
    let dim = 1usize << c.num_qubits();
    if input.len() != dim {
        return Err(CircuitError::DimensionMismatch {
            expected: dim,
            got: input.len(),
        });
    }
    let mut psi = input.to_vec();
    apply_in_place(c, &mut psi);
    Ok(psi)
}

pub(crate) fn apply_in_place(c: &Circuit, psi: &mut [C64]) {
    for g in c.gates() {
        match *g {
            Gate::U { qubit, u } => apply_one(psi, qubit, &u.matrix()),
            Gate::Cx { control, target } => apply_cx(psi, control, target),
        }
    }
    if c.global_phase() != 0.0 {
        let ph = C64::from_polar(1.0, c.global_phase());
        for a in psi.iter_mut() {
            *a *= ph;
        }
    }
}

fn apply_one(psi: &mut [C64], qubit: usize, m: &[[C64; 2]; 2]) {
    let bit = 1usize << qubit;
    for i in 0..psi.len() {
        if i & bit != 0 {
            continue;
        }
        let a0 = psi[i];
        let a1 = psi[i | bit];
        psi[i] = m[0][0] * a0 + m[0][1] * a1;
        psi[i | bit] = m[1][0] * a0 + m[1][1] * a1;
    }
}

fn apply_cx(psi: &mut [C64], control: usize, target: usize) {
    let cbit = 1usize << control;
    let tbit = 1usize << target;
    for i in 0..psi.len() {
        if i & cbit != 0 && i & tbit == 0 {
            psi.swap(i, i | tbit);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_on_zero() {
        let c = Circuit::from_gates(1, vec![Gate::h(0)]).unwrap();
        let out = simulate(&c, &basis_state(1, 0)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out[0] - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((out[1] - C64::new(r, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let psi = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        assert_eq!(simulate(&Circuit::new(1), &psi).unwrap(), psi);
    }

    #[test]
    fn cx_is_little_endian() {
        // control qubit 0 set -> flips qubit 1: |01> (index 1) -> |11> (index 3)
        let c = Circuit::from_gates(2, vec![Gate::cx(0, 1)]).unwrap();
        let out = simulate(&c, &basis_state(2, 1)).unwrap();
        assert_eq!(out[3], C64::new(1.0, 0.0));
    }

    #[test]
    fn dimension_checked() {
        let c = Circuit::new(2);
        assert!(matches!(
            simulate(&c, &basis_state(1, 0)),
            Err(CircuitError::DimensionMismatch { expected: 4, got: 2 })
        ));
    }
}
