//! Elementary-gate circuit IR over {single-qubit U, CX}.
//!
//! Qubit `k` is bit `k` of a basis-state index (little-endian).

mod gate;
mod peephole;
mod sim;
mod synth;
mod unitary;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gate::{Gate, OneQubit, C64};
pub use sim::{basis_state, simulate, Statevector};
pub use synth::{multiplexed_rotation, synthesize, Axis};
pub use unitary::{
    circuit_unitary, controlled, matrix_exponential, phase_distance, UnitaryMatrix,
    MAX_UNITARY_QUBITS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("gate {index} touches qubit {qubit} outside a {num_qubits}-qubit register")]
    QubitOutOfRange {
        index: usize,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("gate {index} has repeated target qubits")]
    RepeatedTarget { index: usize },
    #[error("gate {index} has a non-finite angle")]
    NonFiniteAngle { index: usize },
    #[error("state has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not unitary (||U U^dag - I||_F = {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("{qubits} qubits exceeds the supported maximum of {max}")]
    TooManyQubits { qubits: usize, max: usize },
    #[error("at least one control qubit is required")]
    NoControls,
    #[error(transparent)]
    Matrix(#[from] crate::matrix::MatrixError),
}

/// Ordered gate list over a fixed register.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    global_phase: f64,
}

/// Depth and size summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSummary {
    pub depth: usize,
    pub gates: usize,
    pub qubits: usize,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
            global_phase: 0.0,
        }
    }

    /// Builds a circuit, checking every gate against the register.
    pub fn from_gates(num_qubits: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let c = Self {
            num_qubits,
            gates,
            global_phase: 0.0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        for (index, g) in self.gates.iter().enumerate() {
            for q in g.qubits() {
                if q >= self.num_qubits {
                    return Err(CircuitError::QubitOutOfRange {
                        index,
                        qubit: q,
                        num_qubits: self.num_qubits,
                    });
                }
            }
            if let Gate::Cx { control, target } = g {
                if control == target {
                    return Err(CircuitError::RepeatedTarget { index });
                }
            }
            if !g.is_finite() {
                return Err(CircuitError::NonFiniteAngle { index });
            }
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    pub fn add_global_phase(&mut self, phase: f64) {
        self.global_phase += phase;
    }

    /// Appends a gate. Panics if the gate falls outside the register.
    pub fn push(&mut self, gate: Gate) {
        assert!(
            gate.qubits().all(|q| q < self.num_qubits),
            "gate {gate:?} outside {}-qubit register",
            self.num_qubits
        );
        self.gates.push(gate);
    }

    /// Appends `other`, mapping its qubit `k` to `mapping[k]`.
    pub fn append_mapped(&mut self, other: &Circuit, mapping: &[usize]) {
        assert_eq!(mapping.len(), other.num_qubits, "qubit mapping length");
        self.gates.reserve(other.gates.len());
        for g in &other.gates {
            self.push(g.remap(mapping));
        }
        self.global_phase += other.global_phase;
    }

    /// `self` followed by `other` on the same register.
    pub fn compose(&self, other: &Circuit) -> Circuit {
        let width = self.num_qubits.max(other.num_qubits);
        let mut out = Circuit::new(width);
        out.gates.extend(self.gates.iter().cloned());
        out.gates.extend(other.gates.iter().cloned());
        out.global_phase = self.global_phase + other.global_phase;
        out
    }

    /// Reversed gate order with every gate inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            global_phase: -self.global_phase,
        }
    }

    /// Critical-path length under greedy as-soon-as-possible layering.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        let mut depth = 0;
        for g in &self.gates {
            let layer = g.qubits().map(|q| level[q]).max().unwrap_or(0) + 1;
            for q in g.qubits() {
                level[q] = layer;
            }
            depth = depth.max(layer);
        }
        depth
    }

    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cx { .. })).count()
    }

    pub fn summary(&self) -> CircuitSummary {
        CircuitSummary {
            depth: self.depth(),
            gates: self.gates.len(),
            qubits: self.num_qubits,
        }
    }

    /// Removes single-qubit gates that are the identity up to phase, folding
    /// their phase into the global phase.
    pub fn without_identities(&self) -> Circuit {
        peephole::drop_identities(self)
    }

    /// Fuses adjacent single-qubit gates, cancels adjacent CX pairs and drops
    /// identity rotations until the gate count stops changing.
    pub fn optimized(&self) -> Circuit {
        peephole::optimize(self)
    }

    /// Text dump, one `GATE kind targets params` line per gate.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            match g {
                Gate::U { qubit, u } => {
                    let _ = writeln!(
                        out,
                        "GATE u {qubit} {},{},{},{}",
                        u.theta, u.phi, u.lambda, u.phase
                    );
                }
                Gate::Cx { control, target } => {
                    let _ = writeln!(out, "GATE cx {control},{target} -");
                }
            }
        }
        out
    }
}
