use super::{Circuit, Gate};

const IDENTITY_TOL: f64 = 1e-12;

pub(super) fn optimize(c: &Circuit) -> Circuit {
    let mut current = c.clone();
    loop {
        let next = pass(&current);
        if next.gates.len() == current.gates.len() {
            return next;
        }
        current = next;
    }
}

pub(super) fn drop_identities(c: &Circuit) -> Circuit {
    let mut phase = c.global_phase;
    let mut gates = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        if let Gate::U { u, .. } = g {
            if let Some(ph) = u.identity_phase(IDENTITY_TOL) {
                phase += ph;
                continue;
            }
        }
        gates.push(*g);
    }
    Circuit {
        num_qubits: c.num_qubits,
        gates,
        global_phase: phase,
    }
}

fn pass(c: &Circuit) -> Circuit {
    let mut out: Vec<Option<Gate>> = Vec::with_capacity(c.gates.len());
    // live gate indices touching each qubit, in order
    let mut stacks: Vec<Vec<usize>> = vec![Vec::new(); c.num_qubits];
    let mut phase = c.global_phase;

    for g in &c.gates {
        match *g {
            Gate::U { qubit, u } => {
                if let Some(ph) = u.identity_phase(IDENTITY_TOL) {
                    phase += ph;
                    continue;
                }
                if let Some(&i) = stacks[qubit].last() {
                    if let Some(Gate::U { u: prev, .. }) = out[i] {
                        let fused = prev.then(&u);
                        if let Some(ph) = fused.identity_phase(IDENTITY_TOL) {
                            phase += ph;
                            out[i] = None;
                            stacks[qubit].pop();
                        } else {
                            out[i] = Some(Gate::U { qubit, u: fused });
                        }
                        continue;
                    }
                }
                stacks[qubit].push(out.len());
                out.push(Some(*g));
            }
            Gate::Cx { control, target } => {
                let top_c = stacks[control].last().copied();
                let top_t = stacks[target].last().copied();
                if let (Some(i), Some(j)) = (top_c, top_t) {
                    if i == j && out[i] == Some(*g) {
                        out[i] = None;
                        stacks[control].pop();
                        stacks[target].pop();
                        continue;
                    }
                }
                let idx = out.len();
                stacks[control].push(idx);
                stacks[target].push(idx);
                out.push(Some(*g));
            }
        }
    }

    Circuit {
        num_qubits: c.num_qubits,
        gates: out.into_iter().flatten().collect(),
        global_phase: phase,
    }
}
