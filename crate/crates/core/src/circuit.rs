//! Translation of gate lists into ZX-diagrams.

use thiserror::Error;

use crate::angle::Angle;
use crate::diagram::{Diagram, NodeId, NodeKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    ZRot { qubit: usize, angle: Angle },
    XRot { qubit: usize, angle: Angle },
    H(usize),
    Cnot { control: usize, target: usize },
    Swap(usize, usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("two-qubit gate acts twice on qubit {0}")]
    RepeatedQubit(usize),
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::ZRot { qubit, .. } | Gate::XRot { qubit, .. } | Gate::H(qubit) => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Swap(a, b) => vec![a, b],
        }
    }
}

/// Builds the diagram of a circuit. Qubit `i` becomes input `i` and output
/// `i`; rotations become degree-2 spiders and CNOT a connected Z–X pair.
pub fn from_circuit(gates: &[Gate], n_qubits: usize) -> Result<Diagram, CircuitError> {
    for g in gates {
        let qs = g.qubits();
        if let Some(&qubit) = qs.iter().find(|&&q| q >= n_qubits) {
            return Err(CircuitError::QubitOutOfRange { qubit, n_qubits });
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(CircuitError::RepeatedQubit(qs[0]));
        }
    }

    let mut d = Diagram::new();
    let mut front: Vec<NodeId> = (0..n_qubits).map(|_| d.add_input()).collect();
    let extend = |d: &mut Diagram, front: &mut Vec<NodeId>, q: usize, kind: NodeKind, angle: Angle| {
        let n = d.add_node(kind, angle);
        d.add_edge(front[q], n);
        front[q] = n;
        n
    };
    for g in gates {
        match g {
            Gate::ZRot { qubit, angle } => {
                extend(&mut d, &mut front, *qubit, NodeKind::Z, angle.clone());
            }
            Gate::XRot { qubit, angle } => {
                extend(&mut d, &mut front, *qubit, NodeKind::X, angle.clone());
            }
            Gate::H(q) => {
                extend(&mut d, &mut front, *q, NodeKind::Hadamard, Angle::ZERO);
            }
            Gate::Cnot { control, target } => {
                let c = extend(&mut d, &mut front, *control, NodeKind::Z, Angle::ZERO);
                let t = extend(&mut d, &mut front, *target, NodeKind::X, Angle::ZERO);
                d.add_edge(c, t);
            }
            Gate::Swap(a, b) => front.swap(*a, *b),
        }
    }
    for &f in &front {
        let o = d.add_output();
        d.add_edge(f, o);
    }
    Ok(d)
}
