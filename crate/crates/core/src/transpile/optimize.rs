use super::circuit::{LogicalCircuit, Op};
use crate::qsim::GateKind;
use crate::Result;

/// Merges runs of RZ on the same qubit and drops constant RZ rotations by a
/// multiple of 2π. Readouts and any other gate on the qubit end a run.
pub fn light_optimize(circuit: &LogicalCircuit) -> Result<LogicalCircuit> {
    let mut ops: Vec<Option<Op>> = Vec::with_capacity(circuit.ops().len());
    let mut pending: Vec<Option<usize>> = vec![None; circuit.num_qubits()];
    for op in circuit.ops() {
        match op {
            Op::Gate(g) if g.kind == GateKind::Rz => {
                let q = g.qubits[0];
                if let Some(Some(Op::Gate(prev))) = pending[q].map(|i| &mut ops[i]) {
                    prev.params[0] = prev.params[0].plus(&g.params[0]);
                    continue;
                }
                pending[q] = Some(ops.len());
                ops.push(Some(op.clone()));
            }
            _ => {
                for &q in op.qubits() {
                    pending[q] = None;
                }
                ops.push(Some(op.clone()));
            }
        }
    }
    let mut out = LogicalCircuit::new(circuit.num_qubits());
    for op in ops.into_iter().flatten() {
        if let Op::Gate(g) = &op {
            if g.kind == GateKind::Rz && g.params[0].is_trivial_rotation() {
                continue;
            }
        }
        out.push(op)?;
    }
    Ok(out)
}
