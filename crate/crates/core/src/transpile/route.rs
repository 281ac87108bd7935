use std::collections::VecDeque;

use super::circuit::{Instruction, LogicalCircuit, MeasureSite, Op};
use super::decompose::{decompose_instruction, Basis};
use crate::noise::NoiseProfile;
use crate::qsim::GateKind;
use crate::{Error, Result};

/// A circuit rewritten onto physical qubit indices.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutedCircuit {
    /// Gates and readouts over the device's physical qubits.
    pub circuit: LogicalCircuit,
    pub initial_layout: Vec<usize>,
    pub final_layout: Vec<usize>,
    pub swap_count: usize,
}

/// Inserts SWAPs so that every two-qubit gate acts on a coupling edge.
///
/// For a non-adjacent gate the first (control) qubit is swapped along a
/// shortest path towards the second until they are neighbours.
pub fn route(
    circuit: &LogicalCircuit,
    layout: &[usize],
    profile: &NoiseProfile,
    basis: Basis,
) -> Result<RoutedCircuit> {
    let size = profile.num_qubits();
    if layout.len() != circuit.num_qubits() {
        return Err(Error::Transpile(format!(
            "layout covers {} qubits, circuit has {}",
            layout.len(),
            circuit.num_qubits()
        )));
    }
    let mut occupant: Vec<Option<usize>> = vec![None; size];
    for (l, &p) in layout.iter().enumerate() {
        if p >= size || occupant[p].is_some() {
            return Err(Error::Transpile(format!(
                "layout {layout:?} is not injective on the device"
            )));
        }
        occupant[p] = Some(l);
    }
    let mut adj = vec![Vec::new(); size];
    for e in profile.coupling_map() {
        adj[e[0]].push(e[1]);
        adj[e[1]].push(e[0]);
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }

    let mut phys = layout.to_vec();
    let mut out = LogicalCircuit::new(size);
    let mut swap_count = 0;
    for op in circuit.ops() {
        match op {
            Op::Measure(m) => out.push(Op::Measure(MeasureSite {
                site: m.site,
                qubit: phys[m.qubit],
                bases: m.bases.clone(),
            }))?,
            Op::Gate(g) if g.qubits.len() == 1 => out.gate(Instruction {
                qubits: vec![phys[g.qubits[0]]],
                ..g.clone()
            })?,
            Op::Gate(g) => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                let path = shortest_path(&adj, phys[a], phys[b]).ok_or_else(|| {
                    Error::Transpile(format!(
                        "qubits {} and {} are disconnected",
                        phys[a], phys[b]
                    ))
                })?;
                for w in path.windows(2).take(path.len().saturating_sub(2)) {
                    let (from, to) = (w[0], w[1]);
                    for inst in decompose_instruction(
                        &Instruction::fixed(GateKind::Swap, &[from, to]),
                        basis,
                    ) {
                        out.gate(inst)?;
                    }
                    swap_count += 1;
                    occupant.swap(to, from);
                    if let Some(l) = occupant[to] {
                        phys[l] = to;
                    }
                    if let Some(l) = occupant[from] {
                        phys[l] = from;
                    }
                }
                out.gate(Instruction {
                    qubits: vec![phys[a], phys[b]],
                    ..g.clone()
                })?;
            }
        }
    }
    Ok(RoutedCircuit {
        circuit: out,
        initial_layout: layout.to_vec(),
        final_layout: phys,
        swap_count,
    })
}

fn shortest_path(adj: &[Vec<usize>], from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(q) = queue.pop_front() {
        if q == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &r in &adj[q] {
            if prev[r] == usize::MAX {
                prev[r] = q;
                queue.push_back(r);
            }
        }
    }
    None
}
