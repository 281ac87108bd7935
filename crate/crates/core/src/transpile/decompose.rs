use std::f64::consts::{FRAC_PI_2, PI};

use super::angle::Angle;
use super::circuit::{Instruction, LogicalCircuit, Op};
use crate::qsim::GateKind;
use crate::{Error, Result};

/// The two supported native gate sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// {rz, sx, x, cx}
    Cx,
    /// {rz, sx, x, ecr}
    Ecr,
}

impl Basis {
    pub fn from_gates(gates: &[GateKind]) -> Result<Basis> {
        let mut g = gates.to_vec();
        g.sort();
        g.dedup();
        let mut cx = vec![GateKind::Rz, GateKind::Sx, GateKind::X, GateKind::Cx];
        let mut ecr = vec![GateKind::Rz, GateKind::Sx, GateKind::X, GateKind::Ecr];
        cx.sort();
        ecr.sort();
        if g == cx {
            Ok(Basis::Cx)
        } else if g == ecr {
            Ok(Basis::Ecr)
        } else {
            Err(Error::Transpile(format!("unsupported basis {gates:?}")))
        }
    }

    pub fn gates(self) -> [GateKind; 4] {
        match self {
            Basis::Cx => [GateKind::Rz, GateKind::Sx, GateKind::X, GateKind::Cx],
            Basis::Ecr => [GateKind::Rz, GateKind::Sx, GateKind::X, GateKind::Ecr],
        }
    }

    pub fn contains(self, kind: GateKind) -> bool {
        self.gates().contains(&kind)
    }

    pub fn two_qubit(self) -> GateKind {
        match self {
            Basis::Cx => GateKind::Cx,
            Basis::Ecr => GateKind::Ecr,
        }
    }
}

fn rz(q: usize, a: Angle) -> Instruction {
    Instruction::rotation(GateKind::Rz, &[q], a)
}

fn fixed(kind: GateKind, qubits: &[usize]) -> Instruction {
    Instruction::fixed(kind, qubits)
}

/// One rewriting step towards the basis; gates already native come back unchanged.
fn expand(inst: &Instruction, basis: Basis) -> Vec<Instruction> {
    let q = &inst.qubits;
    let theta = || inst.angle().cloned().unwrap_or_default();
    match inst.kind {
        GateKind::Rz | GateKind::Sx | GateKind::X => vec![inst.clone()],
        // up to global phase
        GateKind::Ry => vec![
            fixed(GateKind::Sx, q),
            rz(q[0], theta().offset_by(PI)),
            fixed(GateKind::Sx, q),
            rz(q[0], Angle::constant(PI)),
        ],
        GateKind::H => vec![
            rz(q[0], Angle::constant(FRAC_PI_2)),
            fixed(GateKind::Sx, q),
            rz(q[0], Angle::constant(FRAC_PI_2)),
        ],
        GateKind::Rx => vec![
            fixed(GateKind::H, q),
            rz(q[0], theta()),
            fixed(GateKind::H, q),
        ],
        GateKind::Crz => {
            let (c, t) = (q[0], q[1]);
            vec![
                fixed(GateKind::Cx, &[c, t]),
                rz(t, theta().scaled(-0.5)),
                fixed(GateKind::Cx, &[c, t]),
                rz(t, theta().scaled(0.5)),
            ]
        }
        GateKind::Crx => {
            let t = q[1];
            vec![
                fixed(GateKind::H, &[t]),
                Instruction::rotation(GateKind::Crz, q, theta()),
                fixed(GateKind::H, &[t]),
            ]
        }
        GateKind::Swap => {
            let (a, b) = (q[0], q[1]);
            vec![
                fixed(GateKind::Cx, &[a, b]),
                fixed(GateKind::Cx, &[b, a]),
                fixed(GateKind::Cx, &[a, b]),
            ]
        }
        GateKind::Cx if basis == Basis::Cx => vec![inst.clone()],
        GateKind::Cx => {
            let (c, t) = (q[0], q[1]);
            vec![
                fixed(GateKind::X, &[t]),
                fixed(GateKind::Ecr, &[c, t]),
                rz(c, Angle::constant(FRAC_PI_2)),
                fixed(GateKind::X, &[c]),
                fixed(GateKind::Sx, &[t]),
            ]
        }
        GateKind::Ecr if basis == Basis::Ecr => vec![inst.clone()],
        GateKind::Ecr => {
            // inverse of the CX rule above
            let (c, t) = (q[0], q[1]);
            vec![
                fixed(GateKind::X, &[t]),
                fixed(GateKind::Cx, &[c, t]),
                fixed(GateKind::Sx, &[t]),
                fixed(GateKind::X, &[t]),
                fixed(GateKind::X, &[c]),
                rz(c, Angle::constant(-FRAC_PI_2)),
            ]
        }
    }
}

/// Fully lowers one instruction to basis gates.
pub fn decompose_instruction(inst: &Instruction, basis: Basis) -> Vec<Instruction> {
    let mut out = Vec::new();
    let mut stack = vec![inst.clone()];
    while let Some(next) = stack.pop() {
        let step = expand(&next, basis);
        if step.len() == 1 && step[0] == next {
            out.push(next);
        } else {
            stack.extend(step.into_iter().rev());
        }
    }
    out
}

/// Rewrites every gate into `basis`, keeping readout positions.
pub fn decompose_to_basis(circuit: &LogicalCircuit, basis: Basis) -> Result<LogicalCircuit> {
    let mut out = LogicalCircuit::new(circuit.num_qubits());
    for op in circuit.ops() {
        match op {
            Op::Gate(g) => {
                for inst in decompose_instruction(g, basis) {
                    debug_assert!(basis.contains(inst.kind));
                    out.gate(inst)?;
                }
            }
            Op::Measure(_) => out.push(op.clone())?,
        }
    }
    Ok(out)
}
