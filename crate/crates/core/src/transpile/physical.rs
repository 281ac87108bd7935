use std::fmt;

use super::circuit::{Instruction, LogicalCircuit, Op};
use super::decompose::{decompose_to_basis, Basis};
use super::layout::choose_layout;
use super::optimize::light_optimize;
use super::route::route;
use crate::noise::{gate_noise, NoiseProfile};
use crate::qsim::{ChannelAction, GateKind, Pauli};
use crate::{Error, Result};

/// A physical gate with the noise channels that follow it.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalGate {
    pub inst: Instruction,
    pub noise: Vec<(ChannelAction, Vec<usize>)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalMeasure {
    pub site: usize,
    pub qubit: usize,
    pub bases: Vec<Pauli>,
    /// Readout confusion of the measured qubit, if any.
    pub readout: Option<ChannelAction>,
    /// Noise of the single-qubit rotation that would map X or Y onto Z.
    pub basis_change_noise: Vec<ChannelAction>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PhysicalOp {
    Gate(PhysicalGate),
    Measure(PhysicalMeasure),
}

impl PhysicalOp {
    pub fn qubits(&self) -> &[usize] {
        match self {
            PhysicalOp::Gate(g) => &g.inst.qubits,
            PhysicalOp::Measure(m) => std::slice::from_ref(&m.qubit),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranspileOptions {
    /// Merge RZ runs and drop trivial RZ rotations.
    pub optimize: bool,
    /// Skip layout search and routing; only valid when the identity layout already
    /// satisfies the coupling map.
    pub identity_layout: bool,
}

impl Default for TranspileOptions {
    fn default() -> Self {
        Self {
            optimize: true,
            identity_layout: false,
        }
    }
}

/// Basis-gate circuit on device qubits with noise attached to every gate.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalCircuit {
    profile_name: String,
    basis: Basis,
    num_physical: usize,
    layout: Vec<usize>,
    final_layout: Vec<usize>,
    swap_count: usize,
    ops: Vec<PhysicalOp>,
    coupling: Option<Vec<[usize; 2]>>,
}

impl PhysicalCircuit {
    pub fn profile_name(&self) -> &str {
        &self.profile_name
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn num_physical(&self) -> usize {
        self.num_physical
    }

    /// Initial logical→physical map.
    pub fn layout(&self) -> &[usize] {
        &self.layout
    }

    pub fn final_layout(&self) -> &[usize] {
        &self.final_layout
    }

    pub fn swap_count(&self) -> usize {
        self.swap_count
    }

    pub fn ops(&self) -> &[PhysicalOp] {
        &self.ops
    }

    pub fn gates(&self) -> impl Iterator<Item = &PhysicalGate> {
        self.ops.iter().filter_map(|op| match op {
            PhysicalOp::Gate(g) => Some(g),
            PhysicalOp::Measure(_) => None,
        })
    }

    pub fn measures(&self) -> impl Iterator<Item = &PhysicalMeasure> {
        self.ops.iter().filter_map(|op| match op {
            PhysicalOp::Measure(m) => Some(m),
            PhysicalOp::Gate(_) => None,
        })
    }

    /// Physical qubits touched by any operation, ascending.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut used = vec![false; self.num_physical];
        for op in &self.ops {
            for &q in op.qubits() {
                used[q] = true;
            }
        }
        for &q in &self.layout {
            used[q] = true;
        }
        (0..self.num_physical).filter(|&q| used[q]).collect()
    }

    pub fn is_noiseless(&self) -> bool {
        self.ops.iter().all(|op| match op {
            PhysicalOp::Gate(g) => g.noise.is_empty(),
            PhysicalOp::Measure(m) => m.readout.is_none() && m.basis_change_noise.is_empty(),
        })
    }

    /// Checks basis closure and coupling adjacency.
    pub fn validate(&self) -> Result<()> {
        for g in self.gates() {
            if !self.basis.contains(g.inst.kind) {
                return Err(Error::Transpile(format!(
                    "{} is outside the basis",
                    g.inst.kind
                )));
            }
            if let (Some(edges), [a, b]) = (&self.coupling, &g.inst.qubits[..]) {
                if !edges
                    .iter()
                    .any(|e| (e[0] == *a && e[1] == *b) || (e[0] == *b && e[1] == *a))
                {
                    return Err(Error::Transpile(format!(
                        "{} on uncoupled pair ({a}, {b})",
                        g.inst.kind
                    )));
                }
            }
        }
        Ok(())
    }

    /// Drops every attached channel and readout confusion.
    pub fn without_noise(&self) -> PhysicalCircuit {
        let mut out = self.clone();
        for op in &mut out.ops {
            match op {
                PhysicalOp::Gate(g) => g.noise.clear(),
                PhysicalOp::Measure(m) => {
                    m.readout = None;
                    m.basis_change_noise.clear();
                }
            }
        }
        out
    }
}

impl fmt::Display for PhysicalCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# profile: {}", self.profile_name)?;
        writeln!(f, "# basis: {:?}", self.basis.gates().map(|g| g.name()))?;
        writeln!(f, "# layout: {:?}", self.layout)?;
        writeln!(f, "# final layout: {:?}", self.final_layout)?;
        writeln!(f, "# swaps: {}", self.swap_count)?;
        for op in &self.ops {
            match op {
                PhysicalOp::Gate(g) => {
                    write!(f, "{}", g.inst.kind)?;
                    if let Some(a) = g.inst.angle() {
                        write!(f, "({a})")?;
                    }
                    write!(f, " {:?}", g.inst.qubits)?;
                    for (ch, q) in &g.noise {
                        write!(f, " | {} {:?}", describe(ch), q)?;
                    }
                    writeln!(f)?;
                }
                PhysicalOp::Measure(m) => {
                    write!(f, "measure[{}] {:?} q{}", m.site, m.bases, m.qubit)?;
                    if let Some(r) = &m.readout {
                        write!(f, " | {}", describe(r))?;
                    }
                    writeln!(f)?;
                }
            }
        }
        Ok(())
    }
}

fn describe(ch: &ChannelAction) -> String {
    match ch {
        ChannelAction::Affine1q { p_reset, dephase } => {
            format!("thermal(p_reset={p_reset:.3e}, dephase={dephase:.6})")
        }
        ChannelAction::Depolarizing { p, arity } => format!("depolarizing{arity}(p={p:.3e})"),
        ChannelAction::Confusion { matrix } => {
            format!("readout(p01={:.4}, p10={:.4})", matrix[1][0], matrix[0][1])
        }
        ChannelAction::Kraus { ops } => format!("kraus({} ops)", ops.len()),
    }
}

/// Lowers a logical circuit onto a device: basis decomposition, layout,
/// routing, light optimization and gate-attached noise.
pub fn transpile(circuit: &LogicalCircuit, profile: &NoiseProfile) -> Result<PhysicalCircuit> {
    transpile_with(circuit, profile, TranspileOptions::default())
}

pub fn transpile_with(
    circuit: &LogicalCircuit,
    profile: &NoiseProfile,
    options: TranspileOptions,
) -> Result<PhysicalCircuit> {
    let basis = Basis::from_gates(profile.basis_gates())?;
    let lowered = decompose_to_basis(circuit, basis)?;
    let (placed, layout, final_layout, swap_count) = if options.identity_layout {
        let layout: Vec<usize> = (0..circuit.num_qubits()).collect();
        if circuit.num_qubits() > profile.num_qubits() {
            return Err(Error::Transpile("circuit larger than device".into()));
        }
        let mut widened = LogicalCircuit::new(profile.num_qubits());
        widened.extend(&lowered)?;
        (widened, layout.clone(), layout, 0)
    } else {
        let layout = choose_layout(circuit.num_qubits(), profile)?;
        let routed = route(&lowered, &layout, profile, basis)?;
        (
            routed.circuit,
            routed.initial_layout,
            routed.final_layout,
            routed.swap_count,
        )
    };
    let placed = if options.optimize {
        light_optimize(&placed)?
    } else {
        placed
    };
    let mut ops = Vec::with_capacity(placed.ops().len());
    for op in placed.ops() {
        ops.push(match op {
            Op::Gate(g) => PhysicalOp::Gate(PhysicalGate {
                noise: gate_noise(profile, g.kind, &g.qubits)?,
                inst: g.clone(),
            }),
            Op::Measure(m) => {
                let qc = profile.qubit(m.qubit)?;
                let (p01, p10) = (qc.readout.p01, qc.readout.p10);
                let readout = if p01 == 0.0 && p10 == 0.0 {
                    None
                } else {
                    Some(ChannelAction::readout(p01, p10)?)
                };
                let basis_change_noise = gate_noise(profile, GateKind::Sx, &[m.qubit])
                    .unwrap_or_default()
                    .into_iter()
                    .map(|(ch, _)| ch)
                    .collect();
                PhysicalOp::Measure(PhysicalMeasure {
                    site: m.site,
                    qubit: m.qubit,
                    bases: m.bases.clone(),
                    readout,
                    basis_change_noise,
                })
            }
        });
    }
    let out = PhysicalCircuit {
        profile_name: profile.name().to_string(),
        basis,
        num_physical: profile.num_qubits(),
        layout,
        final_layout,
        swap_count,
        ops,
        coupling: (!options.identity_layout).then(|| profile.coupling_map().to_vec()),
    };
    out.validate()?;
    Ok(out)
}

/// Noise-free lowering to {rz, sx, x, cx} on an all-to-all device with the
/// identity layout.
pub fn ideal(circuit: &LogicalCircuit) -> Result<PhysicalCircuit> {
    let lowered = light_optimize(&decompose_to_basis(circuit, Basis::Cx)?)?;
    let layout: Vec<usize> = (0..circuit.num_qubits()).collect();
    let ops = lowered
        .ops()
        .iter()
        .map(|op| match op {
            Op::Gate(g) => PhysicalOp::Gate(PhysicalGate {
                inst: g.clone(),
                noise: Vec::new(),
            }),
            Op::Measure(m) => PhysicalOp::Measure(PhysicalMeasure {
                site: m.site,
                qubit: m.qubit,
                bases: m.bases.clone(),
                readout: None,
                basis_change_noise: Vec::new(),
            }),
        })
        .collect();
    Ok(PhysicalCircuit {
        profile_name: "ideal".into(),
        basis: Basis::Cx,
        num_physical: circuit.num_qubits(),
        final_layout: layout.clone(),
        layout,
        swap_count: 0,
        ops,
        coupling: None,
    })
}
