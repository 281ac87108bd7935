use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::angle::{Angle, Symbol};
use crate::qsim::{GateKind, Operator, Pauli};
use crate::{Error, Result};

/// A gate with (possibly symbolic) angles on concrete qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Instruction {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<Angle>,
}

impl Instruction {
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Vec<Angle>) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::Arity {
                expected: kind.arity(),
                got: qubits.len(),
            });
        }
        if params.len() != kind.num_params() {
            return Err(Error::Domain(format!(
                "{kind} takes {} angles, got {}",
                kind.num_params(),
                params.len()
            )));
        }
        Ok(Self {
            kind,
            qubits,
            params,
        })
    }

    pub fn fixed(kind: GateKind, qubits: &[usize]) -> Self {
        Self::new(kind, qubits.to_vec(), vec![]).expect("fixed gate")
    }

    pub fn rotation(kind: GateKind, qubits: &[usize], angle: Angle) -> Self {
        Self::new(kind, qubits.to_vec(), vec![angle]).expect("rotation gate")
    }

    pub fn angle(&self) -> Option<&Angle> {
        self.params.first()
    }

    pub fn matrix(&self, params: &[f64], features: &[f64]) -> Result<Operator> {
        let theta = match self.angle() {
            Some(a) => a.eval(params, features)?,
            None => 0.0,
        };
        Ok(self.kind.matrix(theta))
    }
}

/// A readout point: expectation values of `bases` on `qubit` at this position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSite {
    /// Index into the feature-site ordering.
    pub site: usize,
    pub qubit: usize,
    pub bases: Vec<Pauli>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Gate(Instruction),
    Measure(MeasureSite),
}

impl Op {
    pub fn qubits(&self) -> &[usize] {
        match self {
            Op::Gate(g) => &g.qubits,
            Op::Measure(m) => std::slice::from_ref(&m.qubit),
        }
    }
}

/// Ordered gates and readout points over logical qubits.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LogicalCircuit {
    num_qubits: usize,
    ops: Vec<Op>,
}

impl LogicalCircuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            ops: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn push(&mut self, op: Op) -> Result<()> {
        for &q in op.qubits() {
            if q >= self.num_qubits {
                return Err(Error::QubitIndex {
                    index: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if let Op::Gate(g) = &op {
            if g.qubits.len() == 2 && g.qubits[0] == g.qubits[1] {
                return Err(Error::Domain(format!("{} on repeated qubit", g.kind)));
            }
        }
        self.ops.push(op);
        Ok(())
    }

    pub fn gate(&mut self, inst: Instruction) -> Result<()> {
        self.push(Op::Gate(inst))
    }

    pub fn measure(&mut self, site: usize, qubit: usize, bases: Vec<Pauli>) -> Result<()> {
        self.push(Op::Measure(MeasureSite { site, qubit, bases }))
    }

    pub fn extend(&mut self, other: &LogicalCircuit) -> Result<()> {
        for op in &other.ops {
            self.push(op.clone())?;
        }
        Ok(())
    }

    pub fn gates(&self) -> impl Iterator<Item = &Instruction> {
        self.ops.iter().filter_map(|op| match op {
            Op::Gate(g) => Some(g),
            Op::Measure(_) => None,
        })
    }

    pub fn sites(&self) -> impl Iterator<Item = &MeasureSite> {
        self.ops.iter().filter_map(|op| match op {
            Op::Measure(m) => Some(m),
            Op::Gate(_) => None,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.sites().count()
    }

    /// Largest parameter and feature index referenced, plus one.
    pub fn symbol_extent(&self) -> (usize, usize) {
        let (mut p, mut x) = (0, 0);
        for s in self
            .gates()
            .flat_map(|g| g.params.iter())
            .flat_map(|a| a.symbols())
        {
            match s {
                Symbol::Param(k) => p = p.max(k + 1),
                Symbol::Feature(i) => x = x.max(i + 1),
            }
        }
        (p, x)
    }

    /// Substitutes every symbol.
    pub fn bind(&self, params: &[f64], features: &[f64]) -> Result<LogicalCircuit> {
        let mut out = LogicalCircuit::new(self.num_qubits);
        for op in &self.ops {
            out.ops.push(match op {
                Op::Gate(g) => Op::Gate(Instruction {
                    kind: g.kind,
                    qubits: g.qubits.clone(),
                    params: g
                        .params
                        .iter()
                        .map(|a| a.bind(params, features))
                        .collect::<Result<_>>()?,
                }),
                Op::Measure(m) => Op::Measure(m.clone()),
            });
        }
        Ok(out)
    }

    /// Same gates with every readout moved to the end, in original order.
    pub fn with_deferred_measurements(&self) -> LogicalCircuit {
        let mut out = LogicalCircuit::new(self.num_qubits);
        out.ops.extend(
            self.ops
                .iter()
                .filter(|o| matches!(o, Op::Gate(_)))
                .cloned(),
        );
        out.ops.extend(
            self.ops
                .iter()
                .filter(|o| matches!(o, Op::Measure(_)))
                .cloned(),
        );
        out
    }

    /// Dense unitary of the gate sequence (readouts ignored).
    pub fn unitary(&self, params: &[f64], features: &[f64]) -> Result<Operator> {
        if self.num_qubits > 10 {
            return Err(Error::Capacity(
                "unitary reconstruction above 10 qubits".into(),
            ));
        }
        let mut u = Operator::identity(1 << self.num_qubits);
        for g in self.gates() {
            let m = g
                .matrix(params, features)?
                .embed(&g.qubits, self.num_qubits);
            u = m.matmul(&u);
        }
        Ok(u)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CircuitDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<LogicalCircuit> {
        let doc: CircuitDocument = serde_json::from_str(text)?;
        doc.try_into()
    }

    pub fn load(path: &Path) -> Result<LogicalCircuit> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

impl fmt::Display for LogicalCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.ops {
            match op {
                Op::Gate(g) => {
                    write!(f, "{}", g.kind)?;
                    if let Some(a) = g.angle() {
                        write!(f, "({a})")?;
                    }
                    writeln!(f, " {:?}", g.qubits)?;
                }
                Op::Measure(m) => writeln!(f, "measure[{}] {:?} q{}", m.site, m.bases, m.qubit)?,
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct InstructionDocument {
    name: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    params: Vec<Angle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bases: Option<Vec<Pauli>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    site: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct CircuitDocument {
    num_qubits: usize,
    instructions: Vec<InstructionDocument>,
}

impl From<&LogicalCircuit> for CircuitDocument {
    fn from(c: &LogicalCircuit) -> Self {
        let instructions = c
            .ops
            .iter()
            .map(|op| match op {
                Op::Gate(g) => InstructionDocument {
                    name: g.kind.name().to_string(),
                    qubits: g.qubits.clone(),
                    params: g.params.clone(),
                    bases: None,
                    site: None,
                },
                Op::Measure(m) => InstructionDocument {
                    name: "measure".into(),
                    qubits: vec![m.qubit],
                    params: vec![],
                    bases: Some(m.bases.clone()),
                    site: Some(m.site),
                },
            })
            .collect();
        CircuitDocument {
            num_qubits: c.num_qubits,
            instructions,
        }
    }
}

impl TryFrom<CircuitDocument> for LogicalCircuit {
    type Error = Error;

    fn try_from(doc: CircuitDocument) -> Result<Self> {
        let mut c = LogicalCircuit::new(doc.num_qubits);
        let mut next_site = 0;
        for inst in doc.instructions {
            if inst.name == "measure" {
                let [qubit] = inst.qubits[..] else {
                    return Err(Error::Arity {
                        expected: 1,
                        got: inst.qubits.len(),
                    });
                };
                let site = inst.site.unwrap_or(next_site);
                next_site = site + 1;
                c.measure(site, qubit, inst.bases.unwrap_or_else(|| vec![Pauli::Z]))?;
            } else {
                let kind: GateKind = inst.name.parse()?;
                c.gate(Instruction::new(kind, inst.qubits, inst.params)?)?;
            }
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut c = LogicalCircuit::new(3);
        c.gate(Instruction::rotation(GateKind::Ry, &[0], Angle::feature(0)))
            .unwrap();
        c.gate(Instruction::rotation(
            GateKind::Crz,
            &[0, 2],
            Angle::param(3).scaled(-0.5),
        ))
        .unwrap();
        c.gate(Instruction::fixed(GateKind::Cx, &[2, 1])).unwrap();
        c.measure(0, 0, vec![Pauli::X, Pauli::Y, Pauli::Z]).unwrap();
        c.gate(Instruction::rotation(
            GateKind::Rz,
            &[1],
            Angle::constant(0.25),
        ))
        .unwrap();
        c.measure(1, 1, vec![Pauli::Z]).unwrap();
        let text = c.to_json().unwrap();
        assert!(text.contains("\"x0\""));
        assert_eq!(LogicalCircuit::from_json(&text).unwrap(), c);
        assert_eq!(c.symbol_extent(), (4, 1));
        assert_eq!(c.num_sites(), 2);
    }

    #[test]
    fn rejects_bad_instructions() {
        let mut c = LogicalCircuit::new(2);
        assert!(c.gate(Instruction::fixed(GateKind::Cx, &[0, 2])).is_err());
        assert!(c.gate(Instruction::fixed(GateKind::Cx, &[1, 1])).is_err());
        assert!(Instruction::new(GateKind::Ry, vec![0], vec![]).is_err());
        let bad = r#"{"num_qubits": 1, "instructions": [{"name": "u3", "qubits": [0]}]}"#;
        assert!(LogicalCircuit::from_json(bad).is_err());
    }

    #[test]
    fn deferring_measurements_keeps_gate_order() {
        let mut c = LogicalCircuit::new(2);
        c.gate(Instruction::fixed(GateKind::H, &[0])).unwrap();
        c.measure(0, 0, vec![Pauli::Z]).unwrap();
        c.gate(Instruction::fixed(GateKind::X, &[1])).unwrap();
        let d = c.with_deferred_measurements();
        assert!(matches!(d.ops()[2], Op::Measure(_)));
        assert_eq!(d.gates().count(), 2);
    }
}
