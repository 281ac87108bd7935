use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::qsim::GateKind;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutCalibration {
    /// P(read 0 | prepared 1).
    pub p01: f64,
    /// P(read 1 | prepared 0).
    pub p10: f64,
    pub duration_ns: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitCalibration {
    pub t1_us: f64,
    pub t2_us: f64,
    pub freq_ghz: f64,
    pub anharm_ghz: f64,
    pub readout: ReadoutCalibration,
}

impl QubitCalibration {
    pub fn validate(&self, index: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Profile(format!("qubit {index}: {msg}")));
        if !(self.t1_us > 0.0 && self.t1_us.is_finite()) {
            return bad(format!("t1 must be positive, got {}", self.t1_us));
        }
        if !(self.t2_us > 0.0) {
            return bad(format!("t2 must be positive, got {}", self.t2_us));
        }
        if self.t2_us > 2.0 * self.t1_us {
            return bad(format!(
                "t2 = {} µs exceeds 2·t1 = {} µs",
                self.t2_us,
                2.0 * self.t1_us
            ));
        }
        for (label, p) in [("p01", self.readout.p01), ("p10", self.readout.p10)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("readout {label} = {p} is not a probability"));
            }
        }
        if !(self.readout.duration_ns >= 0.0) {
            return bad("negative readout duration".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCalibration {
    pub name: GateKind,
    pub qubits: Vec<usize>,
    pub error: f64,
    pub duration_ns: f64,
}

/// Undirected coupling graph shipped as a data file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub name: String,
    pub num_qubits: usize,
    pub edges: Vec<[usize; 2]>,
}

impl Topology {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let topo: Topology = serde_json::from_str(&text)?;
        for e in &topo.edges {
            if e[0] >= topo.num_qubits || e[1] >= topo.num_qubits || e[0] == e[1] {
                return Err(Error::Profile(format!(
                    "bad edge {e:?} in topology {}",
                    topo.name
                )));
            }
        }
        Ok(topo)
    }

    /// Induced subgraph on the first `n` qubits.
    pub fn truncated(&self, n: usize) -> Topology {
        Topology {
            name: self.name.clone(),
            num_qubits: n.min(self.num_qubits),
            edges: self
                .edges
                .iter()
                .copied()
                .filter(|e| e[0] < n && e[1] < n)
                .collect(),
        }
    }

    pub fn is_connected(&self) -> bool {
        is_connected(self.num_qubits, &self.edges)
    }
}

pub(crate) fn is_connected(n: usize, edges: &[[usize; 2]]) -> bool {
    if n == 0 {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e[0]].push(e[1]);
        adj[e[1]].push(e[0]);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(q) = queue.pop_front() {
        for &r in &adj[q] {
            if !seen[r] {
                seen[r] = true;
                queue.push_back(r);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ProfileDocument {
    name: String,
    basis_gates: Vec<GateKind>,
    coupling_map: Vec<[usize; 2]>,
    qubits: Vec<QubitCalibration>,
    gates: Vec<GateCalibration>,
}

/// Calibration snapshot of a device. Immutable once validated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileDocument", into = "ProfileDocument")]
pub struct NoiseProfile {
    name: String,
    basis_gates: Vec<GateKind>,
    coupling_map: Vec<[usize; 2]>,
    qubits: Vec<QubitCalibration>,
    gates: Vec<GateCalibration>,
    index: HashMap<(GateKind, Vec<usize>), usize>,
}

impl TryFrom<ProfileDocument> for NoiseProfile {
    type Error = Error;

    fn try_from(doc: ProfileDocument) -> Result<Self> {
        NoiseProfile::new(
            doc.name,
            doc.basis_gates,
            doc.coupling_map,
            doc.qubits,
            doc.gates,
        )
    }
}

impl From<NoiseProfile> for ProfileDocument {
    fn from(p: NoiseProfile) -> Self {
        ProfileDocument {
            name: p.name,
            basis_gates: p.basis_gates,
            coupling_map: p.coupling_map,
            qubits: p.qubits,
            gates: p.gates,
        }
    }
}

const BASIS_CX: [GateKind; 4] = [GateKind::Rz, GateKind::Sx, GateKind::X, GateKind::Cx];
const BASIS_ECR: [GateKind; 4] = [GateKind::Rz, GateKind::Sx, GateKind::X, GateKind::Ecr];

impl NoiseProfile {
    pub fn new(
        name: String,
        basis_gates: Vec<GateKind>,
        coupling_map: Vec<[usize; 2]>,
        qubits: Vec<QubitCalibration>,
        gates: Vec<GateCalibration>,
    ) -> Result<Self> {
        let basis: BTreeSet<GateKind> = basis_gates.iter().copied().collect();
        let two_qubit = if basis == BTreeSet::from(BASIS_CX) {
            GateKind::Cx
        } else if basis == BTreeSet::from(BASIS_ECR) {
            GateKind::Ecr
        } else {
            return Err(Error::Profile(format!(
                "unsupported basis {basis_gates:?}; expected {{rz,sx,x,cx}} or {{rz,sx,x,ecr}}"
            )));
        };
        let n = qubits.len();
        if n == 0 {
            return Err(Error::Profile("profile has no qubits".into()));
        }
        for (i, q) in qubits.iter().enumerate() {
            q.validate(i)?;
        }
        let mut index = HashMap::new();
        for (i, g) in gates.iter().enumerate() {
            if g.qubits.len() != g.name.arity() {
                return Err(Error::Profile(format!(
                    "gate {} lists {} qubits",
                    g.name,
                    g.qubits.len()
                )));
            }
            if let Some(&q) = g.qubits.iter().find(|&&q| q >= n) {
                return Err(Error::Profile(format!(
                    "gate {} on unknown qubit {q}",
                    g.name
                )));
            }
            if !basis.contains(&g.name) {
                return Err(Error::Profile(format!(
                    "gate {} is not in the basis",
                    g.name
                )));
            }
            if !(0.0..1.0).contains(&g.error) || !(g.duration_ns >= 0.0) {
                return Err(Error::Profile(format!(
                    "gate {} on {:?}: error {} / duration {} out of range",
                    g.name, g.qubits, g.error, g.duration_ns
                )));
            }
            if g.name == GateKind::Rz && (g.error != 0.0 || g.duration_ns != 0.0) {
                return Err(Error::Profile(
                    "rz is virtual and must have zero error and duration".into(),
                ));
            }
            index.insert((g.name, key(&g.qubits)), i);
        }
        if coupling_map.is_empty() && gates.iter().any(|g| g.name.arity() == 2) {
            return Err(Error::Profile(
                "two-qubit gates declared with an empty coupling map".into(),
            ));
        }
        for e in &coupling_map {
            if e[0] >= n || e[1] >= n || e[0] == e[1] {
                return Err(Error::Profile(format!("bad coupling edge {e:?}")));
            }
            if !index.contains_key(&(two_qubit, key(e))) {
                return Err(Error::Profile(format!(
                    "coupling edge {e:?} has no {two_qubit} calibration"
                )));
            }
        }
        for g in gates.iter().filter(|g| g.name.arity() == 2) {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            if !coupling_map.iter().any(|e| key(e) == key(&[a, b])) {
                return Err(Error::Profile(format!(
                    "two-qubit calibration on {:?} is not a coupling edge",
                    g.qubits
                )));
            }
        }
        Ok(Self {
            name,
            basis_gates,
            coupling_map,
            qubits,
            gates,
            index,
        })
    }

    pub fn load_str(document: &str) -> Result<Self> {
        let doc: ProfileDocument = serde_json::from_str(document)
            .map_err(|e| Error::Profile(format!("profile schema violation: {e}")))?;
        doc.try_into()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::load_str(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Same device with every error, duration and readout flip set to zero
    /// and coherence times made effectively infinite.
    pub fn noiseless(&self) -> Self {
        let mut p = self.clone();
        p.name = format!("{}-noiseless", self.name);
        for q in &mut p.qubits {
            q.t1_us = f64::MAX / 4.0;
            q.t2_us = f64::MAX / 4.0;
            q.readout.p01 = 0.0;
            q.readout.p10 = 0.0;
        }
        for g in &mut p.gates {
            g.error = 0.0;
            g.duration_ns = 0.0;
        }
        p
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn basis_gates(&self) -> &[GateKind] {
        &self.basis_gates
    }

    pub fn supports(&self, kind: GateKind) -> bool {
        self.basis_gates.contains(&kind)
    }

    pub fn two_qubit_gate(&self) -> GateKind {
        if self.supports(GateKind::Ecr) {
            GateKind::Ecr
        } else {
            GateKind::Cx
        }
    }

    pub fn coupling_map(&self) -> &[[usize; 2]] {
        &self.coupling_map
    }

    pub fn is_coupled(&self, a: usize, b: usize) -> bool {
        self.coupling_map.iter().any(|e| key(e) == key(&[a, b]))
    }

    pub fn qubits(&self) -> &[QubitCalibration] {
        &self.qubits
    }

    pub fn qubit(&self, q: usize) -> Result<&QubitCalibration> {
        self.qubits.get(q).ok_or(Error::QubitIndex {
            index: q,
            num_qubits: self.qubits.len(),
        })
    }

    pub fn gates(&self) -> &[GateCalibration] {
        &self.gates
    }

    /// Calibration of `kind` on `qubits`; two-qubit lookups ignore orientation.
    pub fn gate(&self, kind: GateKind, qubits: &[usize]) -> Option<&GateCalibration> {
        self.index
            .get(&(kind, key(qubits)))
            .map(|&i| &self.gates[i])
    }

    /// Error of the native two-qubit gate on an edge.
    pub fn edge_error(&self, a: usize, b: usize) -> Option<f64> {
        self.gate(self.two_qubit_gate(), &[a, b]).map(|g| g.error)
    }
}

fn key(qubits: &[usize]) -> Vec<usize> {
    let mut k = qubits.to_vec();
    if k.len() == 2 && k[0] > k[1] {
        k.swap(0, 1);
    }
    k
}
