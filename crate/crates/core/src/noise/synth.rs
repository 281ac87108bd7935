use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::calibration::{
    is_connected, GateCalibration, NoiseProfile, QubitCalibration, ReadoutCalibration, Topology,
};
use crate::qsim::GateKind;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricStat {
    pub mean: f64,
    pub std: f64,
}

/// Aggregate calibration statistics of a backend, one (mean, std) per metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileStats {
    pub name: String,
    pub basis_gates: Vec<GateKind>,
    pub metrics: BTreeMap<String, MetricStat>,
}

const REQUIRED: [&str; 12] = [
    "t1_us",
    "t2_us",
    "freq_ghz",
    "anharm_ghz",
    "readout_p01",
    "readout_p10",
    "readout_duration_ns",
    "sq_gate_ns",
    "sx_error",
    "x_error",
    "two_qubit_error",
    "two_qubit_gate_ns",
];

impl ProfileStats {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let stats: ProfileStats = serde_json::from_str(&text)?;
        stats.validate()?;
        Ok(stats)
    }

    pub fn validate(&self) -> Result<()> {
        for key in REQUIRED {
            self.metric(key)?;
        }
        if let Some((k, _)) = self.metrics.iter().find(|(_, m)| !(m.std >= 0.0)) {
            return Err(Error::Profile(format!("metric {k} has a negative std")));
        }
        Ok(())
    }

    pub fn metric(&self, key: &str) -> Result<MetricStat> {
        self.metrics
            .get(key)
            .copied()
            .ok_or_else(|| Error::Profile(format!("stats '{}' lack metric {key}", self.name)))
    }
}

struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    fn draw(&mut self, m: MetricStat) -> f64 {
        if m.std == 0.0 {
            return m.mean;
        }
        Normal::new(m.mean, m.std)
            .expect("validated std")
            .sample(&mut self.rng)
    }
}

/// Draws a device profile whose per-qubit and per-gate values are independent
/// normals around the given statistics, projected back onto valid ranges.
pub fn synth_profile(
    stats: &ProfileStats,
    n_qubits: usize,
    topology: &[[usize; 2]],
    seed: u64,
) -> Result<NoiseProfile> {
    stats.validate()?;
    if n_qubits == 0 {
        return Err(Error::Profile(
            "cannot synthesize a zero-qubit profile".into(),
        ));
    }
    if let Some(e) = topology
        .iter()
        .find(|e| e[0] >= n_qubits || e[1] >= n_qubits)
    {
        return Err(Error::Profile(format!(
            "edge {e:?} outside {n_qubits} qubits"
        )));
    }
    if !is_connected(n_qubits, topology) {
        return Err(Error::Profile("topology is not connected".into()));
    }
    let two_qubit = if stats.basis_gates.contains(&GateKind::Ecr) {
        GateKind::Ecr
    } else {
        GateKind::Cx
    };
    let m = |k: &str| stats.metric(k).expect("validated");
    let mut s = Sampler {
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let prob = |v: f64| v.clamp(0.0, 1.0);
    let err = |v: f64| v.clamp(0.0, 0.999_999);
    let dur = |v: f64| v.max(0.0);

    let mut qubits = Vec::with_capacity(n_qubits);
    for _ in 0..n_qubits {
        let t1 = s.draw(m("t1_us")).max(1e-3);
        let t2 = s.draw(m("t2_us")).clamp(1e-3, 2.0 * t1);
        qubits.push(QubitCalibration {
            t1_us: t1,
            t2_us: t2,
            freq_ghz: s.draw(m("freq_ghz")),
            anharm_ghz: s.draw(m("anharm_ghz")),
            readout: ReadoutCalibration {
                p01: prob(s.draw(m("readout_p01"))),
                p10: prob(s.draw(m("readout_p10"))),
                duration_ns: dur(s.draw(m("readout_duration_ns"))),
            },
        });
    }
    let mut gates = Vec::new();
    for q in 0..n_qubits {
        gates.push(GateCalibration {
            name: GateKind::Rz,
            qubits: vec![q],
            error: 0.0,
            duration_ns: 0.0,
        });
        let sq = dur(s.draw(m("sq_gate_ns")));
        for (kind, key) in [(GateKind::Sx, "sx_error"), (GateKind::X, "x_error")] {
            gates.push(GateCalibration {
                name: kind,
                qubits: vec![q],
                error: err(s.draw(m(key))),
                duration_ns: sq,
            });
        }
    }
    for e in topology {
        gates.push(GateCalibration {
            name: two_qubit,
            qubits: e.to_vec(),
            error: err(s.draw(m("two_qubit_error"))),
            duration_ns: dur(s.draw(m("two_qubit_gate_ns"))),
        });
    }
    NoiseProfile::new(
        format!("{}-seed{seed}", stats.name),
        vec![GateKind::Rz, GateKind::Sx, GateKind::X, two_qubit],
        topology.to_vec(),
        qubits,
        gates,
    )
}

impl Topology {
    /// Synthesizes a profile on this topology.
    pub fn synth(&self, stats: &ProfileStats, seed: u64) -> Result<NoiseProfile> {
        synth_profile(stats, self.num_qubits, &self.edges, seed)
    }
}
