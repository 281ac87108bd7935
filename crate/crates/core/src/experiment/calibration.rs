use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::metrics::mean_std;
use crate::noise::{MetricStat, NoiseProfile};
use crate::qsim::GateKind;
use crate::transpile::PhysicalCircuit;
use crate::{Error, Result};

/// Metric names, matching the keys of the device statistics files.
pub const CALIBRATION_METRICS: [&str; 13] = [
    "t1_us",
    "t2_us",
    "freq_ghz",
    "anharm_ghz",
    "readout_p01",
    "readout_p10",
    "readout_duration_ns",
    "sq_gate_ns",
    "rz_error",
    "sx_error",
    "x_error",
    "two_qubit_error",
    "two_qubit_gate_ns",
];

/// Raw per-qubit and per-edge calibration values of `qubits` and `edges`.
pub fn calibration_values(
    profile: &NoiseProfile,
    qubits: &[usize],
    edges: &[[usize; 2]],
) -> Result<BTreeMap<String, Vec<f64>>> {
    let mut v: BTreeMap<String, Vec<f64>> = CALIBRATION_METRICS
        .iter()
        .map(|k| (k.to_string(), Vec::new()))
        .collect();
    let mut push = |k: &str, x: f64| v.get_mut(k).expect("known metric").push(x);
    for &q in qubits {
        let c = profile.qubit(q)?;
        push("t1_us", c.t1_us);
        push("t2_us", c.t2_us);
        push("freq_ghz", c.freq_ghz);
        push("anharm_ghz", c.anharm_ghz);
        push("readout_p01", c.readout.p01);
        push("readout_p10", c.readout.p10);
        push("readout_duration_ns", c.readout.duration_ns);
        for (kind, key) in [
            (GateKind::Rz, "rz_error"),
            (GateKind::Sx, "sx_error"),
            (GateKind::X, "x_error"),
        ] {
            if let Some(g) = profile.gate(kind, &[q]) {
                push(key, g.error);
                if kind == GateKind::Sx {
                    push("sq_gate_ns", g.duration_ns);
                }
            }
        }
    }
    for e in edges {
        let g = profile
            .gate(profile.two_qubit_gate(), e)
            .ok_or_else(|| Error::Profile(format!("no two-qubit calibration on {e:?}")))?;
        push("two_qubit_error", g.error);
        push("two_qubit_gate_ns", g.duration_ns);
    }
    Ok(v)
}

/// Calibration of the physical qubits and couplers a transpiled circuit uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSnapshot {
    pub profile: String,
    pub qubits: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
    pub values: BTreeMap<String, Vec<f64>>,
}

impl CalibrationSnapshot {
    pub fn from_circuit(circuit: &PhysicalCircuit, profile: &NoiseProfile) -> Result<Self> {
        let qubits = circuit.active_qubits();
        let edges: BTreeSet<[usize; 2]> = circuit
            .gates()
            .filter(|g| g.inst.qubits.len() == 2)
            .map(|g| {
                let (a, b) = (g.inst.qubits[0], g.inst.qubits[1]);
                [a.min(b), a.max(b)]
            })
            .collect();
        let edges: Vec<[usize; 2]> = edges.into_iter().collect();
        Ok(Self {
            profile: profile.name().to_string(),
            values: calibration_values(profile, &qubits, &edges)?,
            qubits,
            edges,
        })
    }

    pub fn stats(&self) -> BTreeMap<String, MetricStat> {
        pooled_stats(std::slice::from_ref(self))
    }
}

/// Mean and population std of every metric, pooling the values of all snapshots.
pub fn pooled_stats(snapshots: &[CalibrationSnapshot]) -> BTreeMap<String, MetricStat> {
    CALIBRATION_METRICS
        .iter()
        .filter_map(|&k| {
            let all: Vec<f64> = snapshots
                .iter()
                .flat_map(|s| s.values.get(k).into_iter().flatten().copied())
                .collect();
            (!all.is_empty()).then(|| {
                let (mean, std) = mean_std(&all);
                (k.to_string(), MetricStat { mean, std })
            })
        })
        .collect()
}
