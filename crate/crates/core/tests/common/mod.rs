#![allow(dead_code)]

use std::path::PathBuf;

use hqcnn_core::noise::{synth_profile, NoiseProfile, ProfileStats, Topology};
use hqcnn_core::qsim::{DensityMatrix, Operator, C64};
use hqcnn_core::transpile::{LogicalCircuit, PhysicalCircuit};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn guadalupe_stats() -> ProfileStats {
    ProfileStats::load(&data_dir().join("stats/guadalupe_like.json")).unwrap()
}

pub fn yonsei_stats() -> ProfileStats {
    ProfileStats::load(&data_dir().join("stats/yonsei_like.json")).unwrap()
}

pub fn guadalupe_topology() -> Topology {
    Topology::load(&data_dir().join("topology/guadalupe_like.json")).unwrap()
}

pub fn guadalupe_profile(seed: u64) -> NoiseProfile {
    guadalupe_topology()
        .synth(&guadalupe_stats(), seed)
        .unwrap()
}

/// Five qubits in a T: routing is needed for most interactions.
pub const T_EDGES: [[usize; 2]; 4] = [[0, 1], [1, 2], [1, 3], [3, 4]];

/// Small device on `T_EDGES`, CX basis from the guadalupe statistics or ECR from yonsei.
pub fn t_device(ecr: bool, seed: u64) -> NoiseProfile {
    let stats = if ecr {
        yonsei_stats()
    } else {
        guadalupe_stats()
    };
    synth_profile(&stats, 5, &T_EDGES, seed).unwrap()
}

/// Dense gate-by-gate simulation with every attached channel.
pub fn simulate(p: &PhysicalCircuit) -> DensityMatrix {
    let mut rho = DensityMatrix::new_zero_state(p.num_physical()).unwrap();
    for g in p.gates() {
        rho.apply_unitary(&g.inst.matrix(&[], &[]).unwrap(), &g.inst.qubits)
            .unwrap();
        for (ch, qs) in &g.noise {
            rho.apply_channel(ch, qs).unwrap();
        }
    }
    rho
}

pub fn physical_unitary(p: &PhysicalCircuit) -> Operator {
    let n = p.num_physical();
    let mut u = Operator::identity(1 << n);
    for g in p.gates() {
        u = g
            .inst
            .matrix(&[], &[])
            .unwrap()
            .embed(&g.inst.qubits, n)
            .matmul(&u);
    }
    u
}

/// Computational-basis index of a logical bitstring placed on physical qubits.
fn place(bits: usize, n_log: usize, layout: &[usize], n_phys: usize) -> usize {
    (0..n_log)
        .filter(|i| (bits >> (n_log - 1 - i)) & 1 == 1)
        .map(|i| 1 << (n_phys - 1 - layout[i]))
        .sum()
}

/// |Tr(U† W)| / d on the subspace where the unused device qubits start in |0⟩.
pub fn routed_fidelity(logical: &LogicalCircuit, p: &PhysicalCircuit) -> f64 {
    let n = logical.num_qubits();
    let u = logical.unitary(&[], &[]).unwrap();
    let w = physical_unitary(p);
    let mut overlap = C64::new(0.0, 0.0);
    for k in 0..1 << n {
        let col = place(k, n, p.layout(), p.num_physical());
        for j in 0..1 << n {
            let row = place(j, n, p.final_layout(), p.num_physical());
            overlap += u.get(j, k).conj() * w.get(row, col);
        }
    }
    overlap.norm() / f64::from(1u32 << n)
}
