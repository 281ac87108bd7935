//! Fixtures shared by the simulation benchmarks.

use std::f64::consts::PI;
use std::path::PathBuf;

use hqcnn_core::model::ExecConfig;
use hqcnn_core::noise::Topology;
use hqcnn_core::{HybridModel, NoiseProfile, ProfileStats, Task, Variant};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Guadalupe-like profile synthesized from the shipped statistics.
pub fn guadalupe(seed: u64) -> NoiseProfile {
    let dir = data_dir();
    let stats = ProfileStats::load(&dir.join("stats/guadalupe_like.json")).expect("shipped stats");
    let topo = Topology::load(&dir.join("topology/guadalupe_like.json")).expect("shipped topology");
    topo.synth(&stats, seed).expect("valid profile")
}

/// Classification model on the noisy device with the default 256 shots.
pub fn noisy_model(n: usize, variant: Variant) -> HybridModel {
    let exec = ExecConfig::device(guadalupe(0), Some(256));
    HybridModel::new(n, variant, Task::Classification, exec, 7).expect("model")
}

/// Classification model in exact noiseless mode.
pub fn ideal_model(n: usize, variant: Variant) -> HybridModel {
    HybridModel::new(n, variant, Task::Classification, ExecConfig::ideal(), 7).expect("model")
}

/// A fixed input spread over [0, pi].
pub fn sample(n: usize) -> Vec<f64> {
    (0..n).map(|i| PI * (i as f64 + 0.5) / n as f64).collect()
}
