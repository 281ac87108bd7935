//! Calibration records, synthetic device profiles and gate-attached noise.

mod calibration;
mod channels;
mod synth;

pub use calibration::{
    GateCalibration, NoiseProfile, QubitCalibration, ReadoutCalibration, Topology,
};
pub use channels::{
    apply_confusion, depolarizing_action, gate_noise, gate_noise_parameters, process_fidelity,
    readout_confusion, thermal_relaxation_action, GateNoiseParameters,
};
pub use synth::{synth_profile, MetricStat, ProfileStats};
