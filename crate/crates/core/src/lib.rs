//! Noise-adaptive hybrid quantum convolutional networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`qsim`]: exact density-matrix simulation (gates, channels, Pauli
//!   expectations, shot-noise emulation).
//! * [`noise`]: device calibration records, profile synthesis from published
//!   statistics, and per-gate noise channels.
//! * [`transpile`]: basis decomposition, error-aware layout, SWAP routing and
//!   light optimization onto a device coupling map.
//! * [`ansatz`]: the QCNN / HQCNN circuit family and depth-stratified
//!   measurement plans, plus the execution engine that extracts features.
//! * [`model`]: classical head, parameter-shift gradients, ADAM, training.
//! * [`data`]: MNIST ingestion, PCA, balanced splits, synthetic regression.
//! * [`attribution`]: exact Shapley values over the classical head.
//! * [`experiment`]: multi-trial orchestration, metrics and reports.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod attribution;
pub mod data;
mod error;
pub mod experiment;
pub mod model;
pub mod noise;
pub mod qsim;
pub mod transpile;

pub use error::{Error, Result};
pub use model::{ClassicalHead, HybridModel, Task};

pub use ansatz::{HqcnnSpec, MeasurementPlan, ParameterTable, Variant};
pub use noise::{NoiseProfile, ProfileStats};
pub use qsim::{ChannelAction, DensityMatrix, GateKind, GateUnitary, Pauli};
pub use transpile::{LogicalCircuit, PhysicalCircuit};
