//! Lowering of logical circuits onto calibrated devices.

mod angle;
mod circuit;
mod decompose;
pub(crate) mod layout;
mod optimize;
mod physical;
mod route;

pub use angle::{Angle, Symbol};
pub use circuit::{Instruction, LogicalCircuit, MeasureSite, Op};
pub use decompose::{decompose_instruction, decompose_to_basis, Basis};
pub use layout::choose_layout;
pub use optimize::light_optimize;
pub use physical::{
    ideal, transpile, transpile_with, PhysicalCircuit, PhysicalGate, PhysicalMeasure, PhysicalOp,
    TranspileOptions,
};
pub use route::{route, RoutedCircuit};
