//! Hierarchical convolutional ansatz, measurement plans and feature extraction.

mod executor;
mod structure;

pub use executor::{extract_features, ExecMode, ExecOptions, FeatureGradient, Program};
pub use structure::{
    bind, build_encoding, build_layers, symbolic_encoding, template, HqcnnSpec, Layer,
    MeasurementPlan, ParameterTable, PlanSite, SitePosition, Variant, PARAMS_PER_LAYER,
};
