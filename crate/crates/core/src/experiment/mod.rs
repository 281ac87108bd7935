//! Multi-trial experiments: configuration, metrics, calibration snapshots,
//! persisted records and the summary tables and plots built from them.

mod calibration;
mod config;
mod metrics;
mod report;
mod run;
mod svg;

pub use calibration::{calibration_values, pooled_stats, CalibrationSnapshot, CALIBRATION_METRICS};
pub use config::{ExperimentConfig, NOISELESS};
pub use metrics::{accuracy, improvement, mean_std, r2, MetricKind};
pub use report::{
    improvement_rows, load_records, loss_curve_rows, table_rows, write_report, ImprovementRow,
    LossCurveRow, ReportFiles, TableRow,
};
pub use run::{
    load_splits, persist, run_experiment, run_trial, trial_exec_config, Checkpoint,
    ExperimentRecord, TrialMetrics, TrialRecord,
};
pub use svg::{box_plot, line_plot, Series};
