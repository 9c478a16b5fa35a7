//! End-to-end pipeline: data generation, training, rollouts and reports.

mod config;
mod data;
pub mod heatmap;
mod pipeline;
mod report;
mod rollout;

pub use config::{EvalConfig, GridConfig, ModelConfig, PathsConfig, PipelineConfig, TrainingConfig, VesicleConfig, VesicleRole};
pub use data::{build_mesh, generate, load_dataset, Dataset, Generated, VesicleData};
pub use pipeline::{experiment_spec, train_experiment, training_samples, EncodedSamples, TrainedExperiment};
pub use report::{
    evaluate_all, index_csv, load_models, ordering_checks, parse_index, report_from_index, solver_seconds_per_frame,
    summary_text, EvaluationReport, IndexRow, OrderingCheck, RowMetrics, INDEX_HEADER,
};
pub use rollout::{
    advance_with, frames_f64, fsi_rollout, rollout, step_metrics, vesicle_errors, FsiRolloutResult, MaskSource,
    MeshCoupling, RolloutResult,
};
