//! Trajectory persistence, sliding windows and the experiment definitions.

mod experiment;
mod manifest;
mod normalizer;
mod trajectory;
mod windows;

pub use experiment::{
    build_experiment, classify, eval_input, EvalSet, EvalSets, EvalWindow, ExperimentId,
    ExperimentSpec, LabelMode, PredictionType, TrainingRanges, TrainingSet,
};
pub use manifest::{Manifest, VesicleEntry};
pub use normalizer::{Normalizer, STD_FLOOR};
pub use trajectory::{Frame, Trajectory, TrajectoryHeader, MAGIC, VERSION};
pub use windows::{make_windows, window_count, FrameRange, Window, WindowSpec};
