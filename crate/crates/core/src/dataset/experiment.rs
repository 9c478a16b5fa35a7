use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{make_windows, FrameRange, Normalizer, Trajectory, Window, WindowSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentId {
    Fno1,
    Fno2,
    Fno3,
    Fno4,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 4] = [Self::Fno1, Self::Fno2, Self::Fno3, Self::Fno4];

    pub fn label_mode(self) -> LabelMode {
        match self {
            Self::Fno1 | Self::Fno2 => LabelMode::OneStep,
            Self::Fno3 | Self::Fno4 => LabelMode::MultiStep,
        }
    }

    pub fn with_steady_state(self) -> bool {
        matches!(self, Self::Fno2 | Self::Fno4)
    }

    pub fn slug(self) -> &'static str {
        match self {
            Self::Fno1 => "fno1",
            Self::Fno2 => "fno2",
            Self::Fno3 => "fno3",
            Self::Fno4 => "fno4",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Self::Fno1 => 1,
            Self::Fno2 => 2,
            Self::Fno3 => 3,
            Self::Fno4 => 4,
        };
        write!(f, "FNO-{n}")
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "fno1" => Ok(Self::Fno1),
            "fno2" => Ok(Self::Fno2),
            "fno3" => Ok(Self::Fno3),
            "fno4" => Ok(Self::Fno4),
            _ => Err(Error::InvalidArgument(format!("unknown experiment {s:?}"))),
        }
    }
}

/// Sequence-to-one or sequence-to-sequence labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelMode {
    OneStep,
    MultiStep,
}

impl LabelMode {
    pub fn out_steps(self, in_steps: usize) -> usize {
        match self {
            LabelMode::OneStep => 1,
            LabelMode::MultiStep => in_steps,
        }
    }
}

/// The two post-reversal training spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingRanges {
    pub without_steady_state: FrameRange,
    pub with_steady_state: FrameRange,
}

impl TrainingRanges {
    /// Frames 302..=481 and 302..=521.
    pub fn full() -> Self {
        Self {
            without_steady_state: FrameRange::inclusive(302, 481),
            with_steady_state: FrameRange::inclusive(302, 521),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub label_mode: LabelMode,
    pub range: FrameRange,
    pub in_steps: usize,
    pub vesicle_count: usize,
}

impl ExperimentSpec {
    pub fn new(id: ExperimentId, ranges: &TrainingRanges, in_steps: usize, vesicle_count: usize) -> Self {
        let range = if id.with_steady_state() {
            ranges.with_steady_state
        } else {
            ranges.without_steady_state
        };
        Self {
            id,
            label_mode: id.label_mode(),
            range,
            in_steps,
            vesicle_count,
        }
    }

    pub fn window_spec(&self) -> Result<WindowSpec> {
        WindowSpec::new(self.in_steps, self.label_mode.out_steps(self.in_steps))
    }
}

/// Windows of every vesicle for one experiment, plus the normalizer fitted to them.
#[derive(Debug, Clone)]
pub struct TrainingSet<'a> {
    pub spec: ExperimentSpec,
    pub window: WindowSpec,
    pub trajectories: Vec<&'a Trajectory>,
    /// `(trajectory index, window)`.
    pub samples: Vec<(usize, Window)>,
    pub normalizer: Normalizer,
}

impl TrainingSet<'_> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn build_experiment<'a>(spec: &ExperimentSpec, trajectories: &[&'a Trajectory]) -> Result<TrainingSet<'a>> {
    if trajectories.len() < spec.vesicle_count {
        return Err(Error::Missing {
            what: "trajectory",
            detail: format!(
                "{} needs {} vesicle trajectories, got {}",
                spec.id,
                spec.vesicle_count,
                trajectories.len()
            ),
        });
    }
    let trajectories = trajectories[..spec.vesicle_count].to_vec();
    if let Some(first) = trajectories.first() {
        if trajectories.iter().any(|t| t.n() != first.n()) {
            return Err(Error::InvalidArgument("trajectories disagree on grid size".into()));
        }
    }
    let window = spec.window_spec()?;
    let mut samples = Vec::new();
    for (ti, traj) in trajectories.iter().enumerate() {
        for w in make_windows(traj, spec.range, &window)? {
            samples.push((ti, w));
        }
    }

    // multiplicity of every frame as an input and as a label
    let mut in_weight = vec![vec![0.0f64; 0]; trajectories.len()];
    let mut out_weight = in_weight.clone();
    for (ti, traj) in trajectories.iter().enumerate() {
        in_weight[ti] = vec![0.0; traj.len()];
        out_weight[ti] = vec![0.0; traj.len()];
    }
    for (ti, w) in &samples {
        for f in w.inputs.clone() {
            in_weight[*ti][f] += 1.0;
        }
        for f in w.labels.clone() {
            out_weight[*ti][f] += 1.0;
        }
    }
    let weighted = |weights: &Vec<Vec<f64>>| {
        let mut items: Vec<(&'a [f32], f64)> = Vec::new();
        for (ti, traj) in trajectories.iter().enumerate() {
            for (f, &w) in weights[ti].iter().enumerate() {
                if w > 0.0 {
                    items.push((&traj.frames()[f].velocity[..], w));
                }
            }
        }
        items
    };
    let normalizer = Normalizer::fit(weighted(&in_weight), weighted(&out_weight));
    Ok(TrainingSet {
        spec: spec.clone(),
        window,
        trajectories,
        samples,
        normalizer,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EvalSet {
    Inter,
    Mix,
    Extra,
}

impl EvalSet {
    pub const ALL: [EvalSet; 3] = [Self::Inter, Self::Mix, Self::Extra];

    pub fn slug(self) -> &'static str {
        match self {
            Self::Inter => "inter",
            Self::Mix => "mix",
            Self::Extra => "extra",
        }
    }
}

impl fmt::Display for EvalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-set", self.slug())
    }
}

impl FromStr for EvalSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().trim_end_matches("-set") {
            "inter" => Ok(Self::Inter),
            "mix" => Ok(Self::Mix),
            "extra" => Ok(Self::Extra),
            _ => Err(Error::InvalidArgument(format!("unknown evaluation set {s:?}"))),
        }
    }
}

/// First input frame of each evaluation window, and the rollout horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalSets {
    pub inter: usize,
    pub mix: usize,
    pub extra: usize,
    pub horizon: usize,
}

impl EvalSets {
    /// Inputs 442-451, 482-491, 522-531 with 30 predicted frames.
    pub fn full() -> Self {
        Self {
            inter: 442,
            mix: 482,
            extra: 522,
            horizon: 30,
        }
    }

    pub fn offset(&self, set: EvalSet) -> usize {
        match set {
            EvalSet::Inter => self.inter,
            EvalSet::Mix => self.mix,
            EvalSet::Extra => self.extra,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalWindow {
    pub set: EvalSet,
    pub inputs: Range<usize>,
    pub truth: Range<usize>,
}

pub fn eval_input(traj: &Trajectory, set: EvalSet, sets: &EvalSets, in_steps: usize) -> Result<EvalWindow> {
    let start = sets.offset(set);
    let inputs = start..start + in_steps;
    let truth = inputs.end..inputs.end + sets.horizon;
    if truth.end > traj.len() {
        return Err(Error::Missing {
            what: "frames",
            detail: format!(
                "{set} needs frames up to {}, trajectory has {}",
                truth.end - 1,
                traj.len()
            ),
        });
    }
    Ok(EvalWindow { set, inputs, truth })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredictionType {
    Interpolation,
    Extrapolation,
}

/// Interpolation when the evaluation window starts inside the experiment's training range.
pub fn classify(spec: &ExperimentSpec, sets: &EvalSets, set: EvalSet) -> PredictionType {
    if spec.range.contains(sets.offset(set)) {
        PredictionType::Interpolation
    } else {
        PredictionType::Extrapolation
    }
}
