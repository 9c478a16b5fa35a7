//! JSON pipeline configuration. Relative paths resolve against the
//! directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{EvalSets, ExperimentId, FrameRange, TrainingRanges};
use crate::field::GridSpec;
use crate::fno::{FnoConfig, TrainOptions};
use crate::mesh::MembraneParams;
use crate::stokes::{FlowSchedule, FluidParams};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub grid: GridConfig,
    pub fluid: FluidParams,
    pub membrane: MembraneParams,
    pub flow: FlowSchedule,
    /// Recorded frames after the initial state.
    pub frames: usize,
    pub vesicles: Vec<VesicleConfig>,
    pub fno: ModelConfig,
    pub training: TrainingConfig,
    pub ranges: TrainingRanges,
    pub eval: EvalConfig,
    pub paths: PathsConfig,
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub edge_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VesicleRole {
    #[default]
    Train,
    /// Simulated like the others but never used for training.
    Holdout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesicleConfig {
    pub id: String,
    /// Radius of the sphere of equal volume.
    pub radius: f64,
    /// Long-to-short axis ratio; 1 is a sphere.
    #[serde(default = "one")]
    pub aspect: f64,
    #[serde(default)]
    pub center: [f64; 3],
    /// Icosphere subdivision level; by default the level whose mean edge is
    /// closest to two grid spacings.
    #[serde(default)]
    pub subdivisions: Option<u32>,
    #[serde(default)]
    pub role: VesicleRole,
}

fn one() -> f64 {
    1.0
}

/// Architecture shared by the four experiments; `out_steps` follows from
/// each experiment's label mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub modes: usize,
    pub width: usize,
    pub layers: usize,
    pub in_steps: usize,
    #[serde(default = "proj_width")]
    pub proj_width: usize,
    #[serde(default)]
    pub membrane_mask: bool,
}

fn proj_width() -> usize {
    128
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    #[serde(flatten)]
    pub sets: EvalSets,
    /// Vesicle whose trajectory the evaluation rolls out against.
    pub vesicle: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathsConfig {
    pub data_dir: PathBuf,
    pub model_dir: PathBuf,
    pub report_dir: PathBuf,
}

impl PipelineConfig {
    /// The small profile the acceptance suite runs on.
    pub fn desk() -> Self {
        Self {
            grid: GridConfig { n: 16, edge_length: 2.0 },
            fluid: FluidParams {
                density: 1.0,
                viscosity: 1.0,
                dt_sim: 1e-3,
                record_every: 10,
            },
            membrane: MembraneParams {
                spring_stiffness: 20.0,
                bending_stiffness: 0.01,
            },
            flow: FlowSchedule { rate: 1.0, reversal_frame: 40 },
            frames: 120,
            vesicles: vec![
                vesicle("sphere", 1.0, VesicleRole::Train),
                vesicle("ellipsoid", 1.5, VesicleRole::Train),
                vesicle("holdout", 1.25, VesicleRole::Holdout),
            ],
            fno: ModelConfig {
                modes: 6,
                width: 16,
                layers: 2,
                in_steps: 4,
                proj_width: 128,
                membrane_mask: false,
            },
            training: TrainingConfig {
                epochs: 50,
                lr: 1e-3,
                batch_size: 8,
            },
            ranges: TrainingRanges {
                without_steady_state: FrameRange::new(40, 30),
                with_steady_state: FrameRange::new(40, 54),
            },
            eval: EvalConfig {
                sets: EvalSets {
                    inter: 46,
                    mix: 70,
                    extra: 94,
                    horizon: 20,
                },
                vesicle: "ellipsoid".into(),
            },
            paths: PathsConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }

    /// Full scale: 64^3 grid, 1000 recorded frames, reversal at 302.
    pub fn full() -> Self {
        let mut c = Self::desk();
        c.grid.n = 64;
        c.fluid.dt_sim = 1e-6;
        c.fluid.record_every = 2000;
        c.flow.reversal_frame = 302;
        c.frames = 1000;
        c.vesicles.truncate(2);
        c.fno = ModelConfig {
            modes: 12,
            width: 64,
            layers: 4,
            in_steps: 10,
            proj_width: 128,
            membrane_mask: false,
        };
        c.training.epochs = 200;
        c.ranges = TrainingRanges::full();
        c.eval.sets = EvalSets::full();
        c
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c: Self = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        c.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        c.validate()?;
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Directory that relative paths resolve against.
    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.grid_spec()?;
        self.fluid.validate()?;
        self.membrane.validate()?;
        for id in ExperimentId::ALL {
            self.fno_config(id).validate()?;
        }
        if self.vesicles.iter().filter(|v| v.role == VesicleRole::Train).count() == 0 {
            return Err(Error::Config("at least one training vesicle is required".into()));
        }
        let mut ids: Vec<&str> = self.vesicles.iter().map(|v| v.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("vesicle ids must be unique".into()));
        }
        if !self.vesicles.iter().any(|v| v.id == self.eval.vesicle) {
            return Err(Error::Config(format!("evaluation vesicle {:?} is not configured", self.eval.vesicle)));
        }
        let last = self.frames + 1;
        for r in [self.ranges.without_steady_state, self.ranges.with_steady_state] {
            if r.end() > last {
                return Err(Error::Config(format!(
                    "training range {}..{} exceeds the {last} recorded frames",
                    r.start,
                    r.end()
                )));
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.n, self.grid.edge_length)
    }

    pub fn fno_config(&self, id: ExperimentId) -> FnoConfig {
        let m = &self.fno;
        FnoConfig {
            grid_n: self.grid.n,
            modes: m.modes,
            width: m.width,
            layers: m.layers,
            in_steps: m.in_steps,
            out_steps: id.label_mode().out_steps(m.in_steps),
            proj_width: m.proj_width,
            membrane_mask: m.membrane_mask,
        }
    }

    pub fn train_options(&self, seed: u64) -> TrainOptions {
        TrainOptions {
            epochs: self.training.epochs,
            lr: self.training.lr,
            batch_size: self.training.batch_size,
            seed,
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn data_dir(&self) -> PathBuf {
        self.resolve(&self.paths.data_dir)
    }

    pub fn model_dir(&self) -> PathBuf {
        self.resolve(&self.paths.model_dir)
    }

    pub fn report_dir(&self) -> PathBuf {
        self.resolve(&self.paths.report_dir)
    }

    pub fn checkpoint_path(&self, id: ExperimentId) -> PathBuf {
        self.model_dir().join(format!("{}.fnom", id.slug()))
    }

    pub fn training_vesicles(&self) -> impl Iterator<Item = &VesicleConfig> {
        self.vesicles.iter().filter(|v| v.role == VesicleRole::Train)
    }
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            data_dir: "data".into(),
            model_dir: "models".into(),
            report_dir: "report".into(),
        }
    }
}

fn vesicle(id: &str, aspect: f64, role: VesicleRole) -> VesicleConfig {
    VesicleConfig {
        id: id.into(),
        radius: 0.45,
        aspect,
        center: [0.0; 3],
        subdivisions: None,
        role,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_validate_and_round_trip() {
        for c in [PipelineConfig::desk(), PipelineConfig::full()] {
            c.validate().unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("c.json");
            c.save(&p).unwrap();
            let back = PipelineConfig::load(&p).unwrap();
            assert_eq!(back.clone().with_base_dir("."), c);
            assert_eq!(back.data_dir(), dir.path().join("data"));
        }
    }

    #[test]
    fn bad_configs_rejected() {
        let mut c = PipelineConfig::desk();
        c.eval.vesicle = "nope".into();
        assert!(c.validate().is_err());
        let mut c = PipelineConfig::desk();
        c.ranges.with_steady_state = FrameRange::new(40, 200);
        assert!(c.validate().is_err());
        let mut c = PipelineConfig::desk();
        c.fno.modes = 9;
        assert!(c.validate().is_err());
    }

    #[test]
    fn heads_follow_label_mode() {
        let c = PipelineConfig::full();
        assert_eq!(c.fno_config(ExperimentId::Fno1).out_steps, 1);
        assert_eq!(c.fno_config(ExperimentId::Fno4).out_steps, 10);
    }
}
