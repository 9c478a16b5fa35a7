//! Training per experiment and the glue between datasets and the operator.

use std::io::Write;
use std::path::{Path, PathBuf};

use super::{Dataset, PipelineConfig};
use crate::dataset::{build_experiment, ExperimentId, ExperimentSpec, TrainingSet};
use crate::field::GridSpec;
use crate::fno::{encode_input, encode_target, save_checkpoint, train, FnoConfig, Model, Sample, SampleSource, TrainReport};
use crate::ibm::{paint_indicator, DeltaKernel};
use crate::mesh::TriMesh;
use crate::{Error, Result};

/// Windows of a [`TrainingSet`] encoded on demand.
pub struct EncodedSamples<'a> {
    pub set: TrainingSet<'a>,
    pub config: FnoConfig,
    /// Initial meshes per trajectory, needed only for the mask channel.
    pub templates: Vec<&'a TriMesh>,
}

impl SampleSource for EncodedSamples<'_> {
    fn len(&self) -> usize {
        self.set.len()
    }

    fn sample(&self, index: usize) -> Result<Sample> {
        let (ti, w) = &self.set.samples[index];
        let traj = self.set.trajectories[*ti];
        let inputs: Vec<&[f32]> = w.inputs.clone().map(|f| &traj.frames()[f].velocity[..]).collect();
        let labels: Vec<&[f32]> = w.labels.clone().map(|f| &traj.frames()[f].velocity[..]).collect();
        let mask = if self.config.membrane_mask {
            let template = self.templates.get(*ti).ok_or_else(|| Error::Missing {
                what: "mesh",
                detail: "initial mesh needed for the mask channel".into(),
            })?;
            let mesh = traj.mesh_at(w.inputs.end - 1, template)?;
            let grid = GridSpec::cube(self.config.grid_n)?;
            Some(paint_indicator(mesh.vertices(), &grid, &DeltaKernel::for_grid(&grid)))
        } else {
            None
        };
        Ok(Sample {
            input: encode_input(&self.config, &self.set.normalizer, &inputs, mask.as_deref())?,
            target: encode_target(&self.config, &labels)?,
        })
    }
}

pub fn experiment_spec(cfg: &PipelineConfig, id: ExperimentId) -> ExperimentSpec {
    ExperimentSpec::new(id, &cfg.ranges, cfg.fno.in_steps, cfg.training_vesicles().count())
}

pub fn training_samples<'a>(cfg: &PipelineConfig, data: &'a Dataset, id: ExperimentId) -> Result<EncodedSamples<'a>> {
    let spec = experiment_spec(cfg, id);
    let set = build_experiment(&spec, &data.training())?;
    let templates = data
        .vesicles
        .iter()
        .filter(|v| v.role == super::VesicleRole::Train)
        .map(|v| &v.mesh)
        .collect();
    Ok(EncodedSamples {
        set,
        config: cfg.fno_config(id),
        templates,
    })
}

#[derive(Debug)]
pub struct TrainedExperiment {
    pub report: TrainReport,
    pub checkpoint: PathBuf,
    pub samples: usize,
}

/// Train one experiment, write `<model_dir>/<id>.fnom` (best epoch) and
/// `<id>_loss.csv`.
pub fn train_experiment(
    cfg: &PipelineConfig,
    data: &Dataset,
    id: ExperimentId,
    seed: u64,
    progress: bool,
) -> Result<TrainedExperiment> {
    let samples = training_samples(cfg, data, id)?;
    let model = Model::init(samples.config, samples.set.normalizer, seed)?;
    let opts = cfg.train_options(seed);
    let report = train(model, &samples, &opts, |epoch, loss| {
        if progress {
            eprintln!("{id} epoch {:>4}/{}  loss {loss:.6}", epoch + 1, opts.epochs);
        }
    })?;
    if report.zero_reference_samples > 0 {
        eprintln!(
            "warning: {} sample evaluations had an all-zero target and used the absolute norm",
            report.zero_reference_samples
        );
    }
    let dir = cfg.model_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let checkpoint = cfg.checkpoint_path(id);
    save_checkpoint(&report.model, &checkpoint)?;
    write_loss_history(&dir.join(format!("{}_loss.csv", id.slug())), &report.history)?;
    if let Some(why) = &report.aborted {
        return Err(Error::Diverged {
            step: report.steps as usize,
            time: 0.0,
            detail: format!("{why}; best checkpoint kept at {}", checkpoint.display()),
        });
    }
    Ok(TrainedExperiment {
        samples: samples.len(),
        report,
        checkpoint,
    })
}

fn write_loss_history(path: &Path, history: &[f64]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let mut w = || -> std::io::Result<()> {
        writeln!(f, "epoch,loss")?;
        for (i, l) in history.iter().enumerate() {
            writeln!(f, "{},{l}", i + 1)?;
        }
        f.flush()
    };
    w().map_err(|e| Error::io(path, e))
}
