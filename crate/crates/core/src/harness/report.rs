//! Evaluation of the four experiments on the three input sets, and the
//! comparison summary derived from it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::heatmap::{mid_plane_x, write_triptych};
use super::rollout::fsi_rollout;
use super::{Dataset, PipelineConfig};
use crate::dataset::{classify, eval_input, EvalSet, ExperimentId, PredictionType};
use crate::fno::{load_checkpoint, Model};
use crate::ibm::DeltaKernel;
use crate::mesh::SpringBending;
use crate::stokes::{SimState, Simulation};
use crate::{Error, Result};

/// One line of `index.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexRow {
    pub model: ExperimentId,
    pub set: EvalSet,
    /// `None` when the model was absent.
    pub metrics: Option<RowMetrics>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowMetrics {
    pub prediction: PredictionType,
    pub invocations: usize,
    pub mean_mae_x: f64,
    pub final_mae_x: f64,
    pub mean_rel_l2: f64,
    pub final_rel_l2: f64,
    pub final_vesicle_err: f64,
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub dir: PathBuf,
    pub rows: Vec<IndexRow>,
    pub checks: Vec<OrderingCheck>,
    pub files: Vec<PathBuf>,
}

pub const INDEX_HEADER: &str =
    "model,set,status,prediction_type,invocations,mean_mae_x,final_mae_x,mean_rel_l2,final_rel_l2,final_vesicle_err";

/// Load whichever checkpoints exist; missing ones come back as `None`.
pub fn load_models(cfg: &PipelineConfig) -> Result<Vec<(ExperimentId, Option<Model>)>> {
    ExperimentId::ALL
        .iter()
        .map(|&id| match load_checkpoint(&cfg.checkpoint_path(id)) {
            Ok(m) => Ok((id, Some(m))),
            Err(Error::Missing { .. }) => Ok((id, None)),
            Err(e) => Err(e),
        })
        .collect()
}

/// Roll every present model out on every set and write curves, heatmaps,
/// timings, the index and the summary into the report directory. Models are
/// only read.
pub fn evaluate_all(cfg: &PipelineConfig, data: &Dataset, models: &[(ExperimentId, Option<Model>)]) -> Result<EvaluationReport> {
    let dir = cfg.report_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let vesicle = data.get(&cfg.eval.vesicle)?;
    let traj = &vesicle.trajectory;
    let sets = cfg.eval.sets;
    let mut files = Vec::new();
    let mut rows = Vec::new();
    let mut timing = String::from("model,set,fno_seconds_per_frame,solver_seconds_per_frame,speedup\n");
    let solver_time = solver_seconds_per_frame(cfg, data)?;
    let mut baselines_written = Vec::new();

    for (id, model) in models {
        for set in EvalSet::ALL {
            let Some(model) = model else {
                rows.push(IndexRow { model: *id, set, metrics: None });
                continue;
            };
            let spec = super::experiment_spec(cfg, *id);
            let fsi = fsi_rollout(model, traj, &vesicle.mesh, set, &sets, cfg.flow.rate)?;
            let r = &fsi.rollout;
            let tag = format!("{}_{}", id.slug(), set.slug());

            let mut csv = String::from("step,mae_x,rel_l2\n");
            for (h, (m, e)) in r.mae_x.iter().zip(&r.rel_l2).enumerate() {
                writeln!(csv, "{},{m},{e}", h + 1).expect("string write");
            }
            files.push(write_text(&dir.join(format!("rollout_{tag}.csv")), &csv)?);
            files.push(write_text(&dir.join(format!("vesicle_{tag}.csv")), &vesicle_csv(&fsi.vesicle_err))?);
            if !baselines_written.contains(&set) {
                files.push(write_text(
                    &dir.join(format!("vesicle_ibm_{}.csv", set.slug())),
                    &vesicle_csv(&fsi.baseline_err),
                )?);
                baselines_written.push(set);
            }

            if let Some(last) = r.frames.last() {
                let ev = eval_input(traj, set, &sets, model.config().in_steps)?;
                let truth: Vec<f64> = traj.frame(ev.truth.end - 1)?.velocity.iter().map(|&v| v as f64).collect();
                let n = traj.n();
                let path = dir.join(format!("heatmap_{tag}.ppm"));
                write_triptych(&path, &mid_plane_x(last, n), &mid_plane_x(&truth, n), n, r.frames.len())?;
                files.push(path.with_extension("txt"));
                files.push(path);
            }

            let per_frame = r.inference_seconds / r.frames.len().max(1) as f64;
            let speedup = if per_frame > 0.0 { solver_time / per_frame } else { f64::INFINITY };
            writeln!(timing, "{},{},{per_frame:e},{solver_time:e},{speedup}", id.slug(), set.slug()).expect("string write");

            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
            let last_or_zero = |v: &[f64]| v.last().copied().unwrap_or(0.0);
            rows.push(IndexRow {
                model: *id,
                set,
                metrics: Some(RowMetrics {
                    prediction: classify(&spec, &sets, set),
                    invocations: r.invocations,
                    mean_mae_x: mean(&r.mae_x),
                    final_mae_x: last_or_zero(&r.mae_x),
                    mean_rel_l2: mean(&r.rel_l2),
                    final_rel_l2: last_or_zero(&r.rel_l2),
                    final_vesicle_err: last_or_zero(&fsi.vesicle_err),
                }),
            });
        }
    }
    files.push(write_text(&dir.join("timing.csv"), &timing)?);
    files.push(write_text(&dir.join("index.csv"), &index_csv(&rows))?);
    let checks = ordering_checks(&rows);
    files.push(write_text(&dir.join("summary.txt"), &summary_text(&checks))?);
    Ok(EvaluationReport { dir, rows, checks, files })
}

fn vesicle_csv(err: &[f64]) -> String {
    let mut csv = String::from("step,vesicle_mean_err\n");
    for (h, e) in err.iter().enumerate() {
        writeln!(csv, "{},{e}", h + 1).expect("string write");
    }
    csv
}

fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

/// Mean wall time of the reference solver over one recording interval,
/// restarted from the evaluation vesicle's recorded state.
pub fn solver_seconds_per_frame(cfg: &PipelineConfig, data: &Dataset) -> Result<f64> {
    let grid = cfg.grid_spec()?;
    let vesicle = data.get(&cfg.eval.vesicle)?;
    let traj = &vesicle.trajectory;
    let frame = cfg.eval.sets.inter.min(traj.len().saturating_sub(1));
    let membrane = SpringBending(cfg.membrane);
    let sim = Simulation {
        grid,
        fluid: cfg.fluid,
        membrane: &membrane,
        schedule: cfg.flow,
        kernel: DeltaKernel::for_grid(&grid),
        progress: false,
    };
    let mut state = SimState {
        u_ind: traj.frame(frame)?.velocity_field(grid)?,
        mesh: traj.mesh_at(frame, &vesicle.mesh)?,
        step_index: frame * cfg.fluid.record_every,
        time: frame as f64 * cfg.fluid.dt_record(),
    };
    let reps = 2;
    let start = Instant::now();
    for r in 0..reps {
        state = sim.advance_frame(&state, frame + r)?;
    }
    Ok(start.elapsed().as_secs_f64() / reps as f64)
}

pub fn index_csv(rows: &[IndexRow]) -> String {
    let mut csv = String::from(INDEX_HEADER);
    csv.push('\n');
    for r in rows {
        match &r.metrics {
            Some(m) => writeln!(
                csv,
                "{},{},present,{},{},{},{},{},{},{}",
                r.model.slug(),
                r.set.slug(),
                match m.prediction {
                    PredictionType::Interpolation => "interpolation",
                    PredictionType::Extrapolation => "extrapolation",
                },
                m.invocations,
                m.mean_mae_x,
                m.final_mae_x,
                m.mean_rel_l2,
                m.final_rel_l2,
                m.final_vesicle_err
            ),
            None => writeln!(csv, "{},{},absent,,,,,,,", r.model.slug(), r.set.slug()),
        }
        .expect("string write");
    }
    csv
}

pub fn parse_index(text: &str) -> Result<Vec<IndexRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(INDEX_HEADER) {
        return Err(Error::Config("index.csv has an unexpected header".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Config(format!("malformed index row {line:?}"));
            if f.len() != 10 {
                return Err(bad());
            }
            let model = f[0].parse()?;
            let set = f[1].parse()?;
            let metrics = match f[2] {
                "absent" => None,
                "present" => {
                    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
                    Some(RowMetrics {
                        prediction: match f[3] {
                            "interpolation" => PredictionType::Interpolation,
                            "extrapolation" => PredictionType::Extrapolation,
                            _ => return Err(bad()),
                        },
                        invocations: f[4].parse().map_err(|_| bad())?,
                        mean_mae_x: num(f[5])?,
                        final_mae_x: num(f[6])?,
                        mean_rel_l2: num(f[7])?,
                        final_rel_l2: num(f[8])?,
                        final_vesicle_err: num(f[9])?,
                    })
                }
                _ => return Err(bad()),
            };
            Ok(IndexRow { model, set, metrics })
        })
        .collect()
}

/// One of the qualitative orderings, evaluated on this run's numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingCheck {
    pub name: String,
    /// `None` when a needed model was absent.
    pub passed: Option<bool>,
    pub detail: String,
}

fn metric(rows: &[IndexRow], model: ExperimentId, set: EvalSet) -> Option<RowMetrics> {
    rows.iter().find(|r| r.model == model && r.set == set).and_then(|r| r.metrics)
}

fn mean_over(rows: &[IndexRow], model: ExperimentId, sets: &[EvalSet], f: fn(&RowMetrics) -> f64) -> Option<f64> {
    let vals: Option<Vec<f64>> = sets.iter().map(|&s| metric(rows, model, s).map(|m| f(&m))).collect();
    vals.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn ordering_checks(rows: &[IndexRow]) -> Vec<OrderingCheck> {
    use ExperimentId::*;
    let mut checks = Vec::new();
    let mut compare = |name: String, better: Option<f64>, worse: Option<f64>, labels: (&str, &str)| {
        let (passed, detail) = match (better, worse) {
            (Some(a), Some(b)) => (Some(a <= b), format!("{} {a:.4e} vs {} {b:.4e}", labels.0, labels.1)),
            _ => (None, "model absent".to_string()),
        };
        checks.push(OrderingCheck { name, passed, detail });
    };
    let final_rel = |m: &RowMetrics| m.final_rel_l2;
    let mean_rel = |m: &RowMetrics| m.mean_rel_l2;
    for (seq, one) in [(Fno3, Fno1), (Fno4, Fno2)] {
        compare(
            format!("sequence-to-sequence beats sequence-to-one at the horizon ({seq} vs {one})"),
            mean_over(rows, seq, &EvalSet::ALL, final_rel),
            mean_over(rows, one, &EvalSet::ALL, final_rel),
            (&seq.to_string(), &one.to_string()),
        );
    }
    for id in ExperimentId::ALL {
        let of_type = |t: PredictionType| -> Vec<EvalSet> {
            EvalSet::ALL
                .into_iter()
                .filter(|&s| metric(rows, id, s).map(|m| m.prediction) == Some(t))
                .collect()
        };
        let inter = of_type(PredictionType::Interpolation);
        let extra = of_type(PredictionType::Extrapolation);
        compare(
            format!("interpolation error <= extrapolation error ({id})"),
            mean_over(rows, id, &inter, |m| m.mean_mae_x),
            mean_over(rows, id, &extra, |m| m.mean_mae_x),
            ("interpolation", "extrapolation"),
        );
    }
    for (with, without) in [(Fno2, Fno1), (Fno4, Fno3)] {
        compare(
            format!("steady-state-inclusive training <= exclusive on mix and extra ({with} vs {without})"),
            mean_over(rows, with, &[EvalSet::Mix, EvalSet::Extra], mean_rel),
            mean_over(rows, without, &[EvalSet::Mix, EvalSet::Extra], mean_rel),
            (&with.to_string(), &without.to_string()),
        );
    }
    checks
}

pub fn summary_text(checks: &[OrderingCheck]) -> String {
    let mut s = String::from("# qualitative orderings, reported only\n");
    for c in checks {
        let tag = match c.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        writeln!(s, "{tag} {}: {}", c.name, c.detail).expect("string write");
    }
    s
}

/// Rebuild the summary from an existing `index.csv`.
pub fn report_from_index(cfg: &PipelineConfig) -> Result<(PathBuf, String)> {
    let dir = cfg.report_dir();
    let index = dir.join("index.csv");
    let text = std::fs::read_to_string(&index).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Missing {
            what: "evaluation index",
            detail: format!("{} not found; run evaluate first", index.display()),
        },
        _ => Error::io(&index, e),
    })?;
    let summary = summary_text(&ordering_checks(&parse_index(&text)?));
    let path = write_text(&dir.join("summary.txt"), &summary)?;
    Ok((path, summary))
}
