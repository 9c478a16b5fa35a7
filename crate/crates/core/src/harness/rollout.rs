//! Autoregressive rollouts and the coupled vesicle update driven by them.

use std::time::Instant;

use crate::dataset::{eval_input, EvalSet, EvalSets, Trajectory};
use crate::field::{GridSpec, VectorField};
use crate::fno::{decode_output, encode_input, Model};
use crate::ibm::{advance_vesicle, paint_indicator, DeltaKernel};
use crate::mesh::TriMesh;
use crate::stokes::FlowSchedule;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    /// Predicted frames, interleaved like recorded velocities.
    pub frames: Vec<Vec<f64>>,
    /// Per step; empty when no truth was given.
    pub mae_x: Vec<f64>,
    pub rel_l2: Vec<f64>,
    pub invocations: usize,
    /// Wall time spent inside the operator.
    pub inference_seconds: f64,
}

/// What the vesicle update needs besides velocities.
#[derive(Debug, Clone)]
pub struct MeshCoupling {
    pub grid: GridSpec,
    pub schedule: FlowSchedule,
    pub kernel: DeltaKernel,
    /// Recording interval, used as the update step.
    pub dt: f64,
}

impl MeshCoupling {
    pub fn for_trajectory(traj: &Trajectory, rate: f64) -> Result<Self> {
        let grid = GridSpec::cube(traj.n())?;
        Ok(Self {
            grid,
            schedule: FlowSchedule {
                rate,
                reversal_frame: traj.reversal_frame(),
            },
            kernel: DeltaKernel::for_grid(&grid),
            dt: traj.dt_record(),
        })
    }

    /// `X^{n+1} = X^n + dT (I[u^n](X^n) + u_inf(X^n))` from recorded frame `frame`.
    pub fn step(&self, mesh: &TriMesh, velocity: &[f64], frame: usize) -> Result<TriMesh> {
        let u = VectorField::from_values(self.grid, velocity.to_vec())?;
        advance_vesicle(mesh, &u, &self.schedule.flow_at(frame), self.dt, &self.kernel)
    }
}

/// Vesicle state threaded through a rollout when the model reads a membrane
/// mask.
#[derive(Debug, Clone)]
pub struct MaskSource {
    pub coupling: MeshCoupling,
    /// Mesh at the last input frame.
    pub mesh: TriMesh,
    /// Absolute index of that frame.
    pub frame: usize,
}

/// Predict `horizon` frames following `inputs`. One-step models are invoked
/// once per frame; block models once per `out_steps` frames, surplus frames
/// of the last block being dropped.
pub fn rollout(
    model: &Model,
    inputs: &[Vec<f64>],
    horizon: usize,
    truth: Option<&[Vec<f64>]>,
    mut mask: Option<MaskSource>,
) -> Result<RolloutResult> {
    let c = *model.config();
    if inputs.len() != c.in_steps {
        return Err(Error::shape(format!("{} input frames", c.in_steps), inputs.len()));
    }
    if let Some(f) = inputs.iter().find(|f| f.len() != 3 * c.points()) {
        return Err(Error::shape(format!("{}^3 grid frames of {}", c.grid_n, 3 * c.points()), f.len()));
    }
    if let Some(t) = truth {
        if t.len() < horizon {
            return Err(Error::shape(format!("{horizon} truth frames"), t.len()));
        }
    }
    if c.membrane_mask && mask.is_none() {
        return Err(Error::InvalidArgument("model reads a membrane mask; rollout needs a mesh".into()));
    }
    let mut history: Vec<Vec<f64>> = inputs.to_vec();
    let mut invocations = 0;
    let mut seconds = 0.0;
    while history.len() - c.in_steps < horizon {
        let window = &history[history.len() - c.in_steps..];
        let indicator = match &mask {
            Some(m) if c.membrane_mask => {
                let g = m.coupling.grid;
                Some(paint_indicator(m.mesh.vertices(), &g, &m.coupling.kernel))
            }
            _ => None,
        };
        let start = Instant::now();
        let x = encode_input(&c, model.normalizer(), window, indicator.as_deref())?;
        let y = model.forward(&x)?;
        seconds += start.elapsed().as_secs_f64();
        invocations += 1;
        let block = decode_output(&c, &y)?;
        for frame in block {
            if let Some(m) = mask.as_mut() {
                let last = history.last().expect("non-empty window");
                m.mesh = m.coupling.step(&m.mesh, last, m.frame)?;
                m.frame += 1;
            }
            history.push(frame);
        }
    }
    let mut frames = history.split_off(c.in_steps);
    frames.truncate(horizon);
    let (mae_x, rel_l2) = match truth {
        Some(t) => step_metrics(&frames, &t[..horizon]),
        None => (Vec::new(), Vec::new()),
    };
    Ok(RolloutResult {
        frames,
        mae_x,
        rel_l2,
        invocations,
        inference_seconds: seconds,
    })
}

/// Per-frame x-component mean absolute error and relative L2 error.
pub fn step_metrics(pred: &[Vec<f64>], truth: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    pred.iter()
        .zip(truth)
        .map(|(p, t)| {
            let nodes = p.len() / 3;
            let mae = p.iter().zip(t).step_by(3).map(|(a, b)| (a - b).abs()).sum::<f64>() / nodes as f64;
            (mae, crate::field::rel_l2(p, t).value)
        })
        .unzip()
}

pub fn frames_f64(traj: &Trajectory, range: std::ops::Range<usize>) -> Result<Vec<Vec<f64>>> {
    range
        .map(|i| Ok(traj.frame(i)?.velocity.iter().map(|&v| v as f64).collect()))
        .collect()
}

#[derive(Debug, Clone)]
pub struct FsiRolloutResult {
    /// Mesh at the last input frame followed by one mesh per step.
    pub meshes: Vec<TriMesh>,
    pub vesicle_err: Vec<f64>,
    /// Same update driven by recorded velocities.
    pub baseline_meshes: Vec<TriMesh>,
    pub baseline_err: Vec<f64>,
    pub rollout: RolloutResult,
}

/// Apply the vesicle update with `velocities[h]` driving step `h`, starting
/// from `mesh` at recorded frame `frame`; returns the `velocities.len() + 1`
/// meshes.
pub fn advance_with(coupling: &MeshCoupling, mesh: &TriMesh, frame: usize, velocities: &[Vec<f64>]) -> Result<Vec<TriMesh>> {
    let mut out = vec![mesh.clone()];
    for (h, u) in velocities.iter().enumerate() {
        let next = coupling.step(out.last().expect("initial mesh"), u, frame + h)?;
        out.push(next);
    }
    Ok(out)
}

/// Mean vertex distance to the recorded meshes at `frame + 1 ..`.
pub fn vesicle_errors(traj: &Trajectory, template: &TriMesh, frame: usize, meshes: &[TriMesh]) -> Result<Vec<f64>> {
    meshes[1..]
        .iter()
        .enumerate()
        .map(|(h, m)| {
            let truth = traj.mesh_at(frame + h + 1, template).map_err(|_| Error::Missing {
                what: "mesh frames",
                detail: format!("recorded mesh {} is past the trajectory end", frame + h + 1),
            })?;
            m.mean_vertex_distance(&truth)
        })
        .collect()
}

/// Roll the model out from an evaluation set and carry the vesicle along.
/// Step `h` of the update uses the velocity at frame `e + h - 1`, where `e`
/// is the last input frame: the recorded one for the first step, predicted
/// ones after.
pub fn fsi_rollout(
    model: &Model,
    traj: &Trajectory,
    template: &TriMesh,
    set: EvalSet,
    sets: &EvalSets,
    rate: f64,
) -> Result<FsiRolloutResult> {
    let c = model.config();
    if traj.n() != c.grid_n {
        return Err(Error::shape(format!("{}^3 grid", c.grid_n), format!("{}^3", traj.n())));
    }
    let ev = eval_input(traj, set, sets, c.in_steps)?;
    let horizon = sets.horizon;
    let last = ev.inputs.end - 1;
    let coupling = MeshCoupling::for_trajectory(traj, rate)?;
    let start_mesh = traj.mesh_at(last, template)?;
    let inputs = frames_f64(traj, ev.inputs.clone())?;
    let truth = frames_f64(traj, ev.truth.clone())?;
    let mask = c.membrane_mask.then(|| MaskSource {
        coupling: coupling.clone(),
        mesh: start_mesh.clone(),
        frame: last,
    });
    let result = rollout(model, &inputs, horizon, Some(&truth), mask)?;

    let drive = |first: &[Vec<f64>]| -> Vec<Vec<f64>> {
        std::iter::once(inputs[inputs.len() - 1].clone())
            .chain(first.iter().take(horizon.saturating_sub(1)).cloned())
            .take(horizon)
            .collect()
    };
    let meshes = advance_with(&coupling, &start_mesh, last, &drive(&result.frames))?;
    let baseline_meshes = advance_with(&coupling, &start_mesh, last, &drive(&truth))?;
    Ok(FsiRolloutResult {
        vesicle_err: vesicle_errors(traj, template, last, &meshes)?,
        baseline_err: vesicle_errors(traj, template, last, &baseline_meshes)?,
        meshes,
        baseline_meshes,
        rollout: result,
    })
}
