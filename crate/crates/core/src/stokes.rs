//! Reference immersed-boundary stepper: unsteady Stokes with membrane forcing
//! on a periodic box.
//!
//! Each fine step is
//!
//! 1. `F = membrane(X^n)`, `f = spread(F)`
//! 2. `u^{n+1} = P[(rho/dt u^n + f) / (rho/dt + mu |k|^2)]` with the mean removed
//! 3. `X^{n+1} = X^n + (I[u^{n+1}](X^n) + u_inf(X^n)) dt`
//!
//! Pressure never appears: the Leray projection `P` absorbs it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{Frame, Trajectory};
use crate::field::{
    forward_fft, helmholtz_solve, inverse_fft, leray_project, max_abs, GridSpec, VectorField,
};
use crate::ibm::{advance_vesicle, spread_force, DeltaKernel, ExternalFlow, FlowOrientation};
use crate::mesh::{enclosed_volume, MembraneModel, TriMesh};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    pub density: f64,
    pub viscosity: f64,
    /// Fine step `dt`.
    pub dt_sim: f64,
    /// Fine steps per recorded frame, so `dT = record_every * dt`.
    pub record_every: usize,
}

impl FluidParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("density", self.density),
            ("viscosity", self.viscosity),
            ("dt_sim", self.dt_sim),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be >= 1".into()));
        }
        Ok(())
    }

    pub fn dt_record(&self) -> f64 {
        self.dt_sim * self.record_every as f64
    }

    /// `mu dt / (rho dx^2)`.
    pub fn diffusion_number(&self, grid: &GridSpec) -> f64 {
        self.viscosity * self.dt_sim / (self.density * grid.spacing().powi(2))
    }
}

/// Elongation rate and the recorded frame after which the flow is reversed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSchedule {
    pub rate: f64,
    pub reversal_frame: usize,
}

impl FlowSchedule {
    /// Flow driving the interval from recorded frame `frame` to `frame + 1`.
    pub fn flow_at(&self, frame: usize) -> ExternalFlow {
        let orientation = if frame < self.reversal_frame {
            FlowOrientation::Forward
        } else {
            FlowOrientation::Reversed
        };
        ExternalFlow::new(self.rate, orientation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub u_ind: VectorField,
    pub mesh: TriMesh,
    pub step_index: usize,
    pub time: f64,
}

impl SimState {
    pub fn at_rest(grid: GridSpec, mesh: TriMesh) -> Self {
        Self {
            u_ind: VectorField::zeros(grid),
            mesh,
            step_index: 0,
            time: 0.0,
        }
    }
}

/// Backward-Euler viscous step with explicit forcing, projected and mean-free.
pub fn step_fluid(u_ind: &VectorField, force: &VectorField, params: &FluidParams) -> Result<VectorField> {
    u_ind.check_same_shape(force)?;
    let shift = params.density / params.dt_sim;
    let mut rhs = u_ind.clone();
    for (r, f) in rhs.values_mut().iter_mut().zip(force.values()) {
        *r = shift * *r + f;
    }
    let spec = forward_fft(&rhs).map_err(|e| Error::Diverged {
        step: 0,
        time: 0.0,
        detail: format!(
            "{e}; diffusion number {:.3e}",
            params.diffusion_number(u_ind.grid())
        ),
    })?;
    let mut spec = leray_project(&helmholtz_solve(&spec, shift, params.viscosity)?);
    spec.remove_mean();
    inverse_fft(&spec)
}

/// One fine step of the coupled system.
pub fn step_coupled(
    state: &SimState,
    params: &FluidParams,
    membrane: &dyn MembraneModel,
    flow: &ExternalFlow,
    kernel: &DeltaKernel,
) -> Result<SimState> {
    let grid = *state.u_ind.grid();
    let forces = membrane.forces(&state.mesh);
    let f = spread_force(&state.mesh, &forces, &grid, kernel)?;
    let u_ind = step_fluid(&state.u_ind, &f, params).map_err(|e| match e {
        Error::Diverged { detail, .. } => Error::Diverged {
            step: state.step_index,
            time: state.time,
            detail: format!("{detail}; max|u| before step {:.3e}", max_abs(&state.u_ind)),
        },
        other => other,
    })?;
    if let Err(Error::NonFinite { .. }) = u_ind.check_finite("u_ind") {
        return Err(Error::Diverged {
            step: state.step_index + 1,
            time: state.time + params.dt_sim,
            detail: format!(
                "non-finite velocity; diffusion number {:.3e}",
                params.diffusion_number(&grid)
            ),
        });
    }
    let mesh = advance_vesicle(&state.mesh, &u_ind, flow, params.dt_sim, kernel)?;
    if mesh.vertices().iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Diverged {
            step: state.step_index + 1,
            time: state.time + params.dt_sim,
            detail: "non-finite vertex position".into(),
        });
    }
    let step_index = state.step_index + 1;
    Ok(SimState {
        u_ind,
        mesh,
        step_index,
        time: step_index as f64 * params.dt_sim,
    })
}

/// Everything [`simulate`] needs besides the initial mesh.
pub struct Simulation<'a> {
    pub grid: GridSpec,
    pub fluid: FluidParams,
    pub membrane: &'a dyn MembraneModel,
    pub schedule: FlowSchedule,
    pub kernel: DeltaKernel,
    /// Write one progress line per recorded frame to stderr.
    pub progress: bool,
}

/// Recorded run; `failure` is set when the solver diverged part-way, in which
/// case `trajectory` holds every frame recorded before the failure.
#[derive(Debug)]
pub struct SimulationOutcome {
    pub trajectory: Trajectory,
    pub failure: Option<Error>,
}

impl Simulation<'_> {
    /// Advance a state by one recorded interval `dT` starting at recorded frame `frame`.
    pub fn advance_frame(&self, state: &SimState, frame: usize) -> Result<SimState> {
        let flow = self.schedule.flow_at(frame);
        let mut s = state.clone();
        for _ in 0..self.fluid.record_every {
            s = step_coupled(&s, &self.fluid, self.membrane, &flow, &self.kernel)?;
        }
        Ok(s)
    }

    /// Record the initial state and `total_recorded_frames` further frames.
    pub fn simulate(&self, initial_mesh: &TriMesh, total_recorded_frames: usize) -> Result<SimulationOutcome> {
        self.fluid.validate()?;
        let mut trajectory = Trajectory::new(
            self.grid.n(),
            initial_mesh.vertex_count(),
            self.fluid.dt_record(),
            self.schedule.reversal_frame,
        );
        let mut state = SimState::at_rest(self.grid, initial_mesh.clone());
        trajectory.push(Frame::from_state(&state.u_ind, state.mesh.vertices()))?;
        let stderr = std::io::stderr();
        for frame in 0..total_recorded_frames {
            state = match self.advance_frame(&state, frame) {
                Ok(s) => s,
                Err(e) => {
                    return Ok(SimulationOutcome {
                        trajectory,
                        failure: Some(e),
                    })
                }
            };
            trajectory.push(Frame::from_state(&state.u_ind, state.mesh.vertices()))?;
            if self.progress {
                let _ = writeln!(
                    stderr.lock(),
                    "frame {:>5}  max|u| {:.4e}  volume {:.6}",
                    frame + 1,
                    max_abs(&state.u_ind),
                    enclosed_volume(&state.mesh).unwrap_or(f64::NAN),
                );
            }
        }
        Ok(SimulationOutcome {
            trajectory,
            failure: None,
        })
    }
}
