//! Fluid–structure interaction toolkit for vesicles in elongation flow.
//!
//! The crate pairs a reference immersed-boundary solver (spectral unsteady
//! Stokes on a periodic box, triangulated membrane, 4-point delta kernel) with
//! a Fourier neural operator surrogate trained on the solver's trajectories.
//!
//! Module map:
//!
//! * [`field`]: periodic grids, 3-D FFT, Leray projection, Helmholtz inversion, error metrics.
//! * [`mesh`]: triangulated membranes, geometry measures, membrane force model.
//! * [`ibm`]: delta kernel, force spreading, velocity interpolation, vesicle update.
//! * [`stokes`]: semi-implicit coupled stepper producing ground-truth trajectories.
//! * [`fno`]: Fourier neural operator with hand-written reverse mode and Adam.
//! * [`dataset`]: trajectory files, sliding windows, experiment definitions.
//! * [`harness`]: rollouts, FSI rollouts, evaluation reports, pipeline config.

pub mod dataset;
pub mod error;
pub mod field;
pub mod fno;
pub mod harness;
pub mod ibm;
pub mod mesh;
pub mod stokes;

pub use error::{Error, Result};

/// A point or vector in 3-space.
pub type Vec3 = [f64; 3];
