//! Periodic Eulerian fields and the spectral operators shared by the
//! reference solver and the neural operator.
//!
//! FFT convention, fixed crate-wide: the forward transform is unnormalized,
//! `F_k = sum_x f_x exp(-i k.x)`, and the inverse carries `1/N^3`. Parseval
//! therefore reads `sum |f|^2 = N^-3 sum |F|^2`.

mod fft;
mod grid;
mod metrics;
mod spectral;

pub use fft::{fft3_forward, fft3_inverse, Fft3};
pub use grid::{GridSpec, VectorField};
pub use metrics::{mae_component, max_abs, rel_l2, rel_l2_error, RelL2};
pub use spectral::{
    forward_fft, helmholtz_solve, inverse_fft, leray_project, SpectralVectorField,
    HERMITIAN_TOLERANCE,
};
