//! Fourier neural operator: lift, stacked Fourier layers, two-stage
//! projection. Gradients are written out by hand; everything runs in `f64`.

mod adam;
mod checkpoint;
mod config;
mod encode;
mod linalg;
mod model;
mod spectral;
mod train;

pub use adam::AdamState;
pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use config::{FnoConfig, LayerLayout, Layout};
pub use encode::{decode_output, encode_input, encode_target};
pub use model::{loss_rel_l2, loss_rel_l2_grad, LossValue, Model, Trace};
pub use spectral::{mode_multiply, mode_multiply_backward, spectral_conv, ModeSet};
pub use train::{train, Sample, SampleSource, TrainOptions, TrainReport};
