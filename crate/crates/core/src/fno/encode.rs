//! Conversion between interleaved velocity frames and the channel-major
//! tensors the operator consumes.

use super::FnoConfig;
use crate::dataset::Normalizer;
use crate::{Error, Result};

/// Normalized input: `3 in_steps` velocity channels (frame-major, then
/// component), 3 coordinate channels in `[-1, 1)`, then the optional mask.
pub fn encode_input<F, T>(config: &FnoConfig, normalizer: &Normalizer, frames: &[F], mask: Option<&[f64]>) -> Result<Vec<f64>>
where
    F: AsRef<[T]>,
    T: Copy + Into<f64>,
{
    let n = config.grid_n;
    let p = config.points();
    if frames.len() != config.in_steps {
        return Err(Error::shape(format!("{} input frames", config.in_steps), frames.len()));
    }
    let mut out = vec![0.0; config.in_channels() * p];
    write_velocity(&mut out, frames, p, |c, v| normalizer.normalize_input(c, v))?;
    let base = 3 * config.in_steps * p;
    for q in 0..p {
        let idx = [q % n, (q / n) % n, q / (n * n)];
        for (axis, &m) in idx.iter().enumerate() {
            out[base + axis * p + q] = -1.0 + 2.0 * m as f64 / n as f64;
        }
    }
    match (config.membrane_mask, mask) {
        (true, Some(mask)) if mask.len() == p => out[base + 3 * p..].copy_from_slice(mask),
        (true, Some(mask)) => return Err(Error::shape(p, mask.len())),
        (true, None) => return Err(Error::InvalidArgument("model expects a membrane mask channel".into())),
        (false, _) => {}
    }
    Ok(out)
}

/// Physical label tensor, `3 out_steps` channels.
pub fn encode_target<F, T>(config: &FnoConfig, frames: &[F]) -> Result<Vec<f64>>
where
    F: AsRef<[T]>,
    T: Copy + Into<f64>,
{
    let p = config.points();
    if frames.len() != config.out_steps {
        return Err(Error::shape(format!("{} label frames", config.out_steps), frames.len()));
    }
    let mut out = vec![0.0; config.out_channels() * p];
    write_velocity(&mut out, frames, p, |_, v| v)?;
    Ok(out)
}

/// Split a channel-major output back into interleaved frames.
pub fn decode_output(config: &FnoConfig, output: &[f64]) -> Result<Vec<Vec<f64>>> {
    let p = config.points();
    if output.len() != config.out_channels() * p {
        return Err(Error::shape(config.out_channels() * p, output.len()));
    }
    Ok((0..config.out_steps)
        .map(|t| {
            let mut frame = vec![0.0; 3 * p];
            for c in 0..3 {
                let row = &output[(3 * t + c) * p..][..p];
                for (q, &v) in row.iter().enumerate() {
                    frame[3 * q + c] = v;
                }
            }
            frame
        })
        .collect())
}

fn write_velocity<F, T>(out: &mut [f64], frames: &[F], p: usize, f: impl Fn(usize, f64) -> f64) -> Result<()>
where
    F: AsRef<[T]>,
    T: Copy + Into<f64>,
{
    for (t, frame) in frames.iter().enumerate() {
        let frame = frame.as_ref();
        if frame.len() != 3 * p {
            return Err(Error::shape(3 * p, frame.len()));
        }
        for (q, node) in frame.chunks_exact(3).enumerate() {
            for c in 0..3 {
                out[(3 * t + c) * p + q] = f(c, node[c].into());
            }
        }
    }
    Ok(())
}
