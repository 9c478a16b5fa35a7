use serde::{Deserialize, Serialize};

use crate::Vec3;

/// Lower bound applied to every fitted standard deviation.
pub const STD_FLOOR: f64 = 1e-8;

/// Per-velocity-component statistics, pooled over all frames of the training
/// inputs (and, separately, the labels).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub input_mean: Vec3,
    pub input_std: Vec3,
    pub output_mean: Vec3,
    pub output_std: Vec3,
}

impl Default for Normalizer {
    fn default() -> Self {
        Self::identity()
    }
}

#[derive(Default)]
struct Moments {
    count: f64,
    sum: [f64; 3],
    sum_sq: [f64; 3],
}

impl Moments {
    fn add(&mut self, frame: &[f32], weight: f64) {
        for node in frame.chunks_exact(3) {
            for c in 0..3 {
                let v = node[c] as f64;
                self.sum[c] += weight * v;
                self.sum_sq[c] += weight * v * v;
            }
        }
        self.count += weight * (frame.len() / 3) as f64;
    }

    fn finish(&self) -> (Vec3, Vec3) {
        if self.count == 0.0 {
            return ([0.0; 3], [1.0; 3]);
        }
        let mean = self.sum.map(|s| s / self.count);
        let mut std = [0.0; 3];
        for c in 0..3 {
            let var = (self.sum_sq[c] / self.count - mean[c] * mean[c]).max(0.0);
            std[c] = var.sqrt().max(STD_FLOOR);
        }
        (mean, std)
    }
}

impl Normalizer {
    pub fn identity() -> Self {
        Self {
            input_mean: [0.0; 3],
            input_std: [1.0; 3],
            output_mean: [0.0; 3],
            output_std: [1.0; 3],
        }
    }

    /// Fit from weighted interleaved frames; a frame used by several windows
    /// carries that multiplicity as its weight.
    pub fn fit<'a>(
        inputs: impl IntoIterator<Item = (&'a [f32], f64)>,
        outputs: impl IntoIterator<Item = (&'a [f32], f64)>,
    ) -> Self {
        let mut inp = Moments::default();
        for (f, w) in inputs {
            inp.add(f, w);
        }
        let mut out = Moments::default();
        for (f, w) in outputs {
            out.add(f, w);
        }
        let (input_mean, input_std) = inp.finish();
        let (output_mean, output_std) = out.finish();
        Self {
            input_mean,
            input_std,
            output_mean,
            output_std,
        }
    }

    #[inline]
    pub fn normalize_input(&self, component: usize, v: f64) -> f64 {
        (v - self.input_mean[component]) / self.input_std[component]
    }

    #[inline]
    pub fn denormalize_input(&self, component: usize, v: f64) -> f64 {
        v * self.input_std[component] + self.input_mean[component]
    }

    #[inline]
    pub fn normalize_output(&self, component: usize, v: f64) -> f64 {
        (v - self.output_mean[component]) / self.output_std[component]
    }

    #[inline]
    pub fn denormalize_output(&self, component: usize, v: f64) -> f64 {
        v * self.output_std[component] + self.output_mean[component]
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn constant_data_floors_std() {
        let frame = vec![2.0f32; 30];
        let n = Normalizer::fit([(&frame[..], 1.0)], [(&frame[..], 2.0)]);
        assert_eq!(n.input_mean, [2.0; 3]);
        assert_eq!(n.input_std, [STD_FLOOR; 3]);
    }

    proptest! {
        #[test]
        fn round_trip(mean in -5.0f64..5.0, std in 1e-3f64..10.0, x in -100.0f64..100.0) {
            let n = Normalizer {
                input_mean: [mean; 3],
                input_std: [std; 3],
                output_mean: [-mean; 3],
                output_std: [std * 2.0; 3],
            };
            for c in 0..3 {
                prop_assert!((n.denormalize_input(c, n.normalize_input(c, x)) - x).abs() <= 1e-6 * x.abs().max(1.0));
                prop_assert!((n.denormalize_output(c, n.normalize_output(c, x)) - x).abs() <= 1e-6 * x.abs().max(1.0));
            }
        }
    }
}
