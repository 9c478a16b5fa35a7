use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Cached complex 3-D FFT for an `N^3` cube stored x fastest.
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Process-wide plan for size `n`.
    pub fn shared(n: usize) -> Arc<Fft3> {
        let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut plans = plans.lock().expect("fft plan cache poisoned");
        plans
            .entry(n)
            .or_insert_with(|| Arc::new(Fft3::new(n)))
            .clone()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &*self.forward);
    }

    /// Inverse transform in place, scaled by `1/N^3`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &*self.inverse);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Inverse transform without the `1/N^3` factor.
    pub fn inverse_unscaled(&self, data: &mut [Complex64]) {
        self.transform(data, &*self.inverse);
    }

    fn transform(&self, data: &mut [Complex64], plan: &dyn Fft<f64>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "fft buffer has wrong length");
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // x lines are contiguous
        plan.process_with_scratch(data, &mut scratch);

        let mut lines = vec![Complex64::default(); data.len()];
        // y lines: gather (x, z) -> line of y
        for k in 0..n {
            for i in 0..n {
                let line = &mut lines[(i + n * k) * n..(i + n * k + 1) * n];
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[i + n * (j + n * k)];
                }
            }
        }
        plan.process_with_scratch(&mut lines, &mut scratch);
        for k in 0..n {
            for i in 0..n {
                let line = &lines[(i + n * k) * n..(i + n * k + 1) * n];
                for (j, v) in line.iter().enumerate() {
                    data[i + n * (j + n * k)] = *v;
                }
            }
        }

        // z lines
        for j in 0..n {
            for i in 0..n {
                let line = &mut lines[(i + n * j) * n..(i + n * j + 1) * n];
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[i + n * (j + n * k)];
                }
            }
        }
        plan.process_with_scratch(&mut lines, &mut scratch);
        for j in 0..n {
            for i in 0..n {
                let line = &lines[(i + n * j) * n..(i + n * j + 1) * n];
                for (k, v) in line.iter().enumerate() {
                    data[i + n * (j + n * k)] = *v;
                }
            }
        }
    }
}

/// Forward transform of a real scalar field.
pub fn fft3_forward(n: usize, real: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = real.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Fft3::shared(n).forward(&mut buf);
    buf
}

/// Inverse transform returning the real part.
pub fn fft3_inverse(n: usize, mut spec: Vec<Complex64>) -> Vec<f64> {
    Fft3::shared(n).inverse(&mut spec);
    spec.into_iter().map(|c| c.re).collect()
}
