//! Truncated spectral convolution.
//!
//! Only the low-frequency block `|m_i| < k_max` (both signs) is ever
//! materialized. Transforms are pruned to that block and process two real
//! channels per complex FFT.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// The kept mode block and the pruned transforms between it and the grid.
#[derive(Clone)]
pub struct ModeSet {
    n: usize,
    modes: usize,
    /// Kept grid indices along one axis: `0..k` then `n-k+1..n`.
    axis: Vec<usize>,
    /// Position along `axis` of the negated index.
    axis_neg: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ModeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModeSet")
            .field("n", &self.n)
            .field("modes", &self.modes)
            .finish()
    }
}

impl ModeSet {
    pub fn new(n: usize, modes: usize) -> Result<Self> {
        if modes == 0 || 2 * modes > n {
            return Err(Error::InvalidArgument(format!(
                "k_max = {modes} must lie in 1..={} for a {n}^3 grid",
                n / 2
            )));
        }
        let mut axis: Vec<usize> = (0..modes).collect();
        axis.extend(n - modes + 1..n);
        let axis_neg = axis
            .iter()
            .map(|&m| {
                let neg = (n - m) % n;
                axis.iter().position(|&a| a == neg).expect("kept set is symmetric")
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            modes,
            axis,
            axis_neg,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Number of kept modes, `(2 k_max - 1)^3`.
    pub fn len(&self) -> usize {
        self.axis.len().pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid index of kept mode `kidx` (x fastest in both orderings).
    pub fn grid_index(&self, kidx: usize) -> usize {
        let a = self.axis.len();
        let (i, j, k) = (kidx % a, (kidx / a) % a, kidx / (a * a));
        self.axis[i] + self.n * (self.axis[j] + self.n * self.axis[k])
    }

    /// Kept index of `-k`.
    pub fn conjugate(&self, kidx: usize) -> usize {
        let a = self.axis.len();
        let (i, j, k) = (kidx % a, (kidx / a) % a, kidx / (a * a));
        self.axis_neg[i] + a * (self.axis_neg[j] + a * self.axis_neg[k])
    }

    /// Unnormalized forward transforms of real `a` (and `b`) restricted to the
    /// kept block, each multiplied by `scale`.
    pub fn forward_kept(&self, a: &[f64], b: Option<&[f64]>, scale: f64, out_a: &mut [Complex64], out_b: &mut [Complex64]) {
        let n = self.n;
        let na = self.axis.len();
        let mut buf: Vec<Complex64> = match b {
            Some(b) => a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect(),
            None => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        };
        let mut scratch = vec![Complex64::default(); self.forward.get_inplace_scratch_len()];
        self.forward.process_with_scratch(&mut buf, &mut scratch);

        // y lines at kept x only
        let mut lines = vec![Complex64::default(); na * n * n];
        for k in 0..n {
            for (ia, &i) in self.axis.iter().enumerate() {
                let line = &mut lines[(ia + na * k) * n..][..n];
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = buf[i + n * (j + n * k)];
                }
            }
        }
        self.forward.process_with_scratch(&mut lines, &mut scratch);
        for k in 0..n {
            for (ia, &i) in self.axis.iter().enumerate() {
                let line = &lines[(ia + na * k) * n..][..n];
                for &j in &self.axis {
                    buf[i + n * (j + n * k)] = line[j];
                }
            }
        }

        // z lines at kept (x, y)
        let mut zl = vec![Complex64::default(); na * na * n];
        for (jb, &j) in self.axis.iter().enumerate() {
            for (ia, &i) in self.axis.iter().enumerate() {
                let line = &mut zl[(ia + na * jb) * n..][..n];
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = buf[i + n * (j + n * k)];
                }
            }
        }
        self.forward.process_with_scratch(&mut zl, &mut scratch);
        let mut x = vec![Complex64::default(); self.len()];
        for jb in 0..na {
            for ia in 0..na {
                let line = &zl[(ia + na * jb) * n..][..n];
                for (kc, &k) in self.axis.iter().enumerate() {
                    x[ia + na * (jb + na * kc)] = line[k];
                }
            }
        }

        match b {
            Some(_) => {
                for m in 0..x.len() {
                    let p = x[self.conjugate(m)].conj();
                    out_a[m] = (x[m] + p) * (0.5 * scale);
                    // (X - conj X_-k) / 2i
                    let d = (x[m] - p) * (0.5 * scale);
                    out_b[m] = Complex64::new(d.im, -d.re);
                }
            }
            None => {
                for (o, v) in out_a.iter_mut().zip(&x) {
                    *o = v * scale;
                }
            }
        }
    }

    /// `Re(F^-1_unscaled(z)) * scale` for spectra supported on the kept block,
    /// for one or two channels.
    pub fn inverse_real(&self, za: &[Complex64], zb: Option<&[Complex64]>, scale: f64, out_a: &mut [f64], out_b: Option<&mut [f64]>) {
        let n = self.n;
        let na = self.axis.len();
        // Hermitian parts, packed as ha + i hb
        let mut h = vec![Complex64::default(); self.len()];
        for (m, slot) in h.iter_mut().enumerate() {
            let c = self.conjugate(m);
            let ha = (za[m] + za[c].conj()) * 0.5;
            *slot = match zb {
                Some(zb) => {
                    let hb = (zb[m] + zb[c].conj()) * 0.5;
                    ha + Complex64::new(-hb.im, hb.re)
                }
                None => ha,
            };
        }
        let mut scratch = vec![Complex64::default(); self.inverse.get_inplace_scratch_len()];

        // z lines at kept (x, y)
        let mut zl = vec![Complex64::default(); na * na * n];
        for jb in 0..na {
            for ia in 0..na {
                let line = &mut zl[(ia + na * jb) * n..][..n];
                for (kc, &k) in self.axis.iter().enumerate() {
                    line[k] = h[ia + na * (jb + na * kc)];
                }
            }
        }
        self.inverse.process_with_scratch(&mut zl, &mut scratch);

        // y lines at kept x
        let mut lines = vec![Complex64::default(); na * n * n];
        for k in 0..n {
            for ia in 0..na {
                let line = &mut lines[(ia + na * k) * n..][..n];
                for (jb, &j) in self.axis.iter().enumerate() {
                    line[j] = zl[(ia + na * jb) * n + k];
                }
            }
        }
        self.inverse.process_with_scratch(&mut lines, &mut scratch);

        let mut buf = vec![Complex64::default(); self.points()];
        for k in 0..n {
            for (ia, &i) in self.axis.iter().enumerate() {
                let line = &lines[(ia + na * k) * n..][..n];
                for (j, v) in line.iter().enumerate() {
                    buf[i + n * (j + n * k)] = *v;
                }
            }
        }
        self.inverse.process_with_scratch(&mut buf, &mut scratch);
        for (o, v) in out_a.iter_mut().zip(&buf) {
            *o = v.re * scale;
        }
        if let Some(out_b) = out_b {
            for (o, v) in out_b.iter_mut().zip(&buf) {
                *o = v.im * scale;
            }
        }
    }

    /// Kept-mode spectra of `channels` real fields stored channel-major,
    /// returned mode-major (`[mode][channel]`).
    pub fn analyze(&self, fields: &[f64], channels: usize, scale: f64) -> Vec<Complex64> {
        let p = self.points();
        let k = self.len();
        let mut out = vec![Complex64::default(); k * channels];
        let mut ta = vec![Complex64::default(); k];
        let mut tb = vec![Complex64::default(); k];
        let mut c = 0;
        while c < channels {
            let a = &fields[c * p..(c + 1) * p];
            let b = (c + 1 < channels).then(|| &fields[(c + 1) * p..(c + 2) * p]);
            self.forward_kept(a, b, scale, &mut ta, &mut tb);
            for m in 0..k {
                out[m * channels + c] = ta[m];
                if b.is_some() {
                    out[m * channels + c + 1] = tb[m];
                }
            }
            c += 2;
        }
        out
    }

    /// Inverse of [`ModeSet::analyze`] layout: `Re(F^-1_unscaled) * scale`
    /// per channel, written channel-major.
    pub fn synthesize(&self, spectra: &[Complex64], channels: usize, scale: f64, out: &mut [f64]) {
        let p = self.points();
        let k = self.len();
        let mut za = vec![Complex64::default(); k];
        let mut zb = vec![Complex64::default(); k];
        let mut c = 0;
        while c < channels {
            let pair = c + 1 < channels;
            for m in 0..k {
                za[m] = spectra[m * channels + c];
                if pair {
                    zb[m] = spectra[m * channels + c + 1];
                }
            }
            let (head, tail) = out[c * p..].split_at_mut(p);
            if pair {
                self.inverse_real(&za, Some(&zb), scale, head, Some(&mut tail[..p]));
            } else {
                self.inverse_real(&za, None, scale, head, None);
            }
            c += 2;
        }
    }
}

/// Contract kept-mode spectra with the complex multiplier:
/// `z[m][o] = sum_i R[m][o][i] v[m][i]`, with `R` stored as interleaved
/// `(re, im)` pairs in `weights`.
pub fn mode_multiply(weights: &[f64], vhat: &[Complex64], modes: usize, width: usize) -> Vec<Complex64> {
    let mut z = vec![Complex64::default(); modes * width];
    for m in 0..modes {
        let v = &vhat[m * width..(m + 1) * width];
        for o in 0..width {
            let r = &weights[2 * (m * width + o) * width..][..2 * width];
            let (mut re, mut im) = (0.0, 0.0);
            for i in 0..width {
                let (a, b) = (r[2 * i], r[2 * i + 1]);
                re += a * v[i].re - b * v[i].im;
                im += a * v[i].im + b * v[i].re;
            }
            z[m * width + o] = Complex64::new(re, im);
        }
    }
    z
}

/// Reverse of [`mode_multiply`]: accumulates `dR += gz conj(v)` into
/// `grad_weights` and returns `gv = sum_o conj(R) gz`.
pub fn mode_multiply_backward(
    weights: &[f64],
    vhat: &[Complex64],
    gz: &[Complex64],
    modes: usize,
    width: usize,
    grad_weights: &mut [f64],
) -> Vec<Complex64> {
    let mut gv = vec![Complex64::default(); modes * width];
    for m in 0..modes {
        let v = &vhat[m * width..(m + 1) * width];
        let g = &gz[m * width..(m + 1) * width];
        let gvm = &mut gv[m * width..(m + 1) * width];
        for o in 0..width {
            let base = 2 * (m * width + o) * width;
            let r = &weights[base..base + 2 * width];
            let gr = &mut grad_weights[base..base + 2 * width];
            let go = g[o];
            for i in 0..width {
                // gz * conj(v)
                gr[2 * i] += go.re * v[i].re + go.im * v[i].im;
                gr[2 * i + 1] += go.im * v[i].re - go.re * v[i].im;
                // conj(r) * gz
                let (a, b) = (r[2 * i], r[2 * i + 1]);
                gvm[i].re += a * go.re + b * go.im;
                gvm[i].im += a * go.im - b * go.re;
            }
        }
    }
    gv
}

/// `Re(F^-1(R . F(v)))` on the kept modes for a channel-major field of
/// `width` channels.
pub fn spectral_conv(set: &ModeSet, weights: &[f64], v: &[f64], width: usize) -> Vec<f64> {
    let vhat = set.analyze(v, width, 1.0);
    let z = mode_multiply(weights, &vhat, set.len(), width);
    let mut out = vec![0.0; v.len()];
    set.synthesize(&z, width, 1.0 / set.points() as f64, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{fft3_forward, Fft3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn mode_counts_and_bounds() {
        assert_eq!(ModeSet::new(16, 6).unwrap().len(), 11usize.pow(3));
        assert_eq!(ModeSet::new(8, 4).unwrap().len(), 343);
        assert!(ModeSet::new(8, 5).is_err());
        assert!(ModeSet::new(8, 0).is_err());
    }

    #[test]
    fn pruned_forward_matches_full_fft() {
        let set = ModeSet::new(8, 3).unwrap();
        let a = random(512, 1);
        let b = random(512, 2);
        let (fa, fb) = (fft3_forward(8, &a), fft3_forward(8, &b));
        let mut oa = vec![Complex64::default(); set.len()];
        let mut ob = oa.clone();
        set.forward_kept(&a, Some(&b), 1.0, &mut oa, &mut ob);
        for m in 0..set.len() {
            let g = set.grid_index(m);
            assert!((oa[m] - fa[g]).norm() < 1e-11);
            assert!((ob[m] - fb[g]).norm() < 1e-11);
        }
        set.forward_kept(&a, None, 2.0, &mut oa, &mut ob);
        assert!((oa[7] - fa[set.grid_index(7)] * 2.0).norm() < 1e-11);
    }

    #[test]
    fn pruned_inverse_matches_full_fft() {
        let set = ModeSet::new(8, 2).unwrap();
        let za: Vec<Complex64> = random(2 * set.len(), 3).chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let zb: Vec<Complex64> = random(2 * set.len(), 4).chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let fft = Fft3::new(8);
        let full = |z: &[Complex64]| {
            let mut buf = vec![Complex64::default(); 512];
            for (m, v) in z.iter().enumerate() {
                buf[set.grid_index(m)] = *v;
            }
            fft.inverse_unscaled(&mut buf);
            buf.iter().map(|c| c.re).collect::<Vec<_>>()
        };
        let (ra, rb) = (full(&za), full(&zb));
        let mut oa = vec![0.0; 512];
        let mut ob = vec![0.0; 512];
        set.inverse_real(&za, Some(&zb), 1.0, &mut oa, Some(&mut ob));
        for p in 0..512 {
            assert!((oa[p] - ra[p]).abs() < 1e-11);
            assert!((ob[p] - rb[p]).abs() < 1e-11);
        }
    }

    #[test]
    fn zero_multiplier_gives_zero() {
        let set = ModeSet::new(8, 2).unwrap();
        let v = random(3 * 512, 5);
        let w = vec![0.0; 2 * set.len() * 9];
        assert!(spectral_conv(&set, &w, &v, 3).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn identity_multiplier_passes_kept_modes() {
        let set = ModeSet::new(8, 3).unwrap();
        let n = 8;
        let w0 = 2.0 * std::f64::consts::PI / n as f64;
        let v: Vec<f64> = (0..512)
            .map(|p| {
                let (i, j, k) = (p % n, (p / n) % n, p / (n * n));
                (w0 * i as f64).cos() + 0.5 * (2.0 * w0 * j as f64 - w0 * k as f64).sin() + 0.25
            })
            .collect();
        let mut w = vec![0.0; 2 * set.len()];
        for m in 0..set.len() {
            w[2 * m] = 1.0;
        }
        let out = spectral_conv(&set, &w, &v, 1);
        for (a, b) in out.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_modes_are_invisible() {
        let set = ModeSet::new(16, 4).unwrap();
        let n = 16;
        let w = random(2 * set.len() * 4, 6);
        let base = random(2 * 4096, 7);
        // frequency k_max and k_max + 1 along x, outside the kept block
        let mut bumped = base.clone();
        for p in 0..4096 {
            let i = (p % n) as f64;
            bumped[p] += (2.0 * std::f64::consts::PI * 5.0 * i / n as f64).cos();
            bumped[4096 + p] += (2.0 * std::f64::consts::PI * 4.0 * i / n as f64).sin();
        }
        let a = spectral_conv(&set, &w, &base, 2);
        let b = spectral_conv(&set, &w, &bumped, 2);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        let pure: Vec<f64> = (0..4096)
            .map(|p| (2.0 * std::f64::consts::PI * 5.0 * (p % n) as f64 / n as f64).cos())
            .collect();
        let w1 = random(2 * set.len(), 8);
        assert!(spectral_conv(&set, &w1, &pure, 1).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn output_is_real_for_non_hermitian_multiplier() {
        // the Re() is exact: compare with a brute force Hermitianized multiplier
        let set = ModeSet::new(8, 2).unwrap();
        let v = random(512, 9);
        let w = random(2 * set.len(), 10);
        let out = spectral_conv(&set, &w, &v, 1);
        let fv = fft3_forward(8, &v);
        let mut spec = vec![Complex64::default(); 512];
        for m in 0..set.len() {
            let r = Complex64::new(w[2 * m], w[2 * m + 1]);
            let c = set.conjugate(m);
            let rc = Complex64::new(w[2 * c], w[2 * c + 1]);
            spec[set.grid_index(m)] = (r + rc.conj()) * 0.5 * fv[set.grid_index(m)];
        }
        let back = crate::field::fft3_inverse(8, spec);
        for (a, b) in out.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
