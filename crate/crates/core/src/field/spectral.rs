use num_complex::Complex64;

use super::fft::Fft3;
use super::grid::{GridSpec, VectorField};
use crate::{Error, Result};

/// Relative tolerance on `|c(k) - conj(c(-k))|` accepted by [`inverse_fft`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Full (not half) spectrum of a three-component field. Coefficients are
/// stored component-major, each component x fastest over FFT bins.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    grid: GridSpec,
    coeffs: [Vec<Complex64>; 3],
}

impl SpectralVectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        let p = grid.points();
        Self {
            grid,
            coeffs: [
                vec![Complex64::default(); p],
                vec![Complex64::default(); p],
                vec![Complex64::default(); p],
            ],
        }
    }

    pub fn from_components(grid: GridSpec, coeffs: [Vec<Complex64>; 3]) -> Result<Self> {
        for c in &coeffs {
            if c.len() != grid.points() {
                return Err(Error::shape(grid.points(), c.len()));
            }
        }
        Ok(Self { grid, coeffs })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    #[inline]
    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.coeffs[c]
    }

    /// Wavevector of bin `index`.
    pub fn wavevector(&self, index: usize) -> [f64; 3] {
        let n = self.grid.n();
        let i = index % n;
        let j = (index / n) % n;
        let k = index / (n * n);
        [
            self.grid.wavenumber(i),
            self.grid.wavenumber(j),
            self.grid.wavenumber(k),
        ]
    }

    /// Bin index of `-k` for bin `index`.
    pub fn conjugate_index(&self, index: usize) -> usize {
        let n = self.grid.n();
        let i = index % n;
        let j = (index / n) % n;
        let k = index / (n * n);
        self.grid.index((n - i) % n, (n - j) % n, (n - k) % n)
    }

    /// Largest `|c(k) - conj(c(-k))|` relative to the largest coefficient, or to one if that is smaller.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for comp in &self.coeffs {
            for (idx, c) in comp.iter().enumerate() {
                let partner = comp[self.conjugate_index(idx)];
                worst = worst.max((c - partner.conj()).norm());
                scale = scale.max(c.norm());
            }
        }
        // absolute below unit scale, so round-off residue of a cancelled field passes
        worst / scale.max(1.0)
    }

    /// `max_k |k . u_k| / max_k |k| |u_k|`: zero for a solenoidal field.
    pub fn divergence_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for idx in 0..self.grid.points() {
            let k = self.wavevector(idx);
            let kk = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
            let mut div = Complex64::default();
            let mut mag = 0.0;
            for c in 0..3 {
                div += self.coeffs[c][idx] * k[c];
                mag += self.coeffs[c][idx].norm_sqr();
            }
            worst = worst.max(div.norm());
            scale = scale.max(kk * mag.sqrt());
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Grid-convention Parseval sum `N^-3 sum |c|^2`.
    pub fn parseval_sum(&self) -> f64 {
        let total: f64 = self
            .coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|c| c.norm_sqr())
            .sum();
        total / self.grid.points() as f64
    }

    /// Zero the `k = 0` mode of every component.
    pub fn remove_mean(&mut self) {
        for comp in &mut self.coeffs {
            comp[0] = Complex64::default();
        }
    }
}

/// Unnormalized forward transform of each component.
pub fn forward_fft(field: &VectorField) -> Result<SpectralVectorField> {
    field.check_finite("forward_fft input")?;
    let grid = *field.grid();
    let fft = Fft3::shared(grid.n());
    let coeffs = [0, 1, 2].map(|c| {
        let mut buf: Vec<Complex64> = field
            .values()
            .iter()
            .skip(c)
            .step_by(3)
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft.forward(&mut buf);
        buf
    });
    Ok(SpectralVectorField { grid, coeffs })
}

/// Inverse transform back to a real field; rejects spectra that are not
/// Hermitian to [`HERMITIAN_TOLERANCE`].
pub fn inverse_fft(spec: &SpectralVectorField) -> Result<VectorField> {
    let asymmetry = spec.hermitian_asymmetry();
    if asymmetry > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian {
            asymmetry,
            tolerance: HERMITIAN_TOLERANCE,
        });
    }
    let grid = spec.grid;
    let fft = Fft3::shared(grid.n());
    let mut field = VectorField::zeros(grid);
    for c in 0..3 {
        let mut buf = spec.coeffs[c].clone();
        fft.inverse(&mut buf);
        for (node, v) in buf.iter().enumerate() {
            field.set(node, c, v.re);
        }
    }
    Ok(field)
}

/// Leray projection `u_k <- (I - k k^T / |k|^2) u_k` for `k != 0`; the mean
/// mode is left untouched. On even grids, bins carrying a Nyquist index are
/// zeroed: they are their own conjugate along that axis, so the projector
/// would break Hermitian symmetry there.
pub fn leray_project(spec: &SpectralVectorField) -> SpectralVectorField {
    let mut out = spec.clone();
    let n = spec.grid.n();
    let nyquist = |m: usize| n % 2 == 0 && m == n / 2;
    for idx in 1..spec.grid.points() {
        if nyquist(idx % n) || nyquist((idx / n) % n) || nyquist(idx / (n * n)) {
            for c in 0..3 {
                out.coeffs[c][idx] = Complex64::default();
            }
            continue;
        }
        let k = spec.wavevector(idx);
        let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if kk == 0.0 {
            continue;
        }
        let dot = (spec.coeffs[0][idx] * k[0]
            + spec.coeffs[1][idx] * k[1]
            + spec.coeffs[2][idx] * k[2])
            / kk;
        for c in 0..3 {
            out.coeffs[c][idx] = spec.coeffs[c][idx] - dot * k[c];
        }
    }
    out
}

/// Modewise inverse of `(a - b Laplacian)`: `u_k / (a + b |k|^2)`.
pub fn helmholtz_solve(spec: &SpectralVectorField, a: f64, b: f64) -> Result<SpectralVectorField> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "helmholtz shift must be positive, got a = {a}"
        )));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "helmholtz coefficient must be non-negative, got b = {b}"
        )));
    }
    let mut out = spec.clone();
    for idx in 0..spec.grid.points() {
        let k = spec.wavevector(idx);
        let denom = a + b * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        for c in 0..3 {
            out.coeffs[c][idx] /= denom;
        }
    }
    Ok(out)
}
