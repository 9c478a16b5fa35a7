use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Uniform periodic grid on the cube `[-L/2, L/2)^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    edge_length: f64,
}

impl GridSpec {
    pub fn new(n: usize, edge_length: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "grid size must be even and >= 4, got {n}"
            )));
        }
        if !(edge_length.is_finite() && edge_length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "edge length must be positive, got {edge_length}"
            )));
        }
        Ok(Self { n, edge_length })
    }

    /// Default domain `(-1, 1)^3`.
    pub fn cube(n: usize) -> Result<Self> {
        Self::new(n, 2.0)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.edge_length / self.n as f64
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    #[inline]
    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Lower corner of the box, `-L/2`.
    #[inline]
    pub fn origin(&self) -> f64 {
        -0.5 * self.edge_length
    }

    /// Linear index of node `(i, j, k)`, x fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    /// Node coordinate along one axis.
    #[inline]
    pub fn coord(&self, m: usize) -> f64 {
        self.origin() + m as f64 * self.spacing()
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> Vec3 {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Signed integer frequency of FFT bin `m`, in `[-N/2, N/2)`.
    #[inline]
    pub fn signed_frequency(&self, m: usize) -> i64 {
        let n = self.n as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Angular wavenumber `2 pi m / L` of FFT bin `m`.
    #[inline]
    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * PI * self.signed_frequency(m) as f64 / self.edge_length
    }

    /// Wrap a coordinate into `[-L/2, L/2)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.edge_length;
        if x >= self.origin() && x < self.origin() + l {
            return x;
        }
        let shifted = (x - self.origin()).rem_euclid(l);
        // rem_euclid can round up to exactly l
        let shifted = if shifted >= l { 0.0 } else { shifted };
        self.origin() + shifted
    }
}

/// Three-component real field on a periodic grid, stored x fastest with the
/// components interleaved per node.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.points() * 3],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() * 3 {
            return Err(Error::shape(grid.points() * 3, values.len()));
        }
        Ok(Self { grid, values })
    }

    /// Sample `f` at every node.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(Vec3) -> Vec3) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.points() * 3);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    values.extend_from_slice(&f(grid.node(i, j, k)));
                }
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, node: usize, component: usize) -> f64 {
        self.values[3 * node + component]
    }

    #[inline]
    pub fn set(&mut self, node: usize, component: usize, value: f64) {
        self.values[3 * node + component] = value;
    }

    /// Copy out one component as a contiguous scalar field.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(3).copied().collect()
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { what, index }),
            None => Ok(()),
        }
    }

    pub fn check_same_shape(&self, other: &VectorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::shape(
                format!("{:?}", self.grid),
                format!("{:?}", other.grid),
            ));
        }
        Ok(())
    }

    /// Grid sum of `|u|^2`.
    pub fn sum_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Spatial mean of each component.
    pub fn mean(&self) -> Vec3 {
        let mut acc = [0.0; 3];
        for node in self.values.chunks_exact(3) {
            for c in 0..3 {
                acc[c] += node[c];
            }
        }
        let p = self.grid.points() as f64;
        acc.map(|a| a / p)
    }

    /// Kinetic energy `0.5 sum |u|^2 dx^3` (unit density).
    pub fn energy(&self) -> f64 {
        0.5 * self.sum_squares() * self.grid.cell_volume()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(GridSpec::cube(7).is_err());
        assert!(GridSpec::cube(2).is_err());
        assert!(GridSpec::new(8, 0.0).is_err());
        let g = GridSpec::cube(16).unwrap();
        assert_eq!(g.spacing() * 16.0, 2.0);
    }

    #[test]
    fn signed_frequencies() {
        let g = GridSpec::cube(8).unwrap();
        let f: Vec<i64> = (0..8).map(|m| g.signed_frequency(m)).collect();
        assert_eq!(f, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn wrap_into_box() {
        let g = GridSpec::cube(8).unwrap();
        assert_eq!(g.wrap(1.0), -1.0);
        assert!((g.wrap(1.25) + 0.75).abs() < 1e-15);
        assert!((g.wrap(-1.5) - 0.5).abs() < 1e-15);
        assert_eq!(g.wrap(0.3), 0.3);
    }
}
