use serde::{Deserialize, Serialize};

use super::{dist, sub, TriMesh};
use crate::{Error, Result, Vec3};

/// Stiffnesses of the stand-in membrane law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembraneParams {
    /// Hookean edge-spring stiffness `k_s`.
    pub spring_stiffness: f64,
    /// Bending stiffness `k_b` of the squared-Laplacian energy.
    pub bending_stiffness: f64,
}

impl MembraneParams {
    pub fn new(spring_stiffness: f64, bending_stiffness: f64) -> Result<Self> {
        let p = Self {
            spring_stiffness,
            bending_stiffness,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("spring_stiffness", self.spring_stiffness),
            ("bending_stiffness", self.bending_stiffness),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Source of nodal membrane forces `F_k`. Any model plugged in here should
/// yield forces that sum to zero.
pub trait MembraneModel {
    fn forces(&self, mesh: &TriMesh) -> Vec<Vec3>;
}

/// Edge springs against the rest lengths plus a graph-Laplacian bending term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringBending(pub MembraneParams);

impl MembraneModel for SpringBending {
    fn forces(&self, mesh: &TriMesh) -> Vec<Vec3> {
        membrane_force(mesh, &self.0)
    }
}

/// Uniform-weight umbrella operator `(L X)_i = sum_{j ~ i} (X_j - X_i)`.
fn umbrella(mesh: &TriMesh, x: &[Vec3]) -> Vec<Vec3> {
    (0..x.len())
        .map(|i| {
            let mut acc = [0.0; 3];
            for &j in mesh.neighbours(i) {
                for a in 0..3 {
                    acc[a] += x[j][a] - x[i][a];
                }
            }
            acc
        })
        .collect()
}

/// `F = F_spring + F_bend`, the negative gradient of
/// `k_s/2 sum_e (|e| - e_0)^2 + k_b/2 sum_i |(L X)_i|^2`.
pub fn membrane_force(mesh: &TriMesh, params: &MembraneParams) -> Vec<Vec3> {
    let x = mesh.vertices();
    let mut force = vec![[0.0; 3]; x.len()];

    if params.spring_stiffness != 0.0 {
        for (&[a, b], &rest) in mesh.edges().iter().zip(mesh.rest_edge_lengths()) {
            let d = sub(x[b], x[a]);
            let len = dist(x[b], x[a]);
            if len == 0.0 {
                continue;
            }
            let scale = params.spring_stiffness * (len - rest) / len;
            for c in 0..3 {
                force[a][c] += scale * d[c];
                force[b][c] -= scale * d[c];
            }
        }
    }

    if params.bending_stiffness != 0.0 {
        // L is symmetric, so grad of k_b/2 |LX|^2 is k_b L(LX)
        let lx = umbrella(mesh, x);
        let llx = umbrella(mesh, &lx);
        for (f, g) in force.iter_mut().zip(&llx) {
            for c in 0..3 {
                f[c] -= params.bending_stiffness * g[c];
            }
        }
    }
    force
}

pub fn spring_energy(mesh: &TriMesh, spring_stiffness: f64) -> f64 {
    let x = mesh.vertices();
    mesh.edges()
        .iter()
        .zip(mesh.rest_edge_lengths())
        .map(|(&[a, b], &rest)| {
            let s = dist(x[a], x[b]) - rest;
            0.5 * spring_stiffness * s * s
        })
        .sum()
}

pub fn bending_energy(mesh: &TriMesh, bending_stiffness: f64) -> f64 {
    let lx = umbrella(mesh, mesh.vertices());
    0.5 * bending_stiffness
        * lx.iter()
            .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
            .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::mesh::{dot, make_ellipsoid, make_icosphere, norm};

    fn perturbed(seed: u64) -> TriMesh {
        let base = make_ellipsoid(2, [0.4, 0.3, 0.35], [0.1, 0.0, -0.1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let moved = base
            .vertices()
            .iter()
            .map(|v| v.map(|c| c + rng.gen_range(-0.03..0.03)))
            .collect();
        base.with_positions(moved).unwrap()
    }

    fn max_norm(f: &[Vec3]) -> f64 {
        f.iter().map(|v| norm(*v)).fold(0.0, f64::max)
    }

    #[test]
    fn rest_shape_is_force_free_without_bending() {
        let m = make_icosphere(2, 0.5, [0.0; 3]).unwrap();
        let f = membrane_force(&m, &MembraneParams::new(3.0, 0.0).unwrap());
        assert!(f.iter().all(|v| v.iter().all(|c| c.abs() < 1e-14)));
    }

    #[test]
    fn inflated_sphere_pulls_inward_uniformly() {
        let m = make_icosphere(0, 0.5, [0.0; 3]).unwrap();
        let inflated = m
            .with_positions(m.vertices().iter().map(|v| v.map(|c| 1.1 * c)).collect())
            .unwrap();
        let f = membrane_force(&inflated, &MembraneParams::new(2.0, 0.0).unwrap());
        let mag0 = norm(f[0]);
        assert!(mag0 > 0.0);
        for (fv, x) in f.iter().zip(inflated.vertices()) {
            // anti-parallel to the position
            let cos = dot(*fv, *x) / (norm(*fv) * norm(*x));
            assert!((cos + 1.0).abs() < 1e-12);
            assert!((norm(*fv) - mag0).abs() < 1e-12);
        }
    }

    #[test]
    fn total_force_vanishes() {
        for seed in 0..5 {
            let m = perturbed(seed);
            let f = membrane_force(&m, &MembraneParams::new(5.0, 0.7).unwrap());
            let mut total = [0.0; 3];
            for v in &f {
                for c in 0..3 {
                    total[c] += v[c];
                }
            }
            assert!(norm(total) <= 1e-10 * max_norm(&f), "{total:?}");
        }
    }

    /// Central finite differences of the energy along a random direction.
    fn directional_check(params: MembraneParams, energy: impl Fn(&TriMesh) -> f64) {
        let m = perturbed(11);
        let f = membrane_force(&m, &params);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dir: Vec<Vec3> = (0..m.vertex_count())
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let h = 1e-6;
        let shift = |s: f64| {
            let moved = m
                .vertices()
                .iter()
                .zip(&dir)
                .map(|(v, d)| [v[0] + s * d[0], v[1] + s * d[1], v[2] + s * d[2]])
                .collect();
            m.with_positions(moved).unwrap()
        };
        let fd = (energy(&shift(h)) - energy(&shift(-h))) / (2.0 * h);
        let analytic: f64 = -f.iter().zip(&dir).map(|(a, b)| dot(*a, *b)).sum::<f64>();
        assert!(((fd - analytic) / analytic).abs() < 1e-6, "{fd} vs {analytic}");
    }

    #[test]
    fn spring_force_is_energy_gradient() {
        directional_check(MembraneParams::new(4.0, 0.0).unwrap(), |m| spring_energy(m, 4.0));
    }

    #[test]
    fn bending_force_is_energy_gradient() {
        directional_check(MembraneParams::new(0.0, 0.3).unwrap(), |m| bending_energy(m, 0.3));
    }

    #[test]
    fn params_validate() {
        assert!(MembraneParams::new(-1.0, 0.0).is_err());
        assert!(MembraneParams::new(1.0, f64::NAN).is_err());
    }
}
