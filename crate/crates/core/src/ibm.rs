//! Fluid <-> membrane transfer: the 4-point regularized delta, force
//! spreading, velocity interpolation, the imposed elongation flow and the
//! explicit vesicle position update.

use serde::{Deserialize, Serialize};

use crate::field::{GridSpec, VectorField};
use crate::mesh::TriMesh;
use crate::{Error, Result, Vec3};

/// Standard 4-point immersed-boundary kernel on `|r| <= 2`.
pub fn phi(r: f64) -> f64 {
    let r = r.abs();
    if r <= 1.0 {
        (3.0 - 2.0 * r + (1.0 + 4.0 * r - 4.0 * r * r).sqrt()) / 8.0
    } else if r <= 2.0 {
        (5.0 - 2.0 * r - (-7.0 + 12.0 * r - 4.0 * r * r).max(0.0).sqrt()) / 8.0
    } else {
        0.0
    }
}

/// `delta_a(x) = prod_i phi(x_i / a) / a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaKernel {
    pub support_width: f64,
}

impl DeltaKernel {
    /// `a = dx`, the only width for which the discrete moment conditions hold exactly.
    pub fn for_grid(grid: &GridSpec) -> Self {
        Self {
            support_width: grid.spacing(),
        }
    }
}

/// Nonzero 1-D weights `phi((x_m - X)/a) dx / a`, with wrapped node indices.
struct AxisStencil {
    nodes: Vec<usize>,
    weights: Vec<f64>,
}

fn axis_stencil(grid: &GridSpec, kernel: &DeltaKernel, x: f64) -> AxisStencil {
    let dx = grid.spacing();
    let a = kernel.support_width;
    let n = grid.n() as i64;
    let s = (grid.wrap(x) - grid.origin()) / dx;
    let reach = 2.0 * a / dx;
    let lo = (s - reach).floor() as i64;
    let hi = (s + reach).ceil() as i64;
    let mut nodes = Vec::with_capacity((hi - lo + 1) as usize);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for m in lo..=hi {
        let w = phi((m as f64 - s) * dx / a) * dx / a;
        if w != 0.0 {
            nodes.push(m.rem_euclid(n) as usize);
            weights.push(w);
        }
    }
    AxisStencil { nodes, weights }
}

fn stencil(grid: &GridSpec, kernel: &DeltaKernel, x: Vec3) -> [AxisStencil; 3] {
    [
        axis_stencil(grid, kernel, x[0]),
        axis_stencil(grid, kernel, x[1]),
        axis_stencil(grid, kernel, x[2]),
    ]
}

/// Visit `(node, w)` with `w = delta_a(x_m - X) dx^3`.
fn for_each_weight(grid: &GridSpec, kernel: &DeltaKernel, x: Vec3, mut f: impl FnMut(usize, f64)) {
    let [sx, sy, sz] = stencil(grid, kernel, x);
    for (&k, &wz) in sz.nodes.iter().zip(&sz.weights) {
        for (&j, &wy) in sy.nodes.iter().zip(&sy.weights) {
            let wyz = wy * wz;
            for (&i, &wx) in sx.nodes.iter().zip(&sx.weights) {
                f(grid.index(i, j, k), wx * wyz);
            }
        }
    }
}

/// `sum_m delta_a(x_m - X) dx^3`; equals 1 when `a = dx`.
pub fn partition_of_unity(grid: &GridSpec, kernel: &DeltaKernel, x: Vec3) -> f64 {
    let mut total = 0.0;
    for_each_weight(grid, kernel, x, |_, w| total += w);
    total
}

/// `f(x_m) = sum_k delta_a(x_m - X_k) F_k`, one lumped force per vertex.
pub fn spread_force(
    mesh: &TriMesh,
    forces: &[Vec3],
    grid: &GridSpec,
    kernel: &DeltaKernel,
) -> Result<VectorField> {
    spread_points(mesh.vertices(), forces, grid, kernel)
}

/// Point-cloud form of [`spread_force`].
pub fn spread_points(
    points: &[Vec3],
    forces: &[Vec3],
    grid: &GridSpec,
    kernel: &DeltaKernel,
) -> Result<VectorField> {
    if points.len() != forces.len() {
        return Err(Error::shape(points.len(), forces.len()));
    }
    let inv_cell = 1.0 / grid.cell_volume();
    let mut field = VectorField::zeros(*grid);
    let values = field.values_mut();
    // Sequential scatter in vertex order keeps the accumulation reproducible.
    for (x, f) in points.iter().zip(forces) {
        for_each_weight(grid, kernel, *x, |node, w| {
            let w = w * inv_cell;
            values[3 * node] += w * f[0];
            values[3 * node + 1] += w * f[1];
            values[3 * node + 2] += w * f[2];
        });
    }
    Ok(field)
}

/// `U_k = sum_m delta_a(x_m - X_k) u(x_m) dx^3`.
pub fn interpolate_velocity(field: &VectorField, mesh: &TriMesh, kernel: &DeltaKernel) -> Vec<Vec3> {
    interpolate_points(field, mesh.vertices(), kernel)
}

pub fn interpolate_points(field: &VectorField, points: &[Vec3], kernel: &DeltaKernel) -> Vec<Vec3> {
    let grid = *field.grid();
    let values = field.values();
    points
        .iter()
        .map(|x| {
            let mut u = [0.0; 3];
            for_each_weight(&grid, kernel, *x, |node, w| {
                u[0] += w * values[3 * node];
                u[1] += w * values[3 * node + 1];
                u[2] += w * values[3 * node + 2];
            });
            u
        })
        .collect()
}

/// Scalar indicator of the membrane: the wrapped kernel weights of every
/// vertex summed on the grid and clipped to 1.
pub fn paint_indicator(points: &[Vec3], grid: &GridSpec, kernel: &DeltaKernel) -> Vec<f64> {
    let mut mask = vec![0.0; grid.points()];
    for x in points {
        for_each_weight(grid, kernel, *x, |node, w| mask[node] += w);
    }
    for v in &mut mask {
        *v = v.min(1.0);
    }
    mask
}

/// Direction of the elongation flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowOrientation {
    /// `u = (g x, -g y, 0)`.
    Forward,
    /// `u = (-g x, g y, 0)`.
    Reversed,
}

impl FlowOrientation {
    pub fn sign(self) -> f64 {
        match self {
            FlowOrientation::Forward => 1.0,
            FlowOrientation::Reversed => -1.0,
        }
    }
}

/// Imposed planar elongation flow `u_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExternalFlow {
    pub rate: f64,
    pub orientation: FlowOrientation,
}

impl ExternalFlow {
    pub fn new(rate: f64, orientation: FlowOrientation) -> Self {
        Self { rate, orientation }
    }

    #[inline]
    pub fn velocity(&self, x: Vec3) -> Vec3 {
        let g = self.orientation.sign() * self.rate;
        [g * x[0], -g * x[1], 0.0]
    }
}

pub fn external_velocity(points: &[Vec3], flow: &ExternalFlow) -> Vec<Vec3> {
    points.iter().map(|x| flow.velocity(*x)).collect()
}

/// One explicit step `X <- X + (I[u_ind](X) + u_inf(X)) dt`, wrapped into the box.
pub fn advance_vesicle(
    mesh: &TriMesh,
    u_ind: &VectorField,
    flow: &ExternalFlow,
    dt: f64,
    kernel: &DeltaKernel,
) -> Result<TriMesh> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be non-negative, got {dt}")));
    }
    let grid = u_ind.grid();
    let interp = interpolate_velocity(u_ind, mesh, kernel);
    let moved = mesh
        .vertices()
        .iter()
        .zip(&interp)
        .map(|(x, u)| {
            let background = flow.velocity(*x);
            [0, 1, 2].map(|c| grid.wrap(x[c] + (u[c] + background[c]) * dt))
        })
        .collect();
    mesh.with_positions(moved)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::mesh::make_icosphere;

    fn grid() -> GridSpec {
        GridSpec::cube(16).unwrap()
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0), 0.5);
        assert_eq!(phi(2.5), 0.0);
        assert_eq!(phi(-2.0), 0.0);
        assert!((phi(1.0) - 0.25).abs() < 1e-15);
        for r in [0.0, 0.25, 0.5, 0.73] {
            let total: f64 = (-3..=3).map(|j| phi(r - j as f64)).sum();
            assert!((total - 1.0).abs() < 1e-12, "r = {r}: {total}");
            let first: f64 = (-3..=3).map(|j| (r - j as f64) * phi(r - j as f64)).sum();
            assert!(first.abs() < 1e-12);
        }
        assert!((-400..=400).all(|i| phi(i as f64 * 0.01) >= 0.0));
    }

    #[test]
    fn spread_zero_and_single_vertex() {
        let g = grid();
        let k = DeltaKernel::for_grid(&g);
        let node = g.node(5, 7, 9);
        let f = spread_points(&[node], &[[0.0; 3]], &g, &k).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));

        let f = spread_points(&[node], &[[1.0, 0.0, 0.0]], &g, &k).unwrap();
        let mut total = [0.0; 3];
        for m in 0..g.points() {
            let (i, j, kk) = (m % 16, (m / 16) % 16, m / 256);
            let inside = (4..=7).contains(&i) && (6..=9).contains(&j) && (8..=11).contains(&kk);
            if !inside {
                assert_eq!(f.get(m, 0), 0.0);
            }
            for c in 0..3 {
                total[c] += f.get(m, c) * g.cell_volume();
            }
        }
        assert!((total[0] - 1.0).abs() < 1e-12);
        assert!(total[1].abs() < 1e-15 && total[2].abs() < 1e-15);
    }

    #[test]
    fn opposite_forces_cancel() {
        let g = grid();
        let k = DeltaKernel::for_grid(&g);
        let pts = [[0.11, -0.3, 0.2], [-0.41, 0.05, 0.33]];
        let f = spread_points(&pts, &[[0.0, 1.0, 0.0], [0.0, -1.0, 0.0]], &g, &k).unwrap();
        let sum: f64 = f.component(1).iter().sum::<f64>() * g.cell_volume();
        assert!(sum.abs() < 1e-12);
    }

    #[test]
    fn interpolation_examples() {
        let g = grid();
        let k = DeltaKernel::for_grid(&g);
        let m = make_icosphere(1, 0.4, [0.05, 0.0, -0.02]).unwrap();
        let c = VectorField::from_fn(g, |_| [0.3, -1.2, 2.0]);
        for u in interpolate_velocity(&c, &m, &k) {
            for (a, b) in u.iter().zip([0.3, -1.2, 2.0]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let zero = VectorField::zeros(g);
        assert!(interpolate_velocity(&zero, &m, &k).iter().all(|u| *u == [0.0; 3]));

        let linear = VectorField::from_fn(g, |x| [x[0], 0.0, 0.0]);
        let x0 = g.node(8, 6, 9);
        let u = interpolate_points(&linear, &[x0], &k);
        assert!((u[0][0] - x0[0]).abs() < 1e-12);
    }

    #[test]
    fn partition_of_unity_random_points() {
        let g = grid();
        let k = DeltaKernel::for_grid(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let x = [0; 3].map(|_| rng.gen_range(-1.0..1.0));
            assert!((partition_of_unity(&g, &k, x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn external_flow_formula() {
        let fwd = ExternalFlow::new(1.0, FlowOrientation::Forward);
        assert_eq!(external_velocity(&[[1.0, 1.0, 0.0]], &fwd), vec![[1.0, -1.0, 0.0]]);
        let rev = ExternalFlow::new(1.0, FlowOrientation::Reversed);
        assert_eq!(rev.velocity([1.0, 1.0, 5.0]), [-1.0, 1.0, 0.0]);
        assert_eq!(fwd.velocity([0.0, 0.0, 0.7]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn advance_examples() {
        let g = grid();
        let k = DeltaKernel::for_grid(&g);
        let m = make_icosphere(0, 0.3, [0.0; 3]).unwrap();
        let m = m
            .with_positions({
                let mut v = m.vertices().to_vec();
                v[0] = [0.25, 0.25, 0.0];
                v
            })
            .unwrap();
        let flow = ExternalFlow::new(1.0, FlowOrientation::Forward);
        let zero = VectorField::zeros(g);
        let next = advance_vesicle(&m, &zero, &flow, 1e-3, &k).unwrap();
        let v = next.vertices()[0];
        assert!((v[0] - 0.25025).abs() < 1e-15);
        assert!((v[1] - 0.24975).abs() < 1e-15);
        assert_eq!(v[2], 0.0);
        assert_eq!(next.rest_edge_lengths(), m.rest_edge_lengths());
        assert_eq!(next.faces(), m.faces());

        let still = ExternalFlow::new(0.0, FlowOrientation::Forward);
        let c = VectorField::from_fn(g, |_| [0.1, 0.2, -0.3]);
        let moved = advance_vesicle(&m, &c, &still, 0.5, &k).unwrap();
        for (a, b) in moved.vertices().iter().zip(m.vertices()) {
            for (ci, d) in [0.05, 0.1, -0.15].iter().enumerate() {
                assert!((a[ci] - b[ci] - d).abs() < 1e-12);
            }
        }

        let same = advance_vesicle(&m, &c, &flow, 0.0, &k).unwrap();
        assert_eq!(same, m);
        assert!(advance_vesicle(&m, &c, &flow, -1.0, &k).is_err());
    }
}
