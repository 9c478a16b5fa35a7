use std::collections::HashMap;

use super::{mean_edge_length, norm, TriMesh};
use crate::{Error, Result, Vec3};

fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let vertices = raw.iter().map(|v| normalize(*v)).collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (vertices, faces)
}

fn normalize(v: Vec3) -> Vec3 {
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Unit-sphere icosphere: each level splits every triangle into four and
/// pushes the new midpoints onto the sphere.
fn unit_icosphere(subdivisions: u32) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let (mut vertices, mut faces) = icosahedron();
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push(normalize([
                    0.5 * (p[0] + q[0]),
                    0.5 * (p[1] + q[1]),
                    0.5 * (p[2] + q[2]),
                ]));
                vertices.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    (vertices, faces)
}

pub fn make_icosphere(subdivisions: u32, radius: f64, center: Vec3) -> Result<TriMesh> {
    make_ellipsoid(subdivisions, [radius; 3], center)
}

/// Icosphere scaled by `semi_axes` along x, y, z.
pub fn make_ellipsoid(subdivisions: u32, semi_axes: Vec3, center: Vec3) -> Result<TriMesh> {
    if semi_axes.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "semi-axes must be positive, got {semi_axes:?}"
        )));
    }
    let (unit, faces) = unit_icosphere(subdivisions);
    let vertices = unit
        .into_iter()
        .map(|v| {
            [
                center[0] + semi_axes[0] * v[0],
                center[1] + semi_axes[1] * v[1],
                center[2] + semi_axes[2] * v[2],
            ]
        })
        .collect();
    TriMesh::new(vertices, faces)
}

/// Prolate ellipsoid with axis ratio `aspect:1:1` (long axis along x) and the
/// volume of a sphere of `radius`.
pub fn equal_volume_ellipsoid(
    subdivisions: u32,
    radius: f64,
    aspect: f64,
    center: Vec3,
) -> Result<TriMesh> {
    if !(aspect > 0.0) {
        return Err(Error::InvalidArgument(format!("aspect must be positive, got {aspect}")));
    }
    let short = radius / aspect.cbrt();
    make_ellipsoid(subdivisions, [aspect * short, short, short], center)
}

/// Subdivision level in `0..=max_level` whose mesh has mean edge length
/// closest to `target_edge`.
pub fn choose_subdivisions(
    target_edge: f64,
    max_level: u32,
    mut build: impl FnMut(u32) -> Result<TriMesh>,
) -> Result<u32> {
    let mut best = (0, f64::INFINITY);
    for level in 0..=max_level {
        let gap = (mean_edge_length(&build(level)?) - target_edge).abs();
        if gap < best.1 {
            best = (level, gap);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{dist, enclosed_volume};

    #[test]
    fn icosahedron_counts() {
        let m = make_icosphere(0, 1.0, [0.0; 3]).unwrap();
        assert_eq!(m.vertex_count(), 12);
        assert_eq!(m.faces().len(), 20);
        assert_eq!(m.edges().len(), 30);
        let m1 = make_icosphere(1, 1.0, [0.0; 3]).unwrap();
        assert_eq!(m1.vertex_count(), 42);
        assert_eq!(m1.faces().len(), 80);
        for s in 0..5 {
            assert_eq!(make_icosphere(s, 0.3, [0.1, 0.0, 0.0]).unwrap().euler_characteristic(), 2);
        }
    }

    #[test]
    fn icosphere_vertices_on_sphere_and_outward() {
        let c = [0.1, -0.2, 0.3];
        let m = make_icosphere(3, 0.4, c).unwrap();
        for v in m.vertices() {
            assert!((dist(*v, c) - 0.4).abs() < 1e-14);
        }
        assert!(enclosed_volume(&m).unwrap() > 0.0);
    }

    #[test]
    fn degenerate_ellipsoid_is_icosphere() {
        let a = make_ellipsoid(2, [0.7; 3], [0.0, 0.5, 0.0]).unwrap();
        let b = make_icosphere(2, 0.7, [0.0, 0.5, 0.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ellipsoid_vertices_on_surface() {
        let (a, b, c) = (0.3, 0.2, 0.25);
        let m = make_ellipsoid(3, [a, b, c], [0.0; 3]).unwrap();
        for v in m.vertices() {
            let q = (v[0] / a).powi(2) + (v[1] / b).powi(2) + (v[2] / c).powi(2);
            assert!((q - 1.0).abs() < 1e-12);
        }
        assert!(make_ellipsoid(1, [0.3, 0.0, 0.2], [0.0; 3]).is_err());
    }

    #[test]
    fn equal_volume_ellipsoid_axes() {
        let m = equal_volume_ellipsoid(4, 0.5, 1.5, [0.0; 3]).unwrap();
        let s = make_icosphere(4, 0.5, [0.0; 3]).unwrap();
        let (vm, vs) = (enclosed_volume(&m).unwrap(), enclosed_volume(&s).unwrap());
        assert!((vm / vs - 1.0).abs() < 1e-3);
    }

    #[test]
    fn sizing_rule_picks_closest_level() {
        // unit-radius icosahedron edge is ~1.05, halving per level
        let level = choose_subdivisions(0.27, 6, |s| make_icosphere(s, 1.0, [0.0; 3])).unwrap();
        assert_eq!(level, 2);
    }
}
