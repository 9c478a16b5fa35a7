use super::{cross, dist, dot, norm, sub, TriMesh};
use crate::Result;

/// Signed enclosed volume by the divergence theorem; positive for outward
/// oriented faces. Evaluated about the centroid so it is insensitive to where
/// the mesh sits.
pub fn enclosed_volume(mesh: &TriMesh) -> Result<f64> {
    // TriMesh::new already guarantees a closed, consistently oriented surface.
    let c = mesh.centroid();
    let v = mesh.vertices();
    let total: f64 = mesh
        .faces()
        .iter()
        .map(|&[a, b, d]| {
            let (p, q, r) = (sub(v[a], c), sub(v[b], c), sub(v[d], c));
            dot(p, cross(q, r))
        })
        .sum();
    Ok(total / 6.0)
}

pub fn surface_area(mesh: &TriMesh) -> f64 {
    let v = mesh.vertices();
    mesh.faces()
        .iter()
        .map(|&[a, b, c]| 0.5 * norm(cross(sub(v[b], v[a]), sub(v[c], v[a]))))
        .sum()
}

pub fn mean_edge_length(mesh: &TriMesh) -> f64 {
    let v = mesh.vertices();
    let edges = mesh.edges();
    if edges.is_empty() {
        return 0.0;
    }
    edges.iter().map(|&[a, b]| dist(v[a], v[b])).sum::<f64>() / edges.len() as f64
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::mesh::{make_ellipsoid, make_icosphere};

    #[test]
    fn sphere_volume_converges() {
        let m = make_icosphere(4, 1.0, [0.0; 3]).unwrap();
        let v = enclosed_volume(&m).unwrap();
        let exact = 4.0 * PI / 3.0;
        assert!(((v - exact) / exact).abs() < 5e-3, "{v} vs {exact}");
    }

    #[test]
    fn ellipsoid_volume_matches_analytic() {
        let m = make_ellipsoid(3, [0.3, 0.2, 0.2], [0.0; 3]).unwrap();
        let v = enclosed_volume(&m).unwrap();
        let exact = 4.0 * PI * 0.3 * 0.2 * 0.2 / 3.0;
        assert!((exact - 0.05027).abs() < 1e-5);
        assert!(((v - exact) / exact).abs() < 1e-2, "{v} vs {exact}");
    }

    #[test]
    fn icosahedron_area_closed_form() {
        let m = make_icosphere(0, 1.0, [0.0; 3]).unwrap();
        // edge of the icosahedron with unit circumradius
        let s = 4.0 / (10.0 + 2.0 * 5f64.sqrt()).sqrt();
        let exact = 20.0 * 3f64.sqrt() / 4.0 * s * s;
        assert!((surface_area(&m) - exact).abs() < 1e-12);
        assert!((mean_edge_length(&m) - s).abs() < 1e-12);
    }

    #[test]
    fn volume_translation_invariant() {
        let m = make_ellipsoid(2, [0.4, 0.3, 0.2], [0.0; 3]).unwrap();
        let t = m.translated([0.37, -0.81, 0.12]);
        let (a, b) = (enclosed_volume(&m).unwrap(), enclosed_volume(&t).unwrap());
        assert!((a - b).abs() < 1e-10);
        assert!((surface_area(&m) - surface_area(&t)).abs() < 1e-10 * surface_area(&m));
    }
}
