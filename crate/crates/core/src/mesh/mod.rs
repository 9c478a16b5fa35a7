//! Triangulated vesicle membranes.
//!
//! Meshes are closed, orientable, sphere-topology surfaces with outward
//! facing triangles. Rest edge lengths are captured once at construction and
//! carried through every position update.

mod force;
mod geometry;
mod io;
mod shapes;

use std::collections::HashMap;

pub use force::{
    bending_energy, membrane_force, spring_energy, MembraneModel, MembraneParams, SpringBending,
};
pub use geometry::{enclosed_volume, mean_edge_length, surface_area};
pub use io::{read_off, write_off};
pub use shapes::{choose_subdivisions, equal_volume_ellipsoid, make_ellipsoid, make_icosphere};

use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    rest_edge_lengths: Vec<f64>,
    /// Sorted neighbour lists, one per vertex.
    neighbours: Vec<Vec<usize>>,
}

impl TriMesh {
    /// Build a mesh and take the current edge lengths as rest lengths.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let edges = collect_edges(vertices.len(), &faces)?;
        let rest_edge_lengths = edges
            .iter()
            .map(|&[a, b]| dist(vertices[a], vertices[b]))
            .collect();
        let mut neighbours = vec![Vec::new(); vertices.len()];
        for &[a, b] in &edges {
            neighbours[a].push(b);
            neighbours[b].push(a);
        }
        for list in &mut neighbours {
            list.sort_unstable();
        }
        Ok(Self {
            vertices,
            faces,
            edges,
            rest_edge_lengths,
            neighbours,
        })
    }

    /// Same topology and rest lengths, new positions.
    pub fn with_positions(&self, vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::shape(self.vertices.len(), vertices.len()));
        }
        Ok(Self {
            vertices,
            ..self.clone()
        })
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    #[inline]
    pub fn vertices_mut(&mut self) -> &mut [Vec3] {
        &mut self.vertices
    }

    #[inline]
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    #[inline]
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    #[inline]
    pub fn rest_edge_lengths(&self) -> &[f64] {
        &self.rest_edge_lengths
    }

    #[inline]
    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.neighbours[v]
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn centroid(&self) -> Vec3 {
        let mut c = [0.0; 3];
        for v in &self.vertices {
            for a in 0..3 {
                c[a] += v[a];
            }
        }
        let m = self.vertices.len().max(1) as f64;
        c.map(|x| x / m)
    }

    pub fn translated(&self, t: Vec3) -> Self {
        let mut out = self.clone();
        for v in &mut out.vertices {
            for a in 0..3 {
                v[a] += t[a];
            }
        }
        out
    }

    /// Mean vertex distance `mean_k |X_k - Y_k|` to another mesh of equal size.
    pub fn mean_vertex_distance(&self, other: &TriMesh) -> Result<f64> {
        if other.vertex_count() != self.vertex_count() {
            return Err(Error::shape(self.vertex_count(), other.vertex_count()));
        }
        let total: f64 = self
            .vertices
            .iter()
            .zip(&other.vertices)
            .map(|(a, b)| dist(*a, *b))
            .sum();
        Ok(total / self.vertex_count().max(1) as f64)
    }
}

/// Unique undirected edges; also checks that every edge borders exactly two
/// faces with opposite orientation.
fn collect_edges(vertex_count: usize, faces: &[[usize; 3]]) -> Result<Vec<[usize; 2]>> {
    // (min, max) -> (uses in min->max direction, uses in max->min direction)
    let mut uses: HashMap<(usize, usize), (u32, u32)> = HashMap::new();
    for face in faces {
        for corner in 0..3 {
            let a = face[corner];
            let b = face[(corner + 1) % 3];
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::InvalidArgument(format!(
                    "face {face:?} references a vertex outside 0..{vertex_count}"
                )));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("degenerate face {face:?}")));
            }
            let entry = uses.entry((a.min(b), a.max(b))).or_default();
            if a < b {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }
    let mut edges: Vec<[usize; 2]> = Vec::with_capacity(uses.len());
    for (&(a, b), &(fwd, back)) in &uses {
        if fwd != 1 || back != 1 {
            return Err(Error::OpenMesh(a, b));
        }
        edges.push([a, b]);
    }
    edges.sort_unstable();
    Ok(edges)
}

#[inline]
pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn dist(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_open_mesh() {
        let verts = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!(matches!(
            TriMesh::new(verts, vec![[0, 1, 2]]),
            Err(Error::OpenMesh(..))
        ));
    }

    #[test]
    fn rejects_inconsistent_orientation() {
        let tet = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let good = vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];
        let m = TriMesh::new(tet.clone(), good).unwrap();
        assert_eq!(m.euler_characteristic(), 2);
        let flipped = vec![[0, 1, 2], [0, 1, 3], [1, 2, 3], [0, 3, 2]];
        assert!(TriMesh::new(tet, flipped).is_err());
    }

    #[test]
    fn rejects_bad_index() {
        let verts = vec![[0.0; 3]; 3];
        assert!(TriMesh::new(verts, vec![[0, 1, 5]]).is_err());
    }
}
