use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::mesh::{read_off, TriMesh};
use crate::{Error, Result};

/// JSON index of the generated trajectories, one entry per vesicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub vesicles: Vec<VesicleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesicleEntry {
    pub id: String,
    /// Trajectory file, relative to the manifest directory.
    pub trajectory: PathBuf,
    /// OFF file holding the initial mesh (topology and rest state).
    pub mesh: PathBuf,
    pub frames: usize,
    /// `None` for a complete run, otherwise the solver failure.
    #[serde(default)]
    pub failure: Option<String>,
}

impl Manifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::Missing {
                what: "trajectory manifest",
                detail: format!("{} not found; run gen-data first", path.display()),
            },
            _ => Error::io(path, e),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            offset: 0,
            detail: e.to_string(),
        })
    }

    /// Load every trajectory and initial mesh listed, resolving paths against `dir`.
    pub fn load_all(&self, dir: &Path) -> Result<Vec<(Trajectory, TriMesh)>> {
        self.vesicles
            .iter()
            .map(|v| {
                let traj = Trajectory::load(&dir.join(&v.trajectory))?;
                let mesh = read_off(&dir.join(&v.mesh))?;
                if mesh.vertex_count() != traj.vertex_count() {
                    return Err(Error::shape(traj.vertex_count(), mesh.vertex_count()));
                }
                Ok((traj, mesh))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip_and_missing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("manifest.json");
        assert!(matches!(Manifest::load(&p), Err(Error::Missing { .. })));
        let m = Manifest {
            vesicles: vec![VesicleEntry {
                id: "sphere".into(),
                trajectory: "sphere.vfsi".into(),
                mesh: "sphere.off".into(),
                frames: 121,
                failure: None,
            }],
        };
        m.save(&p).unwrap();
        assert_eq!(Manifest::load(&p).unwrap(), m);
    }
}
