//! Ground-truth generation and loading.

use std::path::PathBuf;

use super::{PipelineConfig, VesicleConfig, VesicleRole};
use crate::dataset::{Manifest, Trajectory, VesicleEntry};
use crate::field::GridSpec;
use crate::ibm::DeltaKernel;
use crate::mesh::{choose_subdivisions, equal_volume_ellipsoid, read_off, write_off, SpringBending, TriMesh};
use crate::stokes::Simulation;
use crate::{Error, Result};

/// Highest subdivision level tried when picking one automatically.
const MAX_SUBDIVISION: u32 = 4;

pub fn build_mesh(v: &VesicleConfig, grid: &GridSpec) -> Result<TriMesh> {
    let build = |level| equal_volume_ellipsoid(level, v.radius, v.aspect, v.center);
    let level = match v.subdivisions {
        Some(l) => l,
        None => choose_subdivisions(2.0 * grid.spacing(), MAX_SUBDIVISION, build)?,
    };
    build(level)
}

/// One loaded vesicle: its recorded run and its initial (rest) mesh.
#[derive(Debug, Clone)]
pub struct VesicleData {
    pub id: String,
    pub role: VesicleRole,
    pub trajectory: Trajectory,
    pub mesh: TriMesh,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub vesicles: Vec<VesicleData>,
}

impl Dataset {
    pub fn get(&self, id: &str) -> Result<&VesicleData> {
        self.vesicles.iter().find(|v| v.id == id).ok_or_else(|| Error::Missing {
            what: "trajectory",
            detail: format!("no trajectory for vesicle {id:?}"),
        })
    }

    pub fn training(&self) -> Vec<&Trajectory> {
        self.vesicles
            .iter()
            .filter(|v| v.role == VesicleRole::Train)
            .map(|v| &v.trajectory)
            .collect()
    }
}

/// Outcome of [`generate`]: where the manifest went and which runs failed.
#[derive(Debug)]
pub struct Generated {
    pub manifest: PathBuf,
    pub failures: Vec<(String, Error)>,
}

/// Simulate every configured vesicle and write `<id>.vfsi`, `<id>.off` and
/// `manifest.json` into the data directory. A diverged run keeps the frames
/// recorded before the failure and is reported in the manifest.
pub fn generate(cfg: &PipelineConfig, progress: bool) -> Result<Generated> {
    let grid = cfg.grid_spec()?;
    let dir = cfg.data_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let membrane = SpringBending(cfg.membrane);
    let sim = Simulation {
        grid,
        fluid: cfg.fluid,
        membrane: &membrane,
        schedule: cfg.flow,
        kernel: DeltaKernel::for_grid(&grid),
        progress,
    };
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for v in &cfg.vesicles {
        let mesh = build_mesh(v, &grid)?;
        if progress {
            eprintln!("simulating {} ({} vertices, {} frames)", v.id, mesh.vertex_count(), cfg.frames);
        }
        let outcome = sim.simulate(&mesh, cfg.frames)?;
        let traj_name = PathBuf::from(format!("{}.vfsi", v.id));
        let mesh_name = PathBuf::from(format!("{}.off", v.id));
        outcome.trajectory.save(&dir.join(&traj_name))?;
        write_off(&mesh, &dir.join(&mesh_name))?;
        entries.push(VesicleEntry {
            id: v.id.clone(),
            trajectory: traj_name,
            mesh: mesh_name,
            frames: outcome.trajectory.len(),
            failure: outcome.failure.as_ref().map(ToString::to_string),
        });
        if let Some(e) = outcome.failure {
            failures.push((v.id.clone(), e));
        }
    }
    let manifest = dir.join("manifest.json");
    Manifest { vesicles: entries }.save(&manifest)?;
    Ok(Generated { manifest, failures })
}

/// Load every configured vesicle listed in the manifest.
pub fn load_dataset(cfg: &PipelineConfig) -> Result<Dataset> {
    let dir = cfg.data_dir();
    let manifest = Manifest::load(&dir.join("manifest.json"))?;
    let mut vesicles = Vec::new();
    for v in &cfg.vesicles {
        let entry = manifest.vesicles.iter().find(|e| e.id == v.id).ok_or_else(|| Error::Missing {
            what: "trajectory",
            detail: format!("vesicle {:?} is not in the manifest; rerun gen-data", v.id),
        })?;
        let trajectory = Trajectory::load(&dir.join(&entry.trajectory))?;
        let mesh = read_off(&dir.join(&entry.mesh))?;
        if mesh.vertex_count() != trajectory.vertex_count() {
            return Err(Error::shape(trajectory.vertex_count(), mesh.vertex_count()));
        }
        if trajectory.n() != cfg.grid.n {
            return Err(Error::Config(format!(
                "trajectory {:?} is on a {}^3 grid, config says {}^3",
                v.id,
                trajectory.n(),
                cfg.grid.n
            )));
        }
        vesicles.push(VesicleData {
            id: v.id.clone(),
            role: v.role,
            trajectory,
            mesh,
        });
    }
    Ok(Dataset { vesicles })
}
