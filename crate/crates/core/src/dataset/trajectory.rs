//! `VFSI` trajectory files.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! magic "VFSI" | u32 version = 1 | u32 N | u32 channels | u32 M
//! f64 dt_record | u32 frame_count | u32 reversal_frame
//! frame_count x ( f32 velocity[N^3 * 3] | f32 positions[M * 3] )
//! ```
//!
//! Velocities are x fastest with the components interleaved per node.

use std::io::{BufWriter, Write};
use std::path::Path;

use crate::field::{GridSpec, VectorField};
use crate::mesh::TriMesh;
use crate::{Error, Result, Vec3};

pub const MAGIC: &[u8; 4] = b"VFSI";
pub const VERSION: u32 = 1;
const HEADER_BYTES: usize = 4 + 4 * 4 + 8 + 4 + 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryHeader {
    pub n: u32,
    pub channels: u32,
    pub vertex_count: u32,
    pub dt_record: f64,
    pub frame_count: u32,
    pub reversal_frame: u32,
}

/// One recorded `(u_ind, X)` snapshot in storage precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub velocity: Vec<f32>,
    pub positions: Vec<f32>,
}

impl Frame {
    pub fn from_state(u: &VectorField, vertices: &[Vec3]) -> Self {
        Self {
            velocity: u.values().iter().map(|&v| v as f32).collect(),
            positions: vertices.iter().flatten().map(|&v| v as f32).collect(),
        }
    }

    pub fn velocity_field(&self, grid: GridSpec) -> Result<VectorField> {
        VectorField::from_values(grid, self.velocity.iter().map(|&v| v as f64).collect())
    }

    pub fn vertices(&self) -> Vec<Vec3> {
        self.positions
            .chunks_exact(3)
            .map(|p| [p[0] as f64, p[1] as f64, p[2] as f64])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    n: u32,
    vertex_count: u32,
    dt_record: f64,
    reversal_frame: u32,
    frames: Vec<Frame>,
}

impl Trajectory {
    pub fn new(n: usize, vertex_count: usize, dt_record: f64, reversal_frame: usize) -> Self {
        Self {
            n: n as u32,
            vertex_count: vertex_count as u32,
            dt_record,
            reversal_frame: reversal_frame as u32,
            frames: Vec::new(),
        }
    }

    pub fn header(&self) -> TrajectoryHeader {
        TrajectoryHeader {
            n: self.n,
            channels: 3,
            vertex_count: self.vertex_count,
            dt_record: self.dt_record,
            frame_count: self.frames.len() as u32,
            reversal_frame: self.reversal_frame,
        }
    }

    pub fn push(&mut self, frame: Frame) -> Result<()> {
        let n = self.n as usize;
        if frame.velocity.len() != n * n * n * 3 {
            return Err(Error::shape(n * n * n * 3, frame.velocity.len()));
        }
        if frame.positions.len() != self.vertex_count as usize * 3 {
            return Err(Error::shape(self.vertex_count * 3, frame.positions.len()));
        }
        self.frames.push(frame);
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertex_count as usize
    }

    #[inline]
    pub fn dt_record(&self) -> f64 {
        self.dt_record
    }

    #[inline]
    pub fn reversal_frame(&self) -> usize {
        self.reversal_frame as usize
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    #[inline]
    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> Result<&Frame> {
        self.frames.get(index).ok_or_else(|| Error::Missing {
            what: "frame",
            detail: format!("index {index} of {}", self.frames.len()),
        })
    }

    /// Recorded mesh at `index`, reusing the topology and rest state of `template`.
    pub fn mesh_at(&self, index: usize, template: &TriMesh) -> Result<TriMesh> {
        template.with_positions(self.frame(index)?.vertices())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let h = self.header();
        let mut head = Vec::with_capacity(HEADER_BYTES);
        head.extend_from_slice(MAGIC);
        for v in [VERSION, h.n, h.channels, h.vertex_count] {
            head.extend_from_slice(&v.to_le_bytes());
        }
        head.extend_from_slice(&h.dt_record.to_le_bytes());
        head.extend_from_slice(&h.frame_count.to_le_bytes());
        head.extend_from_slice(&h.reversal_frame.to_le_bytes());
        w.write_all(&head).map_err(|e| Error::io(path, e))?;
        let mut buf = Vec::new();
        for frame in &self.frames {
            buf.clear();
            for v in frame.velocity.iter().chain(&frame.positions) {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut reader = Reader {
            path,
            bytes: &bytes,
            pos: 0,
        };
        let magic = reader.take(4, "magic")?;
        if magic != MAGIC {
            return Err(reader.error(0, format!("bad magic {magic:?}, expected {MAGIC:?}")));
        }
        let version = reader.u32("version")?;
        if version != VERSION {
            return Err(reader.error(4, format!("unsupported version {version}")));
        }
        let n = reader.u32("N")?;
        let channels = reader.u32("channels")?;
        if channels != 3 {
            return Err(reader.error(12, format!("expected 3 channels, got {channels}")));
        }
        let vertex_count = reader.u32("vertex count")?;
        let dt_record = f64::from_le_bytes(reader.take(8, "dt_record")?.try_into().unwrap());
        let frame_count = reader.u32("frame count")?;
        let reversal_frame = reader.u32("reversal frame")?;

        let nv = (n as usize).pow(3) * 3;
        let np = vertex_count as usize * 3;
        let frame_bytes = (nv + np) * 4;
        let expected = HEADER_BYTES + frame_bytes * frame_count as usize;
        if bytes.len() != expected {
            return Err(reader.error(
                bytes.len().min(expected) as u64,
                format!(
                    "file holds {} bytes, header implies {expected} ({frame_count} frames)",
                    bytes.len()
                ),
            ));
        }
        let mut frames = Vec::with_capacity(frame_count as usize);
        for _ in 0..frame_count {
            let velocity = reader.f32s(nv, "velocity")?;
            let positions = reader.f32s(np, "positions")?;
            frames.push(Frame {
                velocity,
                positions,
            });
        }
        Ok(Self {
            n,
            vertex_count,
            dt_record,
            reversal_frame,
            frames,
        })
    }
}

struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn error(&self, offset: u64, detail: String) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            offset,
            detail,
        }
    }

    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(self.error(
                self.pos as u64,
                format!("truncated while reading {what} ({len} bytes needed)"),
            ));
        }
        let out = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f32s(&mut self, count: usize, what: &str) -> Result<Vec<f32>> {
        let raw = self.take(count * 4, what)?;
        Ok(raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn sample(frames: usize) -> Trajectory {
        let mut t = Trajectory::new(4, 2, 0.01, 1);
        for f in 0..frames {
            t.push(Frame {
                velocity: (0..192).map(|i| (i as f32 * 0.1 + f as f32).sin()).collect(),
                positions: vec![0.1, 0.2, 0.3, -0.1, -0.2, f as f32],
            })
            .unwrap();
        }
        t
    }

    #[test]
    fn header_layout_is_fixed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.vfsi");
        sample(2).save(&p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[0..4], b"VFSI");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 4);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(bytes[20..28].try_into().unwrap()), 0.01);
        assert_eq!(u32::from_le_bytes(bytes[28..32].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[32..36].try_into().unwrap()), 1);
        assert_eq!(bytes.len(), 36 + 2 * (192 + 6) * 4);
    }

    #[test]
    fn empty_trajectory_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.vfsi");
        let t = sample(0);
        t.save(&p).unwrap();
        assert_eq!(Trajectory::load(&p).unwrap(), t);
    }

    #[test]
    fn corrupt_files_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.vfsi");
        sample(3).save(&p).unwrap();
        let mut bytes = std::fs::read(&p).unwrap();
        bytes[0] = b'X';
        std::fs::write(&p, &bytes).unwrap();
        assert!(matches!(Trajectory::load(&p), Err(Error::Format { offset: 0, .. })));

        bytes[0] = b'V';
        bytes[4] = 9;
        std::fs::write(&p, &bytes).unwrap();
        assert!(matches!(Trajectory::load(&p), Err(Error::Format { offset: 4, .. })));

        bytes[4] = 1;
        bytes.truncate(bytes.len() - 5);
        std::fs::write(&p, &bytes).unwrap();
        assert!(matches!(Trajectory::load(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn push_checks_shapes() {
        let mut t = Trajectory::new(4, 2, 0.01, 0);
        assert!(t
            .push(Frame {
                velocity: vec![0.0; 10],
                positions: vec![0.0; 6]
            })
            .is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn save_load_is_bit_exact(
            vals in prop::collection::vec(any::<f32>(), 192 * 3),
            pos in prop::collection::vec(any::<f32>(), 9 * 3),
            dt in any::<f64>(),
            rev in any::<u32>(),
        ) {
            let mut t = Trajectory::new(4, 3, dt, rev as usize);
            for f in 0..3 {
                t.push(Frame {
                    velocity: vals[f * 192..(f + 1) * 192].to_vec(),
                    positions: pos[f * 9..(f + 1) * 9].to_vec(),
                }).unwrap();
            }
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("p.vfsi");
            t.save(&p).unwrap();
            let back = Trajectory::load(&p).unwrap();
            prop_assert_eq!(back.header().dt_record.to_bits(), dt.to_bits());
            for (a, b) in back.frames().iter().zip(t.frames()) {
                for (x, y) in a.velocity.iter().chain(&a.positions).zip(b.velocity.iter().chain(&b.positions)) {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
            }
        }
    }
}
