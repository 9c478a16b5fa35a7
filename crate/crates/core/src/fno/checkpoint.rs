//! `FNOM` checkpoint files, little-endian throughout:
//!
//! ```text
//! "FNOM" | u32 version | u32 x 8 config | f64 x 12 normalizer | (u64 len, f64 x len) per group
//! ```
//!
//! Config words are `grid_n, modes, width, layers, in_steps, out_steps,
//! proj_width, flags` with flag bit 0 marking the membrane-mask channel.
//! Normalizer values are input mean, input std, output mean, output std.

use std::path::Path;

use super::{FnoConfig, Layout, Model};
use crate::dataset::Normalizer;
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"FNOM";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn encode_checkpoint(model: &Model) -> Vec<u8> {
    let c = model.config();
    let mut out = Vec::with_capacity(64 + 8 * model.params().len());
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let words = [
        c.grid_n,
        c.modes,
        c.width,
        c.layers,
        c.in_steps,
        c.out_steps,
        c.proj_width,
        usize::from(c.membrane_mask),
    ];
    for w in words {
        out.extend_from_slice(&(w as u32).to_le_bytes());
    }
    let n = model.normalizer();
    for block in [n.input_mean, n.input_std, n.output_mean, n.output_std] {
        for v in block {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    for (_, off, len) in model.layout().groups() {
        out.extend_from_slice(&(*len as u64).to_le_bytes());
        for v in &model.params()[*off..off + len] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn save_checkpoint(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, encode_checkpoint(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Model> {
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Missing {
            what: "checkpoint",
            detail: format!("{} not found; train the model first", path.display()),
        },
        _ => Error::io(path, e),
    })?;
    decode_checkpoint(&bytes, path)
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
    path: &'a Path,
}

impl Reader<'_> {
    fn take(&mut self, len: usize, what: &str) -> Result<&[u8]> {
        if self.bytes.len() - self.at < len {
            return Err(self.error(format!("truncated while reading {what}")));
        }
        let s = &self.bytes[self.at..self.at + len];
        self.at += len;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn error(&self, detail: String) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            offset: self.at as u64,
            detail,
        }
    }
}

pub fn decode_checkpoint(bytes: &[u8], path: &Path) -> Result<Model> {
    let mut r = Reader { bytes, at: 0, path };
    if r.take(4, "magic")? != CHECKPOINT_MAGIC {
        r.at = 0;
        return Err(r.error("bad magic, not an FNOM checkpoint".into()));
    }
    let version = r.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(r.error(format!("unsupported checkpoint version {version}")));
    }
    let mut w = [0usize; 8];
    for slot in &mut w {
        *slot = r.u32("config")? as usize;
    }
    let config = FnoConfig {
        grid_n: w[0],
        modes: w[1],
        width: w[2],
        layers: w[3],
        in_steps: w[4],
        out_steps: w[5],
        proj_width: w[6],
        membrane_mask: w[7] & 1 == 1,
    };
    config.validate().map_err(|e| r.error(e.to_string()))?;
    let mut stats = [[0.0; 3]; 4];
    for block in &mut stats {
        for v in block.iter_mut() {
            *v = r.f64("normalizer")?;
        }
    }
    let normalizer = Normalizer {
        input_mean: stats[0],
        input_std: stats[1],
        output_mean: stats[2],
        output_std: stats[3],
    };
    let layout = Layout::new(&config);
    let mut params = Vec::with_capacity(layout.total);
    for (name, _, len) in layout.groups() {
        let got = r.u64(name)?;
        if got != *len as u64 {
            return Err(r.error(format!("group {name} holds {got} values, expected {len}")));
        }
        for _ in 0..*len {
            params.push(r.f64(name)?);
        }
    }
    if r.at != bytes.len() {
        return Err(r.error(format!("{} trailing bytes", bytes.len() - r.at)));
    }
    Model::from_parts(config, normalizer, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> Model {
        let c = FnoConfig {
            grid_n: 8,
            modes: 3,
            width: 3,
            layers: 2,
            in_steps: 2,
            out_steps: 1,
            proj_width: 5,
            membrane_mask: true,
        };
        let n = Normalizer {
            input_mean: [0.1, 0.2, 0.3],
            input_std: [1.5, 2.5, 3.5],
            output_mean: [-0.1, -0.2, -0.3],
            output_std: [0.5, 0.25, 0.125],
        };
        Model::init(c, n, 42).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = model();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.fnom");
        save_checkpoint(&m, &p).unwrap();
        let back = load_checkpoint(&p).unwrap();
        assert_eq!(back.config(), m.config());
        assert_eq!(back.normalizer(), m.normalizer());
        assert!(back.params().iter().zip(m.params()).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(encode_checkpoint(&back), std::fs::read(&p).unwrap());
    }

    #[test]
    fn header_layout() {
        let bytes = encode_checkpoint(&model());
        assert_eq!(&bytes[..4], b"FNOM");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 8);
        assert_eq!(u32::from_le_bytes(bytes[36..40].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(bytes[40..48].try_into().unwrap()), 0.1);
    }

    #[test]
    fn corrupt_files_rejected() {
        let good = encode_checkpoint(&model());
        let p = Path::new("mem");
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode_checkpoint(&bad, p), Err(Error::Format { offset: 0, .. })));
        assert!(matches!(decode_checkpoint(&good[..good.len() - 3], p), Err(Error::Format { .. })));
        let mut long = good.clone();
        long.push(0);
        assert!(decode_checkpoint(&long, p).is_err());
        assert!(matches!(load_checkpoint(Path::new("/nonexistent/x.fnom")), Err(Error::Missing { .. })));
    }
}
