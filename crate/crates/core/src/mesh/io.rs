//! Plain-text OFF import/export. Rest lengths are not stored; a loaded mesh
//! takes its file geometry as the rest state.

use std::fmt::Write as _;
use std::path::Path;

use super::TriMesh;
use crate::{Error, Result};

pub fn write_off(mesh: &TriMesh, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("OFF\n");
    let _ = writeln!(out, "{} {} 0", mesh.vertex_count(), mesh.faces().len());
    for v in mesh.vertices() {
        // {:?} on f64 prints the shortest exact round-trip representation
        let _ = writeln!(out, "{:?} {:?} {:?}", v[0], v[1], v[2]);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_off(path: &Path) -> Result<TriMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |detail: String| Error::Format {
        path: path.to_path_buf(),
        offset: 0,
        detail,
    };
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .flat_map(|l| l.split_whitespace());
    if tokens.next() != Some("OFF") {
        return Err(bad("missing OFF header".into()));
    }
    let mut next_num = |what: &str| -> Result<String> {
        tokens
            .next()
            .map(str::to_owned)
            .ok_or_else(|| bad(format!("unexpected end of file reading {what}")))
    };
    let parse_usize = |s: String| s.parse::<usize>().map_err(|e| bad(format!("{s}: {e}")));
    let parse_f64 = |s: String| s.parse::<f64>().map_err(|e| bad(format!("{s}: {e}")));

    let nv = parse_usize(next_num("vertex count")?)?;
    let nf = parse_usize(next_num("face count")?)?;
    let _ne = parse_usize(next_num("edge count")?)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let x = parse_f64(next_num("x")?)?;
        let y = parse_f64(next_num("y")?)?;
        let z = parse_f64(next_num("z")?)?;
        vertices.push([x, y, z]);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let k = parse_usize(next_num("face arity")?)?;
        if k != 3 {
            return Err(bad(format!("only triangles are supported, got a {k}-gon")));
        }
        faces.push([
            parse_usize(next_num("index")?)?,
            parse_usize(next_num("index")?)?,
            parse_usize(next_num("index")?)?,
        ]);
    }
    TriMesh::new(vertices, faces)
}
