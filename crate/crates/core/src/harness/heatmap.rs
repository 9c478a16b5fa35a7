//! Mid-plane slice images as binary PPM with a plain-text range sidecar.

use std::io::Write;
use std::path::Path;

use crate::{Error, Result};

/// Pixels per grid cell.
const CELL: usize = 8;
const GAP: usize = 4;

/// Value range of each panel, as written to the sidecar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelRange {
    pub min: f64,
    pub max: f64,
}

/// x-velocity on the `k = n/2` plane of an interleaved frame, row `j`, column `i`.
pub fn mid_plane_x(frame: &[f64], n: usize) -> Vec<f64> {
    let k = n / 2;
    (0..n * n).map(|q| frame[3 * (q + n * n * k)]).collect()
}

/// Diverging blue-white-red ramp over `t` in `[0, 1]`.
fn diverging(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let s = 2.0 * t;
        (s, s, 1.0)
    } else {
        let s = 2.0 * (1.0 - t);
        (1.0, s, s)
    };
    [r, g, b].map(|c| (c * 255.0).round() as u8)
}

/// Black to yellow ramp; zero maps to black.
fn sequential(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    [(255.0 * t).round() as u8, (230.0 * t).round() as u8, 0]
}

fn range(v: &[f64]) -> PanelRange {
    let (min, max) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    PanelRange { min, max }
}

fn scale(v: f64, r: PanelRange) -> f64 {
    if r.max > r.min {
        (v - r.min) / (r.max - r.min)
    } else {
        0.0
    }
}

/// Predicted, true and absolute-error slices side by side. Predicted and true
/// share one diverging scale; the error panel runs from 0 to its maximum.
pub fn render_triptych(pred: &[f64], truth: &[f64], n: usize) -> (Vec<u8>, [PanelRange; 3]) {
    let err: Vec<f64> = pred.iter().zip(truth).map(|(a, b)| (a - b).abs()).collect();
    let both = range(&[pred, truth].concat());
    let er = PanelRange { min: 0.0, max: range(&err).max.max(0.0) };
    let side = n * CELL;
    let width = 3 * side + 2 * GAP;
    let height = side;
    let mut img = vec![255u8; width * height * 3];
    let panels: [(&[f64], PanelRange, fn(f64) -> [u8; 3]); 3] =
        [(pred, both, diverging), (truth, both, diverging), (&err, er, sequential)];
    for (pi, (vals, r, cmap)) in panels.iter().enumerate() {
        let x0 = pi * (side + GAP);
        for y in 0..height {
            // row 0 of the image is the top, i.e. the largest j
            let j = n - 1 - y / CELL;
            for x in 0..side {
                let i = x / CELL;
                let px = cmap(scale(vals[i + n * j], *r));
                let at = 3 * (y * width + x0 + x);
                img[at..at + 3].copy_from_slice(&px);
            }
        }
    }
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(&img);
    (out, [both, both, er])
}

pub fn write_triptych(path: &Path, pred: &[f64], truth: &[f64], n: usize, step: usize) -> Result<[PanelRange; 3]> {
    let (bytes, ranges) = render_triptych(pred, truth, n);
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let side = path.with_extension("txt");
    let mut f = std::fs::File::create(&side).map_err(|e| Error::io(&side, e))?;
    let names = ["predicted", "truth", "abs_error"];
    let mut text = format!("# mid-plane z-slice of u_x at step {step}; panel min max\n");
    for (name, r) in names.iter().zip(&ranges) {
        text += &format!("{name} {} {}\n", r.min, r.max);
    }
    f.write_all(text.as_bytes()).map_err(|e| Error::io(&side, e))?;
    Ok(ranges)
}

/// Parse a binary PPM into `(width, height, rgb)`.
pub fn read_ppm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let bad = |d: &str| Error::InvalidArgument(format!("not a binary PPM: {d}"));
    let mut fields = Vec::new();
    let mut at = 0;
    while fields.len() < 4 {
        while at < bytes.len() && bytes[at].is_ascii_whitespace() {
            at += 1;
        }
        let start = at;
        while at < bytes.len() && !bytes[at].is_ascii_whitespace() {
            at += 1;
        }
        if start == at {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..at]).map_err(|_| bad("header"))?.to_string());
    }
    at += 1;
    if fields[0] != "P6" || fields[3] != "255" {
        return Err(bad("magic"));
    }
    let w: usize = fields[1].parse().map_err(|_| bad("width"))?;
    let h: usize = fields[2].parse().map_err(|_| bad("height"))?;
    let data = bytes.get(at..).ok_or_else(|| bad("missing pixels"))?;
    if data.len() != 3 * w * h {
        return Err(bad("pixel count"));
    }
    Ok((w, h, data.to_vec()))
}
