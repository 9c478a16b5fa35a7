use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn default_proj_width() -> usize {
    128
}

/// Architecture of the operator. Channels are `3 in_steps` velocity
/// components, 3 coordinates and an optional membrane mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FnoConfig {
    pub grid_n: usize,
    /// `k_max`: modes with `|m| < k_max` on every axis are kept.
    pub modes: usize,
    /// `d_v`.
    pub width: usize,
    pub layers: usize,
    pub in_steps: usize,
    pub out_steps: usize,
    #[serde(default = "default_proj_width")]
    pub proj_width: usize,
    #[serde(default)]
    pub membrane_mask: bool,
}

impl FnoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.grid_n < 4 || self.grid_n % 2 != 0 {
            return bad(format!("grid size {} must be even and at least 4", self.grid_n));
        }
        if self.modes == 0 || 2 * self.modes > self.grid_n {
            return bad(format!("k_max = {} exceeds N/2 = {}", self.modes, self.grid_n / 2));
        }
        if self.width == 0 || self.layers == 0 || self.proj_width == 0 {
            return bad("width, layers and projection width must be at least 1".into());
        }
        if self.in_steps == 0 || (self.out_steps != 1 && self.out_steps != self.in_steps) {
            return bad(format!(
                "out_steps must be 1 or in_steps ({}), got {}",
                self.in_steps, self.out_steps
            ));
        }
        Ok(())
    }

    pub fn in_channels(&self) -> usize {
        3 * self.in_steps + 3 + usize::from(self.membrane_mask)
    }

    pub fn out_channels(&self) -> usize {
        3 * self.out_steps
    }

    pub fn points(&self) -> usize {
        self.grid_n.pow(3)
    }

    pub fn kept_modes(&self) -> usize {
        (2 * self.modes - 1).pow(3)
    }
}

/// Offsets of every parameter group inside the flat weight vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub lift_w: usize,
    pub lift_b: usize,
    pub layers: Vec<LayerLayout>,
    pub proj1_w: usize,
    pub proj1_b: usize,
    pub proj2_w: usize,
    pub proj2_b: usize,
    pub total: usize,
    groups: Vec<(String, usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerLayout {
    /// Interleaved `(re, im)` of `R[mode][out][in]`.
    pub spectral: usize,
    pub w: usize,
    pub b: usize,
}

impl Layout {
    pub fn new(c: &FnoConfig) -> Self {
        let mut groups = Vec::new();
        let mut at = 0;
        let mut push = |name: String, len: usize| {
            let off = at;
            groups.push((name, off, len));
            at += len;
            off
        };
        let (cin, dv, pw, cout) = (c.in_channels(), c.width, c.proj_width, c.out_channels());
        let lift_w = push("lift.w".into(), dv * cin);
        let lift_b = push("lift.b".into(), dv);
        let layers = (0..c.layers)
            .map(|l| LayerLayout {
                spectral: push(format!("layer{l}.spectral"), 2 * c.kept_modes() * dv * dv),
                w: push(format!("layer{l}.w"), dv * dv),
                b: push(format!("layer{l}.b"), dv),
            })
            .collect();
        let proj1_w = push("proj1.w".into(), pw * dv);
        let proj1_b = push("proj1.b".into(), pw);
        let proj2_w = push("proj2.w".into(), cout * pw);
        let proj2_b = push("proj2.b".into(), cout);
        Self {
            lift_w,
            lift_b,
            layers,
            proj1_w,
            proj1_b,
            proj2_w,
            proj2_b,
            total: at,
            groups,
        }
    }

    /// `(name, offset, len)` in storage order.
    pub fn groups(&self) -> &[(String, usize, usize)] {
        &self.groups
    }
}
