use super::grid::VectorField;
use crate::{Error, Result};

/// Relative L2 error with a flag for the zero-reference fallback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelL2 {
    pub value: f64,
    /// `true` when the reference had zero norm and the absolute norm was used.
    pub zero_reference: bool,
}

/// `||x - y|| / ||y||` over flat slices; falls back to `||x - y||` when `y = 0`.
pub fn rel_l2(x: &[f64], y: &[f64]) -> RelL2 {
    debug_assert_eq!(x.len(), y.len());
    let mut diff = 0.0;
    let mut reference = 0.0;
    for (a, b) in x.iter().zip(y) {
        diff += (a - b) * (a - b);
        reference += b * b;
    }
    let diff = diff.sqrt();
    if reference == 0.0 {
        RelL2 {
            value: diff,
            zero_reference: true,
        }
    } else {
        RelL2 {
            value: diff / reference.sqrt(),
            zero_reference: false,
        }
    }
}

pub fn rel_l2_error(x: &VectorField, y: &VectorField) -> Result<RelL2> {
    x.check_same_shape(y)?;
    Ok(rel_l2(x.values(), y.values()))
}

pub fn max_abs(x: &VectorField) -> f64 {
    x.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Mean over the grid of `|x_c - y_c|` for one component.
pub fn mae_component(x: &VectorField, y: &VectorField, axis: usize) -> Result<f64> {
    x.check_same_shape(y)?;
    if axis > 2 {
        return Err(Error::InvalidArgument(format!("axis must be 0..=2, got {axis}")));
    }
    let sum: f64 = x
        .values()
        .iter()
        .zip(y.values())
        .skip(axis)
        .step_by(3)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / x.grid().points() as f64)
}
