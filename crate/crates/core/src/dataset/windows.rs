use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::{Error, Result};

/// Contiguous span of recorded frames `[start, start + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRange {
    pub start: usize,
    pub len: usize,
}

impl FrameRange {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    /// Range covering `first..=last`.
    pub fn inclusive(first: usize, last: usize) -> Self {
        Self {
            start: first,
            len: last + 1 - first,
        }
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn contains(&self, frame: usize) -> bool {
        frame >= self.start && frame < self.end()
    }
}

/// Sliding-window shape: `in_steps` input frames followed by `out_steps`
/// label frames, stride 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub in_steps: usize,
    pub out_steps: usize,
}

impl WindowSpec {
    pub fn new(in_steps: usize, out_steps: usize) -> Result<Self> {
        if in_steps == 0 {
            return Err(Error::InvalidArgument("in_steps must be >= 1".into()));
        }
        if out_steps != 1 && out_steps != in_steps {
            return Err(Error::InvalidArgument(format!(
                "out_steps must be 1 or in_steps ({in_steps}), got {out_steps}"
            )));
        }
        Ok(Self { in_steps, out_steps })
    }
}

/// One training window, as frame indices into its trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub inputs: Range<usize>,
    pub labels: Range<usize>,
}

/// Windows drawn from a range of `len` frames: `len - in` for one-step labels
/// and `len - 2 in` for block labels, i.e. the final block window is dropped.
pub fn window_count(len: usize, spec: &WindowSpec) -> usize {
    let natural = (len + 1).saturating_sub(spec.in_steps + spec.out_steps);
    if spec.out_steps > 1 {
        natural.saturating_sub(1)
    } else {
        natural
    }
}

pub fn make_windows(traj: &Trajectory, range: FrameRange, spec: &WindowSpec) -> Result<Vec<Window>> {
    if range.end() > traj.len() {
        return Err(Error::InvalidArgument(format!(
            "range {}..{} exceeds trajectory length {}",
            range.start,
            range.end(),
            traj.len()
        )));
    }
    let count = window_count(range.len, spec);
    if range.len < spec.in_steps + spec.out_steps || count == 0 {
        return Err(Error::InvalidArgument(format!(
            "range of {} frames is too short for {} input + {} label frames",
            range.len, spec.in_steps, spec.out_steps
        )));
    }
    Ok((0..count)
        .map(|i| {
            let start = range.start + i;
            let mid = start + spec.in_steps;
            Window {
                inputs: start..mid,
                labels: mid..mid + spec.out_steps,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::dataset::Frame;

    fn blank(frames: usize) -> Trajectory {
        let mut t = Trajectory::new(4, 1, 0.1, 0);
        for _ in 0..frames {
            t.push(Frame {
                velocity: vec![0.0; 192],
                positions: vec![0.0; 3],
            })
            .unwrap();
        }
        t
    }

    #[test]
    fn experiment_sample_counts() {
        let one = WindowSpec::new(10, 1).unwrap();
        let multi = WindowSpec::new(10, 10).unwrap();
        assert_eq!(window_count(180, &one), 170);
        assert_eq!(window_count(220, &one), 210);
        assert_eq!(window_count(180, &multi), 160);
        assert_eq!(window_count(220, &multi), 200);
    }

    #[test]
    fn windows_cover_full_profile_range() {
        let t = blank(600);
        let range = FrameRange::inclusive(302, 481);
        assert_eq!(range.len, 180);
        let w = make_windows(&t, range, &WindowSpec::new(10, 1).unwrap()).unwrap();
        assert_eq!(w.len(), 170);
        assert_eq!(w[0].inputs, 302..312);
        assert_eq!(w.last().unwrap().labels, 481..482);
    }

    #[test]
    fn short_range_rejected() {
        let t = blank(50);
        let multi = WindowSpec::new(10, 10).unwrap();
        assert!(make_windows(&t, FrameRange::new(0, 20), &multi).is_err());
        assert!(make_windows(&t, FrameRange::new(0, 15), &multi).is_err());
        assert!(make_windows(&t, FrameRange::new(40, 20), &multi).is_err());
        assert_eq!(make_windows(&t, FrameRange::new(0, 21), &multi).unwrap().len(), 1);
    }

    #[test]
    fn bad_window_spec() {
        assert!(WindowSpec::new(0, 1).is_err());
        assert!(WindowSpec::new(4, 3).is_err());
    }

    proptest! {
        #[test]
        fn windows_are_contiguous_and_in_range(
            start in 0usize..20, len in 2usize..60, alpha in 1usize..8, multi in any::<bool>()
        ) {
            let spec = WindowSpec::new(alpha, if multi { alpha } else { 1 }).unwrap();
            let t = blank(100);
            let range = FrameRange::new(start, len);
            match make_windows(&t, range, &spec) {
                Ok(ws) => {
                    prop_assert_eq!(ws.len(), window_count(len, &spec));
                    for (i, w) in ws.iter().enumerate() {
                        prop_assert_eq!(w.inputs.start, start + i);
                        prop_assert_eq!(w.inputs.len(), alpha);
                        prop_assert_eq!(w.labels.start, w.inputs.end);
                        prop_assert_eq!(w.labels.len(), spec.out_steps);
                        prop_assert!(w.labels.end <= range.end());
                    }
                }
                Err(_) => prop_assert_eq!(window_count(len, &spec), 0),
            }
        }
    }
}
