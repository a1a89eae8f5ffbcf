//! Box counting in a 40 × 40 discretized phase space.
//!
//! PSA pairs each sample with the sample 0.5 s earlier; PSM pairs it with
//! its first difference. Each axis is split into 40 equal bins spanning
//! that axis's own min..max over the segment, so the count does not change
//! under `a·x + b` with `a > 0`. A constant axis (up to rounding) collapses
//! to one bin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRID_BINS: usize = 40;
pub const GRID_CELLS: usize = GRID_BINS * GRID_BINS;
/// VF is decided when the occupied fraction exceeds this value.
pub const ETA_THRESHOLD: f64 = 0.15;
/// Delay of the PSA embedding, in seconds.
pub const PSA_DELAY_S: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceResult {
    pub visited: usize,
    pub eta: f64,
}

impl PhaseSpaceResult {
    fn from_visited(visited: usize) -> Self {
        PhaseSpaceResult {
            visited,
            eta: visited as f64 / GRID_CELLS as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VfDecision {
    Vf,
    NonVf,
}

/// Spans below this fraction of the axis magnitude count as constant.
const DEGENERATE_SPAN: f64 = 1e-9;

struct Axis {
    min: f64,
    span: f64,
}

impl Axis {
    fn over(values: impl Iterator<Item = f64>) -> Self {
        let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        let span = max - min;
        let scale = min.abs().max(max.abs());
        if span <= DEGENERATE_SPAN * scale {
            return Axis { min, span: 0.0 };
        }
        Axis { min, span }
    }

    fn bin(&self, v: f64) -> usize {
        if self.span <= 0.0 {
            return 0;
        }
        let b = ((v - self.min) / self.span * GRID_BINS as f64).floor();
        (b.max(0.0) as usize).min(GRID_BINS - 1)
    }
}

fn count_cells(first: &[f64], second: &[f64]) -> PhaseSpaceResult {
    let ax = Axis::over(first.iter().copied());
    let ay = Axis::over(second.iter().copied());
    let mut occupied = [false; GRID_CELLS];
    let mut visited = 0;
    for (&x, &y) in first.iter().zip(second) {
        let cell = ax.bin(x) * GRID_BINS + ay.bin(y);
        if !occupied[cell] {
            occupied[cell] = true;
            visited += 1;
        }
    }
    PhaseSpaceResult::from_visited(visited)
}

/// Delay samples used by [`psa_count`] at `fs`.
pub fn psa_delay(fs: u32) -> usize {
    (PSA_DELAY_S * f64::from(fs)).round() as usize
}

/// Occupied cells of the `(x[n], x[n-k])` embedding, `k` = 0.5 s.
pub fn psa_count(segment: &[f64], fs: u32) -> Result<PhaseSpaceResult> {
    let k = psa_delay(fs);
    if segment.len() <= k {
        return Err(Error::InvalidArgument(format!(
            "PSA needs more than {k} samples at {fs} Hz (got {})",
            segment.len()
        )));
    }
    if segment.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("phase-space segment"));
    }
    Ok(count_cells(&segment[k..], &segment[..segment.len() - k]))
}

/// Occupied cells of the `(x[n], x[n] - x[n-1])` embedding.
pub fn psm_count(segment: &[f64]) -> Result<PhaseSpaceResult> {
    if segment.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "PSM needs at least 2 samples (got {})",
            segment.len()
        )));
    }
    if segment.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("phase-space segment"));
    }
    let diff: Vec<f64> = segment.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(count_cells(&segment[1..], &diff))
}

/// VF iff `eta > 0.15`.
pub fn psa_threshold_classify(result: &PhaseSpaceResult) -> VfDecision {
    if result.eta > ETA_THRESHOLD {
        VfDecision::Vf
    } else {
        VfDecision::NonVf
    }
}
