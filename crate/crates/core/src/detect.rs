// SPDX-License-Identifier: MIT OR Apache-2.0

//! Threshold, gap completion and length cleanup.
//!
//! A position is an *exceedance* when `|x_j| > c`. Exceedances whose
//! spacing is at most `gap + 1` (a run of at most `gap` non-exceedances
//! between them) are joined into one segment spanning from the first to the
//! last exceedance of the cluster. Segments of length `<= cutoff` are then
//! dropped. [`detect`] runs all three steps in a single pass over the data
//! and only allocates for the segments it emits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segment::Segment;

/// How the threshold `c` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThresholdMode {
    /// Use `c` as given.
    Absolute(f64),
    /// Use the sample `alpha`-percentile of `|x|`, with `0 < alpha < 1`.
    Percentile(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    pub threshold: ThresholdMode,
    /// Longest run of non-exceedances that is filled in during completion.
    pub gap: usize,
    /// Completed segments with length `<= cutoff` are discarded.
    pub cutoff: usize,
}

impl DetectionParams {
    pub fn new(threshold: ThresholdMode, gap: usize, cutoff: usize) -> Result<Self> {
        let params = Self {
            threshold,
            gap,
            cutoff,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn absolute(c: f64, gap: usize, cutoff: usize) -> Result<Self> {
        Self::new(ThresholdMode::Absolute(c), gap, cutoff)
    }

    pub fn percentile(alpha: f64, gap: usize, cutoff: usize) -> Result<Self> {
        Self::new(ThresholdMode::Percentile(alpha), gap, cutoff)
    }

    pub fn validate(&self) -> Result<()> {
        match self.threshold {
            ThresholdMode::Absolute(c) if c.is_nan() => {
                Err(Error::param("absolute threshold must not be NaN"))
            }
            ThresholdMode::Percentile(alpha) if !(alpha > 0.0 && alpha < 1.0) => Err(Error::param(
                format!("percentile must lie strictly between 0 and 1; got {alpha}"),
            )),
            _ => Ok(()),
        }
    }
}

/// A detected segment with its summary statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedSegment {
    pub segment: Segment,
    /// Number of exceedances inside the segment.
    pub exceed_count: usize,
    /// Sample mean of the raw (signed) observations over the segment.
    pub mean: f64,
    pub p_value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub segments: Vec<AnnotatedSegment>,
    /// The threshold `c` that was actually applied.
    pub threshold: f64,
    /// Total number of exceedances in the sequence.
    pub exceedances: usize,
    pub seq_len: usize,
}

impl DetectionResult {
    pub fn plain_segments(&self) -> Vec<Segment> {
        self.segments.iter().map(|s| s.segment).collect()
    }
}

/// Rank of the order statistic used for percentile `alpha` over `n` values:
/// `ceil(alpha * n)`, clamped to `1..=n`.
///
/// Products that land within rounding error of an integer are snapped to
/// it, so `0.95 * 10000` selects rank 9500 and not 9501.
pub fn percentile_rank(alpha: f64, n: usize) -> usize {
    let v = alpha * n as f64;
    let nearest = v.round();
    let k = if (v - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        v.ceil()
    };
    (k as usize).clamp(1, n.max(1))
}

/// Resolves the threshold `c` for `x`.
///
/// In percentile mode this is the `ceil(alpha * n)`-th smallest `|x_j|`;
/// since exceedance is strict, values tied with it are not exceedances.
pub fn resolve_threshold(x: &[f64], params: &DetectionParams) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    params.validate()?;
    match params.threshold {
        ThresholdMode::Absolute(c) => Ok(c),
        ThresholdMode::Percentile(alpha) => {
            let mut abs = Vec::with_capacity(x.len());
            for (i, v) in x.iter().enumerate() {
                if !v.is_finite() {
                    return Err(non_finite(i));
                }
                abs.push(v.abs());
            }
            let k = percentile_rank(alpha, abs.len());
            let (_, kth, _) = abs.select_nth_unstable_by(k - 1, f64::total_cmp);
            Ok(*kth)
        }
    }
}

fn non_finite(index: usize) -> Error {
    Error::param(format!("non-finite observation at position {}", index + 1))
}

/// All 1-based positions `j` with `|x_j| > c`, ascending.
///
/// A negative `c` makes every position an exceedance.
pub fn threshold_positions(x: &[f64], c: f64) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > c)
        .map(|(i, _)| i + 1)
        .collect()
}

/// Groups ascending exceedance positions into completed segments.
///
/// Neighbours `w_i`, `w_{i+1}` share a segment iff `w_{i+1} - w_i <= gap + 1`.
pub fn complete(positions: &[usize], gap: usize) -> Result<Vec<Segment>> {
    let Some(&first) = positions.first() else {
        return Ok(Vec::new());
    };
    if first == 0 {
        return Err(Error::InvalidSegments(
            "positions are 1-based; got 0".into(),
        ));
    }
    let span = gap + 1;
    let mut out = Vec::new();
    let mut start = first;
    let mut last = first;
    for &pos in &positions[1..] {
        if pos <= last {
            return Err(Error::Unsorted {
                prev: last,
                next: pos,
            });
        }
        if pos - last > span {
            out.push(Segment { start, end: last });
            start = pos;
        }
        last = pos;
    }
    out.push(Segment { start, end: last });
    Ok(out)
}

/// Keeps the segments longer than `cutoff`.
pub fn cleanup(segments: &[Segment], cutoff: usize) -> Vec<Segment> {
    segments
        .iter()
        .copied()
        .filter(|s| s.len() > cutoff)
        .collect()
}

/// Runs the full pipeline on `x`. P-values are left unset; see
/// [`crate::inference::annotate_p_values`].
pub fn detect(x: &[f64], params: &DetectionParams) -> Result<DetectionResult> {
    let c = resolve_threshold(x, params)?;
    let span = params.gap + 1;
    let cutoff = params.cutoff;

    let mut segments = Vec::new();
    let mut emit = |start: usize, end: usize, count: usize| {
        let seg = Segment { start, end };
        if seg.len() > cutoff {
            let sum: f64 = x[seg.range()].iter().sum();
            segments.push(AnnotatedSegment {
                segment: seg,
                exceed_count: count,
                mean: sum / seg.len() as f64,
                p_value: None,
            });
        }
    };

    let mut exceedances = 0usize;
    // (start, last exceedance, exceedances so far) of the open cluster
    let mut open: Option<(usize, usize, usize)> = None;
    for (i, &v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(non_finite(i));
        }
        if v.abs() <= c {
            continue;
        }
        let pos = i + 1;
        exceedances += 1;
        open = match open {
            Some((start, last, count)) if pos - last <= span => Some((start, pos, count + 1)),
            Some((start, last, count)) => {
                emit(start, last, count);
                Some((pos, pos, 1))
            }
            None => Some((pos, pos, 1)),
        };
    }
    if let Some((start, last, count)) = open {
        emit(start, last, count);
    }

    Ok(DetectionResult {
        segments,
        threshold: c,
        exceedances,
        seq_len: x.len(),
    })
}
