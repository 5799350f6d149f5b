// SPDX-License-Identifier: MIT OR Apache-2.0

//! Closed integer intervals of 1-based positions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The closed interval `[start, end]` of 1-based positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start == 0 {
            return Err(Error::InvalidSegments(format!(
                "positions are 1-based; got start = 0 in [{start}, {end}]"
            )));
        }
        if end < start {
            return Err(Error::InvalidSegments(format!(
                "segment end precedes start: [{start}, {end}]"
            )));
        }
        Ok(Self { start, end })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    /// Always false; a segment holds at least one position.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains(&self, pos: usize) -> bool {
        self.start <= pos && pos <= self.end
    }

    #[inline]
    pub fn contains_segment(&self, other: &Segment) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    #[inline]
    pub fn intersects(&self, other: &Segment) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    /// Number of shared positions.
    #[inline]
    pub fn overlap(&self, other: &Segment) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        if lo <= hi {
            hi - lo + 1
        } else {
            0
        }
    }

    pub fn shifted(&self, offset: usize) -> Segment {
        Segment {
            start: self.start + offset,
            end: self.end + offset,
        }
    }

    /// Zero-based half-open range over a slice.
    #[inline]
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start - 1..self.end
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Checks that `segments` are sorted, pairwise disjoint, and each is well formed.
pub fn validate_disjoint(segments: &[Segment]) -> Result<()> {
    for seg in segments {
        Segment::new(seg.start, seg.end)?;
    }
    for pair in segments.windows(2) {
        if pair[1].start <= pair[0].end {
            return Err(Error::InvalidSegments(format!(
                "segments {} and {} overlap or are out of order",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}

/// Like [`validate_disjoint`], and additionally requires at least one
/// unoccupied position between neighbours, so the decomposition is unique.
pub fn validate_separated(segments: &[Segment]) -> Result<()> {
    validate_disjoint(segments)?;
    for pair in segments.windows(2) {
        if pair[1].start <= pair[0].end + 1 {
            return Err(Error::InvalidSegments(format!(
                "segments {} and {} are adjacent",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}
