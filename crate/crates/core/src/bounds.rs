// SPDX-License-Identifier: MIT OR Apache-2.0

//! Finite-sample guarantees for the detector under IID symmetric noise.
//!
//! The probability bounds are lower bounds and are clamped at zero; a
//! clamped value is marked [`Bound::vacuous`]. The expressions are stated
//! in terms of a *splitting length* `d`: two exceedances belong to one
//! segment iff they are at most `d` apart, so a run of `d` non-exceedances
//! separates segments. A detector run with gap tolerance `gap` joins
//! exceedances up to `gap + 1` apart, so its splitting length is
//! [`joining_distance`]`(gap)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segment::{validate_separated, Segment};

/// Splitting length of a detector with the given gap tolerance.
pub fn joining_distance(gap: usize) -> usize {
    gap + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    /// The raw expression was negative and carries no information.
    pub vacuous: bool,
}

impl Bound {
    fn clamped(raw: f64) -> Self {
        if raw < 0.0 {
            Bound {
                value: 0.0,
                vacuous: true,
            }
        } else {
            Bound {
                value: raw.min(1.0),
                vacuous: false,
            }
        }
    }
}

/// Shape of a signal configuration.
///
/// `beta_min` is `F(nu_min)` for the noise CDF `F` and the weakest height
/// `nu_min`; the bounds assume the threshold equals `nu_min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalGeometry {
    pub segments: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Smallest number of positions strictly between consecutive segments.
    pub min_gap: usize,
    pub beta_min: f64,
}

impl SignalGeometry {
    pub fn new(
        segments: usize,
        min_len: usize,
        max_len: usize,
        min_gap: usize,
        beta_min: f64,
    ) -> Result<Self> {
        let g = Self {
            segments,
            min_len,
            max_len,
            min_gap,
            beta_min,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn from_segments(truth: &[Segment], beta_min: f64) -> Result<Self> {
        validate_separated(truth)?;
        if truth.is_empty() {
            return Err(Error::param("geometry needs at least one signal segment"));
        }
        let min_len = truth.iter().map(Segment::len).min().unwrap_or(0);
        let max_len = truth.iter().map(Segment::len).max().unwrap_or(0);
        let min_gap = truth
            .windows(2)
            .map(|w| w[1].start - w[0].end - 1)
            .min()
            .unwrap_or(usize::MAX);
        Self::new(truth.len(), min_len, max_len, min_gap, beta_min)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments == 0 {
            return Err(Error::param("geometry needs at least one signal segment"));
        }
        if !(1 <= self.min_len && self.min_len <= self.max_len) {
            return Err(Error::param(format!(
                "need 1 <= min_len <= max_len; got {} and {}",
                self.min_len, self.max_len
            )));
        }
        if self.segments >= 2 && self.min_gap == 0 {
            return Err(Error::param(
                "segments must be separated by at least one position",
            ));
        }
        check_beta(self.beta_min)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.5 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "beta must lie in (0.5, 1); got {beta}"
        )))
    }
}

fn check_split(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::param("splitting length must be at least 1"))
    } else {
        Ok(())
    }
}

/// Lower bound on the chance that a signal segment of length `len` with
/// height at or above the threshold has no run of `min(d, len)`
/// non-exceedances.
pub fn unbroken_segment_bound(len: usize, d: usize) -> Result<Bound> {
    check_split(d)?;
    if len == 0 {
        return Err(Error::param("segment length must be at least 1"));
    }
    let raw = if d < len {
        1.0 - (len - d + 2) as f64 * 0.5f64.powi(d as i32 + 1)
    } else {
        1.0 - 0.5f64.powi(len as i32)
    };
    Ok(Bound::clamped(raw))
}

/// Lower bound on the chance that both flanks of width `flank` around a
/// segment contain a run of `d` non-exceedances.
pub fn flank_separation_bound(flank: usize, d: usize, beta: f64) -> Result<Bound> {
    check_split(d)?;
    check_beta(beta)?;
    let white = 2.0 * beta - 1.0;
    let blocks = (flank / d) as f64;
    Ok(Bound::clamped(
        1.0 - 2.0 * (1.0 - white.powi(d as i32)).powf(blocks),
    ))
}

/// Lower bound on the chance that thresholding at `nu_min` and completing
/// with splitting length `d` (no cleanup) identifies every signal segment.
pub fn identification_bound(g: &SignalGeometry, d: usize) -> Result<Bound> {
    check_split(d)?;
    g.validate()?;
    let k = g.segments as f64;
    let split_term =
        (0.5 * (g.max_len as f64 - d as f64 + 2.0)).max(1.0) * 0.5f64.powi(d.min(g.min_len) as i32);
    let merge_term = if g.segments > 1 {
        let white = 2.0 * g.beta_min - 1.0;
        (k - 1.0) * (1.0 - white.powi(d as i32)).powf((g.min_gap / d) as f64)
    } else {
        0.0
    };
    Ok(Bound::clamped(1.0 - k * split_term - merge_term))
}

/// Upper bound on the expected number of segments left under the null when
/// `m` of `n` positions are exceedances and singletons are removed.
pub fn null_segment_count_bound(n: usize, m: usize, d: usize) -> Result<f64> {
    check_split(d)?;
    if m > n {
        return Err(Error::param(format!("need m <= n; got m = {m}, n = {n}")));
    }
    if m == 0 {
        return Ok(0.0);
    }
    let mut all_white = 1.0;
    for k in 1..=d {
        // n - m + 1 - k <= 0 or n - k <= 0: a white run of length d is impossible
        if n < m + k || n <= k {
            all_white = 0.0;
            break;
        }
        all_white *= (n + 1 - m - k) as f64 / (n - k) as f64;
    }
    Ok((m as f64 * (1.0 - all_white)).clamp(0.0, m as f64))
}
