// SPDX-License-Identifier: MIT OR Apache-2.0

//! Segment p-values.
//!
//! Under the null, the `m` exceedances of a length-`n` sequence are placed
//! uniformly at random. A segment of length `s` holding `t` exceedances is
//! scored by an upper bound on the chance that *some* window of length `s`
//! holds at least `t` of them: conditioning on a black position and
//! counting blacks among the next `s - 1` positions gives
//! `m * P(Y >= t - 1)` with `Y ~ Hypergeometric(n - 1, m - 1, s - 1)`.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::detect::DetectionResult;
use crate::error::{Error, Result};

/// A random placement of `exceedances` black positions among `seq_len`,
/// probed for a window of length `window` holding at least `hits` blacks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BallConfiguration {
    pub seq_len: usize,
    pub exceedances: usize,
    pub window: usize,
    pub hits: usize,
}

impl BallConfiguration {
    pub fn new(seq_len: usize, exceedances: usize, window: usize, hits: usize) -> Result<Self> {
        let cfg = Self {
            seq_len,
            exceedances,
            window,
            hits,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            seq_len: n,
            exceedances: m,
            window: s,
            hits: t,
        } = *self;
        if !(1 <= t && t <= s && s <= n) {
            return Err(Error::param(format!(
                "need 1 <= t <= s <= n; got n = {n}, s = {s}, t = {t}"
            )));
        }
        if !(t <= m && m <= n) {
            return Err(Error::param(format!(
                "need t <= m <= n; got n = {n}, m = {m}, t = {t}"
            )));
        }
        Ok(())
    }
}

/// `ln C(n, k)`. Small `k` is summed term by term, which keeps the absolute
/// error near machine epsilon even when `ln n!` is large.
fn ln_choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    if k <= 64 {
        (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
    } else {
        ln_binomial(n, k)
    }
}

/// `P(Y >= t_min)` for `Y` hypergeometric with the given population size,
/// number of success states and number of draws.
///
/// The pmf is anchored in log space at the term nearest the requested tail
/// and the remaining terms follow from the pmf ratio recurrence. Tails
/// that contain the mode are evaluated as one minus the opposite tail.
pub fn hypergeometric_tail(population: u64, successes: u64, draws: u64, t_min: u64) -> Result<f64> {
    if successes > population || draws > population {
        return Err(Error::param(format!(
            "hypergeometric parameters out of range: population {population}, \
             successes {successes}, draws {draws}"
        )));
    }
    let failures = population - successes;
    let lo = draws.saturating_sub(failures);
    let hi = successes.min(draws);
    if t_min <= lo {
        return Ok(1.0);
    }
    if t_min > hi {
        return Ok(0.0);
    }

    let ln_pmf = |k: u64| {
        ln_choose(successes, k) + ln_choose(failures, draws - k) - ln_choose(population, draws)
    };
    // pmf(k + 1) / pmf(k)
    let up = |k: u64| {
        ((successes - k) as f64 * (draws - k) as f64)
            / ((k + 1) as f64 * (failures + k + 1 - draws) as f64)
    };

    let mode = ((draws as f64 + 1.0) * (successes as f64 + 1.0) / (population as f64 + 2.0)).floor()
        as u64;

    let tail = if t_min > mode {
        // decreasing terms from t_min upward
        let mut term = ln_pmf(t_min).exp();
        let mut sum = term;
        let mut k = t_min;
        while k < hi {
            term *= up(k);
            k += 1;
            sum += term;
            if term <= sum * 1e-18 {
                break;
            }
        }
        sum
    } else {
        // decreasing terms from t_min - 1 downward
        let mut k = t_min - 1;
        let mut term = ln_pmf(k).exp();
        let mut sum = term;
        while k > lo {
            term /= up(k - 1);
            k -= 1;
            sum += term;
            if term <= sum * 1e-18 {
                break;
            }
        }
        1.0 - sum
    };
    Ok(tail.clamp(0.0, 1.0))
}

/// `m * P(Y >= t - 1)` before capping at 1.
pub fn p_value_bound_uncapped(cfg: &BallConfiguration) -> Result<f64> {
    cfg.validate()?;
    let n = cfg.seq_len as u64;
    let m = cfg.exceedances as u64;
    let s = cfg.window as u64;
    let t = cfg.hits as u64;
    let tail = if s == t {
        // every one of the s - 1 draws must succeed
        (0..s - 1)
            .map(|i| (m - 1 - i) as f64 / (n - 1 - i) as f64)
            .product()
    } else {
        hypergeometric_tail(n - 1, m - 1, s - 1, t - 1)?
    };
    Ok(m as f64 * tail)
}

/// Upper bound on the null probability of the pattern, capped at 1.
pub fn p_value_upper_bound(cfg: &BallConfiguration) -> Result<f64> {
    Ok(p_value_bound_uncapped(cfg)?.min(1.0))
}

/// Sets the p-value of every segment from its length, its exceedance count
/// and the sequence-wide exceedance total.
pub fn annotate_p_values(mut result: DetectionResult) -> Result<DetectionResult> {
    for seg in &mut result.segments {
        let cfg = BallConfiguration::new(
            result.seq_len,
            result.exceedances,
            seg.segment.len(),
            seg.exceed_count,
        )?;
        seg.p_value = Some(p_value_upper_bound(&cfg)?);
    }
    Ok(result)
}

/// Keeps the segments whose p-value is at most `p_max`.
pub fn filter_by_p(mut result: DetectionResult, p_max: f64) -> Result<DetectionResult> {
    if !(p_max > 0.0 && p_max <= 1.0) {
        return Err(Error::param(format!(
            "p-value cutoff must lie in (0, 1]; got {p_max}"
        )));
    }
    if result.segments.iter().any(|s| s.p_value.is_none()) {
        return Err(Error::MissingPValues);
    }
    result
        .segments
        .retain(|s| s.p_value.is_some_and(|p| p <= p_max));
    Ok(result)
}
