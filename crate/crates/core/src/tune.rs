// SPDX-License-Identifier: MIT OR Apache-2.0

//! Threshold selection from a target pattern.
//!
//! Given a sequence length `n` and a pattern "at least `t` exceedances in a
//! window of `s`" that should stay significant at level `p`, pick the largest
//! exceedance budget `m` for which the pattern's p-value bound is still at
//! most `p`, and threshold at the percentile `1 - m / n`.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{p_value_bound_uncapped, BallConfiguration};

fn bound_at(n: usize, m: usize, s: usize, t: usize) -> Result<f64> {
    p_value_bound_uncapped(&BallConfiguration::new(n, m, s, t)?)
}

fn check_inputs(n: usize, s: usize, t: usize, p: f64) -> Result<()> {
    if !(1 <= t && t <= s && s <= n) {
        return Err(Error::param(format!(
            "infeasible pattern: need 1 <= t <= s <= n; got n = {n}, s = {s}, t = {t}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param(format!(
            "significance level must lie in (0, 1); got {p}"
        )));
    }
    Ok(())
}

/// Largest `m` in `t..=n` whose bound is at most `p`, or `None` if even
/// `m = t` fails.
///
/// The bound is non-decreasing in `m`, so the boundary is found by bisection.
pub fn select_m(n: usize, s: usize, t: usize, p: f64) -> Result<Option<usize>> {
    check_inputs(n, s, t, p)?;
    if bound_at(n, t, s, t)? > p {
        return Ok(None);
    }
    if bound_at(n, n, s, t)? <= p {
        return Ok(Some(n));
    }
    // invariant: bound(lo) <= p < bound(hi)
    let (mut lo, mut hi) = (t, n);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound_at(n, mid, s, t)? <= p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// `1 - m / n` for the `m` chosen by [`select_m`].
pub fn select_percentile(n: usize, s: usize, t: usize, p: f64) -> Result<Option<f64>> {
    Ok(select_m(n, s, t, p)?.map(|m| 1.0 - m as f64 / n as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningRow {
    pub n: usize,
    pub s: usize,
    pub t: usize,
    pub p: f64,
    pub m: Option<usize>,
    pub alpha: Option<f64>,
}

/// One row per `(n, (s, t), p)` combination, sorted by `(s, t, p, n)`.
pub fn tuning_table(
    n_grid: &[usize],
    patterns: &[(usize, usize)],
    p_levels: &[f64],
) -> Result<Vec<TuningRow>> {
    if n_grid.is_empty() || patterns.is_empty() || p_levels.is_empty() {
        return Err(Error::param("tuning grids must be non-empty"));
    }
    let mut rows = Vec::with_capacity(n_grid.len() * patterns.len() * p_levels.len());
    for &(s, t) in patterns {
        for &p in p_levels {
            for &n in n_grid {
                let m = select_m(n, s, t, p)?;
                rows.push(TuningRow {
                    n,
                    s,
                    t,
                    p,
                    m,
                    alpha: m.map(|m| 1.0 - m as f64 / n as f64),
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        (a.s, a.t)
            .cmp(&(b.s, b.t))
            .then(a.p.total_cmp(&b.p))
            .then(a.n.cmp(&b.n))
    });
    Ok(rows)
}

pub fn write_tuning_csv<W: io::Write>(rows: &[TuningRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tuning_csv<R: io::Read>(input: R) -> csv::Result<Vec<TuningRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
