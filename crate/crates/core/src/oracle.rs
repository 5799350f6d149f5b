// SPDX-License-Identifier: MIT OR Apache-2.0

//! Brute-force references used to check the fast paths.
//!
//! Nothing here shares code with the implementations it checks beyond the
//! plain data types: the pattern probability is computed by enumerating
//! placements, detection materializes the completion set position by
//! position, and classification compares every pair of segments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detect::{
    percentile_rank, AnnotatedSegment, DetectionParams, DetectionResult, ThresholdMode,
};
use crate::error::{Error, Result};
use crate::evaluate::{Classification, Label};
use crate::inference::BallConfiguration;
use crate::segment::Segment;

/// Largest number of placements [`exact_pattern_probability`] will enumerate.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

fn check_geometry(cfg: &BallConfiguration) -> Result<()> {
    if cfg.window == 0 || cfg.window > cfg.seq_len || cfg.exceedances > cfg.seq_len {
        return Err(Error::param(format!(
            "need 1 <= s <= n and m <= n; got n = {}, m = {}, s = {}",
            cfg.seq_len, cfg.exceedances, cfg.window
        )));
    }
    Ok(())
}

/// Whether some window of `window` positions holds `hits` of the sorted
/// positions in `blacks`.
fn has_dense_window(blacks: &[usize], window: usize, hits: usize) -> bool {
    blacks.windows(hits).any(|w| w[hits - 1] - w[0] < window)
}

/// `(placements with the pattern, all placements)`.
pub fn exact_pattern_count(cfg: &BallConfiguration) -> Result<(u64, u64)> {
    check_geometry(cfg)?;
    let (n, m, s, t) = (cfg.seq_len, cfg.exceedances, cfg.window, cfg.hits);
    let total = binomial(n as u64, m as u64)
        .filter(|&c| c <= ENUMERATION_LIMIT)
        .ok_or(Error::EnumerationTooLarge {
            n,
            m,
            limit: ENUMERATION_LIMIT,
        })?;
    if t == 0 {
        return Ok((total, total));
    }
    if t > m || t > s {
        return Ok((0, total));
    }
    // lexicographic walk over m-subsets of 0..n
    let mut comb: Vec<usize> = (0..m).collect();
    let mut hits = 0u64;
    loop {
        if has_dense_window(&comb, s, t) {
            hits += 1;
        }
        let mut i = m;
        loop {
            if i == 0 {
                return Ok((hits, total));
            }
            i -= 1;
            if comb[i] < n - m + i {
                break;
            }
        }
        comb[i] += 1;
        for j in i + 1..m {
            comb[j] = comb[j - 1] + 1;
        }
    }
}

/// Exact probability that `m` uniformly placed exceedances among `n`
/// positions leave some window of length `s` with at least `t` of them.
pub fn exact_pattern_probability(cfg: &BallConfiguration) -> Result<f64> {
    let (hits, total) = exact_pattern_count(cfg)?;
    Ok(hits as f64 / total as f64)
}

/// Binomial standard error of a frequency estimate.
pub fn binomial_se(estimate: f64, reps: usize) -> f64 {
    (estimate * (1.0 - estimate) / reps as f64).sqrt()
}

/// Monte Carlo estimate of the same probability, with its standard error.
///
/// Each replicate places the exceedances with a partial Fisher-Yates shuffle.
pub fn monte_carlo_pattern_probability(
    cfg: &BallConfiguration,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_geometry(cfg)?;
    if reps == 0 {
        return Err(Error::param("at least one replicate is required"));
    }
    let (n, m, s, t) = (cfg.seq_len, cfg.exceedances, cfg.window, cfg.hits);
    if t == 0 {
        return Ok((1.0, 0.0));
    }
    if t > m || t > s {
        return Ok((0.0, 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut blacks = vec![0usize; m];
    let mut hits = 0usize;
    for _ in 0..reps {
        for i in 0..m {
            let j = rng.random_range(i..n);
            perm.swap(i, j);
        }
        blacks.copy_from_slice(&perm[..m]);
        blacks.sort_unstable();
        if has_dense_window(&blacks, s, t) {
            hits += 1;
        }
    }
    let est = hits as f64 / reps as f64;
    Ok((est, binomial_se(est, reps)))
}

/// Detection by direct construction of the completion set: position `j` is
/// filled iff exceedances `j1 <= j <= j2` exist with `j2 - j1 <= gap + 1`.
pub fn naive_detect(x: &[f64], params: &DetectionParams) -> Result<DetectionResult> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    params.validate()?;
    let n = x.len();
    let c = match params.threshold {
        ThresholdMode::Absolute(c) => c,
        ThresholdMode::Percentile(alpha) => {
            let mut abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
            abs.sort_by(f64::total_cmp);
            abs[percentile_rank(alpha, n) - 1]
        }
    };
    let black: Vec<bool> = x.iter().map(|v| v.abs() > c).collect();
    let reach = params.gap + 1;

    let mut filled = vec![false; n];
    for (j, slot) in filled.iter_mut().enumerate() {
        'outer: for j1 in j.saturating_sub(reach)..=j {
            if !black[j1] {
                continue;
            }
            for &b in &black[j..=(j1 + reach).min(n - 1)] {
                if b {
                    *slot = true;
                    break 'outer;
                }
            }
        }
    }

    let mut segments = Vec::new();
    let mut j = 0;
    while j < n {
        if !filled[j] {
            j += 1;
            continue;
        }
        let start = j;
        while j < n && filled[j] {
            j += 1;
        }
        let seg = Segment {
            start: start + 1,
            end: j,
        };
        if seg.len() > params.cutoff {
            let exceed_count = black[start..j].iter().filter(|&&b| b).count();
            let sum: f64 = x[start..j].iter().sum();
            segments.push(AnnotatedSegment {
                segment: seg,
                exceed_count,
                mean: sum / seg.len() as f64,
                p_value: None,
            });
        }
    }

    Ok(DetectionResult {
        segments,
        threshold: c,
        exceedances: black.iter().filter(|&&b| b).count(),
        seq_len: n,
    })
}

/// Quadratic-time reference for [`crate::evaluate::classify`].
pub fn naive_classify(truth: &[Segment], detected: &[Segment]) -> Classification {
    let hits = |a: &Segment, b: &Segment| a.start <= b.end && b.start <= a.end;
    let labels: Vec<Label> = detected
        .iter()
        .map(|d| {
            let touched: Vec<usize> = (0..truth.len()).filter(|&k| hits(d, &truth[k])).collect();
            if touched.len() != 1 {
                return Label::FalsePositive;
            }
            let k = touched[0];
            let rivals = detected.iter().filter(|o| hits(o, &truth[k])).count();
            if rivals == 1 {
                Label::TruePositive { truth: k }
            } else {
                Label::FalsePositive
            }
        })
        .collect();
    let tp = labels
        .iter()
        .filter(|l| matches!(l, Label::TruePositive { .. }))
        .count();
    let identified = (0..truth.len())
        .filter(|&k| labels.contains(&Label::TruePositive { truth: k }))
        .count();
    Classification {
        fp: labels.len() - tp,
        tp,
        identified,
        labels,
    }
}
