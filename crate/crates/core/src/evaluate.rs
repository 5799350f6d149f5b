// SPDX-License-Identifier: MIT OR Apache-2.0

//! Scoring detections against ground truth.
//!
//! A detected segment is a true positive when it intersects exactly one
//! truth segment and no other detected segment intersects that truth
//! segment. Everything else is a false positive; in particular two
//! detections landing on the same truth segment are both false positives.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::segment::{validate_disjoint, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    /// Index of the identified truth segment.
    TruePositive {
        truth: usize,
    },
    FalsePositive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    /// One label per detected segment, in input order.
    pub labels: Vec<Label>,
    pub tp: usize,
    pub fp: usize,
    /// Number of truth segments with a true-positive partner.
    pub identified: usize,
}

/// For each `a`, the index of its partner in `b` when the two intersect
/// each other and nothing else in the opposite set.
fn unique_partners(a: &[Segment], b: &[Segment]) -> Vec<Option<usize>> {
    let mut b_hits = vec![0usize; b.len()];
    let mut a_hits: Vec<(usize, usize)> = Vec::with_capacity(a.len());
    for seg in a {
        let first = b.partition_point(|t| t.end < seg.start);
        let mut count = 0;
        for (j, t) in b.iter().enumerate().skip(first) {
            if t.start > seg.end {
                break;
            }
            count += 1;
            b_hits[j] += 1;
        }
        a_hits.push((count, first));
    }
    a_hits
        .into_iter()
        .map(|(count, j)| (count == 1 && b_hits[j] == 1).then_some(j))
        .collect()
}

pub fn classify(truth: &[Segment], detected: &[Segment]) -> Result<Classification> {
    validate_disjoint(truth)?;
    validate_disjoint(detected)?;
    let labels: Vec<Label> = unique_partners(detected, truth)
        .into_iter()
        .map(|p| match p {
            Some(truth) => Label::TruePositive { truth },
            None => Label::FalsePositive,
        })
        .collect();
    let tp = labels
        .iter()
        .filter(|l| matches!(l, Label::TruePositive { .. }))
        .count();
    Ok(Classification {
        fp: labels.len() - tp,
        tp,
        // partners are unique, so each TP identifies a distinct truth segment
        identified: tp,
        labels,
    })
}

/// Overlap similarity `|a ∩ b| / sqrt(|a| |b|)`, in `[0, 1]`.
pub fn affinity(a: &Segment, b: &Segment) -> f64 {
    a.overlap(b) as f64 / ((a.len() as f64) * (b.len() as f64)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub a: Segment,
    pub b: Segment,
    pub affinity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonSegments {
    pub pairs: Vec<MatchedPair>,
    /// `None` when there are no pairs.
    pub mean_affinity: Option<f64>,
}

/// Pairs of segments, one from each set, that overlap each other and
/// nothing else in the other set.
pub fn match_common(set_a: &[Segment], set_b: &[Segment]) -> Result<CommonSegments> {
    validate_disjoint(set_a)?;
    validate_disjoint(set_b)?;
    let pairs: Vec<MatchedPair> = unique_partners(set_a, set_b)
        .into_iter()
        .zip(set_a)
        .filter_map(|(p, a)| {
            p.map(|j| MatchedPair {
                a: *a,
                b: set_b[j],
                affinity: affinity(a, &set_b[j]),
            })
        })
        .collect();
    let mean_affinity = (!pairs.is_empty())
        .then(|| pairs.iter().map(|p| p.affinity).sum::<f64>() / pairs.len() as f64);
    Ok(CommonSegments {
        pairs,
        mean_affinity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::naive_classify;

    fn seg(a: usize, b: usize) -> Segment {
        Segment::new(a, b).unwrap()
    }

    // Two signal segments at 4..=10 and 21..=25 of a 30-position window,
    // with four candidate detections.
    fn two_truths() -> Vec<Segment> {
        vec![seg(4, 10), seg(21, 25)]
    }

    #[test]
    fn four_candidate_sets() {
        let truth = two_truths();
        let cases = [
            (vec![seg(3, 10), seg(21, 24)], 2, 0),
            (vec![seg(4, 10), seg(27, 30)], 1, 1),
            (vec![seg(4, 10), seg(18, 21), seg(25, 27)], 1, 2),
            (vec![seg(5, 24)], 0, 1),
        ];
        for (detected, tp, fp) in cases {
            let c = classify(&truth, &detected).unwrap();
            assert_eq!((c.tp, c.fp), (tp, fp), "{detected:?}");
            assert_eq!(c.identified, tp);
        }
        let c = classify(&truth, &[seg(3, 10), seg(21, 24)]).unwrap();
        assert_eq!(
            c.labels,
            vec![
                Label::TruePositive { truth: 0 },
                Label::TruePositive { truth: 1 }
            ]
        );
    }

    #[test]
    fn rejects_overlapping_inputs() {
        assert!(classify(&[seg(1, 5), seg(3, 8)], &[]).is_err());
        assert!(classify(&[], &[seg(4, 5), seg(1, 2)]).is_err());
    }

    #[test]
    fn empty_sets() {
        let c = classify(&two_truths(), &[]).unwrap();
        assert_eq!((c.tp, c.fp, c.identified), (0, 0, 0));
        let c = classify(&[], &[seg(1, 3)]).unwrap();
        assert_eq!((c.tp, c.fp), (0, 1));
    }

    #[test]
    fn affinity_examples() {
        assert_eq!(affinity(&seg(5, 10), &seg(5, 10)), 1.0);
        assert_eq!(affinity(&seg(1, 5), &seg(10, 20)), 0.0);
        assert_eq!(affinity(&seg(1, 4), &seg(3, 6)), 0.5);
        assert_eq!(affinity(&seg(1, 10), &seg(5, 14)), 0.6);
    }

    #[test]
    fn common_segment_examples() {
        let a = [seg(1, 10)];
        let b = [seg(5, 14), seg(20, 30)];
        let m = match_common(&a, &b).unwrap();
        assert_eq!(m.pairs.len(), 1);
        assert_eq!((m.pairs[0].a, m.pairs[0].b), (seg(1, 10), seg(5, 14)));
        assert_eq!(m.pairs[0].affinity, 0.6);
        assert_eq!(m.mean_affinity, Some(0.6));

        let same = [seg(1, 3), seg(7, 19), seg(40, 41)];
        let m = match_common(&same, &same).unwrap();
        assert_eq!(m.pairs.len(), 3);
        assert_eq!(m.mean_affinity, Some(1.0));

        let m = match_common(&[seg(1, 3)], &[seg(5, 9)]).unwrap();
        assert!(m.pairs.is_empty());
        assert_eq!(m.mean_affinity, None);

        // one segment of A spanning two of B matches neither
        let m = match_common(&[seg(1, 20)], &[seg(2, 4), seg(8, 9)]).unwrap();
        assert!(m.pairs.is_empty());
    }

    #[test]
    fn matches_naive_reference_on_candidate_sets() {
        let truth = two_truths();
        for detected in [vec![seg(3, 10), seg(21, 24)], vec![seg(5, 24)]] {
            assert_eq!(
                classify(&truth, &detected).unwrap(),
                naive_classify(&truth, &detected)
            );
        }
    }
}
