// SPDX-License-Identifier: MIT OR Apache-2.0

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shortseg::oracle::naive_detect;
use shortseg::segment::validate_separated;
use shortseg::{cleanup, complete, detect, threshold_positions, DetectionParams, Segment};

fn pattern_to_values(bits: u32, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| if bits >> j & 1 == 1 { 2.0 } else { 0.5 })
        .collect()
}

#[test]
fn exhaustive_patterns_match_naive_reference() {
    for n in 1..=14usize {
        for bits in 0u32..(1 << n) {
            let x = pattern_to_values(bits, n);
            for gap in 0..=4 {
                for cutoff in [0, 1, 3] {
                    let p = DetectionParams::absolute(1.0, gap, cutoff).unwrap();
                    assert_eq!(
                        detect(&x, &p).unwrap(),
                        naive_detect(&x, &p).unwrap(),
                        "n {n} bits {bits:b} gap {gap} cutoff {cutoff}"
                    );
                }
            }
        }
    }
}

#[test]
fn exhaustive_length_twenty() {
    let p = DetectionParams::absolute(1.0, 3, 2).unwrap();
    for bits in 0u32..(1 << 20) {
        let x = pattern_to_values(bits, 20);
        let fast = detect(&x, &p).unwrap();
        let slow = naive_detect(&x, &p).unwrap();
        assert_eq!(
            fast.plain_segments(),
            slow.plain_segments(),
            "bits {bits:b}"
        );
    }
}

#[test]
fn random_sequences_match_naive_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let n = rng.random_range(1..=200);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let gap = rng.random_range(0..=12);
        let cutoff = rng.random_range(0..=6);
        let p = if rng.random_bool(0.5) {
            DetectionParams::absolute(rng.random_range(0.0..3.0), gap, cutoff).unwrap()
        } else {
            DetectionParams::percentile(rng.random_range(0.05..0.99), gap, cutoff).unwrap()
        };
        assert_eq!(detect(&x, &p).unwrap(), naive_detect(&x, &p).unwrap());
    }
}

fn sequence() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, 1..300)
}

proptest! {
    #[test]
    fn output_is_separated_and_anchored(x in sequence(), c in 0.0f64..3.0, gap in 0usize..10, cutoff in 0usize..6) {
        let p = DetectionParams::absolute(c, gap, cutoff).unwrap();
        let r = detect(&x, &p).unwrap();
        let segs = r.plain_segments();
        prop_assert!(validate_separated(&segs).is_ok());
        for s in &r.segments {
            prop_assert!(s.segment.len() > cutoff);
            prop_assert!(s.segment.end <= x.len());
            prop_assert!(x[s.segment.start - 1].abs() > c);
            prop_assert!(x[s.segment.end - 1].abs() > c);
            prop_assert!(s.exceed_count >= 1 && s.exceed_count <= s.segment.len());
        }
        prop_assert_eq!(r.exceedances, x.iter().filter(|v| v.abs() > c).count());
    }

    #[test]
    fn larger_gap_only_merges(x in sequence(), c in 0.0f64..3.0, gap in 0usize..10, extra in 0usize..10) {
        let small = detect(&x, &DetectionParams::absolute(c, gap, 0).unwrap()).unwrap().plain_segments();
        let large = detect(&x, &DetectionParams::absolute(c, gap + extra, 0).unwrap()).unwrap().plain_segments();
        for s in &small {
            prop_assert!(large.iter().any(|l: &Segment| l.contains_segment(s)));
        }
    }

    #[test]
    fn larger_cutoff_is_subset(x in sequence(), c in 0.0f64..3.0, gap in 0usize..10, cutoff in 0usize..6, extra in 0usize..6) {
        let low = detect(&x, &DetectionParams::absolute(c, gap, cutoff).unwrap()).unwrap().plain_segments();
        let high = detect(&x, &DetectionParams::absolute(c, gap, cutoff + extra).unwrap()).unwrap().plain_segments();
        for s in &high {
            prop_assert!(low.contains(s));
        }
    }

    #[test]
    fn odd_monotone_transform_preserves_segments(x in sequence(), c in 0.1f64..3.0, gap in 0usize..8, cutoff in 0usize..4) {
        let g = |u: f64| u * u * u + 2.0 * u;
        let gx: Vec<f64> = x.iter().map(|&u| g(u)).collect();
        let a = detect(&x, &DetectionParams::absolute(c, gap, cutoff).unwrap()).unwrap();
        let b = detect(&gx, &DetectionParams::absolute(g(c), gap, cutoff).unwrap()).unwrap();
        prop_assert_eq!(a.plain_segments(), b.plain_segments());
        prop_assert_eq!(threshold_positions(&x, c), threshold_positions(&gx, g(c)));
    }

    #[test]
    fn percentile_segments_invariant_under_transform(x in sequence(), alpha in 0.5f64..0.99, gap in 0usize..8) {
        let gx: Vec<f64> = x.iter().map(|&u| u.signum() * u.abs().sqrt() * 5.0).collect();
        let p = DetectionParams::percentile(alpha, gap, 1).unwrap();
        prop_assert_eq!(detect(&x, &p).unwrap().plain_segments(), detect(&gx, &p).unwrap().plain_segments());
    }

    #[test]
    fn fused_pass_equals_composition(x in sequence(), c in 0.0f64..3.0, gap in 0usize..10, cutoff in 0usize..6) {
        let fused = detect(&x, &DetectionParams::absolute(c, gap, cutoff).unwrap()).unwrap().plain_segments();
        let composed = cleanup(&complete(&threshold_positions(&x, c), gap).unwrap(), cutoff);
        prop_assert_eq!(fused, composed);
    }

    #[test]
    fn completion_gaps_exceed_tolerance(mut pos in prop::collection::btree_set(1usize..500, 0..60), gap in 0usize..12) {
        let pos: Vec<usize> = std::mem::take(&mut pos).into_iter().collect();
        let segs = complete(&pos, gap).unwrap();
        for w in segs.windows(2) {
            prop_assert!(w[1].start - w[0].end >= gap + 2);
        }
        let covered: usize = segs.iter().map(|s| pos.iter().filter(|&&p| s.contains(p)).count()).sum();
        prop_assert_eq!(covered, pos.len());
    }
}
