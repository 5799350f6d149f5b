// SPDX-License-Identifier: MIT OR Apache-2.0

use proptest::prelude::*;
use shortseg::bounds::{
    flank_separation_bound, identification_bound, null_segment_count_bound, unbroken_segment_bound,
    SignalGeometry,
};
use shortseg::inference::{p_value_bound_uncapped, BallConfiguration};
use shortseg::tune::{select_m, select_percentile};

fn bound(n: usize, m: usize, s: usize, t: usize) -> f64 {
    p_value_bound_uncapped(&BallConfiguration::new(n, m, s, t).unwrap()).unwrap()
}

#[test]
fn boundary_certificate_grid() {
    let mut checked = 0;
    for n in [500usize, 2_000, 10_000, 50_000, 200_000] {
        for (s, t) in [(5, 5), (10, 6), (8, 4), (20, 10), (3, 3)] {
            for p in [0.01, 0.05, 0.1, 0.5] {
                match select_m(n, s, t, p).unwrap() {
                    Some(m) => {
                        assert!(bound(n, m, s, t) <= p);
                        if m < n {
                            assert!(bound(n, m + 1, s, t) > p, "n {n} s {s} t {t} p {p}");
                        }
                    }
                    None => assert!(bound(n, t, s, t) > p),
                }
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 100);
}

#[test]
fn percentile_rises_with_length() {
    for (s, t) in [(5, 5), (10, 6)] {
        for p in [0.05, 0.10] {
            let alphas: Vec<f64> = (0..=12)
                .map(|i| (1e3 * 10f64.powf(i as f64 * 0.25)).round() as usize)
                .map(|n| select_percentile(n, s, t, p).unwrap().unwrap())
                .collect();
            for w in alphas.windows(2) {
                assert!(w[1] > w[0], "({s},{t}) p {p}: {alphas:?}");
            }
        }
    }
}

proptest! {
    #[test]
    fn bound_nondecreasing_in_budget(n in 50usize..100_000, s in 1usize..30, t_frac in 0.0f64..1.0, m_frac in 0.0f64..0.9) {
        let s = s.min(n);
        let t = 1 + ((s - 1) as f64 * t_frac) as usize;
        let m = t.max((n as f64 * m_frac) as usize).min(n - 1);
        prop_assert!(bound(n, m + 1, s, t) >= bound(n, m, s, t) * (1.0 - 1e-12));
    }

    #[test]
    fn bounds_stay_in_range(len in 1usize..200, d in 1usize..40, flank in 0usize..2000, beta in 0.51f64..0.999,
                            n in 1usize..5000, m_frac in 0.0f64..1.0) {
        for b in [unbroken_segment_bound(len, d).unwrap(), flank_separation_bound(flank, d, beta).unwrap()] {
            prop_assert!((0.0..=1.0).contains(&b.value));
            prop_assert_eq!(b.vacuous, b.value == 0.0 && b.vacuous);
        }
        let m = (n as f64 * m_frac) as usize;
        let v = null_segment_count_bound(n, m, d).unwrap();
        prop_assert!(v >= 0.0 && v <= m as f64);
    }

    #[test]
    fn identification_monotone_in_gap_and_strength(k in 1usize..8, min_len in 1usize..50, extra in 0usize..50,
                                             gap in 1usize..500, more in 0usize..500,
                                             beta in 0.55f64..0.99, d in 1usize..30) {
        let g = SignalGeometry::new(k, min_len, min_len + extra, gap, beta).unwrap();
        let base = identification_bound(&g, d).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&base));
        let wider = SignalGeometry { min_gap: gap + more, ..g };
        prop_assert!(identification_bound(&wider, d).unwrap().value >= base);
        let stronger = SignalGeometry { beta_min: beta + (0.999 - beta) * 0.5, ..g };
        prop_assert!(identification_bound(&stronger, d).unwrap().value >= base);
    }
}
