use std::cmp::Ordering;
use std::f64::consts::PI;

use apsk_core::comm::{estimate_mi, mi_lower_bound, ChannelSpec};
use apsk_core::constellation::{
    build_apsk, build_prop1_family, build_tradeoff_family, ring_count_for, ApskDesign, Constellation, TradeoffParams,
};
use apsk_core::geometry::{
    angular_offset, angular_offset_exhaustive, brute_force_dmin, fourth_moment_compare, min_distance,
};
use apsk_core::report::ConstellationFile;
use apsk_core::sense::{avg_crb_bound, variance_metric, SensingSpec};
use apsk_core::tradeoff::{dominates, pareto_flags, ParetoKey};
use proptest::prelude::*;

/// Splits `2^m` points into rings with strictly increasing radii and random phases.
fn design() -> impl Strategy<Value = ApskDesign> {
    (2u32..=7).prop_flat_map(|m| {
        let total = 1usize << m;
        (1usize..=total.min(6)).prop_flat_map(move |rings| {
            (
                proptest::sample::subsequence((1..total).collect::<Vec<_>>(), rings - 1),
                proptest::collection::vec(0.05f64..1.0, rings),
                proptest::collection::vec(-PI..PI, rings),
            )
                .prop_map(move |(cuts, steps, phases)| {
                    let mut counts = Vec::with_capacity(rings);
                    let mut prev = 0;
                    for c in cuts.into_iter().chain(std::iter::once(total)) {
                        counts.push(c - prev);
                        prev = c;
                    }
                    let radii = steps
                        .iter()
                        .scan(0.0, |r, s| {
                            *r += s;
                            Some(*r)
                        })
                        .collect();
                    ApskDesign::new(m, counts, radii, phases)
                })
        })
    })
}

fn tradeoff() -> impl Strategy<Value = TradeoffParams> {
    (3u32..=7, 0u32..=8, 0u32..=8).prop_flat_map(|(m, bi, ci)| {
        (1u32..=(1 << (m - 1))).prop_map(move |alpha| TradeoffParams::new(m, alpha, bi as f64 * 0.25, ci as f64 * 0.25))
    })
}

fn built(d: &ApskDesign) -> Constellation {
    build_apsk(d).expect("generated designs are valid")
}

fn sample_variance(c: &Constellation) -> f64 {
    let e: Vec<f64> = c.points().iter().map(|p| p.norm_sqr()).collect();
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / e.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn structured_dmin_matches_brute_force(d in design()) {
        let c = built(&d);
        let fast = min_distance(&c, &d).unwrap().d_min;
        prop_assert!((fast - brute_force_dmin(&c)).abs() <= 1e-9);
    }

    #[test]
    fn unit_mean_energy(d in design()) {
        let c = built(&d);
        let mean = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / c.len() as f64;
        prop_assert!((mean - 1.0).abs() <= 1e-12);
        prop_assert!((c.moments().mean - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn variance_is_rotation_invariant(d in design(), theta in -PI..PI) {
        let c = built(&d);
        let r = c.rotated(theta);
        prop_assert!((sample_variance(&c) - sample_variance(&r)).abs() <= 1e-12);
        prop_assert!((variance_metric(&c) - sample_variance(&r)).abs() <= 1e-12);
        let turned = ApskDesign {
            phase_offsets: d.phase_offsets.iter().map(|p| p + theta).collect(),
            ..d.clone()
        };
        let d_rot = min_distance(&r, &turned).unwrap().d_min;
        prop_assert!((d_rot - brute_force_dmin(&c)).abs() <= 1e-9);
    }

    #[test]
    fn fourth_moment_orders_like_variance(a in design(), b in design()) {
        let (ca, cb) = (built(&a), built(&b));
        let by_var = match variance_metric(&ca) - variance_metric(&cb) {
            x if x.abs() <= 1e-12 => Ordering::Equal,
            x if x < 0.0 => Ordering::Less,
            _ => Ordering::Greater,
        };
        prop_assert_eq!(fourth_moment_compare(&ca, &cb), by_var);
    }

    #[test]
    fn fast_offset_scan_matches_exhaustive(n1 in 1usize..40, n2 in 1usize..40, p1 in -PI..PI, p2 in -PI..PI) {
        let (fast, _) = angular_offset(n1, n2, p1, p2);
        prop_assert!((fast - angular_offset_exhaustive(n1, n2, p1, p2)).abs() <= 1e-12);
    }

    #[test]
    fn crb_gap_scales_as_inverse_square(p in tradeoff(), l in 2usize..200) {
        let Ok(c) = build_tradeoff_family(&p) else { return Ok(()) };
        let excess = |l: usize| {
            let s = SensingSpec::unit(l).unwrap();
            (avg_crb_bound(&c, &s).unwrap() - s.floor()) * (l * l) as f64
        };
        let (a, b) = (excess(l), excess(2 * l));
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn json_round_trip(d in design()) {
        let c = built(&d);
        let back = ConstellationFile::from_json(&ConstellationFile::from_constellation(&c).to_json())
            .unwrap()
            .to_constellation()
            .unwrap();
        prop_assert_eq!(back.len(), c.len());
        for (x, y) in back.points().iter().zip(c.points()) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn pareto_flags_are_non_dominated(raw in proptest::collection::vec((0u8..8, 0.0f64..6.0, 0.0f64..0.05), 1..40)) {
        let keys: Vec<ParetoKey> = raw
            .iter()
            .map(|&(v, rate, se)| ParetoKey { variance: f64::from(v) / 8.0, rate, std_error: se })
            .collect();
        let flags = pareto_flags(&keys);
        prop_assert!(flags.iter().any(|&f| f));
        for (i, k) in keys.iter().enumerate() {
            let dominated = keys.iter().any(|a| dominates(a, k));
            prop_assert_eq!(flags[i], !dominated);
            prop_assert!(!dominates(k, k));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mi_is_rotation_invariant(d in design(), theta in -PI..PI, seed in any::<u64>()) {
        let c = built(&d);
        let ch = ChannelSpec::from_db(8.0).unwrap();
        let a = estimate_mi(&c, &ch, 20_000, seed).unwrap();
        let b = estimate_mi(&c.rotated(theta), &ch, 20_000, seed ^ 1).unwrap();
        let se = a.std_error_bits.hypot(b.std_error_bits);
        prop_assert!((a.value_bits - b.value_bits).abs() <= 5.0 * se + 1e-3);
    }

    #[test]
    fn mi_grows_with_snr(p in tradeoff(), lo in -5.0f64..15.0, step in 3.0f64..10.0, seed in any::<u64>()) {
        let Ok(c) = build_tradeoff_family(&p) else { return Ok(()) };
        let (ch1, ch2) = (ChannelSpec::from_db(lo).unwrap(), ChannelSpec::from_db(lo + step).unwrap());
        let a = estimate_mi(&c, &ch1, 20_000, seed).unwrap();
        let b = estimate_mi(&c, &ch2, 20_000, seed).unwrap();
        let se = a.std_error_bits.hypot(b.std_error_bits);
        prop_assert!(b.value_bits + 4.0 * se + 1e-3 >= a.value_bits);
        prop_assert!(b.value_bits <= f64::from(p.m) + 4.0 * b.std_error_bits + 1e-3);
        prop_assert!(mi_lower_bound(&c, &ch2).unwrap() >= mi_lower_bound(&c, &ch1).unwrap());
    }
}

#[test]
fn prop1_members_build() {
    for m in 4..=10 {
        let c = build_prop1_family(m, 2).unwrap();
        assert_eq!(c.rings().unwrap(), ring_count_for(m, 2));
    }
}
