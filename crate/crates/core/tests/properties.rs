//! Property tests for the structural invariants: score algebra, estimator
//! ordering, closed-form/brute-force agreement, enumeration/oracle equality,
//! and the Parseval split of the truncation.

use proptest::prelude::*;

use nssapprox_core::active_set::{brute_force_active_set, enumerate_active_set, max_level, single_coordinate_count, EnumerationOptions};
use nssapprox_core::engine::{apply_optimal, CoefficientFunction};
use nssapprox_core::sequences::{dyadic_sample_points, estimate_decay_low, estimate_decay_up, partial_power_sum};
use nssapprox_core::numeric::{ln, powf};
use nssapprox_core::{DecreasingSequence, ProblemModel, Term};

fn power_model(a: f64, p: f64, b: f64, q: f64) -> ProblemModel {
    ProblemModel::new(
        DecreasingSequence::power(a, p).unwrap(),
        DecreasingSequence::power(b, q).unwrap(),
    )
    .unwrap()
}

/// Strategy for a small canonical term over coordinates in [lo, hi].
fn term_in(lo: u32, hi: u32) -> impl Strategy<Value = Term> {
    prop::collection::btree_set(lo..=hi, 0..4).prop_flat_map(|coords| {
        let coords: Vec<u32> = coords.into_iter().collect();
        let n = coords.len();
        prop::collection::vec(1u32..6, n)
            .prop_map(move |indices| Term::new(coords.clone(), indices).unwrap())
    })
}

proptest! {
    #[test]
    fn score_is_multiplicative_over_disjoint_terms(
        a in 0.05f64..=1.0,
        p in 1.5f64..4.0,
        b in 0.05f64..=1.0,
        q in 1.5f64..4.0,
        left in term_in(1, 6),
        right in term_in(7, 12),
    ) {
        let m = power_model(a, p, b, q);
        let joint = left.product(&right).unwrap();
        let lhs = m.term_score(&joint);
        let rhs = m.term_score(&left) * m.term_score(&right);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn score_never_grows_under_worsening(
        a in 0.05f64..=1.0,
        p in 1.5f64..4.0,
        q in 1.5f64..4.0,
        t in term_in(1, 6),
        pos in 0usize..4,
    ) {
        let m = power_model(a, p, 1.0, q);
        if t.is_empty() {
            return Ok(());
        }
        let pos = pos % t.order();
        // Bump one eigen-index.
        let mut worse_idx = t.indices().to_vec();
        worse_idx[pos] += 1;
        let worse = Term::new(t.coords().to_vec(), worse_idx).unwrap();
        prop_assert!(m.term_score(&worse) <= m.term_score(&t));
        // Replace the largest coordinate by a larger, unused one.
        let mut coords = t.coords().to_vec();
        let last = coords.len() - 1;
        coords[last] += 1;
        let shifted = Term::new(coords, t.indices().to_vec()).unwrap();
        prop_assert!(m.term_score(&shifted) <= m.term_score(&t));
    }

    #[test]
    fn subset_sum_closed_form_matches_enumeration(
        a in 0.05f64..=1.0,
        p in 1.5f64..4.0,
        tau in 0.4f64..3.0,
        c_tau in 0.1f64..2.5,
        k in 1u32..=12,
    ) {
        let m = power_model(a, p, 1.0, 2.0);
        let closed = m.weighted_subset_sum(tau, c_tau, k).unwrap();
        let mut brute = 0.0f64;
        for mask in 0u32..(1 << (k - 1)) {
            let mut coords: Vec<u32> = (1..k).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            coords.push(k);
            let w = m.product_weight(&coords);
            brute += powf(w, 1.0 / tau) * powf(c_tau, coords.len() as f64);
        }
        prop_assert!((closed - brute).abs() <= 1e-12 * brute.abs());
    }

    #[test]
    fn decay_low_never_exceeds_decay_up(
        scale in 0.05f64..=1.0,
        exponent in 0.3f64..5.0,
        log_exp in -1.5f64..0.0,
        horizon_pow in 6u32..16,
    ) {
        let horizon = 1u64 << horizon_pow;
        let pts = dyadic_sample_points(horizon);
        for seq in [
            DecreasingSequence::power(scale, exponent).unwrap(),
            DecreasingSequence::power_log(scale, exponent, log_exp).unwrap(),
        ] {
            let low = estimate_decay_low(&seq, horizon, &pts).unwrap();
            let up = estimate_decay_up(&seq, horizon, &pts).unwrap();
            prop_assert!(low <= up);
        }
    }

    #[test]
    fn power_law_slope_has_closed_form(
        scale in 0.05f64..=1.0,
        exponent in 0.3f64..5.0,
        n_pow in 1u32..20,
    ) {
        let n = 1u64 << (n_pow + 1).min(20);
        let seq = DecreasingSequence::power(scale, exponent).unwrap();
        let low = estimate_decay_low(&seq, n, &[n]).unwrap();
        let expect = exponent + ln(1.0 / scale) / ln(n as f64);
        prop_assert!((low - expect).abs() <= 1e-12 * expect.abs().max(1.0));
    }

    #[test]
    fn partial_power_sum_is_monotone(
        exponent in 1.2f64..4.0,
        alpha in 0.5f64..3.0,
        n in 2u64..2000,
    ) {
        let seq = DecreasingSequence::power(1.0, exponent).unwrap();
        let s1 = partial_power_sum(&seq, alpha, n).unwrap();
        let s2 = partial_power_sum(&seq, alpha, 2 * n).unwrap();
        prop_assert!(s2 >= s1);
        // Non-increasing in alpha for x <= 1.
        let tighter = partial_power_sum(&seq, alpha * 0.8, n).unwrap();
        prop_assert!(tighter <= s1 * (1.0 + 1e-12));
    }

    #[test]
    fn enumeration_matches_oracle_on_random_models(
        a in 0.05f64..=1.0,
        p in 1.6f64..4.0,
        b in 0.05f64..=1.0,
        q in 1.6f64..4.0,
        eps in 0.08f64..0.9,
    ) {
        let m = power_model(a, p, b, q);
        let aset = enumerate_active_set(&m, eps, &EnumerationOptions::default()).unwrap();
        let mc = max_level(&m, eps).max(1) as u32;
        let mi = single_coordinate_count(&m, eps, 1).max(1) as u32;
        let brute = brute_force_active_set(&m, eps, mc, mi, 1 << 24).unwrap();
        prop_assert_eq!(aset.terms(), brute.terms.as_slice());
        prop_assert_eq!(aset.largest_excluded_score, brute.largest_excluded_score);
    }

    #[test]
    fn truncation_splits_norm_pythagorean(
        eps in 0.05f64..0.9,
        coeffs in prop::collection::vec((term_in(1, 8), -3.0f64..3.0), 1..12),
    ) {
        let m = power_model(1.0, 2.0, 1.0, 2.0);
        let mut f = CoefficientFunction::new();
        for (t, c) in coeffs {
            f.set(t, c);
        }
        let kept = apply_optimal(&m, eps, &f).unwrap();
        let mut dropped = CoefficientFunction::new();
        for (t, &c) in f.iter() {
            if kept.coeff(t) == 0.0 && c != 0.0 {
                dropped.set(t.clone(), c);
            }
        }
        let total = f.norm_sq();
        let split = kept.norm_sq() + dropped.norm_sq();
        prop_assert!((total - split).abs() <= 1e-12 * total.max(f64::MIN_POSITIVE));
        // Idempotence.
        let again = apply_optimal(&m, eps, &kept).unwrap();
        prop_assert_eq!(&again, &kept);
    }
}
