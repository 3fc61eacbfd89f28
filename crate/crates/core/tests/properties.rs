//! Property-based invariants across the crate, driven by proptest.

#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;

use rateregion::ceo::{kkt_solve, musum_sum_rate, normalize_mu, MuSpec};
use rateregion::many::{scalar_loaded_entries, solve_symmetric_lambda, SymmetricInstance};
use rateregion::minimax::{composite_bound, r_coop, r_sum_curve};
use rateregion::model::{mutual_info_bits, ErrorCov, Mat2, RatePoint, SourceModel};
use rateregion::msums::{msums_sum_rate, MSumsSpec, MuConstraint};
use rateregion::oracle;
use rateregion::test_channel::{corner_rates, dg_from_lambda, lambda_from_diag, theta_star};
use rateregion::two_encoder::{beta, in_diag_dg, RegionSpec};

/// Maps `(d1, fraction)` into the realizable-diagonal interval for `d2`.
fn in_diag_d2(rho: f64, d1: f64, frac: f64) -> f64 {
    let r2 = rho * rho;
    let hi = (r2 * d1 + 1.0 - r2).min(1.0);
    let lo = if d1 > 1.0 - r2 {
        (d1 - (1.0 - r2)) / r2
    } else {
        1e-4
    };
    let span = hi - lo;
    lo + span * (1e-6 + frac * (1.0 - 2e-6))
}

fn rho_strategy() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

proptest! {
    #[test]
    fn covariance_symmetric_unit_diagonal(rho in rho_strategy(), l in 2usize..8) {
        let m = SourceModel::new(rho, l).unwrap();
        let k = m.covariance();
        prop_assert_eq!(k.diag, 1.0);
        prop_assert!(k.is_positive_definite());
        let dense = k.to_dense();
        for i in 0..l {
            for j in 0..l {
                prop_assert_eq!(dense[i][j], dense[j][i]);
            }
        }
    }

    #[test]
    fn structured_inverse_matches_dense(
        rho in rho_strategy(),
        l1 in 0.0f64..100.0,
        l2 in 0.0f64..100.0,
    ) {
        let m = SourceModel::pair(rho).unwrap();
        let member = dg_from_lambda(&m, [l1, l2]).unwrap();
        let dense = oracle::loaded_error_cov_dense(rho, &[l1, l2]);
        let d = member.matrix();
        prop_assert!((d.m11 - dense[0][0]).abs() <= 1e-12 * dense[0][0].abs());
        prop_assert!((d.m22 - dense[1][1]).abs() <= 1e-12 * dense[1][1].abs());
        prop_assert!((d.m12 - dense[0][1]).abs() <= 1e-12 * dense[0][1].abs().max(1e-300));
    }

    #[test]
    fn mutual_info_monotone_in_psd_order(
        rho in rho_strategy(),
        l1 in 0.0f64..30.0,
        l2 in 0.0f64..30.0,
        extra1 in 0.0f64..30.0,
        extra2 in 0.0f64..30.0,
        shrink in 0.05f64..1.0,
    ) {
        let m = SourceModel::pair(rho).unwrap();
        let ky = m.covariance2().unwrap();
        let d2 = dg_from_lambda(&m, [l1, l2]).unwrap().matrix();
        // More loading means a smaller error covariance in the psd order.
        let d1 = dg_from_lambda(&m, [l1 + extra1, l2 + extra2]).unwrap().matrix();
        let rate1 = mutual_info_bits(&ky, &d1).unwrap();
        let rate2 = mutual_info_bits(&ky, &d2).unwrap();
        prop_assert!(rate1 >= rate2 - 1e-12);
        // Uniform shrinkage also orders the matrices.
        let d_shrunk = Mat2::new(shrink * d2.m11, shrink * d2.m12, shrink * d2.m22);
        let rate_shrunk = mutual_info_bits(&ky, &d_shrunk).unwrap();
        prop_assert!(rate_shrunk >= rate2 - 1e-12);
    }

    #[test]
    fn loading_round_trip(
        rho in rho_strategy(),
        l1 in 0.0f64..100.0,
        l2 in 0.0f64..100.0,
    ) {
        let m = SourceModel::pair(rho).unwrap();
        let member = dg_from_lambda(&m, [l1, l2]).unwrap();
        let back = lambda_from_diag(&m, member.d1, member.d2).unwrap();
        prop_assert!((back.lambda1 - l1).abs() <= 1e-8 * (1.0 + l1));
        prop_assert!((back.lambda2 - l2).abs() <= 1e-8 * (1.0 + l2));
        prop_assert!((back.theta - member.theta).abs() <= 1e-10);
    }

    #[test]
    fn determinant_identity_on_realizable_diagonals(
        rho in rho_strategy(),
        d1 in 0.02f64..0.999,
        frac in 0.0f64..1.0,
    ) {
        let d2 = in_diag_d2(rho, d1, frac);
        let m = SourceModel::pair(rho).unwrap();
        let member = lambda_from_diag(&m, d1, d2).unwrap();
        let expected = 2.0 * d1 * d2 / beta(d1, d2, rho);
        prop_assert!((member.det() - expected).abs() <= 1e-10 * expected);
    }

    #[test]
    fn theta_increases_with_distortion_product(
        rho in rho_strategy(),
        p1 in 0.0005f64..0.9,
        bump in 1.02f64..5.0,
    ) {
        let p2 = (p1 * bump).min(0.9999);
        let t1 = theta_star(p1.sqrt(), p1.sqrt(), rho).unwrap();
        let t2 = theta_star(p2.sqrt(), p2.sqrt(), rho).unwrap();
        prop_assert!(t2 > t1);
        prop_assert!(t1 > 0.0 && t2 <= rho + 1e-12);
    }

    #[test]
    fn corner_rates_consistent_and_achievable(
        rho in rho_strategy(),
        l1 in 0.0f64..50.0,
        l2 in 0.0f64..50.0,
    ) {
        let m = SourceModel::pair(rho).unwrap();
        let member = dg_from_lambda(&m, [l1, l2]).unwrap();
        let c = corner_rates(&m, &member);
        let half = |l: f64| 0.5 * (1.0 + l).log2();
        prop_assert!((c.i1 + half(member.lambda2) - c.isum).abs() <= 1e-10);
        prop_assert!((c.i2 + half(member.lambda1) - c.isum).abs() <= 1e-10);
        // Both corner points land inside the region for the diagonal the
        // channel attains.
        let spec = RegionSpec::new(rho, member.d1, member.d2).unwrap();
        let corner_a = RatePoint { r1: c.i1, r2: c.isum - c.i1 };
        let corner_b = RatePoint { r1: c.isum - c.i2, r2: c.i2 };
        prop_assert!(spec.contains(corner_a, 1e-9));
        prop_assert!(spec.contains(corner_b, 1e-9));
    }

    #[test]
    fn constituent_sets_are_convex(
        rho in rho_strategy(),
        d1 in 0.02f64..1.5,
        d2 in 0.02f64..1.5,
        a1 in 0.0f64..4.0,
        a2 in 0.0f64..4.0,
        b1 in 0.0f64..4.0,
        b2 in 0.0f64..4.0,
        w in 0.0f64..1.0,
    ) {
        let spec = RegionSpec::new(rho, d1, d2).unwrap();
        let p = RatePoint { r1: a1, r2: a2 };
        let q = RatePoint { r1: b1, r2: b2 };
        let mid = RatePoint {
            r1: w * a1 + (1.0 - w) * b1,
            r2: w * a2 + (1.0 - w) * b2,
        };
        // Convexity of each constituent: check via the full membership on
        // points that satisfy all three bounds.
        if spec.contains(p, 0.0) && spec.contains(q, 0.0) {
            prop_assert!(spec.contains(mid, 1e-9));
        }
        // First marginal set alone is convex as well.
        let in_first = |pt: RatePoint| pt.r1 + 1e-12 >= spec.r1_star_min_rate(pt.r2);
        if in_first(p) && in_first(q) {
            prop_assert!(pt_in_first_relaxed(&spec, mid));
        }
    }

    #[test]
    fn marginal_bound_at_zero_is_exact(rho in rho_strategy(), d1 in 0.01f64..2.0) {
        let spec = RegionSpec::new(rho, d1, 0.5).unwrap();
        let expect = 0.5 * (1.0 / d1).log2().max(0.0);
        prop_assert_eq!(spec.r1_star_min_rate(0.0), expect);
    }

    #[test]
    fn musum_rate_nonincreasing_in_cap(
        rho in rho_strategy(),
        m1 in 0.1f64..2.0,
        m2 in 0.1f64..2.0,
        frac in 0.02f64..0.9,
        bump in 1.01f64..3.0,
    ) {
        let ky = SourceModel::pair(rho).unwrap().covariance2().unwrap();
        let full = ky.quad_form([m1, m2]);
        let d_small = frac * full;
        let d_big = (frac * bump).min(1.2) * full;
        let r_small = musum_sum_rate(&MuSpec::new(m1, m2, d_small).unwrap(), rho).unwrap();
        let r_big = musum_sum_rate(&MuSpec::new(m1, m2, d_big).unwrap(), rho).unwrap();
        prop_assert!(r_big <= r_small + 1e-10);
    }

    #[test]
    fn coupling_identities(
        rho in rho_strategy(),
        m1 in 0.05f64..3.0,
        m2 in 0.05f64..3.0,
    ) {
        let c = normalize_mu([m1, m2], rho).unwrap();
        prop_assert!((c.a1 * c.a2 - rho).abs() <= 1e-12);
        prop_assert!((1.0 / c.gamma - (1.0 + c.snr1 + c.snr2)).abs() <= 1e-12 / c.gamma);
        let mu_n = c.normalized_mu();
        let target = c.gamma * c.gamma / rho * c.snr1 * c.snr2;
        prop_assert!((mu_n[0] * mu_n[1] - target).abs() <= 1e-12 * target.max(1.0));
    }

    #[test]
    fn kkt_residuals_on_active_instances(
        rho in rho_strategy(),
        m1 in 0.1f64..2.0,
        m2 in 0.1f64..2.0,
        frac in 0.02f64..0.9,
    ) {
        let ky = SourceModel::pair(rho).unwrap().covariance2().unwrap();
        let d = frac * ky.quad_form([m1, m2]);
        let spec = MuSpec::new(m1, m2, d).unwrap();
        let sol = kkt_solve(&spec, rho).unwrap();
        let c = normalize_mu([m1, m2], rho).unwrap();
        let k = 1.0 / (c.normalized_distortion(d) + c.gamma);
        let covered = 1.0
            + c.snr1 * (1.0 - (-2.0 * sol.r1).exp2())
            + c.snr2 * (1.0 - (-2.0 * sol.r2).exp2());
        prop_assert!((covered - k).abs() <= 1e-8 * k);
        for (r, snr) in [(sol.r1, c.snr1), (sol.r2, c.snr2)] {
            if r > 0.0 {
                prop_assert!(((2.0 * r).exp2() - sol.nu * snr).abs() <= 1e-8 * sol.nu * snr);
            } else {
                prop_assert!(sol.nu * snr <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn minimax_crossing_chain(
        rho in rho_strategy(),
        d1 in 0.02f64..0.999,
        frac in 0.0f64..1.0,
    ) {
        let d2 = in_diag_d2(rho, d1, frac);
        let spec = RegionSpec::new(rho, d1, d2).unwrap();
        let star = spec.sum_rate_star();
        let ts = theta_star(d1, d2, rho).unwrap();
        let coop = r_coop(ts, d1, d2, rho).unwrap();
        let sum = r_sum_curve(ts, d1, d2, rho).unwrap();
        prop_assert!((coop - star).abs() <= 1e-7 * (1.0 + star));
        prop_assert!((sum - star).abs() <= 1e-7 * (1.0 + star));
    }

    #[test]
    fn composite_bound_dominates_sum_rate(
        rho in rho_strategy(),
        d1 in 0.05f64..0.95,
        frac in 0.0f64..1.0,
        theta_hat in -0.95f64..0.95,
    ) {
        let d2 = in_diag_d2(rho, d1, frac);
        let spec = RegionSpec::new(rho, d1, d2).unwrap();
        let achieved = ErrorCov::new2(d1, d2, theta_hat).unwrap();
        let bound = composite_bound(&achieved, d1, d2, rho).unwrap();
        prop_assert!(bound >= spec.sum_rate_star() - 1e-7);
    }

    #[test]
    fn donecase_inclusion_randomized(
        rho in rho_strategy(),
        d1 in 0.02f64..0.9,
        push in 1.05f64..4.0,
    ) {
        // Push d2 strictly past the realizable-diagonal edge.
        let r2 = rho * rho;
        let edge = (r2 * d1 + 1.0 - r2).min(1.0);
        let d2 = edge * push + 1e-6;
        prop_assume!(!in_diag_dg(d1, d2, rho));
        let spec = RegionSpec::new(rho, d1, d2).unwrap();
        prop_assert!(spec.donecase_inclusion_check(200).unwrap());
    }

    #[test]
    fn symmetric_lambda_meets_diagonal(
        rho in rho_strategy(),
        l in 2usize..9,
        d in 0.01f64..0.99,
    ) {
        let inst = SymmetricInstance::new(rho, l, d).unwrap();
        let lambda = solve_symmetric_lambda(&inst);
        let (diag, _) = scalar_loaded_entries(rho, l, lambda);
        prop_assert!((diag - d).abs() <= 1e-12);
    }
}

fn pt_in_first_relaxed(spec: &RegionSpec, p: RatePoint) -> bool {
    p.r1 + 1e-9 >= spec.r1_star_min_rate(p.r2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn msums_relaxation_monotone(
        rho in rho_strategy(),
        a in 0.1f64..1.0,
        b in 0.1f64..1.0,
        d1 in 0.05f64..0.5,
        d2 in 0.05f64..0.5,
        bump in 1.05f64..2.0,
    ) {
        let mk = |dd2: f64| {
            MSumsSpec::new(
                rho,
                vec![
                    MuConstraint { mu: [1.0, a], d: d1 },
                    MuConstraint { mu: [b, 1.0], d: dd2 },
                ],
            )
            .unwrap()
        };
        let tight = msums_sum_rate(&mk(d2)).unwrap().sum_rate;
        let relaxed = msums_sum_rate(&mk(d2 * bump)).unwrap().sum_rate;
        prop_assert!(relaxed <= tight + 1e-9);
    }
}
