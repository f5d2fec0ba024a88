use super::half_log2_1p_pos;

/// Unlimited-channel one-way key term for one slot:
///
/// `[1/2 log2(1 + d^4 J^2 (sh - s) / ((d^2 J + sh)(2 d^2 J s + s^2)))]+`
///
/// with `s` the pair's noise variance and `sh` the eavesdropper variance. Zero
/// whenever `sh <= s`.
pub fn thm2_integrand(d: f64, sigma2: f64, sigma_hat2: f64, beacons: u32) -> f64 {
    let j = f64::from(beacons);
    let dj = d * d * j;
    let x = dj * dj * (sigma_hat2 - sigma2) / ((dj + sigma_hat2) * (2.0 * dj * sigma2 + sigma2 * sigma2));
    half_log2_1p_pos(x)
}

/// Key user `i` generates for `j` from `S_ij = d~_ij + D_ij`, where
/// `sp_fwd` is the variance of `D_ij`. Zero for `sp_fwd = inf`.
pub fn thm3_forward_term(d: f64, sigma2: f64, sigma_hat2: f64, sp_fwd: f64, beacons: u32) -> f64 {
    let j = f64::from(beacons);
    let dj = d * d * j;
    let den = (dj + sigma_hat2) * (dj * (2.0 * sigma2 + sp_fwd) + (sigma2 + sp_fwd) * sigma2);
    half_log2_1p_pos(dj * dj * (sigma_hat2 - sigma2) / den)
}

/// Key user `j` generates for `i` from `S_ji`, conditioned on `S_ij` being
/// public. `sp_fwd` is the variance of `D_ij`, `sp_rev` that of `D_ji`.
///
/// With `sp_fwd = inf` this is the one-way key from `j`; with `sp_fwd = 0` it
/// vanishes.
pub fn thm3_reverse_term(d: f64, sigma2: f64, sigma_hat2: f64, sp_fwd: f64, sp_rev: f64, beacons: u32) -> f64 {
    let j = f64::from(beacons);
    let dj = d * d * j;
    let rev = dj * (2.0 * sigma2 + sp_rev) + (sigma2 + sp_rev) * sigma2;
    let x = if sp_fwd > 0.0 {
        // numerator and first denominator factor divided through by sp_fwd
        let r = sigma2 / sp_fwd;
        let num = dj * dj * (sigma_hat2 - sigma2 * (r + 1.0));
        let fwd = dj * ((sigma_hat2 + sigma2) / sp_fwd + 1.0) + sigma_hat2 * (r + 1.0);
        num / (fwd * rev)
    } else {
        -1.0
    };
    half_log2_1p_pos(x)
}

/// Both per-slot terms of a pair's rate under the rate-limited scheme.
pub fn thm3_pair_terms(d: f64, sigma2: f64, sigma_hat2: f64, sp_fwd: f64, sp_rev: f64, beacons: u32) -> f64 {
    thm3_forward_term(d, sigma2, sigma_hat2, sp_fwd, beacons)
        + thm3_reverse_term(d, sigma2, sigma_hat2, sp_fwd, sp_rev, beacons)
}

/// Public rate spent by the sender of `S_ij` for one slot:
/// `1/2 log2(1 + (2 d^2 J + s) s / ((d^2 J + s) sp))`. Infinite for `sp = 0`,
/// zero for `sp = inf`.
pub fn thm3_constraint_summand(d: f64, sigma2: f64, sp: f64, beacons: u32) -> f64 {
    let j = f64::from(beacons);
    let dj = d * d * j;
    half_log2_1p_pos((2.0 * dj + sigma2) * sigma2 / ((dj + sigma2) * sp))
}

/// Outer bound on a pair's rate from the averaged eavesdropper variance:
/// `1/2 log2(1 + E[sigma_hat^2] / sigma^2)`.
pub fn outer_rate(mean_sigma_hat2: f64, sigma2: f64) -> f64 {
    half_log2_1p_pos(mean_sigma_hat2 / sigma2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn thm2_clamps() {
        assert_eq!(thm2_integrand(1.3, 0.1, 0.1, 1), 0.0);
        assert_eq!(thm2_integrand(1.3, 0.1, 0.05, 4), 0.0);
        assert!(thm2_integrand(1.3, 0.1, 0.2, 1) > 0.0);
    }

    #[test]
    fn thm3_reduces_to_thm2_with_unquantized_observations() {
        for (d, s, sh, j) in [(0.7, 0.1, 0.3, 1), (2.0, 0.05, 0.4, 10), (1.1, 0.2, 0.1, 3)] {
            let a = thm3_forward_term(d, s, sh, 0.0, j);
            let b = thm2_integrand(d, s, sh, j);
            assert!((a - b).abs() < 1e-15);
            assert_eq!(thm3_reverse_term(d, s, sh, 0.0, 0.0, j), 0.0);
            assert_eq!(thm3_reverse_term(d, s, sh, 0.0, 1.0, j), 0.0);
        }
    }

    #[test]
    fn silent_directions_contribute_nothing() {
        assert_eq!(thm3_pair_terms(1.0, 0.1, 0.4, f64::INFINITY, f64::INFINITY, 1), 0.0);
        assert_eq!(thm3_constraint_summand(1.0, 0.1, f64::INFINITY, 1), 0.0);
        assert_eq!(thm3_constraint_summand(1.0, 0.1, 0.0, 1), f64::INFINITY);
    }

    #[test]
    fn reverse_only_is_one_way_key_from_other_side() {
        // sp_fwd = inf leaves the reverse key equal to a forward key with sp_rev
        let a = thm3_reverse_term(1.2, 0.1, 0.35, f64::INFINITY, 0.3, 2);
        let b = thm3_forward_term(1.2, 0.1, 0.35, 0.3, 2);
        assert!((a - b).abs() < 1e-15);
        let c = thm3_reverse_term(1.2, 0.1, 0.35, 1e12, 0.3, 2);
        assert!((a - c).abs() < 1e-9);
    }

    #[test]
    fn outer_rate_values() {
        assert_eq!(outer_rate(0.1, 0.1), 0.5);
        assert_eq!(outer_rate(0.0, 0.1), 0.0);
    }

    proptest! {
        #[test]
        fn thm2_monotone(d in 0.05f64..5.0, s in 0.01f64..1.0, sh in 0.0f64..2.0, ds in 0.0f64..0.5, j in 1u32..100) {
            let base = thm2_integrand(d, s, sh, j);
            prop_assert!(base >= 0.0);
            prop_assert!(thm2_integrand(d, s, sh + ds, j) >= base);
            prop_assert!(thm2_integrand(d, s + ds, sh, j) <= base);
            prop_assert_eq!(base == 0.0, sh <= s);
        }

        #[test]
        fn pair_terms_nonincreasing_in_split(
            d in 0.05f64..5.0, s in 0.01f64..1.0, sh in 0.0f64..2.0,
            p in 0.0f64..10.0, q in 0.0f64..10.0, dp in 0.0f64..10.0, j in 1u32..20,
        ) {
            let base = thm3_pair_terms(d, s, sh, p, q, j);
            prop_assert!(base >= 0.0);
            prop_assert!(thm3_pair_terms(d, s, sh, p, q + dp, j) <= base + 1e-12);
            prop_assert!(thm3_forward_term(d, s, sh, p + dp, j) <= thm3_forward_term(d, s, sh, p, j));
            prop_assert!(thm3_constraint_summand(d, s, p + dp, j) <= thm3_constraint_summand(d, s, p, j));
        }
    }
}
