//! Reference values from covariance determinants.
//!
//! One slot is modelled as a zero-mean Gaussian vector: the distance has
//! variance `d^2`, each observation adds independent noise of variance
//! `sigma^2 / J`, the eavesdropper estimate adds `sigma_hat^2 / J` and each
//! test channel adds `sigma'^2 / J`. Mutual informations follow from log
//! determinants of sub-blocks.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use nalgebra::{Cholesky, DMatrix};
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, Uniform};

use super::integrand::{thm2_integrand, thm3_constraint_summand, thm3_forward_term, thm3_reverse_term};
use crate::geometry::TriangleSample;
use crate::montecarlo::SampleRng;
use crate::observation::{eve_sigma_hat2, eve_sigma_hat2_angle_form, NoiseModel};
use crate::users::User;

/// Natural log-determinant of the principal sub-block on `idx`; `None` if the
/// block is not positive definite. The empty block has log-determinant 0.
pub fn logdet(cov: &DMatrix<f64>, idx: &[usize]) -> Option<f64> {
    if idx.is_empty() {
        return Some(0.0);
    }
    let sub = cov.select_rows(idx).select_columns(idx);
    let ch = Cholesky::new(sub)?;
    Some(2.0 * ch.l_dirty().diagonal().iter().map(|x| libm::log(*x)).sum::<f64>())
}

fn union(parts: &[&[usize]]) -> Vec<usize> {
    let mut v: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// `I(A; B | C)` in bits for jointly Gaussian components. Index sets are
/// treated as sets; overlaps are allowed. Infinite when `(A, B, C)` is
/// singular but the other blocks are not.
pub fn gaussian_cmi(cov: &DMatrix<f64>, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let ac = union(&[a, c]);
    let bc = union(&[b, c]);
    let abc = union(&[a, b, c]);
    let cc = union(&[c]);
    match (logdet(cov, &ac), logdet(cov, &bc), logdet(cov, &cc)) {
        (Some(x), Some(y), Some(z)) => match logdet(cov, &abc) {
            Some(w) => (0.5 * (x + y - w - z) / LN_2).max(0.0),
            None => f64::INFINITY,
        },
        _ => f64::NAN,
    }
}

pub fn gaussian_mi(cov: &DMatrix<f64>, a: &[usize], b: &[usize]) -> f64 {
    gaussian_cmi(cov, a, b, &[])
}

/// Covariance of `(d~_ij, d~_ji, d^_ij)`.
pub fn pair_covariance(d: f64, sigma2: f64, sigma_hat2: f64, beacons: u32) -> DMatrix<f64> {
    let j = f64::from(beacons);
    let a = d * d;
    let mut c = DMatrix::from_element(3, 3, a);
    c[(0, 0)] += sigma2 / j;
    c[(1, 1)] += sigma2 / j;
    c[(2, 2)] += sigma_hat2 / j;
    c
}

/// Covariance of `(S_ij, S_ji, d~_ij, d~_ji, d^_ij)` with finite split
/// variances.
pub fn split_covariance(d: f64, sigma2: f64, sigma_hat2: f64, sp_fwd: f64, sp_rev: f64, beacons: u32) -> DMatrix<f64> {
    let j = f64::from(beacons);
    let a = d * d;
    let s = sigma2 / j;
    let mut c = DMatrix::from_element(5, 5, a);
    c[(0, 0)] += s + sp_fwd / j;
    c[(1, 1)] += s + sp_rev / j;
    c[(2, 2)] += s;
    c[(3, 3)] += s;
    c[(4, 4)] += sigma_hat2 / j;
    for (x, y) in [(0, 2), (1, 3)] {
        c[(x, y)] += s;
        c[(y, x)] += s;
    }
    c
}

/// `[I(d~_ij; d~_ji) - I(d~_ij; d^_ij)]+`.
pub fn oracle_thm2(d: f64, sigma2: f64, sigma_hat2: f64, beacons: u32) -> f64 {
    let c = pair_covariance(d, sigma2, sigma_hat2, beacons);
    (gaussian_mi(&c, &[0], &[1]) - gaussian_mi(&c, &[0], &[2])).max(0.0)
}

/// `[I(S_ij; d~_ji) - I(S_ij; d^_ij)]+`.
pub fn oracle_forward(d: f64, sigma2: f64, sigma_hat2: f64, sp_fwd: f64, beacons: u32) -> f64 {
    let c = split_covariance(d, sigma2, sigma_hat2, sp_fwd, 1.0, beacons);
    (gaussian_mi(&c, &[0], &[3]) - gaussian_mi(&c, &[0], &[4])).max(0.0)
}

/// `[I(S_ji; d~_ij | S_ij) - I(S_ji; d^_ij | S_ij)]+`.
pub fn oracle_reverse(d: f64, sigma2: f64, sigma_hat2: f64, sp_fwd: f64, sp_rev: f64, beacons: u32) -> f64 {
    let c = split_covariance(d, sigma2, sigma_hat2, sp_fwd, sp_rev, beacons);
    (gaussian_cmi(&c, &[1], &[2], &[0]) - gaussian_cmi(&c, &[1], &[4], &[0])).max(0.0)
}

/// `I(S_ij; d~_ij | d~_ji)`.
pub fn oracle_constraint(d: f64, sigma2: f64, sp: f64, beacons: u32) -> f64 {
    let c = split_covariance(d, sigma2, 1.0, sp, 1.0, beacons);
    gaussian_cmi(&c, &[0], &[2], &[3])
}

/// Largest absolute deviations found by [`run_identity_suite`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IdentityReport {
    pub draws: u64,
    pub thm2: f64,
    pub forward: f64,
    pub reverse: f64,
    pub constraint: f64,
    /// Relative gap between the two forms of the eavesdropper variance.
    pub sigma_hat2_forms: f64,
}

impl IdentityReport {
    pub fn max_error(&self) -> f64 {
        self.thm2.max(self.forward).max(self.reverse).max(self.constraint).max(self.sigma_hat2_forms)
    }
}

/// Compares every closed-form integrand with its determinant reference on
/// random parameters.
pub fn run_identity_suite(draws: u64, seed: u64) -> IdentityReport {
    let mut rng = SampleRng::seed_from_u64(seed);
    let log_u = Uniform::new(-3.0f64, 1.0).expect("valid range");
    let side = Uniform::new(0.2f64, 3.0).expect("valid range");
    let e = |r: &mut SampleRng| libm::pow(10.0, log_u.sample(r));
    let mut rep = IdentityReport {
        draws,
        ..Default::default()
    };
    let upd = |m: &mut f64, a: f64, b: f64| {
        let gap = libm::fabs(a - b);
        if gap > *m {
            *m = gap;
        }
    };
    for _ in 0..draws {
        let d = side.sample(&mut rng);
        let s = e(&mut rng);
        let sh = e(&mut rng);
        let p = e(&mut rng);
        let q = e(&mut rng);
        let j = 1 + (rng.next_u32() % 50);
        upd(&mut rep.thm2, thm2_integrand(d, s, sh, j), oracle_thm2(d, s, sh, j));
        upd(&mut rep.forward, thm3_forward_term(d, s, sh, p, j), oracle_forward(d, s, sh, p, j));
        upd(&mut rep.reverse, thm3_reverse_term(d, s, sh, p, q, j), oracle_reverse(d, s, sh, p, q, j));
        upd(&mut rep.constraint, thm3_constraint_summand(d, s, p, j), oracle_constraint(d, s, p, j));

        let (a, b) = (side.sample(&mut rng), side.sample(&mut rng));
        let c = side.sample(&mut rng);
        if let Ok(t) = TriangleSample::from_sides(a, b, c) {
            if t.degenerate {
                continue;
            }
            let noise = NoiseModel {
                sigma2_12: e(&mut rng),
                sigma2_13: e(&mut rng),
                sigma2_23: e(&mut rng),
                sigma2_ang1: e(&mut rng),
                sigma2_ang2: e(&mut rng),
                sigma2_ang3: e(&mut rng),
                beacons: 1,
            };
            for m in User::ALL {
                let x = eve_sigma_hat2(&t, &noise, m).unwrap_or(f64::NAN);
                let y = eve_sigma_hat2_angle_form(&t, &noise, m).unwrap_or(f64::NAN);
                upd(&mut rep.sigma_hat2_forms, (x - y) / x.max(y).max(1e-300), 0.0);
            }
        }
    }
    rep
}
