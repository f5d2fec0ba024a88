//! Noisy beacon ranging and the third user's estimate of the pair distance.
//!
//! User `i` observes `d~_ij = d_ij + N_ij` towards every other user and its own
//! interior angle `phi~_i = phi_i + N_i`, with noise variances divided by the
//! beacon count `J`. The eavesdropper `m` of pair `{i, j}` rebuilds `d_ij` from
//! `(d~_mi, d~_mj, phi~_m)` with the law of cosines; for large `J` its error is
//! approximately Gaussian with variance `sigma_hat^2 / J`.

use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{heron_const, TriangleSample};
use crate::users::{Direction, Pair, User};

/// Raw (single-beacon) noise variances and the beacon count.
///
/// Distance noise is symmetric per unordered pair, so `sigma2_12` is used for
/// both `N_12` and `N_21`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub sigma2_12: f64,
    pub sigma2_13: f64,
    pub sigma2_23: f64,
    pub sigma2_ang1: f64,
    pub sigma2_ang2: f64,
    pub sigma2_ang3: f64,
    pub beacons: u32,
}

impl NoiseModel {
    /// Every distance and angle variance set to `v`, one beacon.
    pub fn uniform(v: f64) -> Self {
        NoiseModel {
            sigma2_12: v,
            sigma2_13: v,
            sigma2_23: v,
            sigma2_ang1: v,
            sigma2_ang2: v,
            sigma2_ang3: v,
            beacons: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in Pair::ALL {
            let v = self.dist_var(p);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config("distance noise variances must be positive and finite"));
            }
        }
        for u in User::ALL {
            let v = self.angle_var(u);
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config("angle noise variances must be nonnegative and finite"));
            }
        }
        if self.beacons == 0 {
            return Err(Error::config("beacon count must be at least 1"));
        }
        Ok(())
    }

    pub fn dist_var(&self, pair: Pair) -> f64 {
        match pair {
            Pair::P12 => self.sigma2_12,
            Pair::P13 => self.sigma2_13,
            Pair::P23 => self.sigma2_23,
        }
    }

    pub fn angle_var(&self, user: User) -> f64 {
        match user {
            User::One => self.sigma2_ang1,
            User::Two => self.sigma2_ang2,
            User::Three => self.sigma2_ang3,
        }
    }

    pub fn set_dist_var(&mut self, pair: Pair, v: f64) {
        match pair {
            Pair::P12 => self.sigma2_12 = v,
            Pair::P13 => self.sigma2_13 = v,
            Pair::P23 => self.sigma2_23 = v,
        }
    }

    pub fn set_angle_var(&mut self, user: User, v: f64) {
        match user {
            User::One => self.sigma2_ang1 = v,
            User::Two => self.sigma2_ang2 = v,
            User::Three => self.sigma2_ang3 = v,
        }
    }

    pub fn j(&self) -> f64 {
        f64::from(self.beacons)
    }
}

/// One slot's noisy observations: six directed distances and three angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservationSet {
    /// Indexed by [`Direction::index`].
    pub d_tilde: [f64; 6],
    pub phi_tilde: [f64; 3],
}

impl ObservationSet {
    /// What `dir.from()` measured towards `dir.to()`.
    pub fn d_tilde(&self, dir: Direction) -> f64 {
        self.d_tilde[dir.index()]
    }

    pub fn phi_tilde(&self, user: User) -> f64 {
        self.phi_tilde[user.index()]
    }
}

const NOISELESS: f64 = 1e-300;

fn perturb<R: RngCore + ?Sized>(rng: &mut R, value: f64, var: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    if var < NOISELESS {
        value
    } else {
        value + libm::sqrt(var) * z
    }
}

/// Draws the observations of one slot. Distance noise for `d~_ij` and `d~_ji`
/// is drawn independently with the same variance. Angles are not reduced
/// modulo `2 pi`.
///
/// Draw order: the six directions in [`Direction::index`] order, then the
/// angles of users 1, 2, 3. One normal is consumed per value even in the
/// noiseless limit so that streams stay aligned.
pub fn observe<R: RngCore + ?Sized>(
    t: &TriangleSample,
    noise: &NoiseModel,
    rng: &mut R,
) -> ObservationSet {
    let j = noise.j();
    let mut d_tilde = [0.0; 6];
    for dir in [
        Direction::D12,
        Direction::D13,
        Direction::D21,
        Direction::D23,
        Direction::D31,
        Direction::D32,
    ] {
        let pair = dir.pair();
        d_tilde[dir.index()] = perturb(rng, t.distance(pair), noise.dist_var(pair) / j);
    }
    let mut phi_tilde = [0.0; 3];
    for u in User::ALL {
        phi_tilde[u.index()] = perturb(rng, t.angle(u), noise.angle_var(u) / j);
    }
    ObservationSet { d_tilde, phi_tilde }
}

/// Law-of-cosines distance estimate from two noisy sides and the included
/// noisy angle. A negative radicand (possible under heavy noise) gives 0.
pub fn eve_estimate_exact(dt_mi: f64, dt_mj: f64, phit_m: f64) -> f64 {
    let r = dt_mi * dt_mi + dt_mj * dt_mj - 2.0 * dt_mi * dt_mj * libm::cos(phit_m);
    libm::sqrt(r.max(0.0))
}

/// The eavesdropper's exact estimate of `d_ij` for `pair`, built from its own
/// observations.
pub fn eve_estimate(obs: &ObservationSet, pair: Pair) -> f64 {
    let m = pair.eavesdropper();
    let (i, j) = pair.users();
    let dir = |to| Direction::new(m, to).expect("eavesdropper differs from pair users");
    eve_estimate_exact(obs.d_tilde(dir(i)), obs.d_tilde(dir(j)), obs.phi_tilde(m))
}

struct EveGeometry {
    dij: f64,
    dim: f64,
    djm: f64,
    var_im: f64,
    var_jm: f64,
    var_m: f64,
}

fn eve_geometry(t: &TriangleSample, noise: &NoiseModel, m: User) -> Result<EveGeometry> {
    let pair = m.opposite_pair();
    let (i, j) = pair.users();
    let pim = Pair::of(i, m).expect("distinct");
    let pjm = Pair::of(j, m).expect("distinct");
    let g = EveGeometry {
        dij: t.distance(pair),
        dim: t.distance(pim),
        djm: t.distance(pjm),
        var_im: noise.dist_var(pim),
        var_jm: noise.dist_var(pjm),
        var_m: noise.angle_var(m),
    };
    if !(g.dij > 0.0 && g.dim > 0.0 && g.djm > 0.0) {
        return Err(Error::LinearizationUndefined);
    }
    Ok(g)
}

/// Single-beacon variance of the linearized eavesdropper error for the pair
/// opposite `m`, in the four-factor (side lengths only) form:
///
/// `s_im + s_jm + C * (s_m / (4 d_ij^2) - s_im / (4 d_ij^2 d_im^2) - s_jm / (4 d_ij^2 d_jm^2))`
///
/// where `C` is [`heron_const`]. Clamped at zero.
pub fn eve_sigma_hat2(t: &TriangleSample, noise: &NoiseModel, m: User) -> Result<f64> {
    let g = eve_geometry(t, noise, m)?;
    let c = heron_const(t);
    let q = 4.0 * g.dij * g.dij;
    let v = g.var_im + g.var_jm + c * (g.var_m / q - g.var_im / (q * g.dim * g.dim) - g.var_jm / (q * g.djm * g.djm));
    Ok(v.max(0.0))
}

/// Same quantity in the angle form: the three independent noise gains of the
/// first-order expansion of the estimator around the true geometry.
pub fn eve_sigma_hat2_angle_form(t: &TriangleSample, noise: &NoiseModel, m: User) -> Result<f64> {
    let g = eve_geometry(t, noise, m)?;
    let phi = t.angle(m);
    let (sin, cos) = libm::sincos(phi);
    let d2 = g.dij * g.dij;
    let a = g.dim - g.djm * cos;
    let b = g.djm - g.dim * cos;
    let s = g.dim * g.djm * sin;
    let v = (g.var_im * a * a + g.var_jm * b * b + g.var_m * s * s) / d2;
    Ok(v.max(0.0))
}

/// Draw from the linearized eavesdropper model `d_ij + N(0, sigma_hat^2 / J)`.
pub fn eve_estimate_linearized<R: RngCore + ?Sized>(
    t: &TriangleSample,
    noise: &NoiseModel,
    pair: Pair,
    rng: &mut R,
) -> Result<f64> {
    let var = eve_sigma_hat2(t, noise, pair.eavesdropper())? / noise.j();
    Ok(perturb(rng, t.distance(pair), var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::triangle_from_positions;
    use core::f64::consts::{FRAC_PI_2, SQRT_2};
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn triangle() -> TriangleSample {
        triangle_from_positions([0.1, -0.3], [1.2, 0.4], [-0.2, 0.9])
    }

    #[test]
    fn noiseless_limit_is_exact() {
        let t = triangle();
        let mut tiny = NoiseModel::uniform(1e-310);
        tiny.sigma2_ang1 = 0.0;
        let obs = observe(&t, &tiny, &mut ChaCha8Rng::seed_from_u64(3));
        for d in Direction::ALL {
            assert_eq!(obs.d_tilde(d), t.distance(d.pair()));
        }
        for u in User::ALL {
            assert_eq!(obs.phi_tilde(u), t.angle(u));
        }
        for p in Pair::ALL {
            assert!((eve_estimate(&obs, p) - t.distance(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn distance_noise_has_configured_variance() {
        let t = triangle();
        let noise = NoiseModel::uniform(0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let (mut s12, mut q12, mut s21, mut q21) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let o = observe(&t, &noise, &mut rng);
            let e12 = o.d_tilde(Direction::D12) - t.d12;
            let e21 = o.d_tilde(Direction::D21) - t.d12;
            s12 += e12;
            q12 += e12 * e12;
            s21 += e21;
            q21 += e21 * e21;
        }
        let nf = n as f64;
        let v12 = q12 / nf - (s12 / nf).powi(2);
        let v21 = q21 / nf - (s21 / nf).powi(2);
        assert!((0.099..=0.101).contains(&v12), "{v12}");
        assert!((0.099..=0.101).contains(&v21), "{v21}");
    }

    #[test]
    fn exact_estimator_special_cases() {
        assert_eq!(eve_estimate_exact(1.0, 1.0, 0.0), 0.0);
        assert!((eve_estimate_exact(1.0, 1.0, FRAC_PI_2) - SQRT_2).abs() < 1e-15);
        // negative radicand clamps
        assert_eq!(eve_estimate_exact(-1.0, 1.0, 0.0), 2.0);
        assert_eq!(eve_estimate_exact(1.0, 1.0, 1e-20), 0.0);
    }

    #[test]
    fn equilateral_sigma_hat() {
        let a = 1.7;
        let t = TriangleSample::from_sides(a, a, a).unwrap();
        let mut noise = NoiseModel::uniform(0.3);
        noise.sigma2_ang3 = 0.05;
        let expect = 0.3 / 2.0 + 0.75 * a * a * 0.05;
        let v = eve_sigma_hat2(&t, &noise, User::Three).unwrap();
        let w = eve_sigma_hat2_angle_form(&t, &noise, User::Three).unwrap();
        assert!((v - expect).abs() < 1e-12 * expect);
        assert!((w - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn right_angle_isoceles_forms_agree() {
        let t = triangle_from_positions([1.0, 0.0], [0.0, 1.0], [0.0, 0.0]);
        let mut noise = NoiseModel::uniform(0.2);
        noise.sigma2_ang3 = 0.0;
        let v = eve_sigma_hat2(&t, &noise, User::Three).unwrap();
        let w = eve_sigma_hat2_angle_form(&t, &noise, User::Three).unwrap();
        // cos phi = 0: each side's gain is (d_mi / d_ij)^2 = 1/2
        assert!((w - 0.2).abs() < 1e-12);
        assert!((v - w).abs() <= 1e-9 * w);
    }

    #[test]
    fn noiseless_eavesdropper_has_zero_variance() {
        let t = triangle();
        let mut noise = NoiseModel::uniform(0.1);
        noise.sigma2_13 = 0.0;
        noise.sigma2_23 = 0.0;
        noise.sigma2_ang3 = 0.0;
        assert_eq!(eve_sigma_hat2(&t, &noise, User::Three).unwrap(), 0.0);
        assert_eq!(eve_sigma_hat2_angle_form(&t, &noise, User::Three).unwrap(), 0.0);
    }

    #[test]
    fn collinear_reduces_to_side_noise_and_coincident_errors() {
        let t = triangle_from_positions([0.0, 0.0], [3.0, 0.0], [1.0, 0.0]);
        let noise = NoiseModel {
            sigma2_13: 0.2,
            sigma2_23: 0.05,
            ..NoiseModel::uniform(0.1)
        };
        let v = eve_sigma_hat2(&t, &noise, User::Three).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
        let c = triangle_from_positions([0.0, 0.0], [0.0, 0.0], [1.0, 0.0]);
        assert_eq!(eve_sigma_hat2(&c, &noise, User::Three), Err(Error::LinearizationUndefined));
        assert_eq!(eve_sigma_hat2_angle_form(&c, &noise, User::One), Err(Error::LinearizationUndefined));
    }

    #[test]
    fn validation() {
        assert!(NoiseModel::uniform(0.1).validate().is_ok());
        assert!(NoiseModel { beacons: 0, ..NoiseModel::uniform(0.1) }.validate().is_err());
        assert!(NoiseModel { sigma2_12: 0.0, ..NoiseModel::uniform(0.1) }.validate().is_err());
        assert!(NoiseModel { sigma2_ang2: 0.0, ..NoiseModel::uniform(0.1) }.validate().is_ok());
    }

    #[test]
    fn high_beacon_count_matches_linearization() {
        let t = triangle();
        let noise = NoiseModel {
            beacons: 10_000,
            ..NoiseModel::uniform(0.1)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let (mut s, mut q) = (0.0, 0.0);
        for _ in 0..n {
            let o = observe(&t, &noise, &mut rng);
            let e = eve_estimate(&o, Pair::P12) - t.d12;
            s += e;
            q += e * e;
        }
        let nf = n as f64;
        let var = q / nf - (s / nf).powi(2);
        let model = eve_sigma_hat2(&t, &noise, User::Three).unwrap() / noise.j();
        assert!((var / model - 1.0).abs() < 0.02, "{var} vs {model}");
        assert!((s / nf).abs() < 3.0 * (model / nf).sqrt() + 1e-3);
    }

    proptest! {
        #[test]
        fn sigma_hat_forms_agree(
            c in prop::array::uniform6(-5.0f64..5.0),
            v in prop::array::uniform6(0.0f64..1.0),
        ) {
            let t = triangle_from_positions([c[0], c[1]], [c[2], c[3]], [c[4], c[5]]);
            prop_assume!(!t.degenerate && t.d12.min(t.d13).min(t.d23) > 1e-2);
            let noise = NoiseModel {
                sigma2_12: v[0] + 1e-3, sigma2_13: v[1] + 1e-3, sigma2_23: v[2] + 1e-3,
                sigma2_ang1: v[3], sigma2_ang2: v[4], sigma2_ang3: v[5], beacons: 1,
            };
            for m in User::ALL {
                let a = eve_sigma_hat2(&t, &noise, m).unwrap();
                let b = eve_sigma_hat2_angle_form(&t, &noise, m).unwrap();
                prop_assert!(a >= 0.0);
                prop_assert!((a - b).abs() <= 1e-9 * a.max(b).max(1e-300), "{} vs {}", a, b);
            }
        }
    }
}
