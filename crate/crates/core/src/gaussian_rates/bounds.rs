use alloc::vec::Vec;
use core::f64::consts::LN_2;

use super::integrand::{outer_rate, thm2_integrand, thm3_constraint_summand, thm3_pair_terms};
use super::{PublicRates, RateTriple, SplitNoise};
use crate::error::Result;
use crate::geometry::{MobilityConfig, TriangleSample};
use crate::montecarlo::{estimate_many, for_each_sample, Accumulator, BoundEstimate, McConfig};
use crate::observation::{eve_sigma_hat2, NoiseModel};
use crate::users::{Pair, User};

/// Per-slot quantities the rate integrands need, indexed by [`Pair::index`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotGeometry {
    pub d: [f64; 3],
    /// Eavesdropper variance for each pair.
    pub sigma_hat2: [f64; 3],
}

impl SlotGeometry {
    pub fn new(t: &TriangleSample, noise: &NoiseModel) -> Self {
        let mut g = SlotGeometry {
            d: [0.0; 3],
            sigma_hat2: [0.0; 3],
        };
        for p in Pair::ALL {
            g.d[p.index()] = t.distance(p);
            g.sigma_hat2[p.index()] =
                eve_sigma_hat2(t, noise, p.eavesdropper()).expect("non-degenerate triangle has positive sides");
        }
        g
    }
}

/// Unlimited-public-channel lower bounds on `(R12, R13, R23)`.
pub fn thm2_bounds(mobility: &MobilityConfig, noise: &NoiseModel, mc: &McConfig) -> Result<[BoundEstimate; 3]> {
    noise.validate()?;
    estimate_many(mobility, mc, |t, _| {
        let g = SlotGeometry::new(t, noise);
        core::array::from_fn(|k| {
            let p = Pair::ALL[k];
            thm2_integrand(g.d[k], noise.dist_var(p), g.sigma_hat2[k], noise.beacons)
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuterBound {
    pub rates: RateTriple,
    /// Delta-method standard errors of the rates.
    pub stderr: RateTriple,
    pub mean_sigma_hat2: [BoundEstimate; 3],
}

/// Upper bounds `1/2 log2(1 + E[sigma_hat^2] / sigma^2)` on each pair's rate.
pub fn outer_bound(mobility: &MobilityConfig, noise: &NoiseModel, mc: &McConfig) -> Result<OuterBound> {
    noise.validate()?;
    let m = estimate_many(mobility, mc, |t, _| SlotGeometry::new(t, noise).sigma_hat2)?;
    Ok(OuterBound::from_means(noise, m))
}

impl OuterBound {
    /// Builds the bounds from estimates of `E[sigma_hat^2]` per pair.
    pub fn from_means(noise: &NoiseModel, mean_sigma_hat2: [BoundEstimate; 3]) -> Self {
        let mut rates = RateTriple::default();
        let mut stderr = RateTriple::default();
        for p in Pair::ALL {
            let e = mean_sigma_hat2[p.index()];
            let s = noise.dist_var(p);
            rates[p] = outer_rate(e.mean, s);
            stderr[p] = e.stderr / (2.0 * LN_2 * (s + e.mean));
        }
        OuterBound {
            rates,
            stderr,
            mean_sigma_hat2,
        }
    }
}

/// Public rate user `u` spends under `split`.
pub fn thm3_constraint_lhs(
    user: User,
    mobility: &MobilityConfig,
    noise: &NoiseModel,
    split: &SplitNoise,
    mc: &McConfig,
) -> Result<BoundEstimate> {
    let bank = GeometryBank::build(mobility, noise, mc)?;
    let [a, b] = user.outgoing();
    Ok(bank.constraint_lhs(user, split[a], split[b]))
}

/// One operating point of the rate-limited scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thm3Point {
    pub rates: RateTriple,
    pub rate_estimates: [BoundEstimate; 3],
    /// Public rate spent by users 1, 2, 3.
    pub constraint_lhs: [BoundEstimate; 3],
    /// Every constraint holds within two standard errors.
    pub feasible: bool,
    /// Every constraint holds for the plain means.
    pub strictly_feasible: bool,
}

/// Geometry samples kept in memory so that many split choices can be
/// evaluated on the same slots.
#[derive(Clone, Debug)]
pub struct GeometryBank {
    noise: NoiseModel,
    slots: Vec<SlotGeometry>,
    n_excluded: u64,
}

impl GeometryBank {
    pub fn build(mobility: &MobilityConfig, noise: &NoiseModel, mc: &McConfig) -> Result<Self> {
        noise.validate()?;
        let mut slots = Vec::with_capacity(mc.n_samples.min(1 << 24) as usize);
        let n_excluded = for_each_sample(mobility, mc, |t, _| SlotGeometry::new(t, noise), |g| slots.push(g))?;
        Ok(GeometryBank {
            noise: *noise,
            slots,
            n_excluded,
        })
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn slots(&self) -> &[SlotGeometry] {
        &self.slots
    }

    pub fn n_excluded(&self) -> u64 {
        self.n_excluded
    }

    fn mean_of(&self, f: impl Fn(&SlotGeometry) -> f64) -> BoundEstimate {
        let mut acc = Accumulator::new();
        for g in &self.slots {
            acc.push(f(g));
        }
        acc.finish(self.n_excluded)
    }

    pub fn thm2(&self) -> [BoundEstimate; 3] {
        let n = &self.noise;
        core::array::from_fn(|k| {
            let s = n.dist_var(Pair::ALL[k]);
            self.mean_of(|g| thm2_integrand(g.d[k], s, g.sigma_hat2[k], n.beacons))
        })
    }

    /// Rate of `pair` with split variances on its forward (lower to higher
    /// user) and reverse directions.
    pub fn pair_rate(&self, pair: Pair, sp_fwd: f64, sp_rev: f64) -> BoundEstimate {
        let k = pair.index();
        let s = self.noise.dist_var(pair);
        let j = self.noise.beacons;
        self.mean_of(|g| thm3_pair_terms(g.d[k], s, g.sigma_hat2[k], sp_fwd, sp_rev, j))
    }

    /// Public rate of `user` with split variances on its two outgoing
    /// directions, in [`User::outgoing`] order.
    pub fn constraint_lhs(&self, user: User, sp_a: f64, sp_b: f64) -> BoundEstimate {
        let [a, b] = user.outgoing();
        let (ka, kb) = (a.pair().index(), b.pair().index());
        let (sa, sb) = (self.noise.dist_var(a.pair()), self.noise.dist_var(b.pair()));
        let j = self.noise.beacons;
        self.mean_of(|g| thm3_constraint_summand(g.d[ka], sa, sp_a, j) + thm3_constraint_summand(g.d[kb], sb, sp_b, j))
    }

    pub fn thm3_point(&self, split: &SplitNoise, budgets: &PublicRates) -> Result<Thm3Point> {
        split.validate()?;
        budgets.validate()?;
        let rate_estimates = Pair::ALL.map(|p| self.pair_rate(p, split[p.forward()], split[p.reverse()]));
        let constraint_lhs = User::ALL.map(|u| {
            let [a, b] = u.outgoing();
            self.constraint_lhs(u, split[a], split[b])
        });
        let (feasible, strictly_feasible) = check_budgets(&constraint_lhs, budgets);
        Ok(Thm3Point {
            rates: RateTriple::new(rate_estimates[0].mean, rate_estimates[1].mean, rate_estimates[2].mean),
            rate_estimates,
            constraint_lhs,
            feasible,
            strictly_feasible,
        })
    }
}

/// `(within two standard errors, plain means)`.
pub(crate) fn check_budgets(lhs: &[BoundEstimate; 3], budgets: &PublicRates) -> (bool, bool) {
    let mut loose = true;
    let mut strict = true;
    for u in User::ALL {
        let e = lhs[u.index()];
        let b = budgets[u];
        loose &= e.mean - 2.0 * e.stderr <= b;
        strict &= e.mean <= b;
    }
    (loose, strict)
}

/// Rate-limited lower bound at one split choice.
pub fn thm3_point(
    mobility: &MobilityConfig,
    noise: &NoiseModel,
    split: &SplitNoise,
    budgets: &PublicRates,
    mc: &McConfig,
) -> Result<Thm3Point> {
    split.validate()?;
    budgets.validate()?;
    GeometryBank::build(mobility, noise, mc)?.thm3_point(split, budgets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (MobilityConfig, NoiseModel, McConfig) {
        (MobilityConfig::default(), NoiseModel::uniform(0.1), McConfig::new(20_000, 7))
    }

    #[test]
    fn bank_matches_streaming_bounds() {
        let (m, n, mc) = setup();
        let a = thm2_bounds(&m, &n, &mc).unwrap();
        let b = GeometryBank::build(&m, &n, &mc).unwrap().thm2();
        assert_eq!(a, b);
    }

    #[test]
    fn unquantized_split_with_unlimited_budget_is_thm2() {
        let (m, n, mc) = setup();
        let t2 = thm2_bounds(&m, &n, &mc).unwrap();
        let p = thm3_point(&m, &n, &SplitNoise::zero(), &PublicRates::unlimited(), &mc).unwrap();
        for k in 0..3 {
            assert!((p.rate_estimates[k].mean - t2[k].mean).abs() < 1e-12);
        }
        assert!(p.feasible && p.strictly_feasible);
        assert!(p.constraint_lhs.iter().all(|e| e.mean == f64::INFINITY));
    }

    #[test]
    fn silent_split_is_free_and_useless() {
        let (m, n, mc) = setup();
        let p = thm3_point(&m, &n, &SplitNoise::silent(), &PublicRates::new(0.0, 0.0, 0.0), &mc).unwrap();
        assert_eq!(p.rates, RateTriple::default());
        assert!(p.strictly_feasible);
    }

    #[test]
    fn inner_below_outer() {
        let (m, n, mc) = setup();
        let inner = thm2_bounds(&m, &n, &mc).unwrap();
        let outer = outer_bound(&m, &n, &mc).unwrap();
        for p in Pair::ALL {
            assert!(inner[p.index()].mean <= outer.rates[p]);
        }
    }

    #[test]
    fn finite_budget_rejects_unquantized() {
        let (m, n, mc) = setup();
        let p = thm3_point(&m, &n, &SplitNoise::zero(), &PublicRates::new(1.0, 1.0, 1.0), &mc).unwrap();
        assert!(!p.feasible);
    }

    #[test]
    fn constraint_lhs_matches_bank() {
        let (m, n, mc) = setup();
        let split = SplitNoise::uniform(0.4);
        let a = thm3_constraint_lhs(User::Two, &m, &n, &split, &mc).unwrap();
        let p = thm3_point(&m, &n, &split, &PublicRates::unlimited(), &mc).unwrap();
        assert_eq!(a, p.constraint_lhs[1]);
    }

    #[test]
    fn perfect_eavesdropper_gets_zero_key() {
        // user 3 sees both of its distances almost perfectly and its angle exactly
        let (m, _, mc) = setup();
        let mut n = NoiseModel::uniform(0.1);
        n.sigma2_13 = 1e-9;
        n.sigma2_23 = 1e-9;
        n.sigma2_ang3 = 0.0;
        let b = thm2_bounds(&m, &n, &mc).unwrap();
        assert_eq!(b[0].mean, 0.0);
    }
}
