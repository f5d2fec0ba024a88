//! Key-rate bounds for the location-derived Gaussian setup.
//!
//! Per-slot integrands are closed forms in the slot's distance `d`, the pair's
//! distance-noise variance, the eavesdropper variance `sigma_hat^2` and the
//! beacon count. They are exact for a jointly Gaussian model in which the
//! slot's distance acts as a zero-mean Gaussian with variance `d^2`; the
//! [`oracle`] module evaluates that model through covariance determinants and
//! is used to check every closed form. All rates are in bits per slot.

mod bounds;
mod integrand;
pub mod oracle;

use core::ops::{Index, IndexMut};

pub use bounds::{
    outer_bound, thm2_bounds, thm3_constraint_lhs, thm3_point, GeometryBank, OuterBound, SlotGeometry, Thm3Point,
};
pub use integrand::{
    outer_rate, thm2_integrand, thm3_constraint_summand, thm3_forward_term, thm3_pair_terms, thm3_reverse_term,
};

use crate::error::{Error, Result};
use crate::users::{Direction, Pair, User};

/// Key rates `(R12, R13, R23)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RateTriple {
    pub r12: f64,
    pub r13: f64,
    pub r23: f64,
}

impl RateTriple {
    pub fn new(r12: f64, r13: f64, r23: f64) -> Self {
        RateTriple { r12, r13, r23 }
    }

    pub fn validate(&self) -> Result<()> {
        if Pair::ALL.iter().any(|p| !(self[*p] >= 0.0)) {
            return Err(Error::config("key rates must be nonnegative"));
        }
        Ok(())
    }
}

impl Index<Pair> for RateTriple {
    type Output = f64;
    fn index(&self, p: Pair) -> &f64 {
        match p {
            Pair::P12 => &self.r12,
            Pair::P13 => &self.r13,
            Pair::P23 => &self.r23,
        }
    }
}

impl IndexMut<Pair> for RateTriple {
    fn index_mut(&mut self, p: Pair) -> &mut f64 {
        match p {
            Pair::P12 => &mut self.r12,
            Pair::P13 => &mut self.r13,
            Pair::P23 => &mut self.r23,
        }
    }
}

/// Public-channel budgets `(R1, R2, R3)`; `f64::INFINITY` means unlimited.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PublicRates {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl PublicRates {
    pub fn new(r1: f64, r2: f64, r3: f64) -> Self {
        PublicRates { r1, r2, r3 }
    }

    pub fn unlimited() -> Self {
        PublicRates::new(f64::INFINITY, f64::INFINITY, f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        if User::ALL.iter().any(|u| !(self[*u] >= 0.0)) {
            return Err(Error::config("public rates must be nonnegative"));
        }
        Ok(())
    }
}

impl Index<User> for PublicRates {
    type Output = f64;
    fn index(&self, u: User) -> &f64 {
        match u {
            User::One => &self.r1,
            User::Two => &self.r2,
            User::Three => &self.r3,
        }
    }
}

/// Test-channel variances `sigma'^2` for the six directions: user `i` forms
/// `S_ij = d~_ij + D_ij`. Like the observation noise, they are single-beacon
/// variances (`D_ij` has variance `sigma'^2_ij / J`). `f64::INFINITY` means
/// that direction carries nothing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitNoise {
    /// Indexed by [`Direction::index`].
    pub sp2: [f64; 6],
}

impl SplitNoise {
    pub fn uniform(v: f64) -> Self {
        SplitNoise { sp2: [v; 6] }
    }

    /// Every observation sent unquantized.
    pub fn zero() -> Self {
        Self::uniform(0.0)
    }

    /// Nothing sent in any direction.
    pub fn silent() -> Self {
        Self::uniform(f64::INFINITY)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sp2.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::config("split variances must be nonnegative"));
        }
        Ok(())
    }
}

impl Index<Direction> for SplitNoise {
    type Output = f64;
    fn index(&self, d: Direction) -> &f64 {
        &self.sp2[d.index()]
    }
}

impl IndexMut<Direction> for SplitNoise {
    fn index_mut(&mut self, d: Direction) -> &mut f64 {
        &mut self.sp2[d.index()]
    }
}

#[inline]
pub(crate) fn half_log2_1p_pos(x: f64) -> f64 {
    if x > 0.0 {
        0.5 * libm::log1p(x) / core::f64::consts::LN_2
    } else {
        0.0
    }
}
