//! Node placement and the per-slot triangle formed by the three users.
//!
//! Positions are drawn independently in every slot from circularly symmetric
//! Gaussians. Each slot is reduced to a [`TriangleSample`]: the three pairwise
//! distances and the interior angle at every user.

use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::users::{Pair, User};

pub type Point = [f64; 2];

/// Per-user Gaussian placement. Both coordinates of a user share that user's
/// scalar variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobilityConfig {
    pub mean: [Point; 3],
    pub variance: [f64; 3],
}

impl Default for MobilityConfig {
    fn default() -> Self {
        MobilityConfig {
            mean: [[0.0; 2]; 3],
            variance: [1.0; 3],
        }
    }
}

impl MobilityConfig {
    pub fn new(mean: [Point; 3], variance: [f64; 3]) -> Result<Self> {
        let cfg = MobilityConfig { mean, variance };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variance.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::NonPositiveVariance);
        }
        if self.mean.iter().flatten().any(|m| !m.is_finite()) {
            return Err(Error::config("mobility mean must be finite"));
        }
        Ok(())
    }
}

/// Draws one position per user: user 1's x then y, then user 2, then user 3.
pub fn sample_positions<R: RngCore + ?Sized>(
    rng: &mut R,
    config: &MobilityConfig,
) -> Result<[Point; 3]> {
    config.validate()?;
    let mut out = [[0.0; 2]; 3];
    for (u, p) in out.iter_mut().enumerate() {
        let sd = libm::sqrt(config.variance[u]);
        for (c, coord) in p.iter_mut().enumerate() {
            let z: f64 = StandardNormal.sample(rng);
            *coord = config.mean[u][c] + sd * z;
        }
    }
    Ok(out)
}

/// Distances and interior angles (radians) of one slot's triangle.
///
/// `phi1` is the angle at user 1, between the directions to users 2 and 3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleSample {
    pub d12: f64,
    pub d13: f64,
    pub d23: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    /// Collinear or coincident positions. Such slots are excluded from
    /// Monte-Carlo averages because the eavesdropper linearization divides by
    /// squared distances.
    pub degenerate: bool,
}

impl TriangleSample {
    pub fn distance(&self, pair: Pair) -> f64 {
        match pair {
            Pair::P12 => self.d12,
            Pair::P13 => self.d13,
            Pair::P23 => self.d23,
        }
    }

    pub fn angle(&self, user: User) -> f64 {
        match user {
            User::One => self.phi1,
            User::Two => self.phi2,
            User::Three => self.phi3,
        }
    }

    /// Builds a triangle from its side lengths, angles by the law of cosines.
    ///
    /// Sides violating the triangle inequality beyond rounding are rejected.
    pub fn from_sides(d12: f64, d13: f64, d23: f64) -> Result<Self> {
        let sides = [d12, d13, d23];
        if sides.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::config("side lengths must be finite and nonnegative"));
        }
        let scale = d12 + d13 + d23;
        let tol = 1e-12 * scale;
        if d12 > d13 + d23 + tol || d13 > d12 + d23 + tol || d23 > d12 + d13 + tol {
            return Err(Error::config("side lengths violate the triangle inequality"));
        }
        let phi1 = vertex_angle(d12, d13, d23);
        let phi2 = vertex_angle(d12, d23, d13);
        let phi3 = vertex_angle(d13, d23, d12);
        let degenerate = sides.contains(&0.0)
            || heron_product(d12, d13, d23) <= 16.0 * f64::EPSILON * (scale * scale) * (scale * scale);
        Ok(TriangleSample {
            d12,
            d13,
            d23,
            phi1,
            phi2,
            phi3,
            degenerate,
        })
    }
}

// Angle opposite side `c`, between sides `a` and `b`.
fn vertex_angle(a: f64, b: f64, c: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let cos = ((a * a + b * b - c * c) / (2.0 * a * b)).clamp(-1.0, 1.0);
    libm::acos(cos)
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(v: Point) -> f64 {
    libm::hypot(v[0], v[1])
}

fn cross(u: Point, v: Point) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

// Interior angle at `m` between the rays towards `i` and `j`.
fn angle_at(m: Point, i: Point, j: Point) -> f64 {
    let u = sub(i, m);
    let v = sub(j, m);
    libm::atan2(libm::fabs(cross(u, v)), u[0] * v[0] + u[1] * v[1])
}

/// Side lengths and interior angles of the triangle with the given vertices.
///
/// Angles come from `atan2(|u x v|, u . v)` at each vertex, which satisfies the
/// law of cosines and stays accurate for thin triangles. Collinear vertices
/// give angles in `{0, pi}`; a vertex coinciding with another gets angle 0.
pub fn triangle_from_positions(p1: Point, p2: Point, p3: Point) -> TriangleSample {
    let d12 = norm(sub(p1, p2));
    let d13 = norm(sub(p1, p3));
    let d23 = norm(sub(p2, p3));
    let longest = d12.max(d13).max(d23);
    let area2 = libm::fabs(cross(sub(p2, p1), sub(p3, p1)));
    let degenerate = d12 == 0.0 || d13 == 0.0 || d23 == 0.0 || area2 <= 4.0 * f64::EPSILON * longest * longest;
    TriangleSample {
        d12,
        d13,
        d23,
        phi1: angle_at(p1, p2, p3),
        phi2: angle_at(p2, p1, p3),
        phi3: angle_at(p3, p1, p2),
        degenerate,
    }
}

fn heron_product(d12: f64, d13: f64, d23: f64) -> f64 {
    (d12 + d13 + d23) * (d12 + d13 - d23) * (d13 + d23 - d12) * (d12 + d23 - d13)
}

/// Four-factor side product `(a+b+c)(a+b-c)(a-b+c)(-a+b+c)`, equal to sixteen
/// times the squared area.
///
/// Evaluated as `4 b^2 c^2 sin^2(phi)` at the vertex with the smallest angle.
/// The literal product of rounded sides loses about `eps * longest^2 / area`
/// relative accuracy on thin triangles.
pub fn heron_const(t: &TriangleSample) -> f64 {
    let (phi, b, c) = [(t.phi1, t.d12, t.d13), (t.phi2, t.d12, t.d23), (t.phi3, t.d13, t.d23)]
        .into_iter()
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("three vertices");
    let s = b * c * libm::sin(phi);
    4.0 * s * s
}
