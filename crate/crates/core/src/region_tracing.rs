//! Parameter sweeps of the unlimited-channel bounds, and 2-D projections of
//! the rate-limited region traced over a grid of split variances.
//!
//! A projection is built from one bank of geometry samples. Per-pair rates
//! and per-user public rates are tabulated over the split grid, every grid
//! combination is assembled from the tables, and the non-dominated points
//! are re-estimated on a larger bank.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[cfg(feature = "std")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian_rates::{
    thm2_integrand, GeometryBank, OuterBound, PublicRates, RateTriple, SlotGeometry, SplitNoise, Thm3Point,
};
use crate::geometry::MobilityConfig;
use crate::montecarlo::{estimate_many, BoundEstimate, McConfig};
use crate::observation::NoiseModel;
use crate::users::{Direction, Pair, User};

/// Noise variance varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    Distance(Pair),
    Angle(User),
}

impl SweepParameter {
    pub fn apply(self, noise: &mut NoiseModel, v: f64) {
        match self {
            SweepParameter::Distance(p) => noise.set_dist_var(p, v),
            SweepParameter::Angle(u) => noise.set_angle_var(u, v),
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParameter::Distance(p) => write!(f, "sigma2_{p}"),
            SweepParameter::Angle(u) => write!(f, "sigma2_ang{u}"),
        }
    }
}

impl FromStr for SweepParameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sigma2_12" => SweepParameter::Distance(Pair::P12),
            "sigma2_13" => SweepParameter::Distance(Pair::P13),
            "sigma2_23" => SweepParameter::Distance(Pair::P23),
            "sigma2_ang1" => SweepParameter::Angle(User::One),
            "sigma2_ang2" => SweepParameter::Angle(User::Two),
            "sigma2_ang3" => SweepParameter::Angle(User::Three),
            _ => return Err(Error::config(alloc::format!("unknown sweep parameter {s:?}"))),
        })
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(Error::config("log grid needs 0 < lo <= hi and n >= 1"));
    }
    if n == 1 {
        return Ok(alloc::vec![lo]);
    }
    let (a, b) = (libm::log10(lo), libm::log10(hi));
    Ok((0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                libm::pow(10.0, a + (b - a) * k as f64 / (n - 1) as f64)
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    pub mobility: MobilityConfig,
    pub noise: NoiseModel,
    pub mc: McConfig,
}

impl SweepSpec {
    /// Unit-variance positions, every variance 0.1, sweeping `sigma2_12`.
    pub fn fig3_default(mc: McConfig) -> Self {
        SweepSpec {
            parameter: SweepParameter::Distance(Pair::P12),
            grid: alloc::vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
            mobility: MobilityConfig::default(),
            noise: NoiseModel::uniform(0.1),
            mc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::config("sweep grid is empty"));
        }
        if self.grid.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::config("sweep values must be finite and nonnegative"));
        }
        self.mobility.validate()?;
        self.mc.validate()?;
        for v in &self.grid {
            let mut n = self.noise;
            self.parameter.apply(&mut n, *v);
            n.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub inner: [BoundEstimate; 3],
    pub outer: OuterBound,
}

impl SweepRow {
    pub fn n_excluded(&self) -> u64 {
        self.inner[0].n_excluded
    }
}

/// Inner and outer unlimited-channel bounds at every grid value. All grid
/// values reuse the same samples.
pub fn sweep_fig3(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.grid.len());
    for &value in &spec.grid {
        let mut noise = spec.noise;
        spec.parameter.apply(&mut noise, value);
        let e: [BoundEstimate; 6] = estimate_many(&spec.mobility, &spec.mc, |t, _| {
            let g = SlotGeometry::new(t, &noise);
            core::array::from_fn(|k| {
                if k < 3 {
                    thm2_integrand(g.d[k], noise.dist_var(Pair::ALL[k]), g.sigma_hat2[k], noise.beacons)
                } else {
                    g.sigma_hat2[k - 3]
                }
            })
        })?;
        rows.push(SweepRow {
            value,
            inner: [e[0], e[1], e[2]],
            outer: OuterBound::from_means(&noise, [e[3], e[4], e[5]]),
        });
    }
    Ok(rows)
}

/// Two rate coordinates to project on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axes {
    R12R13,
    R12R23,
    R13R23,
}

impl Axes {
    pub fn pairs(self) -> (Pair, Pair) {
        match self {
            Axes::R12R13 => (Pair::P12, Pair::P13),
            Axes::R12R23 => (Pair::P12, Pair::P23),
            Axes::R13R23 => (Pair::P13, Pair::P23),
        }
    }

    /// The coordinate maximized out.
    pub fn hidden(self) -> Pair {
        match self {
            Axes::R12R13 => Pair::P23,
            Axes::R12R23 => Pair::P13,
            Axes::R13R23 => Pair::P12,
        }
    }

    pub fn project(self, r: &RateTriple) -> (f64, f64) {
        let (a, b) = self.pairs();
        (r[a], r[b])
    }
}

impl fmt::Display for Axes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.pairs();
        write!(f, "R{a}-R{b}")
    }
}

impl FromStr for Axes {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R12-R13" => Ok(Axes::R12R13),
            "R12-R23" => Ok(Axes::R12R23),
            "R13-R23" => Ok(Axes::R13R23),
            _ => Err(Error::config(alloc::format!("unknown axes {s:?}; expected R12-R13, R12-R23 or R13-R23"))),
        }
    }
}

/// Candidate split variances, shared by all six directions.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitGrid {
    pub values: Vec<f64>,
}

impl Default for SplitGrid {
    /// 13 log-spaced values over `[1e-3, 1e3]` plus `inf`.
    fn default() -> Self {
        SplitGrid::log_spaced(1e-3, 1e3, 13, true).expect("valid default grid")
    }
}

impl SplitGrid {
    pub fn log_spaced(lo: f64, hi: f64, n: usize, with_inf: bool) -> Result<Self> {
        let mut values = log_grid(lo, hi, n)?;
        if with_inf {
            values.push(f64::INFINITY);
        }
        Ok(SplitGrid { values })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let g = SplitGrid { values };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::config("split grid must be nonempty with nonnegative values"));
        }
        if self.values.len() > 255 {
            return Err(Error::config("split grid is limited to 255 values"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceConfig {
    pub axes: Axes,
    pub budgets: PublicRates,
    pub noise: NoiseModel,
    pub mobility: MobilityConfig,
    pub grid: SplitGrid,
    /// Samples for the grid stage.
    pub mc: McConfig,
    /// Samples for re-estimating frontier points (same seed); 0 skips it.
    pub refine_samples: u64,
}

impl TraceConfig {
    /// Budgets `(0.5, 0.2, 0.8)`, every variance 0.1, default grid.
    pub fn paper_default(axes: Axes) -> Self {
        TraceConfig {
            axes,
            budgets: PublicRates::new(0.5, 0.2, 0.8),
            noise: NoiseModel::uniform(0.1),
            mobility: MobilityConfig::default(),
            grid: SplitGrid::default(),
            mc: McConfig::new(10_000, 0),
            refine_samples: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionPoint {
    pub split: SplitNoise,
    /// Grid-stage rates; the hidden coordinate is the largest over feasible
    /// combinations with this projection.
    pub rates: RateTriple,
    /// Re-estimate on the large bank, for frontier points.
    pub refined: Option<Thm3Point>,
    pub frontier: bool,
}

impl RegionPoint {
    /// Refined rates when available.
    pub fn best_rates(&self) -> RateTriple {
        self.refined.map_or(self.rates, |p| p.rates)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedRegion {
    pub axes: Axes,
    pub budgets: PublicRates,
    /// Distinct projected points, sorted by the first axis then the second.
    pub points: Vec<RegionPoint>,
    pub combinations: u64,
    pub feasible_combinations: u64,
    pub n_excluded: u64,
    pub diagnostic: Option<String>,
}

impl ProjectedRegion {
    pub fn frontier(&self) -> impl Iterator<Item = &RegionPoint> {
        self.points.iter().filter(|p| p.frontier)
    }

    /// Projected coordinates of the frontier, refined where available.
    pub fn frontier_coords(&self) -> Vec<(f64, f64)> {
        self.frontier().map(|p| self.axes.project(&p.best_rates())).collect()
    }
}

/// Indices of the non-dominated points (maximizing both coordinates).
/// Identical points keep only their first occurrence.
pub fn pareto_frontier(points: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (points[i], points[j]);
        b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)).then(i.cmp(&j))
    });
    let mut best = f64::NEG_INFINITY;
    let mut out = Vec::new();
    for i in order {
        if points[i].1 > best {
            best = points[i].1;
            out.push(i);
        }
    }
    out.sort_unstable();
    out
}

fn table<T: Send>(g: usize, f: impl Fn(usize, usize) -> T + Sync) -> Vec<T> {
    #[cfg(feature = "std")]
    let v = (0..g * g).into_par_iter().map(|k| f(k / g, k % g)).collect();
    #[cfg(not(feature = "std"))]
    let v = (0..g * g).map(|k| f(k / g, k % g)).collect();
    v
}

struct Tables {
    g: usize,
    /// `[pair][fwd * g + rev]`
    rate: [Vec<f64>; 3],
    /// `[user]`: feasible `(a, b)` split index pairs over the user's outgoing
    /// directions.
    feasible: [Vec<(u8, u8)>; 3],
}

fn build_tables(bank: &GeometryBank, grid: &[f64], budgets: &PublicRates) -> Tables {
    let g = grid.len();
    let rate = Pair::ALL.map(|p| table(g, |a, b| bank.pair_rate(p, grid[a], grid[b]).mean));
    let feasible = User::ALL.map(|u| {
        let lhs = table(g, |a, b| bank.constraint_lhs(u, grid[a], grid[b]));
        (0..g * g)
            .filter(|&k| lhs[k].mean - 2.0 * lhs[k].stderr <= budgets[u])
            .map(|k| ((k / g) as u8, (k % g) as u8))
            .collect()
    });
    Tables { g, rate, feasible }
}

fn split_of(grid: &[f64], idx: &[u8; 6]) -> SplitNoise {
    let mut s = SplitNoise::zero();
    for d in Direction::ALL {
        s[d] = grid[idx[d.index()] as usize];
    }
    s
}

/// Traces the projection of the rate-limited region on `cfg.axes`.
pub fn trace_projection(cfg: &TraceConfig) -> Result<ProjectedRegion> {
    cfg.grid.validate()?;
    cfg.budgets.validate()?;
    cfg.noise.validate()?;
    let grid = &cfg.grid.values;
    let bank = GeometryBank::build(&cfg.mobility, &cfg.noise, &cfg.mc)?;
    let t = build_tables(&bank, grid, &cfg.budgets);
    let g = t.g;
    let rate = |p: Pair, fwd: u8, rev: u8| t.rate[p.index()][fwd as usize * g + rev as usize];

    // projected key -> (hidden coordinate, split indices)
    let mut best: BTreeMap<(u64, u64), (f64, [u8; 6])> = BTreeMap::new();
    let mut feasible_combinations = 0u64;
    for &(i12, i13) in &t.feasible[0] {
        for &(i21, i23) in &t.feasible[1] {
            for &(i31, i32) in &t.feasible[2] {
                feasible_combinations += 1;
                let r = RateTriple::new(rate(Pair::P12, i12, i21), rate(Pair::P13, i13, i31), rate(Pair::P23, i23, i32));
                let (x, y) = cfg.axes.project(&r);
                let z = r[cfg.axes.hidden()];
                // index order matches Direction::index: 12, 13, 21, 23, 31, 32
                let idx = [i12, i13, i21, i23, i31, i32];
                best.entry((x.to_bits(), y.to_bits()))
                    .and_modify(|e| {
                        if z > e.0 {
                            *e = (z, idx);
                        }
                    })
                    .or_insert((z, idx));
            }
        }
    }

    let mut points: Vec<RegionPoint> = best
        .values()
        .map(|(_, idx)| {
            let split = split_of(grid, idx);
            let rates = Pair::ALL.map(|p| rate(p, idx[p.forward().index()], idx[p.reverse().index()]));
            RegionPoint {
                split,
                rates: RateTriple::new(rates[0], rates[1], rates[2]),
                refined: None,
                frontier: false,
            }
        })
        .collect();

    let diagnostic = if points.is_empty() {
        Some(String::from("no split combination on the grid meets the public-rate budgets"))
    } else {
        refine_frontier(cfg, &mut points)?;
        None
    };

    Ok(ProjectedRegion {
        axes: cfg.axes,
        budgets: cfg.budgets,
        points,
        combinations: (g as u64).pow(6),
        feasible_combinations,
        n_excluded: bank.n_excluded(),
        diagnostic,
    })
}

/// Marks the frontier. With refinement enabled, frontier candidates are
/// re-estimated and dropped if no longer feasible, until the frontier is
/// stable.
fn refine_frontier(cfg: &TraceConfig, points: &mut [RegionPoint]) -> Result<()> {
    let big = if cfg.refine_samples > 0 {
        Some(GeometryBank::build(
            &cfg.mobility,
            &cfg.noise,
            &McConfig {
                n_samples: cfg.refine_samples,
                ..cfg.mc
            },
        )?)
    } else {
        None
    };
    let mut dropped = alloc::vec![false; points.len()];
    loop {
        let live: Vec<usize> = (0..points.len()).filter(|&k| !dropped[k]).collect();
        let coords: Vec<(f64, f64)> = live.iter().map(|&k| cfg.axes.project(&points[k].best_rates())).collect();
        let front: Vec<usize> = pareto_frontier(&coords).into_iter().map(|i| live[i]).collect();
        let mut changed = false;
        if let Some(bank) = &big {
            for &k in &front {
                if points[k].refined.is_none() {
                    let p = bank.thm3_point(&points[k].split, &cfg.budgets)?;
                    points[k].refined = Some(p);
                    changed = true;
                    if !p.feasible {
                        dropped[k] = true;
                    }
                }
            }
        }
        if !changed {
            for p in points.iter_mut() {
                p.frontier = false;
            }
            for k in front {
                points[k].frontier = true;
            }
            return Ok(());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(axes: Axes, budgets: PublicRates) -> TraceConfig {
        TraceConfig {
            budgets,
            grid: SplitGrid::log_spaced(1e-2, 1e2, 5, true).unwrap(),
            mc: McConfig::new(2000, 3),
            refine_samples: 20_000,
            ..TraceConfig::paper_default(axes)
        }
    }

    #[test]
    fn frontier_of_known_points() {
        let pts = [(1.0, 0.0), (0.5, 0.5), (0.4, 0.4), (0.0, 1.0), (0.5, 0.5), (1.0, 0.0)];
        assert_eq!(pareto_frontier(&pts), alloc::vec![0, 1, 3]);
        assert!(pareto_frontier(&[]).is_empty());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1e3, 13).unwrap();
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[12], 1e3);
        assert!((g[6] - 1.0).abs() < 1e-12);
        assert!(log_grid(0.0, 1.0, 3).is_err());
    }

    #[test]
    fn axes_round_trip() {
        use alloc::string::ToString;
        for a in [Axes::R12R13, Axes::R12R23, Axes::R13R23] {
            assert_eq!(a.to_string().parse::<Axes>().unwrap(), a);
        }
        assert!("R12-R12".parse::<Axes>().is_err());
    }

    #[test]
    fn zero_budgets_give_origin() {
        let r = trace_projection(&small(Axes::R12R13, PublicRates::new(0.0, 0.0, 0.0))).unwrap();
        assert_eq!(r.frontier_coords(), alloc::vec![(0.0, 0.0)]);
    }

    #[test]
    fn unlimited_budgets_give_unquantized_corner() {
        let mut cfg = small(Axes::R12R13, PublicRates::unlimited());
        cfg.grid.values.insert(0, 0.0);
        let r = trace_projection(&cfg).unwrap();
        let corner = GeometryBank::build(&cfg.mobility, &cfg.noise, &McConfig { n_samples: 20_000, ..cfg.mc })
            .unwrap()
            .thm2();
        let f = r.frontier_coords();
        assert_eq!(f.len(), 1, "{f:?}");
        assert!((f[0].0 - corner[0].mean).abs() < 1e-12);
        assert!((f[0].1 - corner[1].mean).abs() < 1e-12);
    }

    #[test]
    fn frontier_points_revalidate_and_do_not_dominate_each_other() {
        let cfg = small(Axes::R12R13, PublicRates::new(0.5, 0.2, 0.8));
        let r = trace_projection(&cfg).unwrap();
        let f = r.frontier_coords();
        assert!(!f.is_empty());
        for (i, a) in f.iter().enumerate() {
            for (j, b) in f.iter().enumerate() {
                if i != j {
                    assert!(!(b.0 >= a.0 && b.1 >= a.1), "{a:?} dominated by {b:?}");
                }
            }
        }
        let grid_bank = GeometryBank::build(&cfg.mobility, &cfg.noise, &cfg.mc).unwrap();
        for p in &r.points {
            let again = grid_bank.thm3_point(&p.split, &cfg.budgets).unwrap();
            assert!(again.feasible);
            assert_eq!(again.rates, p.rates);
            if p.frontier {
                assert!(p.refined.unwrap().feasible);
            }
        }
    }

    #[test]
    fn finer_grid_keeps_every_point() {
        let mut cfg = small(Axes::R12R23, PublicRates::new(0.5, 0.2, 0.8));
        cfg.refine_samples = 0;
        cfg.grid = SplitGrid::explicit(alloc::vec![0.1, 10.0, f64::INFINITY]).unwrap();
        let coarse = trace_projection(&cfg).unwrap();
        cfg.grid = SplitGrid::explicit(alloc::vec![0.01, 0.1, 1.0, 10.0, f64::INFINITY]).unwrap();
        let fine = trace_projection(&cfg).unwrap();
        let key = |p: &RegionPoint| cfg.axes.project(&p.rates);
        let fine_keys: Vec<(f64, f64)> = fine.points.iter().map(key).collect();
        for p in &coarse.points {
            assert!(fine_keys.contains(&key(p)));
        }
        assert!(fine.feasible_combinations >= coarse.feasible_combinations);
    }

    #[test]
    fn empty_feasible_set_is_reported() {
        let mut cfg = small(Axes::R12R13, PublicRates::new(0.0, 0.0, 0.0));
        cfg.grid = SplitGrid::explicit(alloc::vec![0.0]).unwrap();
        let r = trace_projection(&cfg).unwrap();
        assert!(r.points.is_empty());
        assert!(r.diagnostic.is_some());
    }

    #[test]
    fn sweep_rows_bracket() {
        let mut spec = SweepSpec::fig3_default(McConfig::new(20_000, 1));
        spec.grid = alloc::vec![0.05, 0.5];
        let rows = sweep_fig3(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            for p in Pair::ALL {
                assert!(r.inner[p.index()].mean <= r.outer.rates[p]);
            }
        }
        assert!(rows[0].inner[0].mean > rows[1].inner[0].mean);
        spec.grid.clear();
        assert!(sweep_fig3(&spec).is_err());
    }
}
