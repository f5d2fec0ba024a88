//! Expectation over random slot geometry.
//!
//! Sample `k` draws everything it needs (positions, then any observation
//! noise) from its own ChaCha8 stream keyed by `(seed, k)`, so results do not
//! depend on how samples are split across batches or threads. Per-sample
//! values are produced in parallel (with the `std` feature) and always folded
//! sequentially in index order with compensated sums.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
#[cfg(feature = "std")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{sample_positions, triangle_from_positions, MobilityConfig, TriangleSample};

pub type SampleRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct McConfig {
    /// Number of slots `n`.
    pub n_samples: u64,
    pub seed: u64,
    /// Samples evaluated per parallel batch. Affects memory only.
    pub batch_size: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_samples: 10_000,
            seed: 0,
            batch_size: 1 << 16,
        }
    }
}

impl McConfig {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        McConfig {
            n_samples,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::config("n_samples must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        Ok(())
    }
}

/// Random stream of sample `k` under `seed`.
pub fn substream(seed: u64, k: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Monte-Carlo mean of one quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_samples)`.
    pub stderr: f64,
    /// Samples that entered the mean.
    pub n_samples: u64,
    /// Degenerate samples left out.
    pub n_excluded: u64,
}

impl BoundEstimate {
    pub fn exact(value: f64) -> Self {
        BoundEstimate {
            mean: value,
            stderr: 0.0,
            n_samples: 0,
            n_excluded: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Streaming mean and standard error. Uses shifted, compensated sums; the
/// result depends only on the order in which values are pushed.
///
/// Any `+inf` value makes the mean `+inf` with zero standard error.
#[derive(Clone, Debug, Default)]
pub struct Accumulator {
    shift: Option<f64>,
    sum: Neumaier,
    sum_sq: Neumaier,
    count: u64,
    infinite: u64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        if x == f64::INFINITY {
            self.infinite += 1;
            return;
        }
        let k = *self.shift.get_or_insert(x);
        let y = x - k;
        self.sum.add(y);
        self.sum_sq.add(y * y);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(&self, n_excluded: u64) -> BoundEstimate {
        let n = self.count;
        let (mean, stderr) = if self.infinite > 0 {
            (f64::INFINITY, 0.0)
        } else if n == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let nf = n as f64;
            let s = self.sum.value();
            let mean = self.shift.unwrap_or(0.0) + s / nf;
            let stderr = if n > 1 {
                let var = ((self.sum_sq.value() - s * s / nf) / (nf - 1.0)).max(0.0);
                libm::sqrt(var / nf)
            } else {
                0.0
            };
            (mean, stderr)
        };
        BoundEstimate {
            mean,
            stderr,
            n_samples: n,
            n_excluded,
        }
    }
}

/// Evaluates `eval` on every non-degenerate sample and hands the results to
/// `sink` in sample order. Returns the number of degenerate samples.
pub fn for_each_sample<T, F, G>(mobility: &MobilityConfig, mc: &McConfig, eval: F, mut sink: G) -> Result<u64>
where
    T: Send,
    F: Fn(&TriangleSample, &mut SampleRng) -> T + Sync,
    G: FnMut(T),
{
    mobility.validate()?;
    mc.validate()?;
    let one = |k: u64| -> Result<Option<T>> {
        let mut rng = substream(mc.seed, k);
        let p = sample_positions(&mut rng, mobility)?;
        let t = triangle_from_positions(p[0], p[1], p[2]);
        if t.degenerate {
            Ok(None)
        } else {
            Ok(Some(eval(&t, &mut rng)))
        }
    };
    let mut excluded = 0;
    let batch = mc.batch_size as u64;
    let mut start = 0;
    while start < mc.n_samples {
        let end = (start + batch).min(mc.n_samples);
        #[cfg(feature = "std")]
        let values: Vec<Option<T>> = (start..end).into_par_iter().map(one).collect::<Result<_>>()?;
        #[cfg(not(feature = "std"))]
        let values: Vec<Option<T>> = (start..end).map(one).collect::<Result<_>>()?;
        for v in values {
            match v {
                Some(v) => sink(v),
                None => excluded += 1,
            }
        }
        start = end;
    }
    if excluded == mc.n_samples {
        return Err(Error::AllSamplesDegenerate(excluded));
    }
    Ok(excluded)
}

/// Means of `K` quantities computed from the same samples.
pub fn estimate_many<const K: usize, F>(mobility: &MobilityConfig, mc: &McConfig, f: F) -> Result<[BoundEstimate; K]>
where
    F: Fn(&TriangleSample, &mut SampleRng) -> [f64; K] + Sync,
{
    let mut acc: [Accumulator; K] = core::array::from_fn(|_| Accumulator::new());
    let excluded = for_each_sample(mobility, mc, f, |v| {
        for (a, x) in acc.iter_mut().zip(v) {
            a.push(x);
        }
    })?;
    Ok(core::array::from_fn(|i| acc[i].finish(excluded)))
}

/// Mean of a geometry-only integrand.
pub fn estimate<F>(integrand: F, mobility: &MobilityConfig, mc: &McConfig) -> Result<BoundEstimate>
where
    F: Fn(&TriangleSample) -> f64 + Sync,
{
    let [e] = estimate_many(mobility, mc, |t, _| [integrand(t)])?;
    Ok(e)
}

/// Mean of an integrand that also draws per-sample noise from the sample's
/// stream (after the positions).
pub fn estimate_with_rng<F>(integrand: F, mobility: &MobilityConfig, mc: &McConfig) -> Result<BoundEstimate>
where
    F: Fn(&TriangleSample, &mut SampleRng) -> f64 + Sync,
{
    let [e] = estimate_many(mobility, mc, |t, r| [integrand(t, r)])?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand() {
        let e = estimate(|_| 1.0, &MobilityConfig::default(), &McConfig::new(1000, 3)).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.n_samples + e.n_excluded, 1000);
    }

    #[test]
    fn squared_distance_moment() {
        // |X1 - X2|^2 with unit-variance coordinates: 2 + 2
        let e = estimate(|t| t.d12 * t.d12, &MobilityConfig::default(), &McConfig::new(1_000_000, 17)).unwrap();
        assert!((e.mean - 4.0).abs() < 3.0 * e.stderr, "{e:?}");
        assert_eq!(e.n_excluded, 0);
    }

    #[test]
    fn same_seed_same_estimate() {
        let mc = McConfig::new(5000, 42);
        let a = estimate(|t| t.d13.ln(), &MobilityConfig::default(), &mc).unwrap();
        let b = estimate(|t| t.d13.ln(), &MobilityConfig::default(), &mc).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn batch_size_does_not_change_result() {
        let m = MobilityConfig::default();
        let base = McConfig::new(10_007, 9);
        let a = estimate(|t| t.phi1 * t.d23, &m, &base).unwrap();
        for batch_size in [1, 13, 4096, 1 << 20] {
            let b = estimate(|t| t.phi1 * t.d23, &m, &McConfig { batch_size, ..base }).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn stderr_halves_with_four_times_samples() {
        let m = MobilityConfig::default();
        let a = estimate(|t| t.d12, &m, &McConfig::new(20_000, 1)).unwrap();
        let b = estimate(|t| t.d12, &m, &McConfig::new(80_000, 1)).unwrap();
        let ratio = a.stderr / b.stderr;
        assert!((ratio / 2.0 - 1.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn infinite_values_give_infinite_mean() {
        let e = estimate(|t| if t.d12 > 1.0 { f64::INFINITY } else { 0.0 }, &MobilityConfig::default(), &McConfig::new(100, 0)).unwrap();
        assert_eq!(e.mean, f64::INFINITY);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn invalid_configs() {
        let m = MobilityConfig::default();
        assert!(estimate(|_| 0.0, &m, &McConfig::new(0, 0)).is_err());
        let bad = MobilityConfig {
            variance: [0.0; 3],
            ..m
        };
        assert_eq!(estimate(|_| 0.0, &bad, &McConfig::new(1, 0)), Err(Error::NonPositiveVariance));
    }

    #[test]
    fn all_degenerate_is_an_error() {
        // identical tiny-variance placement around a common point is never
        // exactly degenerate, so exercise the path through the accumulator
        let acc = Accumulator::new();
        assert!(acc.finish(5).mean.is_nan());
        let m = MobilityConfig {
            mean: [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            variance: [1e-300; 3],
        };
        assert_eq!(estimate(|_| 0.0, &m, &McConfig::new(50, 0)), Err(Error::AllSamplesDegenerate(50)));
    }

    #[test]
    fn accumulator_is_accurate_with_large_offset() {
        let mut acc = Accumulator::new();
        for i in 0..1000 {
            acc.push(1e9 + (i % 2) as f64);
        }
        let e = acc.finish(0);
        assert_eq!(e.mean, 1e9 + 0.5);
        let sd = (0.25f64 * 1000.0 / 999.0).sqrt();
        assert!((e.stderr - sd / 1000f64.sqrt()).abs() < 1e-12);
    }
}
