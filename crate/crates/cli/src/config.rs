//! JSON run configuration. Every section is optional; missing sections take
//! the defaults of the three-user mobility example (unit-variance positions
//! around the origin, every noise variance 0.1, one beacon).

use std::fmt;

use pairkey_core::discrete_region::DEFAULT_CAP;
use pairkey_core::gaussian_rates::{PublicRates, SplitNoise};
use pairkey_core::geometry::MobilityConfig;
use pairkey_core::montecarlo::McConfig;
use pairkey_core::observation::NoiseModel;
use pairkey_core::region_tracing::{log_grid, Axes, SplitGrid, SweepParameter};
use pairkey_core::Direction;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::CliError;

/// A nonnegative quantity that may be `"inf"` in JSON.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str(if self.0 > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                match v {
                    "inf" | "infinity" | "Infinity" => Ok(Num(f64::INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilitySection {
    pub mean: [[f64; 2]; 3],
    pub variance: [f64; 3],
}

impl Default for MobilitySection {
    fn default() -> Self {
        let m = MobilityConfig::default();
        MobilitySection {
            mean: m.mean,
            variance: m.variance,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub sigma2_12: f64,
    pub sigma2_13: f64,
    pub sigma2_23: f64,
    pub sigma2_ang1: f64,
    pub sigma2_ang2: f64,
    pub sigma2_ang3: f64,
    pub beacons: u32,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            sigma2_12: 0.1,
            sigma2_13: 0.1,
            sigma2_23: 0.1,
            sigma2_ang1: 0.1,
            sigma2_ang2: 0.1,
            sigma2_ang3: 0.1,
            beacons: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub r1: Num,
    pub r2: Num,
    pub r3: Num,
}

impl Default for BudgetSection {
    fn default() -> Self {
        BudgetSection {
            r1: Num(0.5),
            r2: Num(0.2),
            r3: Num(0.8),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub samples: u64,
    pub seed: u64,
    pub batch_size: usize,
}

impl Default for McSection {
    fn default() -> Self {
        let m = McConfig::default();
        McSection {
            samples: m.n_samples,
            seed: m.seed,
            batch_size: m.batch_size,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<Num>),
    Log {
        lo: f64,
        hi: f64,
        count: usize,
        #[serde(default)]
        include_inf: bool,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub grid: GridSpec,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            parameter: "sigma2_12".into(),
            grid: GridSpec::Values([0.05, 0.1, 0.2, 0.3, 0.4, 0.5].map(Num).to_vec()),
        }
    }
}

/// Split variances: one value for every direction, or one per direction
/// keyed `"12"`, `"13"`, `"21"`, `"23"`, `"31"`, `"32"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SplitSpec {
    Uniform(Num),
    PerDirection(std::collections::BTreeMap<String, Num>),
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::Uniform(Num(1.0))
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionSection {
    pub axes: Option<String>,
    pub split_grid: Option<GridSpec>,
    pub refine_samples: Option<u64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mobility: MobilitySection,
    pub noise: NoiseSection,
    pub budgets: BudgetSection,
    pub mc: McSection,
    pub sweep: SweepSection,
    pub split: SplitSpec,
    pub region: RegionSection,
    pub discrete: Option<serde_json::Value>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn mobility(&self) -> Result<MobilityConfig, CliError> {
        Ok(MobilityConfig::new(self.mobility.mean, self.mobility.variance)?)
    }

    pub fn noise(&self) -> Result<NoiseModel, CliError> {
        let n = &self.noise;
        let m = NoiseModel {
            sigma2_12: n.sigma2_12,
            sigma2_13: n.sigma2_13,
            sigma2_23: n.sigma2_23,
            sigma2_ang1: n.sigma2_ang1,
            sigma2_ang2: n.sigma2_ang2,
            sigma2_ang3: n.sigma2_ang3,
            beacons: n.beacons,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn budgets(&self) -> Result<PublicRates, CliError> {
        let b = &self.budgets;
        let r = PublicRates::new(b.r1.0, b.r2.0, b.r3.0);
        r.validate()?;
        Ok(r)
    }

    pub fn mc(&self) -> Result<McConfig, CliError> {
        let m = McConfig {
            n_samples: self.mc.samples,
            seed: self.mc.seed,
            batch_size: self.mc.batch_size,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn sweep(&self) -> Result<(SweepParameter, Vec<f64>), CliError> {
        let p: SweepParameter = self.sweep.parameter.parse()?;
        Ok((p, grid_values(&self.sweep.grid)?))
    }

    pub fn split(&self) -> Result<SplitNoise, CliError> {
        let s = match &self.split {
            SplitSpec::Uniform(v) => SplitNoise::uniform(v.0),
            SplitSpec::PerDirection(map) => {
                let mut s = SplitNoise::silent();
                for (k, v) in map {
                    let d = Direction::ALL
                        .into_iter()
                        .find(|d| d.to_string() == *k)
                        .ok_or_else(|| CliError::Config(format!("unknown split direction {k:?}")))?;
                    s[d] = v.0;
                }
                if map.len() != 6 {
                    return Err(CliError::Config("split needs all six directions 12 13 21 23 31 32".into()));
                }
                s
            }
        };
        s.validate()?;
        Ok(s)
    }

    pub fn axes(&self) -> Result<Axes, CliError> {
        Ok(self.region.axes.as_deref().unwrap_or("R12-R13").parse()?)
    }

    pub fn split_grid(&self) -> Result<SplitGrid, CliError> {
        match &self.region.split_grid {
            None => Ok(SplitGrid::default()),
            Some(g) => Ok(SplitGrid::explicit(grid_values(g)?)?),
        }
    }

    /// Checks every section, whether or not the command reads it.
    pub fn validate(&self) -> Result<(), CliError> {
        self.mobility()?;
        self.noise()?;
        self.budgets()?;
        self.mc()?;
        self.sweep()?;
        self.split()?;
        self.axes()?;
        self.split_grid()?;
        Ok(())
    }

    pub fn refine_samples(&self) -> u64 {
        self.region.refine_samples.unwrap_or(1_000_000)
    }

    pub fn discrete_cap(&self) -> usize {
        DEFAULT_CAP
    }
}

fn grid_values(g: &GridSpec) -> Result<Vec<f64>, CliError> {
    Ok(match g {
        GridSpec::Values(v) => v.iter().map(|x| x.0).collect(),
        GridSpec::Log {
            lo,
            hi,
            count,
            include_inf,
        } => {
            let mut v = log_grid(*lo, *hi, *count)?;
            if *include_inf {
                v.push(f64::INFINITY);
            }
            v
        }
    })
}
