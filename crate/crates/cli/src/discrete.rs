//! Finite-alphabet source and test channels in JSON.
//!
//! ```json
//! {
//!   "alphabets": [2, 2, 2],
//!   "pmf": [0.25, 0.25, 0, 0, 0, 0, 0.25, 0.25],
//!   "channels": { "12": [[1, 0], [0, 1]], "21": [[1, 0], [0, 1]] },
//!   "query": { "rates": [0.9, 0, 0], "budgets": { "r1": "inf", "r2": "inf", "r3": "inf" } }
//! }
//! ```
//!
//! `pmf` is row-major with `x1` slowest. Each channel is a list of rows
//! `p(s | x)`, one per input symbol; directions left out are constant.

use std::collections::BTreeMap;

use pairkey_core::discrete_region::{
    check_membership, region_coefficients_with_cap, AuxiliaryChannels, Channel, DiscreteSource, MembershipReport,
    RegionCoefficients,
};
use pairkey_core::gaussian_rates::RateTriple;
use pairkey_core::{Direction, Error};
use serde::{Deserialize, Serialize};

use crate::config::{BudgetSection, Num};
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteQuery {
    pub rates: [f64; 3],
    #[serde(default)]
    pub budgets: Option<BudgetSection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteSpec {
    pub alphabets: [usize; 3],
    pub pmf: Vec<f64>,
    #[serde(default)]
    pub channels: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default)]
    pub query: Option<DiscreteQuery>,
}

fn direction(key: &str) -> Result<Direction, CliError> {
    Direction::ALL
        .into_iter()
        .find(|d| d.to_string() == key)
        .ok_or_else(|| CliError::Config(format!("unknown channel direction {key:?}")))
}

fn channel(key: &str, rows: &[Vec<f64>]) -> Result<Channel, CliError> {
    let outputs = rows.first().map_or(0, Vec::len);
    if let Some(r) = rows.iter().position(|r| r.len() != outputs) {
        return Err(Error::ShapeMismatch {
            what: format!("channel {key} row {r}"),
            expected: outputs,
            found: rows[r].len(),
        }
        .into());
    }
    Channel::new(rows.len(), outputs, rows.concat()).map_err(|e| match e {
        Error::NotStochastic { rows, .. } => Error::NotStochastic {
            what: format!("channel {key}"),
            rows,
        }
        .into(),
        e => e.into(),
    })
}

impl DiscreteSpec {
    pub fn build(&self) -> Result<(DiscreteSource, AuxiliaryChannels), CliError> {
        let src = DiscreteSource::new(self.alphabets, self.pmf.clone())?;
        let mut aux = AuxiliaryChannels::constant(&src);
        for (k, rows) in &self.channels {
            aux.set(direction(k)?, channel(k, rows)?);
        }
        Ok((src, aux))
    }
}

#[derive(Debug, Serialize)]
pub struct QueryReport {
    pub rates: [f64; 3],
    pub budgets: BudgetSection,
    pub member: bool,
    pub rate_slack: [Num; 7],
    pub budget_slack: [Num; 7],
}

#[derive(Debug, Serialize)]
pub struct DiscreteReport {
    pub r: BTreeMap<String, f64>,
    pub i: BTreeMap<String, f64>,
    pub public: BTreeMap<String, f64>,
    /// Right-hand sides of the rate inequalities.
    pub region: BTreeMap<String, f64>,
    pub query: Option<QueryReport>,
}

const RATE_LINES: [&str; 7] = ["R12", "R13", "R23", "R12+R13", "R12+R23", "R13+R23", "R12+R13+R23"];
const PUBLIC_LINES: [&str; 7] = ["R1", "R2", "R3", "R1+R2", "R1+R3", "R2+R3", "R1+R2+R3"];

pub fn report(spec: &DiscreteSpec, cap: usize) -> Result<DiscreteReport, CliError> {
    let (src, aux) = spec.build()?;
    let c = region_coefficients_with_cap(&src, &aux, cap)?;
    let r = Direction::ALL.iter().map(|d| (format!("r{d}"), c.r(*d))).collect();
    let i = [
        ("I12", c.i12),
        ("I13", c.i13),
        ("I23", c.i23),
        ("I1", c.i1),
        ("I2", c.i2),
        ("I3", c.i3),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let public = PUBLIC_LINES.iter().zip(c.public_lhs()).map(|(k, v)| (k.to_string(), v)).collect();
    let region = RATE_LINES.iter().zip(c.rhs()).map(|(k, v)| (k.to_string(), v)).collect();
    let query = spec.query.as_ref().map(|q| query(&c, q)).transpose()?;
    Ok(DiscreteReport {
        r,
        i,
        public,
        region,
        query,
    })
}

fn query(c: &RegionCoefficients, q: &DiscreteQuery) -> Result<QueryReport, CliError> {
    let budgets = q.budgets.clone().unwrap_or(BudgetSection {
        r1: Num(f64::INFINITY),
        r2: Num(f64::INFINITY),
        r3: Num(f64::INFINITY),
    });
    let b = pairkey_core::gaussian_rates::PublicRates::new(budgets.r1.0, budgets.r2.0, budgets.r3.0);
    b.validate()?;
    let rates = RateTriple::new(q.rates[0], q.rates[1], q.rates[2]);
    rates.validate()?;
    let MembershipReport {
        rate_slack,
        budget_slack,
        member,
    } = check_membership(c, &rates, &b);
    Ok(QueryReport {
        rates: q.rates,
        budgets,
        member,
        rate_slack: rate_slack.map(Num),
        budget_slack: budget_slack.map(Num),
    })
}
