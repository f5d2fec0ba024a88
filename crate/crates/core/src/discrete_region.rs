//! The general inner bound for finite-alphabet sources.
//!
//! Each user `i` observes `X_i` and passes it through two test channels
//! `p(s_ij | x_i)`. The joint law of the nine variables factors as
//! `p(x1, x2, x3) * prod p(s_ij | x_i)`; every coefficient of the region is a
//! conditional mutual information of that joint, in bits.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gaussian_rates::{PublicRates, RateTriple};
use crate::users::{Direction, Pair, User};

/// Default limit on the number of cells of the nine-variable joint.
pub const DEFAULT_CAP: usize = 1_000_000;

const SUM_TOL: f64 = 1e-12;
const MEMBER_TOL: f64 = 1e-12;

fn check_distribution(what: &str, rows: usize, cols: usize, p: &[f64]) -> Result<()> {
    if p.len() != rows * cols {
        return Err(Error::ShapeMismatch {
            what: what.into(),
            expected: rows * cols,
            found: p.len(),
        });
    }
    let bad: Vec<usize> = (0..rows)
        .filter(|r| {
            let row = &p[r * cols..(r + 1) * cols];
            row.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) || libm::fabs(row.iter().sum::<f64>() - 1.0) > SUM_TOL
        })
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::NotStochastic { what: what.into(), rows: bad })
    }
}

/// Joint pmf of `(X1, X2, X3)`, row-major with `x1` slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSource {
    sizes: [usize; 3],
    pmf: Vec<f64>,
}

impl DiscreteSource {
    pub fn new(sizes: [usize; 3], pmf: Vec<f64>) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::config("alphabet sizes must be positive"));
        }
        let n = sizes.iter().product();
        check_distribution("source pmf", 1, n, &pmf)?;
        Ok(DiscreteSource { sizes, pmf })
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.sizes
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, x: [usize; 3]) -> f64 {
        self.pmf[(x[0] * self.sizes[1] + x[1]) * self.sizes[2] + x[2]]
    }
}

/// Row-stochastic matrix `p(out | in)`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    inputs: usize,
    outputs: usize,
    p: Vec<f64>,
}

impl Channel {
    pub fn new(inputs: usize, outputs: usize, p: Vec<f64>) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::config("channel alphabets must be nonempty"));
        }
        check_distribution("channel", inputs, outputs, &p)?;
        Ok(Channel { inputs, outputs, p })
    }

    /// Output does not depend on the input (a single output symbol).
    pub fn constant(inputs: usize) -> Self {
        Channel {
            inputs,
            outputs: 1,
            p: vec![1.0; inputs],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            p[i * n + i] = 1.0;
        }
        Channel { inputs: n, outputs: n, p }
    }

    /// `n`-ary symmetric channel: keeps the symbol with probability `1 - eps`,
    /// otherwise moves to each other symbol with probability `eps / (n - 1)`.
    pub fn symmetric(n: usize, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) || n == 0 || (n == 1 && eps > 0.0) {
            return Err(Error::config("symmetric channel needs eps in [0, 1] and n >= 2"));
        }
        let off = if n > 1 { eps / (n - 1) as f64 } else { 0.0 };
        let mut p = vec![off; n * n];
        for i in 0..n {
            p[i * n + i] = 1.0 - eps;
        }
        Ok(Channel { inputs: n, outputs: n, p })
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if next.inputs != self.outputs {
            return Err(Error::ShapeMismatch {
                what: "channel composition".into(),
                expected: self.outputs,
                found: next.inputs,
            });
        }
        let mut p = vec![0.0; self.inputs * next.outputs];
        for i in 0..self.inputs {
            for k in 0..self.outputs {
                let a = self.p[i * self.outputs + k];
                for o in 0..next.outputs {
                    p[i * next.outputs + o] += a * next.p[k * next.outputs + o];
                }
            }
        }
        Ok(Channel {
            inputs: self.inputs,
            outputs: next.outputs,
            p,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.p[input * self.outputs + output]
    }
}

/// The six test channels, indexed by [`Direction::index`]; the channel for
/// `ij` maps `X_i` to `S_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxiliaryChannels {
    pub channels: [Channel; 6],
}

impl AuxiliaryChannels {
    pub fn new(channels: [Channel; 6]) -> Self {
        AuxiliaryChannels { channels }
    }

    /// Every auxiliary variable constant.
    pub fn constant(src: &DiscreteSource) -> Self {
        let s = src.sizes();
        AuxiliaryChannels {
            channels: core::array::from_fn(|k| Channel::constant(s[dir_at(k).from().index()])),
        }
    }

    pub fn get(&self, d: Direction) -> &Channel {
        &self.channels[d.index()]
    }

    pub fn set(&mut self, d: Direction, c: Channel) {
        self.channels[d.index()] = c;
    }
}

fn dir_at(k: usize) -> Direction {
    Direction::ALL.into_iter().find(|d| d.index() == k).expect("index below 6")
}

/// One of the nine variables of the joint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    S(Direction),
    X(User),
}

impl Var {
    /// Position in the joint: `s12, s13, s21, s23, s31, s32, x1, x2, x3`.
    pub fn index(self) -> usize {
        match self {
            Var::S(d) => d.index(),
            Var::X(u) => 6 + u.index(),
        }
    }
}

fn mask(vars: &[Var]) -> u16 {
    vars.iter().fold(0, |m, v| m | (1 << v.index()))
}

/// `p(s12, s13, s21, s23, s31, s32, x1, x2, x3)`, row-major in that order.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf {
    sizes: [usize; 9],
    p: Vec<f64>,
}

impl JointPmf {
    pub fn build(src: &DiscreteSource, aux: &AuxiliaryChannels, cap: usize) -> Result<Self> {
        let xs = src.sizes();
        let mut sizes = [0; 9];
        for k in 0..6 {
            let d = dir_at(k);
            let c = aux.get(d);
            let parent = xs[d.from().index()];
            if c.inputs() != parent {
                return Err(Error::ShapeMismatch {
                    what: format!("test channel {d} input alphabet"),
                    expected: parent,
                    found: c.inputs(),
                });
            }
            sizes[k] = c.outputs();
        }
        sizes[6..].copy_from_slice(&xs);
        let entries = sizes
            .iter()
            .try_fold(1usize, |a, b| a.checked_mul(*b))
            .unwrap_or(usize::MAX);
        if entries > cap {
            return Err(Error::CapExceeded { entries, cap });
        }
        let mut p = vec![0.0; entries];
        let mut cell = 0;
        // x varies fastest; for each s prefix walk every x triple
        let s_cells = entries / (xs[0] * xs[1] * xs[2]);
        let mut s = [0usize; 6];
        for _ in 0..s_cells {
            for x1 in 0..xs[0] {
                for x2 in 0..xs[1] {
                    for x3 in 0..xs[2] {
                        let x = [x1, x2, x3];
                        let mut v = src.prob(x);
                        for (k, sk) in s.iter().enumerate() {
                            if v == 0.0 {
                                break;
                            }
                            v *= aux.channels[k].prob(x[dir_at(k).from().index()], *sk);
                        }
                        p[cell] = v;
                        cell += 1;
                    }
                }
            }
            for k in (0..6).rev() {
                s[k] += 1;
                if s[k] < sizes[k] {
                    break;
                }
                s[k] = 0;
            }
        }
        Ok(JointPmf { sizes, p })
    }

    pub fn sizes(&self) -> [usize; 9] {
        self.sizes
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Marginal over the variables in `m`, as a flat table.
    fn marginal(&self, m: u16) -> Vec<f64> {
        let mut stride = [0usize; 9];
        let mut n = 1;
        for k in (0..9).rev() {
            if m & (1 << k) != 0 {
                stride[k] = n;
                n *= self.sizes[k];
            }
        }
        let mut out = vec![0.0; n];
        let mut idx = [0usize; 9];
        let mut pos = 0;
        for &v in &self.p {
            out[pos] += v;
            for k in (0..9).rev() {
                idx[k] += 1;
                pos += stride[k];
                if idx[k] < self.sizes[k] {
                    break;
                }
                pos -= stride[k] * idx[k];
                idx[k] = 0;
            }
        }
        out
    }

    /// Entropy in bits of the variables in `vars`.
    pub fn entropy(&self, vars: &[Var]) -> f64 {
        entropy_bits(&self.marginal(mask(vars)))
    }
}

fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|x| **x > 0.0).map(|x| x * libm::log2(*x)).sum::<f64>()
}

/// Entropies of variable subsets, memoized by subset.
pub struct EntropyTable<'a> {
    joint: &'a JointPmf,
    cache: BTreeMap<u16, f64>,
}

impl<'a> EntropyTable<'a> {
    pub fn new(joint: &'a JointPmf) -> Self {
        EntropyTable {
            joint,
            cache: BTreeMap::new(),
        }
    }

    fn h(&mut self, m: u16) -> f64 {
        if m == 0 {
            return 0.0;
        }
        let joint = self.joint;
        *self.cache.entry(m).or_insert_with(|| entropy_bits(&joint.marginal(m)))
    }

    /// `I(A; B | C)` with each argument read as a set of variables.
    pub fn cmi(&mut self, a: &[Var], b: &[Var], c: &[Var]) -> f64 {
        let (a, b, c) = (mask(a), mask(b), mask(c));
        let v = self.h(a | c) + self.h(b | c) - self.h(a | b | c) - self.h(c);
        v.max(0.0)
    }
}

/// `I(A; B | C)` in bits. Clamped at zero against rounding.
pub fn conditional_mi(joint: &JointPmf, a: &[Var], b: &[Var], c: &[Var]) -> f64 {
    EntropyTable::new(joint).cmi(a, b, c)
}

/// Every coefficient of the region for one choice of test channels, in bits.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RegionCoefficients {
    pub r12: f64,
    pub r21: f64,
    pub r13: f64,
    pub r31: f64,
    pub r23: f64,
    pub r32: f64,
    pub i12: f64,
    pub i13: f64,
    pub i23: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c12: f64,
    pub c13: f64,
    pub c23: f64,
    pub c123: f64,
}

impl RegionCoefficients {
    fn fields(&self) -> [f64; 19] {
        [
            self.r12, self.r21, self.r13, self.r31, self.r23, self.r32, self.i12, self.i13, self.i23, self.i1, self.i2,
            self.i3, self.c1, self.c2, self.c3, self.c12, self.c13, self.c23, self.c123,
        ]
    }

    fn from_fields(f: [f64; 19]) -> Self {
        RegionCoefficients {
            r12: f[0],
            r21: f[1],
            r13: f[2],
            r31: f[3],
            r23: f[4],
            r32: f[5],
            i12: f[6],
            i13: f[7],
            i23: f[8],
            i1: f[9],
            i2: f[10],
            i3: f[11],
            c1: f[12],
            c2: f[13],
            c3: f[14],
            c12: f[15],
            c13: f[16],
            c23: f[17],
            c123: f[18],
        }
    }

    pub fn r(&self, d: Direction) -> f64 {
        match d {
            Direction::D12 => self.r12,
            Direction::D21 => self.r21,
            Direction::D13 => self.r13,
            Direction::D31 => self.r31,
            Direction::D23 => self.r23,
            Direction::D32 => self.r32,
        }
    }

    pub fn i_pair(&self, p: Pair) -> f64 {
        match p {
            Pair::P12 => self.i12,
            Pair::P13 => self.i13,
            Pair::P23 => self.i23,
        }
    }

    pub fn i_user(&self, u: User) -> f64 {
        match u {
            User::One => self.i1,
            User::Two => self.i2,
            User::Three => self.i3,
        }
    }

    fn pair_gain(&self, p: Pair) -> f64 {
        self.r(p.forward()) + self.r(p.reverse()) - self.i_pair(p)
    }

    /// Right-hand sides of the rate inequalities, in the order
    /// `R12, R13, R23, R12+R13, R12+R23, R13+R23, R12+R13+R23`.
    pub fn rhs(&self) -> [f64; 7] {
        let [g12, g13, g23] = Pair::ALL.map(|p| self.pair_gain(p));
        [
            g12,
            g13,
            g23,
            g12 + g13 - self.i1,
            g12 + g23 - self.i2,
            g13 + g23 - self.i3,
            g12 + g13 + g23 - self.i1 - self.i2 - self.i3,
        ]
    }

    /// Public-rate requirements, in the order
    /// `R1, R2, R3, R1+R2, R1+R3, R2+R3, R1+R2+R3`.
    pub fn public_lhs(&self) -> [f64; 7] {
        [self.c1, self.c2, self.c3, self.c12, self.c13, self.c23, self.c123]
    }

    /// Time sharing: the weighted average of several coefficient sets.
    /// Weights must be nonnegative and sum to 1.
    pub fn mix(parts: &[(f64, RegionCoefficients)]) -> Result<Self> {
        if parts.is_empty() || parts.iter().any(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::config("mixture weights must be nonnegative and nonempty"));
        }
        if libm::fabs(parts.iter().map(|(w, _)| w).sum::<f64>() - 1.0) > SUM_TOL {
            return Err(Error::config("mixture weights must sum to 1"));
        }
        let mut acc = [0.0; 19];
        for (w, c) in parts {
            for (a, v) in acc.iter_mut().zip(c.fields()) {
                *a += w * v;
            }
        }
        Ok(Self::from_fields(acc))
    }
}

/// Evaluates every coefficient with the default joint-size cap.
pub fn region_coefficients(src: &DiscreteSource, aux: &AuxiliaryChannels) -> Result<RegionCoefficients> {
    region_coefficients_with_cap(src, aux, DEFAULT_CAP)
}

pub fn region_coefficients_with_cap(
    src: &DiscreteSource,
    aux: &AuxiliaryChannels,
    cap: usize,
) -> Result<RegionCoefficients> {
    let joint = JointPmf::build(src, aux, cap)?;
    Ok(coefficients_of(&joint))
}

/// The two informations behind the one-way key term of direction `i -> j`
/// with eavesdropper `m`: `(I(S_ij; X_j | S_jm, S_mj), I(S_ij; X_m, S_im | S_jm, S_mj))`.
pub fn key_term_parts(t: &mut EntropyTable<'_>, d: Direction) -> (f64, f64) {
    let (i, j) = (d.from(), d.to());
    let m = d.pair().eavesdropper();
    let dir = |a, b| Var::S(Direction::new(a, b).expect("distinct users"));
    let own = [Var::S(d)];
    let cond = [dir(j, m), dir(m, j)];
    let gain = t.cmi(&own, &[Var::X(j)], &cond);
    let leak = t.cmi(&own, &[Var::X(m), dir(i, m)], &cond);
    (gain, leak)
}

pub fn coefficients_of(joint: &JointPmf) -> RegionCoefficients {
    use Direction::*;
    let s = Var::S;
    let (x1, x2, x3) = (Var::X(User::One), Var::X(User::Two), Var::X(User::Three));
    let mut t = EntropyTable::new(joint);
    let mut r = |d| {
        let (gain, leak) = key_term_parts(&mut t, d);
        (gain - leak).max(0.0)
    };
    let [r12, r21, r13, r31, r23, r32] = [D12, D21, D13, D31, D23, D32].map(&mut r);

    let i12 = t.cmi(&[s(D12)], &[s(D21)], &[x3, s(D13), s(D23)]);
    let i13 = t.cmi(&[s(D13)], &[s(D31)], &[x2, s(D12), s(D32)]);
    let i23 = t.cmi(&[s(D23)], &[s(D32)], &[x1, s(D21), s(D31)]);
    let i1 = t.cmi(&[s(D21)], &[s(D31)], &[x1]);
    let i2 = t.cmi(&[s(D12)], &[s(D32)], &[x2]);
    let i3 = t.cmi(&[s(D13)], &[s(D23)], &[x3]);

    let a12 = t.cmi(&[s(D12)], &[x1], &[x2, s(D32)]);
    let a13 = t.cmi(&[s(D13)], &[x1], &[x3, s(D23)]);
    let a21 = t.cmi(&[s(D21)], &[x2], &[x1, s(D31)]);
    let a23 = t.cmi(&[s(D23)], &[x2], &[x3, s(D13)]);
    let a31 = t.cmi(&[s(D31)], &[x3], &[x1, s(D21)]);
    let a32 = t.cmi(&[s(D32)], &[x3], &[x2, s(D12)]);
    let b3 = t.cmi(&[s(D13), s(D23)], &[x1, x2], &[x3]);
    let b2 = t.cmi(&[s(D12), s(D32)], &[x1, x3], &[x2]);
    let b1 = t.cmi(&[s(D21), s(D31)], &[x2, x3], &[x1]);

    RegionCoefficients {
        r12,
        r21,
        r13,
        r31,
        r23,
        r32,
        i12,
        i13,
        i23,
        i1,
        i2,
        i3,
        c1: a12 + a13,
        c2: a21 + a23,
        c3: a31 + a32,
        c12: a12 + a21 + b3,
        c13: a13 + a31 + b2,
        c23: a23 + a32 + b1,
        c123: b1 + b2 + b3,
    }
}

/// Slack of every inequality; nonnegative slack means the inequality holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MembershipReport {
    /// `rhs - lhs` for the rate inequalities, in [`RegionCoefficients::rhs`] order.
    pub rate_slack: [f64; 7],
    /// `budget - requirement`, in [`RegionCoefficients::public_lhs`] order.
    pub budget_slack: [f64; 7],
    pub member: bool,
}

/// Checks a rate triple against one coefficient set. Zero rates count as
/// inside (closure of the region). The origin is always a member: constant
/// test channels reach it with no public communication, even when this
/// coefficient set has a negative right-hand side.
pub fn check_membership(coeffs: &RegionCoefficients, rates: &RateTriple, budgets: &PublicRates) -> MembershipReport {
    let RateTriple { r12, r13, r23 } = *rates;
    let lhs = [r12, r13, r23, r12 + r13, r12 + r23, r13 + r23, r12 + r13 + r23];
    let rhs = coeffs.rhs();
    let rate_slack = core::array::from_fn(|k| rhs[k] - lhs[k]);
    let PublicRates { r1, r2, r3 } = *budgets;
    let budget = [r1, r2, r3, r1 + r2, r1 + r3, r2 + r3, r1 + r2 + r3];
    let need = coeffs.public_lhs();
    let budget_slack = core::array::from_fn(|k| if budget[k] == f64::INFINITY { f64::INFINITY } else { budget[k] - need[k] });
    let nonneg = [r12, r13, r23].iter().all(|r| *r >= 0.0);
    let origin = r12 == 0.0 && r13 == 0.0 && r23 == 0.0;
    let member = origin
        || nonneg
            && rate_slack.iter().all(|s| *s >= -MEMBER_TOL)
            && budget_slack.iter().all(|s| *s >= -MEMBER_TOL);
    MembershipReport {
        rate_slack,
        budget_slack,
        member,
    }
}

pub fn membership(coeffs: &RegionCoefficients, rates: &RateTriple, budgets: &PublicRates) -> bool {
    check_membership(coeffs, rates, budgets).member
}

/// Membership under time sharing between several test-channel choices.
pub fn mixture_membership(
    parts: &[(f64, RegionCoefficients)],
    rates: &RateTriple,
    budgets: &PublicRates,
) -> Result<bool> {
    Ok(membership(&RegionCoefficients::mix(parts)?, rates, budgets))
}
