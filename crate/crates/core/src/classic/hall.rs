use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::IntegerMeasure;
use crate::numerics::Rational;

/// One candidate exit pair: stop on the first visit to `u` or `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairWeight {
    pub u: i64,
    pub v: i64,
    pub w: Rational,
}

/// Exit time of `{U, V}` for an independent pair drawn before the walk starts.
///
/// Invariants: `u < 0 ≤ v` or `u = v = 0`, weights positive and summing to one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PairWeight>", into = "Vec<PairWeight>")]
pub struct RandomizedRule {
    pairs: Vec<PairWeight>,
}

impl TryFrom<Vec<PairWeight>> for RandomizedRule {
    type Error = Error;

    fn try_from(pairs: Vec<PairWeight>) -> Result<Self> {
        RandomizedRule::new(pairs)
    }
}

impl From<RandomizedRule> for Vec<PairWeight> {
    fn from(r: RandomizedRule) -> Self {
        r.pairs
    }
}

impl RandomizedRule {
    pub fn new(pairs: Vec<PairWeight>) -> Result<Self> {
        for p in &pairs {
            let straddles = p.u < 0 && p.v >= 0;
            let at_origin = p.u == 0 && p.v == 0;
            if !(straddles || at_origin) {
                return Err(Error::InvalidCertificate(format!(
                    "pair ({}, {}) must satisfy u < 0 <= v",
                    p.u, p.v
                )));
            }
            if !p.w.is_positive() {
                return Err(Error::InvalidCertificate(format!(
                    "pair ({}, {}) has nonpositive weight {}",
                    p.u, p.v, p.w
                )));
            }
        }
        let total: Rational = pairs.iter().map(|p| &p.w).sum();
        if total != Rational::one() {
            return Err(Error::InvalidCertificate(format!(
                "pair weights sum to {total}, not 1"
            )));
        }
        Ok(RandomizedRule { pairs })
    }

    pub fn pairs(&self) -> &[PairWeight] {
        &self.pairs
    }

    /// Draws a pair from a uniform variate in `[0, 1)`.
    pub fn pick(&self, uniform: f64) -> (i64, i64) {
        let mut acc = 0.0;
        for p in &self.pairs {
            acc += p.w.to_f64();
            if uniform < acc {
                return (p.u, p.v);
            }
        }
        let last = self.pairs.last().expect("nonempty");
        (last.u, last.v)
    }

    pub fn bound(&self) -> i64 {
        self.pairs
            .iter()
            .map(|p| p.u.abs().max(p.v))
            .max()
            .unwrap_or(0)
    }

    /// Stopped law by gambler's ruin: from 0, `v` is hit before `u` with
    /// probability `|u| / (v - u)`.
    pub fn stopped_law(&self) -> Result<IntegerMeasure> {
        let mut law: BTreeMap<i64, Rational> = BTreeMap::new();
        for p in &self.pairs {
            if p.v == 0 {
                *law.entry(0).or_default() += &p.w;
                continue;
            }
            let span = Rational::from(p.v - p.u);
            let up = Rational::from(-p.u) / &span;
            let down = Rational::one() - &up;
            *law.entry(p.v).or_default() += &p.w * up;
            *law.entry(p.u).or_default() += &p.w * down;
        }
        IntegerMeasure::from_weights(law)
    }
}

/// Pairs `u < 0 ≤ v` with weight `(v - u) μ(u) μ(v) / m`, `m = Σ_{k>0} k μ(k)`.
pub fn hall_rule(mu: &IntegerMeasure) -> Result<RandomizedRule> {
    mu.require_centered()?;
    if mu == &IntegerMeasure::dirac(0) {
        return Err(Error::Degenerate(
            "δ₀ needs no randomization; stop at time 0".into(),
        ));
    }
    let m = mu.positive_part_mean();
    let mut pairs = Vec::new();
    for (&u, wu) in mu.atoms().range(..0) {
        for (&v, wv) in mu.atoms().range(0..) {
            let w = Rational::from(v - u) * wu * wv / &m;
            pairs.push(PairWeight { u, v, w });
        }
    }
    RandomizedRule::new(pairs)
}
