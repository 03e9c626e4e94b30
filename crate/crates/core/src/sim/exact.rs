use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::classic::site_keys;
use crate::engine::{StoppingRule, Tracker};
use crate::error::{Error, Result};
use crate::measures::IntegerMeasure;
use crate::numerics::Rational;

pub const MAX_EXACT_STAGE: usize = 12;

/// Stopped mass by site for paths that stop within `2 · stages` steps, and
/// the mass still running.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExactLaw {
    pub stages: usize,
    #[serde(with = "site_keys")]
    pub law: BTreeMap<i64, Rational>,
    pub residual_mass: Rational,
}

impl ExactLaw {
    /// The stopped law as a probability measure once nothing is left running.
    pub fn measure(&self) -> Option<IntegerMeasure> {
        if self.residual_mass.is_zero() {
            IntegerMeasure::from_weights(self.law.iter().map(|(&k, w)| (k, w.clone()))).ok()
        } else {
            None
        }
    }

    /// `Σ_k |law(k) - μ(k)|`, exact.
    pub fn l1_distance(&self, mu: &IntegerMeasure) -> Rational {
        let sites: std::collections::BTreeSet<i64> =
            mu.support().chain(self.law.keys().copied()).collect();
        sites
            .into_iter()
            .map(|k| (self.law.get(&k).cloned().unwrap_or_default() - mu.weight(k)).abs())
            .sum()
    }
}

/// Exact law of `X_τ` on `{τ ≤ 2 · stages}` by propagating the mass of each
/// distinct tracker state, step by step, with weight `2^{-n}` per path.
pub fn exact_law(rule: &StoppingRule, stages: usize) -> Result<ExactLaw> {
    if stages > MAX_EXACT_STAGE {
        return Err(Error::HorizonTooLarge {
            requested: stages,
            max: MAX_EXACT_STAGE,
        });
    }
    let draws: Vec<(Option<(i64, i64)>, Rational)> = match rule {
        StoppingRule::RandomizedPair(r) => r
            .pairs()
            .iter()
            .map(|p| (Some((p.u, p.v)), p.w.clone()))
            .collect(),
        _ => vec![(None, Rational::one())],
    };
    let mut law: BTreeMap<i64, Rational> = BTreeMap::new();
    let mut residual = Rational::zero();
    let half = Rational::frac(1, 2);
    for (draw, weight) in draws {
        let mut layer: HashMap<Tracker<'_>, Rational> = HashMap::new();
        let start = rule.tracker(draw)?;
        if start.is_stopped() {
            *law.entry(start.position()).or_default() += &weight;
            continue;
        }
        layer.insert(start, weight);
        for _ in 0..2 * stages {
            let mut next: HashMap<Tracker<'_>, Rational> = HashMap::with_capacity(layer.len() * 2);
            for (t, mass) in layer {
                let mass = &mass * &half;
                for up in [false, true] {
                    let mut child = t.clone();
                    child.step(up)?;
                    if child.is_stopped() {
                        *law.entry(child.position()).or_default() += &mass;
                    } else {
                        *next.entry(child).or_default() += &mass;
                    }
                }
            }
            layer = next;
        }
        residual += layer.into_values().sum::<Rational>();
    }
    law.retain(|_, w| !w.is_zero());
    Ok(ExactLaw {
        stages,
        law,
        residual_mass: residual,
    })
}
