use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Rational;

/// A finitely supported probability measure on the integers with exact
/// rational weights. Weights are strictly positive and sum to one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MeasureFile", into = "MeasureFile")]
pub struct IntegerMeasure {
    atoms: BTreeMap<i64, Rational>,
}

/// On-disk form: `{"atoms": {"-2": "11/32", "0": "5/16", "2": "11/32"}}`.
#[derive(Serialize, Deserialize)]
struct MeasureFile {
    atoms: BTreeMap<String, Rational>,
}

impl TryFrom<MeasureFile> for IntegerMeasure {
    type Error = Error;

    fn try_from(file: MeasureFile) -> Result<Self> {
        let mut atoms = Vec::with_capacity(file.atoms.len());
        for (site, w) in file.atoms {
            let k: i64 = site.trim().parse().map_err(|_| Error::Parse {
                what: "measure site",
                input: site.clone(),
            })?;
            atoms.push((k, w));
        }
        IntegerMeasure::new(atoms)
    }
}

impl From<IntegerMeasure> for MeasureFile {
    fn from(m: IntegerMeasure) -> Self {
        MeasureFile {
            atoms: m
                .atoms
                .into_iter()
                .map(|(k, w)| (k.to_string(), w))
                .collect(),
        }
    }
}

impl IntegerMeasure {
    pub fn new(atoms: impl IntoIterator<Item = (i64, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, w) in atoms {
            if !w.is_positive() {
                return Err(Error::InvalidMeasure(format!(
                    "weight at site {k} must be positive, got {w}"
                )));
            }
            if map.insert(k, w).is_some() {
                return Err(Error::InvalidMeasure(format!(
                    "site {k} listed more than once"
                )));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidMeasure("support is empty".into()));
        }
        let total: Rational = map.values().sum();
        if total != Rational::one() {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(IntegerMeasure { atoms: map })
    }

    /// Builds a measure from atoms that may contain zero weights, dropping them.
    pub fn from_weights(atoms: impl IntoIterator<Item = (i64, Rational)>) -> Result<Self> {
        let mut merged: BTreeMap<i64, Rational> = BTreeMap::new();
        for (k, w) in atoms {
            if w.is_negative() {
                return Err(Error::InvalidMeasure(format!(
                    "weight at site {k} is negative ({w})"
                )));
            }
            *merged.entry(k).or_default() += w;
        }
        IntegerMeasure::new(merged.into_iter().filter(|(_, w)| !w.is_zero()))
    }

    pub fn dirac(k: i64) -> Self {
        IntegerMeasure {
            atoms: BTreeMap::from([(k, Rational::one())]),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure serializes")
    }

    pub fn atoms(&self) -> &BTreeMap<i64, Rational> {
        &self.atoms
    }

    pub fn weight(&self, k: i64) -> Rational {
        self.atoms.get(&k).cloned().unwrap_or_default()
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.atoms.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min_site(&self) -> i64 {
        *self.atoms.keys().next().expect("nonempty")
    }

    pub fn max_site(&self) -> i64 {
        *self.atoms.keys().next_back().expect("nonempty")
    }

    /// Largest `|k|` over the support.
    pub fn radius(&self) -> i64 {
        self.min_site().abs().max(self.max_site().abs())
    }

    pub fn mean(&self) -> Rational {
        self.atoms.iter().map(|(&k, w)| Rational::from(k) * w).sum()
    }

    pub fn is_centered(&self) -> bool {
        self.mean().is_zero()
    }

    pub fn require_centered(&self) -> Result<()> {
        let mean = self.mean();
        if mean.is_zero() {
            Ok(())
        } else {
            Err(Error::NotCentered { mean })
        }
    }

    /// `μ([k, ∞))`.
    pub fn tail(&self, k: i64) -> Rational {
        self.atoms.range(k..).map(|(_, w)| w).sum()
    }

    /// `Σ_{y ≥ k} y μ({y})`.
    pub fn tail_first_moment(&self, k: i64) -> Rational {
        self.atoms
            .range(k..)
            .map(|(&y, w)| Rational::from(y) * w)
            .sum()
    }

    /// `Σ_{k ≥ 0} k μ({k})`.
    pub fn positive_part_mean(&self) -> Rational {
        self.tail_first_moment(0)
    }

    /// Total variation distance to another measure (exact).
    pub fn total_variation(&self, other: &IntegerMeasure) -> Rational {
        let sites: std::collections::BTreeSet<i64> =
            self.support().chain(other.support()).collect();
        let sum: Rational = sites
            .into_iter()
            .map(|k| (self.weight(k) - other.weight(k)).abs())
            .sum();
        sum * Rational::frac(1, 2)
    }
}
