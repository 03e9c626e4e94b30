use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measures::{barycenter, IntegerMeasure};
use crate::numerics::Rational;

/// Integer barycenter values `k ↦ Ψ(k)` on the support hull; the rule stops
/// the first time the running maximum reaches `Ψ(X_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThresholdTable {
    #[serde(with = "site_keys")]
    thresholds: BTreeMap<i64, i64>,
}

impl ThresholdTable {
    pub fn new(thresholds: BTreeMap<i64, i64>) -> Self {
        ThresholdTable { thresholds }
    }

    pub fn entries(&self) -> &BTreeMap<i64, i64> {
        &self.thresholds
    }

    /// `Ψ(x)`: the tabulated value, `Ψ(lo)` below the table and `x` above it.
    pub fn level(&self, x: i64) -> i64 {
        match self.thresholds.get(&x) {
            Some(&v) => v,
            None => match self.thresholds.first_key_value() {
                Some((&lo, &v)) if x < lo => v,
                _ => x,
            },
        }
    }

    pub fn lowest_site(&self) -> Option<i64> {
        self.thresholds.keys().next().copied()
    }

    pub fn highest_site(&self) -> Option<i64> {
        self.thresholds.keys().next_back().copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum AzemaYorVerdict {
    Member { thresholds: ThresholdTable },
    NonMember { site: i64, barycenter: Rational },
}

impl AzemaYorVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, AzemaYorVerdict::Member { .. })
    }
}

/// The maximum-threshold rule embeds `μ` exactly when the barycenter takes
/// nonnegative integer values at every support site.
pub fn azema_yor_check(mu: &IntegerMeasure) -> Result<AzemaYorVerdict> {
    let psi = barycenter(mu)?;
    for site in mu.support() {
        let value = psi.eval(site);
        if !value.is_integer() || value.is_negative() {
            return Ok(AzemaYorVerdict::NonMember {
                site,
                barycenter: value,
            });
        }
    }
    let thresholds = psi
        .steps()
        .map(|(k, v)| (k, v.to_i64().expect("integral at every hull site")))
        .collect();
    Ok(AzemaYorVerdict::Member {
        thresholds: ThresholdTable::new(thresholds),
    })
}

pub(crate) mod site_keys {
    use std::collections::BTreeMap;

    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    /// Keys as strings, emitted in numeric order.
    pub fn serialize<S: Serializer, V: Serialize>(
        map: &BTreeMap<i64, V>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(map.len()))?;
        for (k, v) in map {
            m.serialize_entry(&k.to_string(), v)?;
        }
        m.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>, V: Deserialize<'de>>(
        d: D,
    ) -> Result<BTreeMap<i64, V>, D::Error> {
        let raw: BTreeMap<String, V> = BTreeMap::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| {
                k.trim()
                    .parse::<i64>()
                    .map(|k| (k, v))
                    .map_err(serde::de::Error::custom)
            })
            .collect()
    }
}
