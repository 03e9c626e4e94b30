use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Increments `Y_1, …, Y_n ∈ {-1, +1}` of a walk started at 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct WalkPath {
    increments: Vec<i8>,
}

impl TryFrom<Vec<i8>> for WalkPath {
    type Error = Error;

    fn try_from(increments: Vec<i8>) -> Result<Self> {
        WalkPath::new(increments)
    }
}

impl From<WalkPath> for Vec<i8> {
    fn from(p: WalkPath) -> Self {
        p.increments
    }
}

impl WalkPath {
    pub fn new(increments: Vec<i8>) -> Result<Self> {
        if let Some(i) = increments.iter().position(|&y| y != 1 && y != -1) {
            return Err(Error::Parse {
                what: "walk increment (must be ±1)",
                input: increments[i].to_string(),
            });
        }
        Ok(WalkPath { increments })
    }

    pub fn from_ups(ups: impl IntoIterator<Item = bool>) -> Self {
        WalkPath {
            increments: ups.into_iter().map(|u| if u { 1 } else { -1 }).collect(),
        }
    }

    pub fn increments(&self) -> &[i8] {
        &self.increments
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn push(&mut self, up: bool) {
        self.increments.push(if up { 1 } else { -1 });
    }

    pub fn prefix(&self, n: usize) -> WalkPath {
        WalkPath {
            increments: self.increments[..n].to_vec(),
        }
    }

    /// `X_0 = 0, X_1, …, X_n`.
    pub fn positions(&self) -> Vec<i64> {
        let mut x = 0i64;
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(0);
        for &y in &self.increments {
            x += i64::from(y);
            out.push(x);
        }
        out
    }

    pub fn position(&self) -> i64 {
        self.increments.iter().map(|&y| i64::from(y)).sum()
    }

    /// `max_{k ≤ n} X_k`.
    pub fn running_max(&self) -> i64 {
        self.positions().into_iter().max().unwrap_or(0)
    }
}
