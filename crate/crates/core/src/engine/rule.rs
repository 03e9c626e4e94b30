use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Tracker, WalkPath};
use crate::classic::{ChipSequence, MinimalRule, RandomizedRule, ThresholdTable};
use crate::error::{Error, Result};
use crate::measures::IntegerMeasure;
use crate::ui::StoppingMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Decision {
    Stop,
    Continue,
}

impl Decision {
    pub fn is_stop(self) -> bool {
        self == Decision::Stop
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Stop => "stop",
            Decision::Continue => "continue",
        }
    }
}

/// An executable stopping rule. Decisions depend only on the increments seen
/// so far, plus the pair draw for randomized rules.
///
/// JSON: `{"kind": "exitComposition", "payload": [[-1, 2], [-3, 0]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "camelCase")]
pub enum StoppingRule {
    /// Successive first exits from the listed open intervals.
    ExitComposition(ChipSequence),
    /// Stop once the running maximum reaches the threshold at the current site.
    MaxThreshold(ThresholdTable),
    /// Stop the lexicographically smallest `a^i_n` alive classes at each site and stage.
    PathCountMatrix(StoppingMatrix),
    /// Exit of `{U, V}` for a pair drawn independently of the walk.
    RandomizedPair(RandomizedRule),
    /// Uniform encoded by the up-steps selects the atom; stop at its next visit.
    Minimal(MinimalRule),
}

impl StoppingRule {
    pub fn kind(&self) -> &'static str {
        match self {
            StoppingRule::ExitComposition(_) => "exitComposition",
            StoppingRule::MaxThreshold(_) => "maxThreshold",
            StoppingRule::PathCountMatrix(_) => "pathCountMatrix",
            StoppingRule::RandomizedPair(_) => "randomizedPair",
            StoppingRule::Minimal(_) => "minimal",
        }
    }

    pub fn needs_randomization(&self) -> bool {
        matches!(self, StoppingRule::RandomizedPair(_))
    }

    /// `B` with `|X_n| ≤ B` for every `n` up to and including the stopping time,
    /// when the rule has bounded support.
    pub fn bound(&self) -> Option<i64> {
        match self {
            StoppingRule::ExitComposition(chips) => Some(chips.bound()),
            StoppingRule::MaxThreshold(t) => Some(
                t.lowest_site()
                    .unwrap_or(0)
                    .abs()
                    .max(t.highest_site().unwrap_or(0).abs()),
            ),
            StoppingRule::PathCountMatrix(m) => Some(m.boundary()),
            StoppingRule::RandomizedPair(r) => Some(r.bound()),
            StoppingRule::Minimal(_) => None,
        }
    }

    pub fn tracker(&self, draw: Option<(i64, i64)>) -> Result<Tracker<'_>> {
        Tracker::new(self, draw)
    }

    /// Decision at the end of `path`; errors if the rule stopped earlier.
    pub fn decide(&self, path: &WalkPath) -> Result<Decision> {
        self.decide_with(path, None)
    }

    pub fn decide_with(&self, path: &WalkPath, draw: Option<(i64, i64)>) -> Result<Decision> {
        let mut t = self.tracker(draw)?;
        for &y in path.increments() {
            t.step(y > 0)?;
        }
        Ok(t.decision())
    }

    /// One line `n X stop|continue` per observed time, ending at the stop.
    pub fn transcript(&self, path: &WalkPath, draw: Option<(i64, i64)>) -> Result<String> {
        let mut t = self.tracker(draw)?;
        let mut out = String::new();
        writeln!(out, "0 0 {}", t.decision().as_str()).expect("write to string");
        for &y in path.increments() {
            if t.is_stopped() {
                break;
            }
            let d = t.step(y > 0)?;
            writeln!(out, "{} {} {}", t.time(), t.position(), d.as_str()).expect("write to string");
        }
        Ok(out)
    }
}

/// Rule file: the rule plus an optional target law for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleFile {
    #[serde(flatten)]
    pub rule: StoppingRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<IntegerMeasure>,
}

impl RuleFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule serializes")
    }

    /// The declared target, or the law the rule embeds by construction.
    pub fn target(&self) -> Option<IntegerMeasure> {
        self.target.clone().or_else(|| match &self.rule {
            StoppingRule::RandomizedPair(r) => r.stopped_law().ok(),
            StoppingRule::Minimal(m) => m.target(),
            _ => None,
        })
    }
}

pub(crate) fn malformed(msg: impl Into<String>) -> Error {
    Error::InvalidCertificate(msg.into())
}
