use std::hash::{Hash, Hasher};

use num_bigint::BigUint;
use num_traits::Zero;

use super::{Decision, StoppingRule};
use crate::classic::MinimalRule;
use crate::error::{Error, Result};
use crate::numerics::Rational;
use crate::ui::StoppingMatrix;

/// Per-path progress of a rule. Starts at `X_0 = 0` and is fed one increment
/// at a time until it stops.
#[derive(Clone, Debug)]
pub struct Tracker<'r> {
    rule: &'r StoppingRule,
    time: usize,
    pos: i64,
    max: i64,
    stopped: bool,
    state: State,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum State {
    Exit { next: usize },
    Threshold,
    Matrix(MatrixTrack),
    Pair { u: i64, v: i64 },
    Minimal(MinimalTrack),
}

/// `smaller[s]`: surviving classes at site `s` that precede this path's
/// prefix in lexicographic order (`-1 < +1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct MatrixTrack {
    bound: i64,
    smaller: Vec<BigUint>,
    rank: BigUint,
}

/// Dyadic interval `[lo, lo + 2^{-bits}]` pinning `U`, and the selected site once known.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct MinimalTrack {
    lo: Rational,
    bits: u32,
    target: Option<i64>,
}

/// Trackers are equal when they follow the same rule object and every future
/// decision coincides. The running maximum only counts for threshold rules.
impl PartialEq for Tracker<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.rule, other.rule)
            && self.key() == other.key()
            && self.state == other.state
    }
}

impl Eq for Tracker<'_> {}

impl Hash for Tracker<'_> {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.key().hash(h);
        self.state.hash(h);
    }
}

impl<'r> Tracker<'r> {
    pub fn new(rule: &'r StoppingRule, draw: Option<(i64, i64)>) -> Result<Self> {
        let state = match rule {
            StoppingRule::ExitComposition(_) => State::Exit { next: 0 },
            StoppingRule::MaxThreshold(_) => State::Threshold,
            StoppingRule::PathCountMatrix(m) => {
                let bound = m.boundary();
                State::Matrix(MatrixTrack {
                    bound,
                    smaller: vec![BigUint::zero(); 2 * bound as usize + 1],
                    rank: BigUint::zero(),
                })
            }
            StoppingRule::RandomizedPair(r) => {
                let (u, v) = draw.ok_or(Error::MissingRandomization)?;
                if !r.pairs().iter().any(|p| p.u == u && p.v == v) {
                    return Err(Error::InvalidCertificate(format!(
                        "pair ({u}, {v}) is not in the rule"
                    )));
                }
                State::Pair { u, v }
            }
            StoppingRule::Minimal(_) => State::Minimal(MinimalTrack {
                lo: Rational::zero(),
                bits: 0,
                target: None,
            }),
        };
        let mut t = Tracker {
            rule,
            time: 0,
            pos: 0,
            max: 0,
            stopped: false,
            state,
        };
        t.stopped = t.evaluate(None);
        Ok(t)
    }

    fn key(&self) -> (usize, i64, i64, bool) {
        let max = if matches!(self.state, State::Threshold) {
            self.max
        } else {
            0
        };
        (self.time, self.pos, max, self.stopped)
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn position(&self) -> i64 {
        self.pos
    }

    pub fn running_max(&self) -> i64 {
        self.max
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    pub fn decision(&self) -> Decision {
        if self.stopped {
            Decision::Stop
        } else {
            Decision::Continue
        }
    }

    /// Rank of the current prefix among the classes arriving at its site and
    /// time, for matrix rules.
    pub fn rank(&self) -> Option<&BigUint> {
        match &self.state {
            State::Matrix(m) => Some(&m.rank),
            _ => None,
        }
    }

    /// Observes one increment.
    pub fn step(&mut self, up: bool) -> Result<Decision> {
        if self.stopped {
            return Err(Error::AlreadyStopped { time: self.time });
        }
        let from = self.pos;
        self.time += 1;
        self.pos += if up { 1 } else { -1 };
        self.max = self.max.max(self.pos);
        self.stopped = self.evaluate(Some((from, up)));
        Ok(self.decision())
    }

    /// Whether to stop at the current `(time, pos)`; `moved` is the step just taken.
    fn evaluate(&mut self, moved: Option<(i64, bool)>) -> bool {
        let (time, pos, max) = (self.time, self.pos, self.max);
        match (&mut self.state, self.rule) {
            (State::Exit { next }, StoppingRule::ExitComposition(chips)) => {
                let steps = chips.steps();
                while *next < steps.len() && !(steps[*next].a < pos && pos < steps[*next].b) {
                    *next += 1;
                }
                *next == steps.len()
            }
            (State::Threshold, StoppingRule::MaxThreshold(table)) => max >= table.level(pos),
            (State::Matrix(track), StoppingRule::PathCountMatrix(m)) => {
                track.advance(m, time, pos, moved)
            }
            (State::Pair { u, v }, StoppingRule::RandomizedPair(_)) => pos == *u || pos == *v,
            (State::Minimal(track), StoppingRule::Minimal(rule)) => {
                track.advance(rule, pos, moved.map(|(_, up)| up))
            }
            _ => unreachable!("tracker state matches its rule"),
        }
    }
}

impl MatrixTrack {
    fn idx(&self, s: i64) -> usize {
        (s + self.bound) as usize
    }

    fn stops_at(&self, m: &StoppingMatrix, s: i64, time: usize, arrivals: &BigUint) -> BigUint {
        if s.abs() == self.bound {
            arrivals.clone()
        } else {
            m.entry_at_time(s, time)
        }
    }

    fn advance(
        &mut self,
        m: &StoppingMatrix,
        time: usize,
        pos: i64,
        moved: Option<(i64, bool)>,
    ) -> bool {
        let b = self.bound;
        let arrivals: Vec<BigUint> = match moved {
            None => vec![BigUint::zero(); self.smaller.len()],
            Some((from, up)) => {
                let mut arr: Vec<BigUint> = (-b..=b)
                    .map(|s| {
                        let left = if s > -b {
                            self.smaller[self.idx(s - 1)].clone()
                        } else {
                            BigUint::zero()
                        };
                        let right = if s < b {
                            self.smaller[self.idx(s + 1)].clone()
                        } else {
                            BigUint::zero()
                        };
                        left + right
                    })
                    .collect();
                // this prefix extended by -1 precedes the observed +1 extension
                if up {
                    let i = self.idx(from - 1);
                    arr[i] += 1u8;
                }
                arr
            }
        };
        for s in -b..=b {
            let i = self.idx(s);
            let a = self.stops_at(m, s, time, &arrivals[i]);
            self.smaller[i] = if a >= arrivals[i] {
                BigUint::zero()
            } else {
                &arrivals[i] - a
            };
        }
        let here = self.idx(pos);
        self.rank = arrivals[here].clone();
        pos.abs() == b || self.rank < m.entry_at_time(pos, time)
    }
}

impl MinimalTrack {
    fn advance(&mut self, rule: &MinimalRule, pos: i64, up: Option<bool>) -> bool {
        if self.target.is_none() {
            if let Some(up) = up {
                self.bits += 1;
                if up {
                    self.lo += Rational::pow2(-i64::from(self.bits));
                }
            }
            self.target = rule.resolve(&self.lo, self.bits).map(|i| rule.site(i));
        }
        self.target == Some(pos)
    }
}
