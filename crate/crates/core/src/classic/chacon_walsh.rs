use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{chord_in_place, potential, IntegerMeasure, PotentialFunction};
use crate::numerics::Rational;

/// First exit from the open interval `(a, b)`, started where the previous exit left off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct ChipStep {
    pub a: i64,
    pub b: i64,
}

impl From<[i64; 2]> for ChipStep {
    fn from([a, b]: [i64; 2]) -> Self {
        ChipStep { a, b }
    }
}

impl From<ChipStep> for [i64; 2] {
    fn from(s: ChipStep) -> Self {
        [s.a, s.b]
    }
}

impl fmt::Display for ChipStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// Composition of exit times `τ_k = inf{n ≥ τ_{k-1} : X_n ∉ (a_k, b_k)}`.
///
/// JSON form: `[[-1, 2], [-3, 0]]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChipSequence(pub Vec<ChipStep>);

impl ChipSequence {
    pub fn new(steps: Vec<ChipStep>) -> Result<Self> {
        if let Some(s) = steps.iter().find(|s| s.a >= s.b) {
            return Err(Error::InvalidCertificate(format!("chip {s} needs a < b")));
        }
        Ok(ChipSequence(steps))
    }

    pub fn steps(&self) -> &[ChipStep] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Potential of the stopped law, starting from `-|x|`.
    pub fn potential(&self) -> PotentialFunction {
        self.0
            .iter()
            .fold(PotentialFunction::initial(0, 0), |u, s| chip_apply(&u, *s))
    }

    /// Largest `|x|` the walk can reach before the final exit.
    pub fn bound(&self) -> i64 {
        self.0
            .iter()
            .map(|s| s.a.abs().max(s.b.abs()))
            .max()
            .unwrap_or(0)
    }
}

pub fn chip_apply(u: &PotentialFunction, step: ChipStep) -> PotentialFunction {
    u.chip(step.a, step.b)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum ChwVerdict {
    Member {
        chips: ChipSequence,
    },
    /// No chip sequence of length at most `depth` reaches `u_μ`, even with a
    /// tangent completion. `exhausted` means no live state remained at all,
    /// which rules out every depth.
    #[serde(rename_all = "camelCase")]
    NonMemberUpToDepth {
        depth: usize,
        exhausted: bool,
        states_explored: usize,
    },
    #[serde(rename_all = "camelCase")]
    Unknown {
        depth_reached: usize,
        states_explored: usize,
    },
}

impl ChwVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, ChwVerdict::Member { .. })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ChwSearchOptions {
    pub max_depth: usize,
    /// Bound on distinct states kept in memory; exceeding it yields `Unknown`.
    pub max_states: usize,
}

impl ChwSearchOptions {
    pub fn depth(max_depth: usize) -> Self {
        ChwSearchOptions {
            max_depth,
            max_states: 2_000_000,
        }
    }
}

/// Potential values on the window `lo..=hi` together with the target.
struct Frame {
    lo: i64,
    target: Vec<Rational>,
    /// Indices of the target's kinks (support sites), ascending.
    kinks: Vec<usize>,
}

impl Frame {
    fn site(&self, i: usize) -> i64 {
        self.lo + i as i64
    }

    /// Applies the chip on indices `i < j` if it changes the state and keeps it
    /// above the target.
    fn chip(&self, state: &[Rational], i: usize, j: usize) -> Option<Vec<Rational>> {
        let len = Rational::from((j - i) as i64);
        let slope = (&state[j] - &state[i]) / len;
        let mut changed = false;
        for k in i + 1..j {
            let v = &state[i] + &slope * Rational::from((k - i) as i64);
            if v < self.target[k] {
                return None;
            }
            if v != state[k] {
                changed = true;
            }
        }
        if !changed {
            return None;
        }
        let mut next = state.to_vec();
        chord_in_place(&mut next, i, j);
        Some(next)
    }

    /// Tangent chips along each linear piece of the target, left to right.
    /// Each piece's line meets the current state at integer sites or the
    /// completion fails.
    fn tangent_completion(&self, state: &[Rational]) -> Option<Vec<ChipStep>> {
        let mut cur = state.to_vec();
        let mut chips = Vec::new();
        for piece in self.kinks.windows(2) {
            let (s, t) = (piece[0], piece[1]);
            if (s..=t).all(|k| cur[k] == self.target[k]) {
                continue;
            }
            let slope = (&self.target[t] - &self.target[s]) / Rational::from((t - s) as i64);
            let line = |k: usize| {
                &self.target[s] + &slope * (Rational::from(k as i64) - Rational::from(s as i64))
            };
            let mut i = s;
            while cur[i] > line(i) {
                if i == 0 {
                    return None;
                }
                i -= 1;
            }
            let mut j = t;
            while cur[j] > line(j) {
                if j + 1 == cur.len() {
                    return None;
                }
                j += 1;
            }
            if cur[i] != line(i) || cur[j] != line(j) {
                return None;
            }
            chord_in_place(&mut cur, i, j);
            chips.push(ChipStep {
                a: self.site(i),
                b: self.site(j),
            });
        }
        (cur == self.target).then_some(chips)
    }
}

/// Breadth-first search over potentials reachable from `-|x|` by chips with
/// integer endpoints in the support hull, pruning states that dip below
/// `u_μ` and deduplicating on the exact state.
pub fn chw_search(mu: &IntegerMeasure, options: ChwSearchOptions) -> Result<ChwVerdict> {
    mu.require_centered()?;
    let target_fn = potential(mu);
    let lo = mu.min_site();
    let hi = mu.max_site();
    let frame = Frame {
        lo,
        target: target_fn.window(lo, hi),
        kinks: mu.support().map(|k| (k - lo) as usize).collect(),
    };
    let start = PotentialFunction::initial(0, 0).window(lo, hi);
    let width = frame.target.len();

    struct Node {
        state: Vec<Rational>,
        parent: Option<usize>,
        chip: Option<ChipStep>,
    }
    let mut arena = vec![Node {
        state: start.clone(),
        parent: None,
        chip: None,
    }];
    let mut seen: HashSet<Vec<Rational>> = HashSet::from([start]);
    let mut frontier: VecDeque<usize> = VecDeque::from([0]);

    let witness = |arena: &[Node], mut idx: usize, tail: Vec<ChipStep>| {
        let mut chips = Vec::new();
        while let Some(c) = arena[idx].chip {
            chips.push(c);
            idx = arena[idx].parent.expect("chipped node has a parent");
        }
        chips.reverse();
        chips.extend(tail);
        ChipSequence(chips)
    };

    // shortest witness so far; a state at depth d cannot beat length d
    let mut best: Option<ChipSequence> = None;
    for depth in 0..=options.max_depth {
        for &idx in &frontier {
            if let Some(tail) = frame.tangent_completion(&arena[idx].state) {
                let chips = witness(&arena, idx, tail);
                debug_assert!(chips.potential().same_function(&target_fn));
                if best.as_ref().is_none_or(|b| chips.len() < b.len()) {
                    best = Some(chips);
                }
            }
        }
        if let Some(chips) = best.take_if(|b| b.len() <= depth + 1) {
            return Ok(ChwVerdict::Member { chips });
        }
        if depth == options.max_depth {
            break;
        }
        let mut next = VecDeque::new();
        for &idx in &frontier {
            for i in 0..width {
                for j in i + 2..width {
                    let Some(state) = frame.chip(&arena[idx].state, i, j) else {
                        continue;
                    };
                    if !seen.insert(state.clone()) {
                        continue;
                    }
                    if seen.len() > options.max_states {
                        if let Some(chips) = best {
                            return Ok(ChwVerdict::Member { chips });
                        }
                        return Ok(ChwVerdict::Unknown {
                            depth_reached: depth,
                            states_explored: seen.len(),
                        });
                    }
                    arena.push(Node {
                        state,
                        parent: Some(idx),
                        chip: Some(ChipStep {
                            a: frame.site(i),
                            b: frame.site(j),
                        }),
                    });
                    next.push_back(arena.len() - 1);
                }
            }
        }
        if next.is_empty() {
            if let Some(chips) = best {
                return Ok(ChwVerdict::Member { chips });
            }
            return Ok(ChwVerdict::NonMemberUpToDepth {
                depth: options.max_depth,
                exhausted: true,
                states_explored: seen.len(),
            });
        }
        frontier = next;
    }
    if let Some(chips) = best {
        return Ok(ChwVerdict::Member { chips });
    }
    Ok(ChwVerdict::NonMemberUpToDepth {
        depth: options.max_depth,
        exhausted: false,
        states_explored: seen.len(),
    })
}
