use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Rational;

/// Closed box `Π [lo_i, hi_i]`; a point when `lo == hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RBox {
    pub lo: Vec<Rational>,
    pub hi: Vec<Rational>,
}

impl RBox {
    pub fn point(x: Vec<Rational>) -> Self {
        RBox {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn interval(lo: Rational, hi: Rational) -> Self {
        RBox {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    pub fn unit(dim: usize) -> Self {
        RBox {
            lo: vec![Rational::zero(); dim],
            hi: vec![Rational::one(); dim],
        }
    }

    pub fn volume(&self) -> Rational {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| h - l)
            .fold(Rational::one(), |acc, x| acc * x)
    }

    fn contains(&self, x: &[Rational]) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(x)
            .all(|((l, h), v)| l <= v && v <= h)
    }

    fn contains_box(&self, other: &RBox) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    fn image(&self, offset: &[Rational]) -> RBox {
        let quarter = Rational::frac(1, 4);
        let map = |v: &[Rational]| {
            v.iter()
                .zip(offset)
                .map(|(x, q)| x * &quarter + q)
                .collect()
        };
        RBox {
            lo: map(&self.lo),
            hi: map(&self.hi),
        }
    }
}

/// Maps `x ↦ x/4 + q` for each offset `q`, together with a condensation set;
/// the attractor is the fixed point of `A ↦ C ∪ ⋃ f_q(A)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IfsSystem {
    dimension: usize,
    offsets: Vec<Vec<Rational>>,
    condensation: Vec<RBox>,
}

impl IfsSystem {
    pub fn new(
        dimension: usize,
        offsets: Vec<Vec<Rational>>,
        condensation: Vec<RBox>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Degenerate("dimension must be positive".into()));
        }
        let bad_offset = offsets.iter().any(|q| q.len() != dimension);
        let bad_box = condensation
            .iter()
            .any(|b| b.lo.len() != dimension || b.hi.len() != dimension);
        if bad_offset || bad_box {
            return Err(Error::InvalidCertificate(format!(
                "every offset and box must have dimension {dimension}"
            )));
        }
        Ok(IfsSystem {
            dimension,
            offsets,
            condensation,
        })
    }

    /// `f₁(x) = x/4 + 1/4`, `f₂(x) = x/4 + 1/8`, condensation `[0, 1/8] ∪ {1}`.
    pub fn s() -> Self {
        let q = Rational::frac;
        IfsSystem {
            dimension: 1,
            offsets: vec![vec![q(1, 4)], vec![q(1, 8)]],
            condensation: vec![
                RBox::interval(Rational::zero(), q(1, 8)),
                RBox::point(vec![Rational::one()]),
            ],
        }
    }

    /// `g_k(x) = x/4 + k/64` for `k ∈ {0, 2, 4, 6, 8, 16}`, condensation `{1}`.
    pub fn s_tilde() -> Self {
        IfsSystem {
            dimension: 1,
            offsets: [0, 2, 4, 6, 8, 16]
                .iter()
                .map(|&k| vec![Rational::frac(k, 64)])
                .collect(),
            condensation: vec![RBox::point(vec![Rational::one()])],
        }
    }

    /// The three-site system on `(p_{-1}, p_0, p_1)` with caller-supplied
    /// translations and the four base atoms as condensation points.
    pub fn s3_with_translations(offsets: Vec<[Rational; 3]>) -> Self {
        let q = Rational::frac;
        let atoms = [
            [q(0, 1), q(1, 1), q(0, 1)],
            [q(1, 2), q(0, 1), q(1, 2)],
            [q(1, 2), q(1, 4), q(0, 1)],
            [q(0, 1), q(1, 4), q(1, 2)],
        ];
        IfsSystem {
            dimension: 3,
            offsets: offsets.into_iter().map(Vec::from).collect(),
            condensation: atoms
                .into_iter()
                .map(|p| RBox::point(Vec::from(p)))
                .collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn offsets(&self) -> &[Vec<Rational>] {
        &self.offsets
    }

    pub fn condensation(&self) -> &[RBox] {
        &self.condensation
    }
}

/// Sorted, pairwise disjoint closed intervals. JSON: `[["0","1/2"],["1","1"]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalUnion(Vec<(Rational, Rational)>);

impl IntervalUnion {
    pub fn canonical(mut parts: Vec<(Rational, Rational)>) -> Self {
        parts.sort();
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(parts.len());
        for (lo, hi) in parts {
            match out.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => out.push((lo, hi)),
            }
        }
        IntervalUnion(out)
    }

    pub fn intervals(&self) -> &[(Rational, Rational)] {
        &self.0
    }

    pub fn measure(&self) -> Rational {
        self.0.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let i = self.0.partition_point(|(lo, _)| lo <= x);
        i > 0 && x <= &self.0[i - 1].1
    }

    /// Whether every point of `other` lies in `self`.
    pub fn covers(&self, other: &IntervalUnion) -> bool {
        other.0.iter().all(|(lo, hi)| {
            let i = self.0.partition_point(|(l, _)| l <= lo);
            i > 0 && hi <= &self.0[i - 1].1
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, rename_all = "camelCase")]
pub enum IfsApproximation {
    /// One-dimensional systems: exact canonical union and its exact length.
    Intervals {
        depth: usize,
        intervals: IntervalUnion,
        measure: Rational,
    },
    /// Higher dimensions: deduplicated boxes and the sum of their volumes,
    /// an upper bound on the measure.
    #[serde(rename_all = "camelCase")]
    Boxes {
        depth: usize,
        boxes: Vec<RBox>,
        volume_bound: Rational,
    },
}

impl IfsApproximation {
    pub fn intervals(&self) -> Option<&IntervalUnion> {
        match self {
            IfsApproximation::Intervals { intervals, .. } => Some(intervals),
            IfsApproximation::Boxes { .. } => None,
        }
    }

    pub fn measure(&self) -> &Rational {
        match self {
            IfsApproximation::Intervals { measure, .. } => measure,
            IfsApproximation::Boxes { volume_bound, .. } => volume_bound,
        }
    }
}

const MAX_BOXES: usize = 1 << 20;

/// `s^d([0,1]^n)`, the depth-`d` image of the unit cube.
pub fn ifs_approximate(system: &IfsSystem, depth: usize) -> Result<IfsApproximation> {
    if system.dimension == 1 {
        let mut set = IntervalUnion(vec![(Rational::zero(), Rational::one())]);
        for _ in 0..depth {
            let mut parts: Vec<(Rational, Rational)> = system
                .condensation
                .iter()
                .map(|b| (b.lo[0].clone(), b.hi[0].clone()))
                .collect();
            for q in &system.offsets {
                let quarter = Rational::frac(1, 4);
                parts.extend(
                    set.0
                        .iter()
                        .map(|(lo, hi)| (lo * &quarter + &q[0], hi * &quarter + &q[0])),
                );
            }
            set = IntervalUnion::canonical(parts);
        }
        let measure = set.measure();
        return Ok(IfsApproximation::Intervals {
            depth,
            intervals: set,
            measure,
        });
    }
    let mut boxes = vec![RBox::unit(system.dimension)];
    for _ in 0..depth {
        let mut next: Vec<RBox> = system.condensation.clone();
        for q in &system.offsets {
            next.extend(boxes.iter().map(|b| b.image(q)));
        }
        if next.len() > MAX_BOXES {
            return Err(Error::Unsupported(format!(
                "box count {} exceeds {MAX_BOXES}",
                next.len()
            )));
        }
        next.sort();
        next.dedup();
        // drop boxes inside a larger one
        next.sort_by_key(|b| std::cmp::Reverse(b.volume()));
        let mut kept: Vec<RBox> = Vec::with_capacity(next.len());
        for b in next {
            if !kept.iter().any(|k| k.contains_box(&b)) {
                kept.push(b);
            }
        }
        kept.sort();
        boxes = kept;
    }
    let volume_bound = boxes.iter().map(RBox::volume).sum();
    Ok(IfsApproximation::Boxes {
        depth,
        boxes,
        volume_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum IfsVerdict {
    Member,
    NonMember,
    UndecidedAtDepth,
}

/// Membership in the attractor of a one-dimensional system by walking the
/// inverse maps: a point in the condensation set is a member, a point that
/// returns to itself is the fixed point of a composition (hence a member),
/// and a point whose every preimage chain leaves `[0,1]` is not.
pub fn s_membership_via_ifs(system: &IfsSystem, p: &Rational, depth: usize) -> Result<IfsVerdict> {
    if system.dimension != 1 {
        return Err(Error::Unsupported(
            "inverse-map membership needs a one-dimensional system".into(),
        ));
    }
    if p.is_negative() || p > &Rational::one() {
        return Err(Error::OutOfRange {
            what: "point (must lie in [0,1])",
            value: p.to_string(),
        });
    }
    let mut walker = InverseWalk {
        system,
        memo: HashMap::new(),
        stack: Vec::new(),
    };
    Ok(walker.visit(p.clone(), depth))
}

struct InverseWalk<'a> {
    system: &'a IfsSystem,
    /// Settled verdicts; undecided ones remember the depth they were tried with.
    memo: HashMap<Rational, (IfsVerdict, usize)>,
    stack: Vec<Rational>,
}

impl InverseWalk<'_> {
    fn visit(&mut self, x: Rational, depth: usize) -> IfsVerdict {
        if self
            .system
            .condensation
            .iter()
            .any(|b| b.contains(std::slice::from_ref(&x)))
        {
            return IfsVerdict::Member;
        }
        if self.stack.contains(&x) {
            return IfsVerdict::Member;
        }
        match self.memo.get(&x) {
            Some((IfsVerdict::UndecidedAtDepth, d)) if *d >= depth => {
                return IfsVerdict::UndecidedAtDepth
            }
            Some((IfsVerdict::UndecidedAtDepth, _)) | None => {}
            Some((v, _)) => return *v,
        }
        if depth == 0 {
            return IfsVerdict::UndecidedAtDepth;
        }
        let four = Rational::from(4);
        let preimages: Vec<Rational> = self
            .system
            .offsets
            .iter()
            .map(|q| (&x - &q[0]) * &four)
            .filter(|y| !y.is_negative() && y <= &Rational::one())
            .collect();
        self.stack.push(x.clone());
        let mut verdict = IfsVerdict::NonMember;
        for y in preimages {
            match self.visit(y, depth - 1) {
                IfsVerdict::Member => {
                    verdict = IfsVerdict::Member;
                    break;
                }
                IfsVerdict::UndecidedAtDepth => verdict = IfsVerdict::UndecidedAtDepth,
                IfsVerdict::NonMember => {}
            }
        }
        self.stack.pop();
        self.memo.insert(x, (verdict, depth));
        verdict
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn first_image() {
        let IfsApproximation::Intervals {
            intervals, measure, ..
        } = ifs_approximate(&IfsSystem::s(), 1).unwrap()
        else {
            panic!()
        };
        assert_eq!(
            intervals.intervals(),
            &[
                (Rational::zero(), q(1, 2)),
                (Rational::one(), Rational::one())
            ]
        );
        assert_eq!(measure, q(1, 2));
    }

    #[test]
    fn alternate_system_first_image() {
        let a = ifs_approximate(&IfsSystem::s_tilde(), 1).unwrap();
        assert_eq!(a.measure(), &q(1, 2));
    }

    #[test]
    fn nested_and_decreasing() {
        let mut prev = ifs_approximate(&IfsSystem::s(), 0).unwrap();
        for d in 1..=6 {
            let cur = ifs_approximate(&IfsSystem::s(), d).unwrap();
            assert!(cur.measure() <= prev.measure());
            assert!(cur.measure() >= &q(1, 4));
            assert!(prev.intervals().unwrap().covers(cur.intervals().unwrap()));
            assert!(cur
                .intervals()
                .unwrap()
                .covers(&IntervalUnion(vec![(Rational::zero(), q(1, 6))])));
            prev = cur;
        }
    }

    #[test]
    fn inverse_walk_verdicts() {
        let s = IfsSystem::s();
        assert_eq!(
            s_membership_via_ifs(&s, &Rational::one(), 0).unwrap(),
            IfsVerdict::Member
        );
        assert_eq!(
            s_membership_via_ifs(&s, &q(3, 4), 2).unwrap(),
            IfsVerdict::NonMember
        );
        assert_eq!(
            s_membership_via_ifs(&s, &q(1, 6), 4).unwrap(),
            IfsVerdict::Member
        );
        assert_eq!(
            s_membership_via_ifs(&s, &q(5, 16), 4).unwrap(),
            IfsVerdict::Member
        );
        assert_eq!(
            s_membership_via_ifs(&s, &q(1, 2), 0).unwrap(),
            IfsVerdict::UndecidedAtDepth
        );
    }

    #[test]
    fn three_site_boxes() {
        let sys = IfsSystem::s3_with_translations(vec![[q(1, 8), q(0, 1), q(1, 8)]]);
        let a = ifs_approximate(&sys, 2).unwrap();
        let IfsApproximation::Boxes { boxes, .. } = &a else {
            panic!()
        };
        assert!(boxes.contains(&RBox::point(vec![q(0, 1), q(1, 1), q(0, 1)])));
    }
}
