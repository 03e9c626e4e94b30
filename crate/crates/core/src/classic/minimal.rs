use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::IntegerMeasure;
use crate::numerics::Rational;

/// A probability measure on ℤ listed atom by atom in nonincreasing weight order.
pub trait AtomSource {
    /// The `i`-th atom `(site, weight)`, or `None` past the end of a finite list.
    fn atom(&self, i: usize) -> Option<(i64, Rational)>;

    /// `B_i`: total weight of atoms `0..=i`.
    fn cumulative(&self, i: usize) -> Rational;
}

/// Atoms of a finite measure sorted by decreasing weight, ties by ascending site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedAtoms {
    atoms: Vec<(i64, Rational)>,
    cumulative: Vec<Rational>,
}

impl RankedAtoms {
    pub fn new(mu: &IntegerMeasure) -> Self {
        let mut atoms: Vec<(i64, Rational)> =
            mu.atoms().iter().map(|(&k, w)| (k, w.clone())).collect();
        atoms.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        let cumulative = atoms
            .iter()
            .scan(Rational::zero(), |acc, (_, w)| {
                *acc += w;
                Some(acc.clone())
            })
            .collect();
        RankedAtoms { atoms, cumulative }
    }

    pub fn measure(&self) -> IntegerMeasure {
        IntegerMeasure::new(self.atoms.iter().cloned()).expect("built from a valid measure")
    }
}

impl AtomSource for RankedAtoms {
    fn atom(&self, i: usize) -> Option<(i64, Rational)> {
        self.atoms.get(i).cloned()
    }

    fn cumulative(&self, i: usize) -> Rational {
        self.cumulative
            .get(i)
            .cloned()
            .unwrap_or_else(Rational::one)
    }
}

/// Weight `2^{-(i+1)}` on the site `first + i * step`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometricAtoms {
    pub first: i64,
    pub step: i64,
}

impl AtomSource for GeometricAtoms {
    fn atom(&self, i: usize) -> Option<(i64, Rational)> {
        Some((
            self.first + i as i64 * self.step,
            Rational::pow2(-(i as i64) - 1),
        ))
    }

    fn cumulative(&self, i: usize) -> Rational {
        Rational::one() - Rational::pow2(-(i as i64) - 1)
    }
}

/// Embedding of an arbitrary law on ℤ: the up-steps encode a uniform
/// `U = Σ 2^{-k} 1{Y_k = +1}`, the atom index `N(U)` is read off once the
/// dyadic interval pinning `U` lies inside one bucket `[B_{i-1}, B_i)`, and the
/// walk stops at its first visit to that atom's site from then on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MinimalFile", into = "MinimalFile")]
pub enum MinimalRule {
    Finite(RankedAtoms),
    Geometric(GeometricAtoms),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
enum MinimalFile {
    Measure(IntegerMeasure),
    Geometric(GeometricAtoms),
}

impl TryFrom<MinimalFile> for MinimalRule {
    type Error = Error;

    fn try_from(file: MinimalFile) -> Result<Self> {
        match file {
            MinimalFile::Measure(mu) => Ok(minimal_embed_rule(&mu)),
            MinimalFile::Geometric(g) if g.step != 0 => Ok(MinimalRule::Geometric(g)),
            MinimalFile::Geometric(_) => Err(Error::InvalidCertificate(
                "geometric atoms need a nonzero step".into(),
            )),
        }
    }
}

impl From<MinimalRule> for MinimalFile {
    fn from(rule: MinimalRule) -> Self {
        match rule {
            MinimalRule::Finite(atoms) => MinimalFile::Measure(atoms.measure()),
            MinimalRule::Geometric(g) => MinimalFile::Geometric(g),
        }
    }
}

pub fn minimal_embed_rule(mu: &IntegerMeasure) -> MinimalRule {
    MinimalRule::Finite(RankedAtoms::new(mu))
}

impl MinimalRule {
    fn source(&self) -> &dyn AtomSource {
        match self {
            MinimalRule::Finite(a) => a,
            MinimalRule::Geometric(g) => g,
        }
    }

    pub fn site(&self, i: usize) -> i64 {
        self.source()
            .atom(i)
            .expect("bucket index within the source")
            .0
    }

    /// Bucket index once `[lo, lo + 2^{-bits}]` lies in a single bucket.
    pub fn resolve(&self, lo: &Rational, bits: u32) -> Option<usize> {
        let hi = lo + Rational::pow2(-i64::from(bits));
        let src = self.source();
        let i = match self {
            MinimalRule::Finite(a) => a.cumulative.partition_point(|b| b <= lo),
            MinimalRule::Geometric(_) => (0..).find(|&i| &src.cumulative(i) > lo).expect("lo < 1"),
        };
        (hi <= src.cumulative(i)).then_some(i)
    }

    /// Exact law for finite sources; `None` for unbounded support.
    pub fn target(&self) -> Option<IntegerMeasure> {
        match self {
            MinimalRule::Finite(a) => Some(a.measure()),
            MinimalRule::Geometric(_) => None,
        }
    }
}
