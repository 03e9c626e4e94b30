use serde::{Deserialize, Serialize};

use super::IntegerMeasure;
use crate::error::{Error, Result};
use crate::numerics::Rational;

/// The potential `u(x) = -Σ |x - n| μ({n})` of an integer-supported measure.
///
/// Stored by its values at the consecutive integer sites `lo..=hi`; it is
/// linear between integers and continues with slope `+1` to the left of
/// `lo` and `-1` to the right of `hi`, so `u(x) = -|x - mean|` there.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PotentialFunction {
    lo: i64,
    values: Vec<Rational>,
}

impl PotentialFunction {
    /// Rejects values that are not concave or whose two asymptotes disagree.
    pub fn from_values(lo: i64, values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidPotential("no breakpoints".into()));
        }
        let hi = lo + values.len() as i64 - 1;
        // asymptotes u(x) = x - m on the left, m - x on the right
        if &values[0] + &values[values.len() - 1] != Rational::from(lo - hi) {
            return Err(Error::InvalidPotential(format!(
                "asymptotes are inconsistent: u({lo}) + u({hi}) must equal {}",
                lo - hi
            )));
        }
        let u = PotentialFunction { lo, values };
        let slopes = u.slopes();
        if slopes.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidPotential(
                "slopes must be nonincreasing (concavity)".into(),
            ));
        }
        Ok(u)
    }

    /// `u(x) = -|x|`, the potential of the walk at time zero, on `lo..=hi`.
    pub fn initial(lo: i64, hi: i64) -> Self {
        let lo = lo.min(0);
        let hi = hi.max(0);
        PotentialFunction {
            lo,
            values: (lo..=hi).map(|x| Rational::from(-x.abs())).collect(),
        }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    /// `(site, value)` pairs over the stored window.
    pub fn breakpoints(&self) -> impl Iterator<Item = (i64, &Rational)> {
        (self.lo..).zip(self.values.iter())
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn mean(&self) -> Rational {
        Rational::from(self.lo) - &self.values[0]
    }

    pub fn eval(&self, x: i64) -> Rational {
        if x < self.lo {
            &self.values[0] + Rational::from(x - self.lo)
        } else if x > self.hi() {
            &self.values[self.values.len() - 1] - Rational::from(x - self.hi())
        } else {
            self.values[(x - self.lo) as usize].clone()
        }
    }

    /// Slopes including the asymptotic `+1` and `-1`: entry `j` is the
    /// slope on `(lo + j - 1, lo + j)`.
    pub fn slopes(&self) -> Vec<Rational> {
        let mut s = Vec::with_capacity(self.values.len() + 1);
        s.push(Rational::one());
        s.extend(self.values.windows(2).map(|w| &w[1] - &w[0]));
        s.push(-Rational::one());
        s
    }

    /// Values on `lo..=hi`, extending with the asymptotes where needed.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<Rational> {
        (lo..=hi).map(|x| self.eval(x)).collect()
    }

    /// Equality as functions on the whole line, regardless of stored window.
    pub fn same_function(&self, other: &PotentialFunction) -> bool {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        self.mean() == other.mean() && (lo..=hi).all(|x| self.eval(x) == other.eval(x))
    }

    /// Pointwise `self ≥ other` on the whole line.
    pub fn dominates(&self, other: &PotentialFunction) -> bool {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        (lo..=hi).all(|x| self.eval(x) >= other.eval(x)) && self.mean() == other.mean()
    }

    /// Replace `u` on `[a, b]` by its chord; the potential of the law after
    /// adding a first exit from `(a, b)`.
    pub fn chip(&self, a: i64, b: i64) -> PotentialFunction {
        assert!(a < b, "chip interval must satisfy a < b");
        let lo = self.lo.min(a);
        let hi = self.hi().max(b);
        let mut values = self.window(lo, hi);
        chord_in_place(&mut values, (a - lo) as usize, (b - lo) as usize);
        PotentialFunction { lo, values }.trimmed()
    }

    /// Drop leading/trailing sites where the function already follows its asymptote.
    pub fn trimmed(mut self) -> Self {
        let m = self.mean();
        while self.values.len() > 1
            && self.values[1] == Rational::from(self.lo + 1) - &m
            && self.values[0] == Rational::from(self.lo) - &m
        {
            self.values.remove(0);
            self.lo += 1;
        }
        while self.values.len() > 1 {
            let n = self.values.len();
            let hi = self.hi();
            if self.values[n - 2] == &m - Rational::from(hi - 1)
                && self.values[n - 1] == &m - Rational::from(hi)
            {
                self.values.pop();
            } else {
                break;
            }
        }
        self
    }
}

/// Overwrite `values[i..=j]` by the chord between the endpoint values.
pub(crate) fn chord_in_place(values: &mut [Rational], i: usize, j: usize) {
    let len = Rational::from((j - i) as i64);
    let slope = (&values[j] - &values[i]) / len;
    let base = values[i].clone();
    for (step, v) in values[i + 1..j].iter_mut().enumerate() {
        *v = &base + &slope * Rational::from(step as i64 + 1);
    }
}

/// Exact potential of `μ` on its support hull.
pub fn potential(mu: &IntegerMeasure) -> PotentialFunction {
    let lo = mu.min_site();
    let hi = mu.max_site();
    let values = (lo..=hi)
        .map(|x| {
            -mu.atoms()
                .iter()
                .map(|(&n, w)| Rational::from((x - n).abs()) * w)
                .sum::<Rational>()
        })
        .collect();
    PotentialFunction { lo, values }
}

/// The unique measure with the given potential: the weight at `k` is half
/// the drop in slope across `k`.
pub fn measure_from_potential(u: &PotentialFunction) -> Result<IntegerMeasure> {
    let slopes = u.slopes();
    let half = Rational::frac(1, 2);
    let mut atoms = Vec::new();
    for (j, w) in slopes.windows(2).enumerate() {
        let weight = (&w[0] - &w[1]) * &half;
        if weight.is_negative() {
            return Err(Error::InvalidPotential(format!(
                "slope increases at site {}",
                u.lo + j as i64
            )));
        }
        if !weight.is_zero() {
            atoms.push((u.lo + j as i64, weight));
        }
    }
    IntegerMeasure::new(atoms)
}
