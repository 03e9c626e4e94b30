use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Rational;
use crate::error::{Error, Result};

/// Eventually periodic base-4 expansion `a0.a1a2a3…`.
///
/// Digit `a0` is the integer part; fractional digits are `preperiod`
/// followed by `period` repeated forever (an empty period means the
/// expansion terminates). The canonical form is the terminating one where
/// two expansions exist, so `period` is never `[3]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Base4Expansion {
    #[serde(default, skip_serializing_if = "is_zero")]
    pub integer: u64,
    pub preperiod: Vec<u8>,
    pub period: Vec<u8>,
}

fn is_zero(n: &u64) -> bool {
    *n == 0
}

/// Value of `Σ 2^-i a_i`. Digit-bounded expansions always give a finite
/// value; the infinite marker exists for callers summing unbounded digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HalfWeight {
    Finite(Rational),
    Infinite,
}

impl HalfWeight {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            HalfWeight::Finite(r) => Some(r),
            HalfWeight::Infinite => None,
        }
    }

    pub fn at_most(&self, bound: &Rational) -> bool {
        matches!(self, HalfWeight::Finite(r) if r <= bound)
    }
}

impl Base4Expansion {
    pub fn terminating(integer: u64, digits: Vec<u8>) -> Self {
        let mut e = Base4Expansion {
            integer,
            preperiod: digits,
            period: Vec::new(),
        };
        e.trim_trailing_zeros();
        e
    }

    /// Digit `a_i`, with `a_0` the integer part.
    pub fn digit(&self, i: usize) -> u64 {
        if i == 0 {
            return self.integer;
        }
        let j = i - 1;
        if j < self.preperiod.len() {
            return self.preperiod[j] as u64;
        }
        if self.period.is_empty() {
            return 0;
        }
        self.period[(j - self.preperiod.len()) % self.period.len()] as u64
    }

    /// Iterator over `a_0, a_1, …` (infinite; zeros after a terminating expansion).
    pub fn digits(&self) -> impl Iterator<Item = u64> + '_ {
        (0..).map(move |i| self.digit(i))
    }

    pub fn is_terminating(&self) -> bool {
        self.period.is_empty()
    }

    /// Index of the last nonzero digit for terminating expansions.
    pub fn last_nonzero(&self) -> Option<usize> {
        if !self.is_terminating() {
            return None;
        }
        let frac = self.preperiod.iter().rposition(|&d| d != 0).map(|j| j + 1);
        frac.or(if self.integer != 0 { Some(0) } else { None })
    }

    pub fn to_rational(&self) -> Rational {
        let mut value = Rational::from(self.integer as i64);
        let mut scale = Rational::one();
        let quarter = Rational::frac(1, 4);
        for &d in &self.preperiod {
            scale *= &quarter;
            value += &scale * Rational::from(d as i64);
        }
        if !self.period.is_empty() {
            // block / (4^L - 1), shifted past the preperiod
            let mut block = BigInt::zero();
            for &d in &self.period {
                block = block * 4 + d;
            }
            let denom = (BigInt::from(1) << (2 * self.period.len())) - 1;
            value += scale * Rational::new(block, denom).expect("positive denominator");
        }
        value
    }

    fn trim_trailing_zeros(&mut self) {
        if self.period.iter().all(|&d| d == 0) {
            self.period.clear();
        }
        if self.period.is_empty() {
            while self.preperiod.last() == Some(&0) {
                self.preperiod.pop();
            }
        }
    }
}

/// Canonical base-4 expansion of a rational in `[0, 1]`.
///
/// Long division in base 4; the first repeated remainder closes the period.
pub fn to_base4(x: &Rational) -> Result<Base4Expansion> {
    if x.is_negative() || x > &Rational::one() {
        return Err(Error::OutOfRange {
            what: "base-4 input (must lie in [0,1])",
            value: x.to_string(),
        });
    }
    let integer = x.floor().to_u64().expect("0 or 1");
    let denom = x.denom().clone();
    let mut rem = x.numer() - BigInt::from(integer) * &denom;
    let mut digits = Vec::new();
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    while !rem.is_zero() {
        if let Some(&start) = seen.get(&rem) {
            let period = digits.split_off(start);
            return Ok(Base4Expansion {
                integer,
                preperiod: digits,
                period,
            });
        }
        seen.insert(rem.clone(), digits.len());
        rem *= 4;
        let d = (&rem / &denom).to_u8().expect("digit below 4");
        rem -= BigInt::from(d) * &denom;
        digits.push(d);
    }
    Ok(Base4Expansion {
        integer,
        preperiod: digits,
        period: Vec::new(),
    })
}

/// Exact `Σ_{i≥0} 2^-i a_i` with the periodic tail summed in closed form.
pub fn digit_half_weight(e: &Base4Expansion) -> HalfWeight {
    let mut total = Rational::from(e.integer as i64);
    let mut scale = Rational::one();
    let half = Rational::frac(1, 2);
    for &d in &e.preperiod {
        scale *= &half;
        total += &scale * Rational::from(d as i64);
    }
    if !e.period.is_empty() {
        let mut block = Rational::zero();
        let mut s = scale.clone();
        for &d in &e.period {
            s *= &half;
            block += &s * Rational::from(d as i64);
        }
        // geometric factor 1 / (1 - 2^-L)
        let l = e.period.len() as i64;
        let factor = Rational::one() - Rational::pow2(-l);
        total += block / factor;
    }
    HalfWeight::Finite(total)
}

/// `Σ 2^-i a_i` over a finite digit vector whose entries may exceed 3.
pub fn half_weight_of_digits(digits: &[u64]) -> Rational {
    digits
        .iter()
        .enumerate()
        .map(|(i, &d)| Rational::pow2(-(i as i64)) * Rational::from(d as i64))
        .sum()
}

impl fmt::Display for Base4Expansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.", self.integer)?;
        if self.preperiod.is_empty() && self.period.is_empty() {
            return write!(f, "0");
        }
        for d in &self.preperiod {
            write!(f, "{d}")?;
        }
        if !self.period.is_empty() {
            write!(f, "(")?;
            for d in &self.period {
                write!(f, "{d}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Parses the `"a0.pre(period)"` text form and canonicalizes it.
impl FromStr for Base4Expansion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            what: "base-4 expansion",
            input: s.to_string(),
        };
        let (int, rest) = s.trim().split_once('.').ok_or_else(bad)?;
        let integer: u64 = int.parse().map_err(|_| bad())?;
        let (pre, period) = match rest.split_once('(') {
            Some((pre, per)) => (pre, per.strip_suffix(')').ok_or_else(bad)?),
            None => (rest, ""),
        };
        let parse_digits = |t: &str| -> Result<Vec<u8>> {
            t.bytes()
                .map(|b| match b {
                    b'0'..=b'3' => Ok(b - b'0'),
                    _ => Err(bad()),
                })
                .collect()
        };
        let e = Base4Expansion {
            integer,
            preperiod: parse_digits(pre)?,
            period: parse_digits(period)?,
        };
        // Re-deriving from the value folds non-canonical forms such as 0.(3).
        let value = e.to_rational();
        if value <= Rational::one() {
            to_base4(&value)
        } else {
            let mut e = e;
            e.trim_trailing_zeros();
            Ok(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn half_is_point_two() {
        let e = to_base4(&q(1, 2)).unwrap();
        assert_eq!(e.to_string(), "0.2");
        assert!(e.is_terminating());
    }

    #[test]
    fn one_sixth_is_zero_then_twos() {
        let e = to_base4(&q(1, 6)).unwrap();
        assert_eq!(e.preperiod, vec![0]);
        assert_eq!(e.period, vec![2]);
        assert_eq!(e.to_string(), "0.0(2)");
    }

    #[test]
    fn zero_and_one() {
        assert_eq!(to_base4(&Rational::zero()).unwrap().to_string(), "0.0");
        let one = to_base4(&Rational::one()).unwrap();
        assert_eq!(one.integer, 1);
        assert!(one.preperiod.is_empty() && one.period.is_empty());
    }

    #[test]
    fn one_third_repeats_ones() {
        let e = to_base4(&q(1, 3)).unwrap();
        assert!(e.preperiod.is_empty());
        assert_eq!(e.period, vec![1]);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(to_base4(&q(5, 4)).is_err());
        assert!(to_base4(&q(-1, 4)).is_err());
    }

    #[test]
    fn half_weights() {
        let w = |x: Rational| digit_half_weight(&to_base4(&x).unwrap());
        assert_eq!(w(q(1, 2)), HalfWeight::Finite(Rational::one()));
        assert_eq!(w(q(1, 6)), HalfWeight::Finite(Rational::one()));
        assert_eq!(w(Rational::zero()), HalfWeight::Finite(Rational::zero()));
        assert_eq!(w(q(5, 16)), HalfWeight::Finite(q(3, 4)));
    }

    #[test]
    fn text_round_trip_and_canonicalization() {
        for s in ["0.2", "0.0(2)", "0.(1)", "0.0", "1.0", "0.12(03)"] {
            let e: Base4Expansion = s.parse().unwrap();
            assert_eq!(e.to_string(), s);
        }
        let e: Base4Expansion = "0.1(3)".parse().unwrap();
        assert_eq!(e.to_string(), "0.2");
        assert!("0.4".parse::<Base4Expansion>().is_err());
        assert!("0.1(2".parse::<Base4Expansion>().is_err());
    }

    #[test]
    fn every_rational_with_small_denominator_round_trips() {
        for d in 1..=60i64 {
            for n in 0..=d {
                let x = q(n, d);
                let e = to_base4(&x).unwrap();
                assert_eq!(e.to_rational(), x, "{x}");
                assert_ne!(e.period, vec![3]);
            }
        }
    }
}
