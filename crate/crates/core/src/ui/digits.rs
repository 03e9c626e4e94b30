use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::IntegerMeasure;
use crate::numerics::{digit_half_weight, to_base4, Base4Expansion, HalfWeight, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum SVerdict {
    Member {
        digits: Base4Expansion,
        weight: Rational,
    },
    NonMember {
        digits: Base4Expansion,
        weight: Rational,
    },
}

impl SVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, SVerdict::Member { .. })
    }

    pub fn digits(&self) -> &Base4Expansion {
        match self {
            SVerdict::Member { digits, .. } | SVerdict::NonMember { digits, .. } => digits,
        }
    }

    pub fn weight(&self) -> &Rational {
        match self {
            SVerdict::Member { weight, .. } | SVerdict::NonMember { weight, .. } => weight,
        }
    }
}

/// Mass `p` at 0 is embeddable by a UI rule on `{-2, 0, 2}` iff the canonical
/// base-4 digits satisfy `Σ 2^-i a_i ≤ 1`.
pub fn classify_s(p: &Rational) -> Result<SVerdict> {
    let digits = to_base4(p)?;
    let HalfWeight::Finite(weight) = digit_half_weight(&digits) else {
        unreachable!("base-4 digits are bounded")
    };
    Ok(if weight <= Rational::one() {
        SVerdict::Member { digits, weight }
    } else {
        SVerdict::NonMember { digits, weight }
    })
}

/// Which constraint of the path-count recursion failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum S3Site {
    Zero,
    MinusOne,
    PlusOne,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct S3Digits {
    /// Digits of `p_0`.
    pub zero: Base4Expansion,
    /// Digits of `p_{-1} / 2`.
    pub minus_one: Base4Expansion,
    /// Digits of `p_1 / 2`.
    pub plus_one: Base4Expansion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum S3Verdict {
    #[serde(rename_all = "camelCase")]
    Member {
        digits: S3Digits,
        /// `Σ 2^-i (a_i + b_i + c_i)`, at most 1 for members.
        weight: Rational,
        boundary: [Rational; 2],
    },
    /// At `stage`, `needed` classes must stop at `site` but only `available` are alive.
    #[serde(rename_all = "camelCase")]
    NonMember {
        digits: S3Digits,
        weight: Rational,
        stage: usize,
        site: S3Site,
        needed: u64,
        available: u64,
    },
}

impl S3Verdict {
    pub fn is_member(&self) -> bool {
        matches!(self, S3Verdict::Member { .. })
    }
}

/// Masses on `{-2, 2}` that complete `(p_{-1}, p_0, p_1)` to a centered law.
pub fn s3_boundary(p: &[Rational; 3]) -> Result<[Rational; 2]> {
    for x in p {
        if x.is_negative() || x > &Rational::one() {
            return Err(Error::OutOfRange {
                what: "S3 coordinate (must lie in [0,1])",
                value: x.to_string(),
            });
        }
    }
    let rest = Rational::one() - p.iter().sum::<Rational>();
    if rest.is_negative() {
        return Err(Error::InvalidMeasure(format!(
            "masses on -1, 0, 1 sum past 1 (excess {})",
            -rest
        )));
    }
    let half = Rational::frac(1, 2);
    let plus_two = (&rest + (&p[0] - &p[2]) * &half) * &half;
    let minus_two = &rest - &plus_two;
    if plus_two.is_negative() || minus_two.is_negative() {
        return Err(Error::InvalidMeasure(format!(
            "no mass on -2, 2 can center (p_-1, p_0, p_1) = ({}, {}, {})",
            p[0], p[1], p[2]
        )));
    }
    Ok([minus_two, plus_two])
}

/// The centered law on `{-2, …, 2}` with interior masses `p`.
pub fn s3_measure(p: &[Rational; 3]) -> Result<IntegerMeasure> {
    let [m2, p2] = s3_boundary(p)?;
    IntegerMeasure::from_weights([
        (-2, m2),
        (-1, p[0].clone()),
        (0, p[1].clone()),
        (1, p[2].clone()),
        (2, p2),
    ])
}

/// Membership of `(p_{-1}, p_0, p_1)` by the path-count recursion
/// `k_0 = 1`, `k_{n+1} = 2(k_n - a_n) - b_{n+1} - c_{n+1}` with
/// `a_n ≤ k_n` and `b_{n+1}, c_{n+1} ≤ k_n - a_n`.
pub fn classify_s3(p: &[Rational; 3]) -> Result<S3Verdict> {
    let boundary = s3_boundary(p)?;
    let half = Rational::frac(1, 2);
    let digits = S3Digits {
        zero: to_base4(&p[1])?,
        minus_one: to_base4(&(&p[0] * &half))?,
        plus_one: to_base4(&(&p[2] * &half))?,
    };
    let weight = [&digits.zero, &digits.minus_one, &digits.plus_one]
        .into_iter()
        .map(|e| match digit_half_weight(e) {
            HalfWeight::Finite(w) => w,
            HalfWeight::Infinite => unreachable!("base-4 digits are bounded"),
        })
        .sum::<Rational>();

    let streams = [&digits.zero, &digits.minus_one, &digits.plus_one];
    let settle = streams
        .iter()
        .map(|e| e.preperiod.len() + 1)
        .max()
        .unwrap_or(1);
    let period = streams.iter().map(|e| e.period.len().max(1)).fold(1, lcm);

    // once k ≥ 12 it stays ≥ 12, since digits are at most 3
    const SAFE: u64 = 12;
    let mut k: u64 = 1;
    let mut seen = HashSet::new();
    let mut n = 0usize;
    loop {
        let a = digits.zero.digit(n);
        if a > k {
            return Ok(S3Verdict::NonMember {
                digits,
                weight,
                stage: n,
                site: S3Site::Zero,
                needed: a,
                available: k,
            });
        }
        let s = k - a;
        let b = digits.minus_one.digit(n + 1);
        let c = digits.plus_one.digit(n + 1);
        for (site, need) in [(S3Site::MinusOne, b), (S3Site::PlusOne, c)] {
            if need > s {
                return Ok(S3Verdict::NonMember {
                    digits,
                    weight,
                    stage: n + 1,
                    site,
                    needed: need,
                    available: s,
                });
            }
        }
        k = 2 * s - b - c;
        n += 1;
        if k >= SAFE || (n >= settle && !seen.insert((k, (n - settle) % period))) {
            return Ok(S3Verdict::Member {
                digits,
                weight,
                boundary,
            });
        }
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
