use serde::{Deserialize, Serialize};

use super::IntegerMeasure;
use crate::error::Result;
use crate::numerics::Rational;

/// Barycenter function `Ψ(x) = E[Y | Y ≥ x]` of a centered measure,
/// tabulated at the integer sites of the support hull `lo..=hi`.
///
/// Left-continuous and constant on each `(k, k+1]`; equal to the mean (0)
/// below the support and to `x` at and above its top.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarycenterFunction {
    lo: i64,
    values: Vec<Rational>,
}

impl BarycenterFunction {
    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn eval(&self, x: i64) -> Rational {
        if x < self.lo {
            self.values[0].clone()
        } else if x > self.hi() {
            Rational::from(x)
        } else {
            self.values[(x - self.lo) as usize].clone()
        }
    }

    pub fn steps(&self) -> impl Iterator<Item = (i64, &Rational)> {
        (self.lo..).zip(self.values.iter())
    }
}

pub fn barycenter(mu: &IntegerMeasure) -> Result<BarycenterFunction> {
    mu.require_centered()?;
    let lo = mu.min_site();
    let hi = mu.max_site();
    let values = (lo..=hi)
        .map(|x| {
            let tail = mu.tail(x);
            mu.tail_first_moment(x) / tail
        })
        .collect();
    Ok(BarycenterFunction { lo, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn values_from_the_definition() {
        let mu = IntegerMeasure::new([(-3, q(2, 9)), (0, q(4, 9)), (2, q(1, 3))]).unwrap();
        assert_eq!(barycenter(&mu).unwrap().eval(0), q(6, 7));

        let pair = IntegerMeasure::new([(-1, q(1, 2)), (1, q(1, 2))]).unwrap();
        let psi = barycenter(&pair).unwrap();
        assert_eq!(psi.eval(0), Rational::one());
        assert_eq!(psi.eval(-1), Rational::zero());
        assert_eq!(psi.eval(1), Rational::one());
        assert_eq!(psi.eval(-7), Rational::zero());
        assert_eq!(psi.eval(4), Rational::from(4));

        assert_eq!(
            barycenter(&IntegerMeasure::dirac(0)).unwrap().eval(0),
            Rational::zero()
        );
    }

    #[test]
    fn rejects_uncentered() {
        assert!(matches!(
            barycenter(&IntegerMeasure::dirac(1)),
            Err(Error::NotCentered { .. })
        ));
    }

    #[test]
    fn nondecreasing_and_above_diagonal_inside_hull() {
        let mu = IntegerMeasure::new([(-3, q(1, 8)), (-1, q(3, 8)), (1, q(1, 4)), (2, q(1, 4))])
            .unwrap();
        mu.require_centered().unwrap();
        let psi = barycenter(&mu).unwrap();
        for x in -6..=5 {
            assert!(psi.eval(x) <= psi.eval(x + 1));
            if x > mu.min_site() - 1 && x < mu.max_site() {
                assert!(psi.eval(x) > Rational::from(x), "Ψ({x})");
            }
        }
    }
}
