use crate::error::{Error, Result};
use crate::numerics::Rational;
use crate::par::Execution;

pub const MAX_ORACLE_HORIZON: usize = 12;

/// Fixed-width bitset over `0..len`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    fn new(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// `self |= other << shift`.
    fn or_shifted(&mut self, other: &Bits, shift: usize) {
        let (ws, bs) = (shift / 64, shift % 64);
        for (i, &w) in other.words.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let j = i + ws;
            if j < self.words.len() {
                self.words[j] |= w << bs;
            }
            if bs != 0 && j + 1 < self.words.len() {
                self.words[j + 1] |= w >> (64 - bs);
            }
        }
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }
}

/// Every mass at 0 reachable on `{-2, 0, 2}` by rules that stop all paths
/// at 0 or the boundary by stage `horizon`; values in units of `4^{-horizon}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleSet {
    horizon: usize,
    bits: Bits,
}

impl OracleSet {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn contains(&self, p: &Rational) -> bool {
        let scaled = p * &Rational::pow2(2 * self.horizon as i64);
        match scaled.to_i64() {
            Some(v) if v >= 0 => self.bits.get(v as usize),
            _ => false,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.ones().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<Rational> {
        let unit = Rational::pow2(-2 * self.horizon as i64);
        self.bits
            .ones()
            .map(|v| &unit * Rational::from(v as i64))
            .collect()
    }
}

/// Backward recursion `V(n, k) = ∪_{a ≤ k} a·4^{-n} + V(n+1, 2(k-a))`,
/// `V(H, k) = {a 4^{-H} : a ≤ k}`, evaluated at `V(0, 1)`.
pub fn brute_force_oracle(horizon: usize, exec: Execution) -> Result<OracleSet> {
    if horizon > MAX_ORACLE_HORIZON {
        return Err(Error::HorizonTooLarge {
            requested: horizon,
            max: MAX_ORACLE_HORIZON,
        });
    }
    let unit_at = |n: usize| 1usize << (2 * (horizon - n));
    // level H: k ≤ 2^H alive paths, any number of them stop
    let mut level: Vec<Bits> = (0..=1usize << horizon)
        .map(|k| {
            let mut b = Bits::new(k + 1);
            (0..=k).for_each(|a| b.set(a));
            b
        })
        .collect();
    for n in (0..horizon).rev() {
        let unit = unit_at(n);
        let below = &level;
        let build = |k: usize| {
            let mut b = Bits::new(k * unit + 1);
            for a in 0..=k {
                b.or_shifted(&below[2 * (k - a)], a * unit);
            }
            b
        };
        level = exec.map_range(0..(1usize << n) + 1, build);
    }
    Ok(OracleSet {
        horizon,
        bits: level.swap_remove(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn horizon_one() {
        let set = brute_force_oracle(1, Execution::Sequential).unwrap();
        assert_eq!(
            set.values(),
            vec![Rational::zero(), q(1, 4), q(1, 2), Rational::one()]
        );
    }

    #[test]
    fn horizon_zero_is_stop_or_leave() {
        let set = brute_force_oracle(0, Execution::Sequential).unwrap();
        assert_eq!(set.values(), vec![Rational::zero(), Rational::one()]);
    }

    #[test]
    fn five_sixteenths_needs_two_stages() {
        assert!(!brute_force_oracle(1, Execution::Sequential)
            .unwrap()
            .contains(&q(5, 16)));
        assert!(brute_force_oracle(2, Execution::Sequential)
            .unwrap()
            .contains(&q(5, 16)));
    }

    #[test]
    fn parallel_matches_sequential() {
        let a = brute_force_oracle(6, Execution::Sequential).unwrap();
        let b = brute_force_oracle(6, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_deep() {
        assert!(matches!(
            brute_force_oracle(13, Execution::Sequential),
            Err(Error::HorizonTooLarge { .. })
        ));
    }
}
