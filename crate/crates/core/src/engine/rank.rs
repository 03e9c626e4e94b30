use num_bigint::BigUint;

use super::{StoppingRule, WalkPath};
use crate::error::{Error, Result};
use crate::ui::StoppingMatrix;

/// Number of classes still alive at the path's current site and time that
/// precede it lexicographically. Counts are propagated site by site, so the
/// cost is `O(len · N)` big-integer additions.
pub fn alive_class_rank(path: &WalkPath, matrix: &StoppingMatrix) -> Result<BigUint> {
    let rule = StoppingRule::PathCountMatrix(matrix.clone());
    let mut t = rule.tracker(None)?;
    for &y in path.increments() {
        t.step(y > 0)?;
    }
    if t.is_stopped() {
        return Err(Error::AlreadyStopped { time: t.time() });
    }
    let arrived = t.rank().expect("matrix tracker has a rank").clone();
    // alive means rank ≥ a, so the a stopped classes all precede this one
    Ok(arrived - matrix.entry_at_time(t.position(), t.time()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(v: &[i8]) -> WalkPath {
        WalkPath::new(v.to_vec()).unwrap()
    }

    #[test]
    fn first_path_has_rank_zero() {
        let m = StoppingMatrix::finite(1, [(0, vec![0, 1])]).unwrap();
        assert_eq!(
            alive_class_rank(&path(&[]), &m).unwrap(),
            BigUint::from(0u8)
        );
    }

    #[test]
    fn survivor_is_recounted_after_removal() {
        let m = StoppingMatrix::finite(1, [(0, vec![0, 1])]).unwrap();
        assert_eq!(
            alive_class_rank(&path(&[1, -1]), &m).unwrap(),
            BigUint::from(0u8)
        );
        assert!(matches!(
            alive_class_rank(&path(&[-1, 1]), &m),
            Err(Error::AlreadyStopped { time: 2 })
        ));
    }

    #[test]
    fn unstopped_n1_rank_is_the_odd_step_bits() {
        // with nothing stopped at 0 the alive classes at stage n are indexed by
        // the n odd-step increments read as binary digits
        let m = StoppingMatrix::finite(1, []).unwrap();
        for bits in 0u32..8 {
            let mut inc = Vec::new();
            for i in (0..3).rev() {
                let up = bits >> i & 1 == 1;
                inc.extend(if up { [1, -1] } else { [-1, 1] });
            }
            assert_eq!(
                alive_class_rank(&path(&inc), &m).unwrap(),
                BigUint::from(bits)
            );
        }
    }
}
