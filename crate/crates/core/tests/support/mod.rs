//! Strategies and property checks shared by the property suite and the
//! acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use walkembed::classic::{
    azema_yor_check, hall_rule, minimal_embed_rule, AzemaYorVerdict, ChipSequence, ChipStep,
};
use walkembed::engine::{alive_class_rank, StoppingRule, WalkPath};
use walkembed::measures::{measure_from_potential, potential};
use walkembed::ui::{
    classify_s, classify_s3, s_membership_via_ifs, IfsSystem, IfsVerdict, PathCountState,
    StoppingMatrix,
};
use walkembed::{IntegerMeasure, Rational};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::frac(n, d)
}

/// Centered laws built as mixtures of two-point exit laws, optionally with an atom at 0.
pub fn centered_measure() -> impl Strategy<Value = IntegerMeasure> {
    (
        prop::collection::vec((-4i64..=-1, 1i64..=4, 1i64..=8), 1..4),
        0i64..=4,
    )
        .prop_map(|(pairs, zero)| {
            let total: i64 = pairs.iter().map(|p| p.2).sum::<i64>() + zero;
            let mut atoms: Vec<(i64, Rational)> = vec![(0, q(zero, total))];
            for (u, v, w) in pairs {
                let w = q(w, total);
                atoms.push((u, &w * &q(v, v - u)));
                atoms.push((v, &w * &q(-u, v - u)));
            }
            IntegerMeasure::from_weights(atoms).expect("mixture of probability laws")
        })
}

/// Any law on `[-4, 4]`, centered or not.
pub fn any_measure() -> impl Strategy<Value = IntegerMeasure> {
    prop::collection::btree_map(-4i64..=4, 1i64..=9, 1..5).prop_map(|m| {
        let total: i64 = m.values().sum();
        IntegerMeasure::new(m.into_iter().map(|(k, w)| (k, q(w, total)))).expect("positive weights")
    })
}

pub fn chips() -> impl Strategy<Value = ChipSequence> {
    prop::collection::vec((-5i64..=0, 1i64..=5), 0..4).prop_map(|v| {
        ChipSequence::new(
            v.into_iter()
                .map(|(a, b)| ChipStep { a: a - 1, b })
                .collect(),
        )
        .unwrap()
    })
}

/// A member of the `{-2, 0, 2}` class with a terminating expansion.
pub fn s_member_digits() -> impl Strategy<Value = Rational> {
    (0i64..=256).prop_filter_map("not embeddable", |j| {
        let p = q(j, 256);
        classify_s(&p).unwrap().is_member().then_some(p)
    })
}

pub fn digit_matrix(p: &Rational) -> StoppingMatrix {
    StoppingMatrix::from_digits(classify_s(p).unwrap().digits()).unwrap()
}

/// One rule of every kind, paired with the draw it needs.
pub fn rule_with_draw() -> impl Strategy<Value = (StoppingRule, Option<(i64, i64)>)> {
    prop_oneof![
        chips().prop_map(|c| (StoppingRule::ExitComposition(c), None)),
        centered_measure().prop_map(|mu| match azema_yor_check(&mu).unwrap() {
            AzemaYorVerdict::Member { thresholds } =>
                (StoppingRule::MaxThreshold(thresholds), None),
            AzemaYorVerdict::NonMember { .. } =>
                (StoppingRule::Minimal(minimal_embed_rule(&mu)), None),
        }),
        s_member_digits().prop_map(|p| (StoppingRule::PathCountMatrix(digit_matrix(&p)), None)),
        (centered_measure(), 0.0f64..1.0).prop_filter_map("point mass", |(mu, u)| {
            let rule = hall_rule(&mu).ok()?;
            let draw = rule.pick(u);
            Some((StoppingRule::RandomizedPair(rule), Some(draw)))
        }),
        any_measure().prop_map(|mu| (StoppingRule::Minimal(minimal_embed_rule(&mu)), None)),
    ]
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

/// Two paths sharing a prefix get the same decisions on it, replaying any
/// prefix reproduces the streamed decision, and bounded rules stay inside
/// their bound.
pub fn check_adapted(
    rule: &StoppingRule,
    draw: Option<(i64, i64)>,
    a: &[bool],
    b: &[bool],
) -> Result<(), TestCaseError> {
    let shared = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let mut ta = rule.tracker(draw).map_err(|e| fail(e.to_string()))?;
    let mut tb = rule.tracker(draw).map_err(|e| fail(e.to_string()))?;
    let path = WalkPath::from_ups(a.iter().copied());
    for k in 0..=a.len() {
        if k > 0 {
            if ta.is_stopped() {
                break;
            }
            ta.step(a[k - 1]).map_err(|e| fail(e.to_string()))?;
            if k <= shared && !tb.is_stopped() {
                tb.step(b[k - 1]).map_err(|e| fail(e.to_string()))?;
            }
        }
        if k <= shared && ta.decision() != tb.decision() {
            return Err(fail(format!(
                "decisions differ at step {k} on a shared prefix"
            )));
        }
        let replay = rule
            .decide_with(&path.prefix(k), draw)
            .map_err(|e| fail(e.to_string()))?;
        if replay != ta.decision() {
            return Err(fail(format!("replay of prefix {k} disagrees")));
        }
        if let Some(bound) = rule.bound() {
            if ta.position().abs() > bound {
                return Err(fail(format!(
                    "position {} beyond bound {bound}",
                    ta.position()
                )));
            }
        }
    }
    Ok(())
}

pub fn check_potential_round_trip(mu: &IntegerMeasure) -> Result<(), TestCaseError> {
    let back = measure_from_potential(&potential(mu)).map_err(|e| fail(e.to_string()))?;
    prop_assert_eq!(&back, mu);
    Ok(())
}

/// `p` embeddable implies `1/4 + p/4` and `1/8 + p/4` embeddable.
pub fn check_closure(p: &Rational) -> Result<(), TestCaseError> {
    if !classify_s(p).unwrap().is_member() {
        return Ok(());
    }
    let quarter = q(1, 4);
    for image in [&quarter + p * &quarter, q(1, 8) + p * &quarter] {
        prop_assert!(
            classify_s(&image).unwrap().is_member(),
            "image {} of {} rejected",
            image,
            p
        );
    }
    Ok(())
}

/// The slice `{0} × [0,1] × {0}` of the five-point class is the three-point class.
pub fn check_s3_slice(grid: i64) -> Result<(), TestCaseError> {
    for j in 0..=grid {
        let p = q(j, grid);
        let s3 = classify_s3(&[Rational::zero(), p.clone(), Rational::zero()]).unwrap();
        prop_assert_eq!(
            s3.is_member(),
            classify_s(&p).unwrap().is_member(),
            "p = {}",
            p
        );
    }
    Ok(())
}

pub fn check_ifs_agreement(p: &Rational) -> Result<(), TestCaseError> {
    let verdict = s_membership_via_ifs(&IfsSystem::s(), p, 40).map_err(|e| fail(e.to_string()))?;
    let member = classify_s(p).unwrap().is_member();
    match verdict {
        IfsVerdict::Member => prop_assert!(member, "ifs says member, digits disagree at {}", p),
        IfsVerdict::NonMember => {
            prop_assert!(!member, "ifs says nonmember, digits disagree at {}", p)
        }
        IfsVerdict::UndecidedAtDepth => {}
    }
    Ok(())
}

/// Alive classes smaller than `path` at its site, by enumerating every path
/// of the same length.
pub fn brute_rank(path: &WalkPath, m: &StoppingMatrix) -> BigUint {
    let rule = StoppingRule::PathCountMatrix(m.clone());
    let n = path.len();
    let mut count = 0u64;
    for bits in 0u64..(1 << n) {
        // most significant bit first so numeric order is lexicographic order
        let other = WalkPath::from_ups((0..n).rev().map(|i| bits >> i & 1 == 1));
        if other >= *path {
            break;
        }
        if other.position() != path.position() {
            continue;
        }
        if let Ok(d) = rule.decide(&other) {
            if !d.is_stop() {
                count += 1;
            }
        }
    }
    BigUint::from(count)
}

pub fn check_rank(m: &StoppingMatrix, ups: &[bool]) -> Result<(), TestCaseError> {
    let path = WalkPath::from_ups(ups.iter().copied());
    match alive_class_rank(&path, m) {
        Ok(rank) => prop_assert_eq!(rank, brute_rank(&path, m)),
        Err(_) => {
            let rule = StoppingRule::PathCountMatrix(m.clone());
            let stopped = (0..=path.len()).any(|k| {
                rule.decide(&path.prefix(k))
                    .map(|d| d.is_stop())
                    .unwrap_or(true)
            });
            prop_assert!(stopped, "rank refused an alive path");
        }
    }
    Ok(())
}

/// Arrival counts from the exhaustive path tree match the path-count recursion.
pub fn check_path_counts(m: &StoppingMatrix, stages: usize) -> Result<(), TestCaseError> {
    let rule = StoppingRule::PathCountMatrix(m.clone());
    let mut arrivals: BTreeMap<(usize, i64), u64> = BTreeMap::new();
    let mut frontier = vec![rule.tracker(None).unwrap()];
    *arrivals.entry((0, 0)).or_default() += 1;
    for t in 1..=2 * stages {
        let mut next = Vec::new();
        for tr in frontier.into_iter().filter(|tr| !tr.is_stopped()) {
            for up in [false, true] {
                let mut c = tr.clone();
                c.step(up).unwrap();
                *arrivals.entry((t, c.position())).or_default() += 1;
                next.push(c);
            }
        }
        frontier = next;
    }
    let mut state = PathCountState::initial(m.half_width());
    for n in 0..=stages {
        if n > 0 {
            state = state.advance(m);
        }
        for s in state.sites() {
            let t = if s.rem_euclid(2) == 0 {
                2 * n
            } else if n == 0 {
                continue;
            } else {
                2 * n - 1
            };
            let seen = arrivals.get(&(t, s)).copied().unwrap_or(0);
            prop_assert_eq!(
                state.count(s),
                BigUint::from(seen),
                "site {} stage {}",
                s,
                n
            );
        }
    }
    Ok(())
}
