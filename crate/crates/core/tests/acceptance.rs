//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod support;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use support::*;
use walkembed::classic::{
    azema_yor_check, chw_search, hall_rule, minimal_embed_rule, AzemaYorVerdict, ChwSearchOptions,
    ChwVerdict,
};
use walkembed::engine::StoppingRule;
use walkembed::par::Execution;
use walkembed::sim::{exact_law, simulate, SimOptions};
use walkembed::ui::{
    brute_force_oracle, classify_s, classify_s3, ifs_approximate, s3_measure, search_matrix,
    verify_matrix, IfsSystem, IntervalUnion, MatrixRow, MatrixSearch, MatrixVerdict, RowTail,
    StoppingMatrix,
};
use walkembed::{IntegerMeasure, Rational};

type Outcome = Result<String, String>;

type Criterion = (&'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn measure(atoms: &[(i64, i64, i64)]) -> IntegerMeasure {
    IntegerMeasure::new(atoms.iter().map(|&(k, n, d)| (k, q(n, d)))).unwrap()
}

fn criterion_1() -> Outcome {
    let oracle = brute_force_oracle(5, Execution::Parallel).map_err(|e| e.to_string())?;
    for j in 0..=1024 {
        let p = q(j, 1024);
        let digits = classify_s(&p).unwrap().is_member();
        ensure!(
            digits == oracle.contains(&p),
            "p = {p}: digits say {digits}, enumeration disagrees"
        );
    }
    Ok(format!(
        "1025 grid points agree, {} reachable values",
        oracle.len()
    ))
}

fn criterion_2() -> Outcome {
    ensure!(classify_s(&q(1, 2)).unwrap().is_member(), "1/2 rejected");
    for p in [q(55, 100), q(6, 10), q(3, 4), q(9, 10)] {
        ensure!(!classify_s(&p).unwrap().is_member(), "{p} accepted");
    }
    let sixth = classify_s(&q(1, 6)).unwrap();
    ensure!(
        sixth.is_member() && sixth.weight() == &Rational::one(),
        "1/6: {sixth:?}"
    );
    for j in 0..=128 {
        ensure!(
            classify_s(&q(j, 1024)).unwrap().is_member(),
            "{j}/1024 rejected"
        );
    }
    ensure!(
        classify_s(&Rational::one()).unwrap().is_member(),
        "1 rejected"
    );
    Ok("1/2, 1/6 (weight 1), [0,1/8] grid and 1 accepted; 0.55, 0.6, 0.75, 0.9 rejected".into())
}

fn criterion_3() -> Outcome {
    let third = q(1, 3);
    let flat = [third.clone(), third.clone(), third];
    ensure!(
        !classify_s3(&flat).unwrap().is_member(),
        "uniform on {{-1,0,1}} accepted as UI"
    );
    let mu = measure(&[(-1, 1, 3), (0, 1, 3), (1, 1, 3)]);
    let rule = StoppingRule::Minimal(minimal_embed_rule(&mu));
    let report =
        simulate(&rule, Some(&mu), SimOptions::new(100_000, 3)).map_err(|e| e.to_string())?;
    let tv = report.tv_distance.unwrap();
    ensure!(tv.is_finite() && tv <= 0.01, "general embedder TV {tv}");

    let mu = measure(&[(-2, 11, 32), (0, 5, 16), (2, 11, 32)]);
    ensure!(
        search_matrix(&mu, 12).unwrap().is_member(),
        "5/16 matrix not found"
    );
    match chw_search(&mu, ChwSearchOptions::depth(8)).unwrap() {
        ChwVerdict::NonMemberUpToDepth { depth: 8, .. } => {}
        v => return Err(format!("5/16 chip search: {v:?}")),
    }

    let mu = measure(&[(-3, 2, 9), (0, 4, 9), (2, 1, 3)]);
    match chw_search(&mu, ChwSearchOptions::depth(8)).unwrap() {
        ChwVerdict::Member { chips } if chips.len() == 2 => {}
        v => return Err(format!("2-chip witness missing: {v:?}")),
    }
    match azema_yor_check(&mu).unwrap() {
        AzemaYorVerdict::NonMember { barycenter, .. } if barycenter == q(6, 7) => {}
        v => return Err(format!("threshold verdict: {v:?}")),
    }
    Ok(format!("uniform {{-1,0,1}}: not UI, embedder TV {tv:.4}; 5/16: UI, no chips up to 8; 2/9: 2 chips, barycenter 6/7"))
}

fn three_quarters_row(bump: Option<usize>) -> MatrixRow {
    let entry = |n: usize| -> u64 {
        match n {
            0 => 0,
            1 => 2,
            _ => 1 << (n - 1),
        }
    };
    let Some(stage) = bump else {
        return MatrixRow {
            prefix: vec![0, 2],
            tail: Some(RowTail {
                block: vec![2],
                ratio: 2,
            }),
        };
    };
    let mut prefix: Vec<u64> = (0..=stage.max(1)).map(entry).collect();
    prefix[stage] += 1;
    let next = entry(prefix.len());
    MatrixRow {
        prefix,
        tail: Some(RowTail {
            block: vec![next],
            ratio: 2,
        }),
    }
}

fn criterion_4() -> Outcome {
    let mu = measure(&[(-4, 1, 8), (0, 3, 4), (4, 1, 8)]);
    let m = StoppingMatrix::new(3, BTreeMap::from([(0, three_quarters_row(None))])).unwrap();
    ensure!(m.atom(0) == q(3, 4), "digit sum {}", m.atom(0));
    ensure!(
        verify_matrix(&m, &mu).unwrap().is_valid(),
        "base matrix rejected"
    );

    let mut perturbed = Vec::new();
    for n in 0..=12 {
        perturbed.push((
            0,
            n,
            StoppingMatrix::new(3, BTreeMap::from([(0, three_quarters_row(Some(n)))])).unwrap(),
        ));
    }
    for s in [-3i64, -2, -1, 1, 2, 3] {
        for n in 1..=4 {
            let mut row = vec![0u64; n + 1];
            row[n] = 1;
            let rows = BTreeMap::from([(0, three_quarters_row(None)), (s, MatrixRow::finite(row))]);
            perturbed.push((s, n, StoppingMatrix::new(3, rows).unwrap()));
        }
    }
    for (site, stage, m) in &perturbed {
        match verify_matrix(m, &mu).unwrap() {
            MatrixVerdict::Violation(v) if v.site == *site && v.stage == Some(*stage) => {}
            v => return Err(format!("bump at site {site} stage {stage}: {v:?}")),
        }
    }
    Ok(format!(
        "valid, Σ = 3/4; {} single-entry bumps each reported at their own (site, stage)",
        perturbed.len()
    ))
}

fn criterion_5() -> Outcome {
    let system = IfsSystem::s();
    let head = IntervalUnion::canonical(vec![(Rational::zero(), q(1, 6))]);
    let mut last: Option<Rational> = None;
    for d in 0..=12 {
        let approx = ifs_approximate(&system, d).map_err(|e| e.to_string())?;
        let m = approx.measure().clone();
        ensure!(m >= q(1, 4), "depth {d}: measure {m} below 1/4");
        if let Some(prev) = &last {
            ensure!(&m <= prev, "depth {d}: measure grew from {prev} to {m}");
        }
        ensure!(
            approx.intervals().unwrap().covers(&head),
            "depth {d}: [0, 1/6] not covered"
        );
        last = Some(m);
    }
    let m12 = last.unwrap();
    ensure!(m12 <= q(26, 100), "depth 12 measure {m12} above 0.26");
    Ok(format!(
        "nonincreasing, ≥ 1/4, depth 12 = {m12} ≈ {:.6}",
        m12.to_f64()
    ))
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    for p in [q(1, 4), q(1, 2), q(5, 16)] {
        let mu = s3_measure(&[Rational::zero(), p.clone(), Rational::zero()]).unwrap();
        let MatrixSearch::Member {
            matrix,
            terminating: true,
        } = search_matrix(&mu, 12).unwrap()
        else {
            return Err(format!("no terminating matrix for {p}"));
        };
        let stages = matrix.tail_start().max(1);
        let e =
            exact_law(&StoppingRule::PathCountMatrix(matrix), stages).map_err(|e| e.to_string())?;
        ensure!(
            e.residual_mass.is_zero(),
            "p = {p}: residual {}",
            e.residual_mass
        );
        ensure!(
            e.measure().as_ref() == Some(&mu),
            "p = {p}: law {:?}",
            e.law
        );
        notes.push(format!("{p}@{stages}"));
    }

    let mu = measure(&[(-1, 1, 2), (1, 1, 2)]);
    let AzemaYorVerdict::Member { thresholds } = azema_yor_check(&mu).unwrap() else {
        return Err("(δ₋₁+δ₁)/2 rejected by the threshold test".into());
    };
    let e = exact_law(&StoppingRule::MaxThreshold(thresholds), 1).unwrap();
    ensure!(
        e.residual_mass.is_zero() && e.measure().as_ref() == Some(&mu),
        "threshold rule law {:?}",
        e.law
    );

    let mu = measure(&[(-3, 2, 9), (0, 4, 9), (2, 1, 3)]);
    let ChwVerdict::Member { chips } = chw_search(&mu, ChwSearchOptions::depth(4)).unwrap() else {
        return Err("chip witness missing".into());
    };
    let e = exact_law(&StoppingRule::ExitComposition(chips), 12).unwrap();
    ensure!(
        e.residual_mass < Rational::pow2(-20),
        "chip residual {}",
        e.residual_mass
    );
    let err = e.l1_distance(&mu);
    ensure!(
        err <= e.residual_mass,
        "chip law error {err} exceeds residual {}",
        e.residual_mass
    );
    Ok(format!(
        "matrices {} exact; threshold rule exact; chips residual {}",
        notes.join(", "),
        e.residual_mass
    ))
}

fn criterion_7() -> Outcome {
    let hall_targets = [
        measure(&[(-2, 1, 3), (0, 1, 3), (2, 1, 3)]),
        measure(&[(-2, 11, 32), (0, 5, 16), (2, 11, 32)]),
        measure(&[(-3, 2, 9), (0, 4, 9), (2, 1, 3)]),
    ];
    let general_targets = [
        measure(&[(-1, 1, 3), (0, 1, 3), (1, 1, 3)]),
        measure(&[(-3, 2, 9), (0, 4, 9), (2, 1, 3)]),
        // mean 1
        measure(&[(-1, 1, 4), (1, 1, 4), (2, 1, 2)]),
    ];
    let mut worst = 0.0f64;
    let mut truncated = 0;
    let mut seed = 70;
    let rules = hall_targets
        .iter()
        .map(|mu| (StoppingRule::RandomizedPair(hall_rule(mu).unwrap()), mu))
        .chain(
            general_targets
                .iter()
                .map(|mu| (StoppingRule::Minimal(minimal_embed_rule(mu)), mu)),
        );
    for (rule, mu) in rules {
        seed += 1;
        let report =
            simulate(&rule, Some(mu), SimOptions::new(100_000, seed)).map_err(|e| e.to_string())?;
        truncated += report.truncated;
        for c in report.atom_checks(mu) {
            ensure!(
                c.ok,
                "{} rule, site {}: {} vs {} (tolerance {:.5})",
                rule.kind(),
                c.site,
                c.empirical,
                c.target,
                c.tolerance
            );
            worst = worst.max((c.empirical - c.target).abs() / c.tolerance);
        }
    }
    Ok(format!("6 targets within 4σ per atom (worst {worst:.2} of tolerance), {truncated} truncated trials"))
}

fn run_property<S: Strategy>(
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        max_global_rejects: 100_000,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

fn criterion_8() -> Outcome {
    let paths = || prop::collection::vec(any::<bool>(), 0..40);
    run_property(
        256,
        (rule_with_draw(), paths(), paths()),
        |((rule, draw), a, mut b)| {
            let k = a.len().min(b.len()) / 2;
            b[..k].copy_from_slice(&a[..k]);
            check_adapted(&rule, draw, &a, &b)
        },
    )
    .map_err(|e| format!("adaptedness: {e}"))?;
    run_property(256, any_measure(), |mu| check_potential_round_trip(&mu))
        .map_err(|e| format!("potentials: {e}"))?;
    let members = (0i64..=4096, 1i64..=4096).prop_filter_map("not a member", |(n, d)| {
        let p = Rational::frac(n, d);
        (n <= d && classify_s(&p).unwrap().is_member()).then_some(p)
    });
    run_property(1000, members, |p| check_closure(&p)).map_err(|e| format!("closure: {e}"))?;
    check_s3_slice(256).map_err(|e| format!("slice: {e}"))?;
    Ok("adaptedness (256), potential round-trips (256), closure under both maps (1000), slice on j/4⁴".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "digit test vs enumeration",
            Duration::from_secs(10),
            criterion_1,
        ),
        ("reference verdicts", Duration::from_secs(30), criterion_2),
        ("strict inclusions", Duration::from_secs(60), criterion_3),
        ("matrix verification", Duration::from_secs(1), criterion_4),
        ("IFS measure bracket", Duration::from_secs(30), criterion_5),
        ("exact laws", Duration::from_secs(30), criterion_6),
        ("statistical suite", Duration::from_secs(60), criterion_7),
        ("property suites", Duration::from_secs(300), criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(note) if elapsed > limit => {
                Err(format!("{note}; took {elapsed:.2?}, limit {limit:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(note) => println!("criterion {} PASS [{elapsed:.2?}] {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL [{elapsed:.2?}] {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
