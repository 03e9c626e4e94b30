use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RngStream;
use crate::classic::site_keys;
use crate::engine::StoppingRule;
use crate::error::Result;
use crate::measures::IntegerMeasure;
use crate::par::Execution;

pub const DEFAULT_STAGE_CAP: u64 = 1_000_000;

const CHUNK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimOptions {
    pub trials: u64,
    pub seed: u64,
    /// Trials still running after this many steps are truncated.
    pub stage_cap: u64,
    pub execution: Execution,
}

impl SimOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimOptions {
            trials,
            seed,
            stage_cap: DEFAULT_STAGE_CAP,
            execution: Execution::default(),
        }
    }
}

/// Summary of a batch of trials. Frequencies are over stopped trials only;
/// truncated trials are counted separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimReport {
    pub trials: u64,
    pub stopped: u64,
    pub truncated: u64,
    pub truncated_fraction: f64,
    pub stage_cap: u64,
    #[serde(with = "site_keys")]
    pub counts: BTreeMap<i64, u64>,
    #[serde(with = "site_keys")]
    pub empirical_law: BTreeMap<i64, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_law: Option<IntegerMeasure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv_distance: Option<f64>,
    /// Bound on the floating-point error of `tv_distance`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv_error_bound: Option<f64>,
    pub mean_stopped: f64,
    pub mean_stopping_time: f64,
    /// Largest `|X_n|` seen in any trial, truncated ones included.
    pub max_excursion: i64,
    /// Stopping times bucketed as `0`, `1`, `2-3`, `4-7`, ….
    pub stage_histogram: BTreeMap<String, u64>,
    pub seed: u64,
    pub rng: String,
}

/// Per-atom comparison at tolerance `4 sqrt(p(1-p)/n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AtomCheck {
    pub site: i64,
    pub target: f64,
    pub empirical: f64,
    pub tolerance: f64,
    pub ok: bool,
}

pub fn atom_tolerance(p: f64, n: u64) -> f64 {
    4.0 * (p * (1.0 - p) / n as f64).sqrt()
}

impl SimReport {
    /// Checks every atom of `target` plus every site the walk stopped at
    /// outside it.
    pub fn atom_checks(&self, target: &IntegerMeasure) -> Vec<AtomCheck> {
        let sites: std::collections::BTreeSet<i64> = target
            .support()
            .chain(self.counts.keys().copied())
            .collect();
        sites
            .into_iter()
            .map(|site| {
                let p = target.weight(site).to_f64();
                let empirical = self.empirical_law.get(&site).copied().unwrap_or(0.0);
                let tolerance = atom_tolerance(p, self.stopped.max(1));
                AtomCheck {
                    site,
                    target: p,
                    empirical,
                    tolerance,
                    ok: (empirical - p).abs() <= tolerance,
                }
            })
            .collect()
    }

    pub fn within_tolerance(&self, target: &IntegerMeasure) -> bool {
        self.truncated == 0 && self.atom_checks(target).iter().all(|c| c.ok)
    }
}

#[derive(Clone, Debug, Default)]
struct Tally {
    stopped: u64,
    truncated: u64,
    counts: BTreeMap<i64, u64>,
    time_sum: u128,
    max_excursion: i64,
    histogram: BTreeMap<u32, u64>,
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        self.stopped += other.stopped;
        self.truncated += other.truncated;
        for (k, c) in other.counts {
            *self.counts.entry(k).or_default() += c;
        }
        self.time_sum += other.time_sum;
        self.max_excursion = self.max_excursion.max(other.max_excursion);
        for (k, c) in other.histogram {
            *self.histogram.entry(k).or_default() += c;
        }
    }
}

fn bucket(t: u64) -> u32 {
    if t == 0 {
        0
    } else {
        64 - t.leading_zeros()
    }
}

fn bucket_label(b: u32) -> String {
    match b {
        0 => "0".into(),
        1 => "1".into(),
        _ => format!("{}-{}", 1u64 << (b - 1), (1u128 << b) - 1),
    }
}

fn run_trial(
    rule: &StoppingRule,
    seed: u64,
    trial: u64,
    cap: u64,
    tally: &mut Tally,
) -> Result<()> {
    let mut rng = RngStream::new(seed, trial);
    let draw = match rule {
        StoppingRule::RandomizedPair(r) => Some(r.pick(rng.uniform())),
        _ => None,
    };
    let mut t = rule.tracker(draw)?;
    let mut excursion = 0i64;
    let mut time = 0u64;
    while !t.is_stopped() && time < cap {
        t.step(rng.step())?;
        time += 1;
        excursion = excursion.max(t.position().abs());
    }
    tally.max_excursion = tally.max_excursion.max(excursion);
    if t.is_stopped() {
        tally.stopped += 1;
        *tally.counts.entry(t.position()).or_default() += 1;
        tally.time_sum += u128::from(time);
        *tally.histogram.entry(bucket(time)).or_default() += 1;
    } else {
        tally.truncated += 1;
    }
    Ok(())
}

/// Runs `options.trials` independent walks under `rule`. Trial `i` uses
/// stream `i` of the seeded generator, so the report does not depend on the
/// execution mode or thread count.
pub fn simulate(
    rule: &StoppingRule,
    target: Option<&IntegerMeasure>,
    options: SimOptions,
) -> Result<SimReport> {
    let chunks = options.trials.div_ceil(CHUNK);
    let partial = options
        .execution
        .map_range(0..chunks as usize, |c| -> Result<Tally> {
            let mut tally = Tally::default();
            let lo = c as u64 * CHUNK;
            for trial in lo..(lo + CHUNK).min(options.trials) {
                run_trial(rule, options.seed, trial, options.stage_cap, &mut tally)?;
            }
            Ok(tally)
        });
    let mut tally = Tally::default();
    for p in partial {
        tally.merge(p?);
    }
    Ok(report(tally, target, options))
}

fn report(tally: Tally, target: Option<&IntegerMeasure>, options: SimOptions) -> SimReport {
    let n = tally.stopped.max(1) as f64;
    let empirical_law: BTreeMap<i64, f64> = tally
        .counts
        .iter()
        .map(|(&k, &c)| (k, c as f64 / n))
        .collect();
    let mean_stopped = tally
        .counts
        .iter()
        .map(|(&k, &c)| k as f64 * c as f64)
        .sum::<f64>()
        / n;
    let (tv_distance, tv_error_bound) = match target {
        Some(mu) => {
            let sites: std::collections::BTreeSet<i64> =
                mu.support().chain(empirical_law.keys().copied()).collect();
            let tv = 0.5
                * sites
                    .iter()
                    .map(|s| {
                        (empirical_law.get(s).copied().unwrap_or(0.0) - mu.weight(*s).to_f64())
                            .abs()
                    })
                    .sum::<f64>();
            // each term carries at most a few roundings of relative size ε
            (Some(tv), Some(4.0 * sites.len() as f64 * f64::EPSILON))
        }
        None => (None, None),
    };
    SimReport {
        trials: options.trials,
        stopped: tally.stopped,
        truncated: tally.truncated,
        truncated_fraction: tally.truncated as f64 / options.trials.max(1) as f64,
        stage_cap: options.stage_cap,
        counts: tally.counts,
        empirical_law,
        target_law: target.cloned(),
        tv_distance,
        tv_error_bound,
        mean_stopped,
        mean_stopping_time: tally.time_sum as f64 / n,
        max_excursion: tally.max_excursion,
        stage_histogram: tally
            .histogram
            .into_iter()
            .map(|(b, c)| (bucket_label(b), c))
            .collect(),
        seed: options.seed,
        rng: RngStream::ALGORITHM.into(),
    }
}
