use std::collections::{BTreeMap, HashSet, VecDeque};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::IntegerMeasure;
use crate::numerics::{Base4Expansion, Rational};

/// Tail of a row from stage `prefix.len()` on: entry `prefix.len() + q·L + r`
/// equals `ratio^q · block[r]` with `L = block.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowTail {
    pub block: Vec<u64>,
    pub ratio: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatrixRow {
    pub prefix: Vec<u64>,
    pub tail: Option<RowTail>,
}

impl MatrixRow {
    pub fn finite(prefix: Vec<u64>) -> Self {
        MatrixRow { prefix, tail: None }
    }

    pub fn entry(&self, stage: usize) -> BigUint {
        if let Some(&a) = self.prefix.get(stage) {
            return BigUint::from(a);
        }
        match &self.tail {
            None => BigUint::zero(),
            Some(t) => {
                let j = stage - self.prefix.len();
                let (q, r) = (j / t.block.len(), j % t.block.len());
                BigUint::from(t.ratio).pow(q as u32) * t.block[r]
            }
        }
    }

    /// `Σ_n a_n 4^{-n}` in closed form.
    pub fn quarter_sum(&self) -> Rational {
        let mut total: Rational = self
            .prefix
            .iter()
            .enumerate()
            .map(|(n, &a)| Rational::quarter_pow(n as u64) * Rational::from(a as i64))
            .sum();
        if let Some(t) = &self.tail {
            let start = self.prefix.len();
            let block: Rational = t
                .block
                .iter()
                .enumerate()
                .map(|(r, &a)| Rational::quarter_pow((start + r) as u64) * Rational::from(a as i64))
                .sum();
            let shrink =
                Rational::from(t.ratio as i64) * Rational::quarter_pow(t.block.len() as u64);
            total += block / (Rational::one() - shrink);
        }
        total
    }

    fn is_zero(&self) -> bool {
        self.prefix.iter().all(|&a| a == 0)
            && self
                .tail
                .as_ref()
                .is_none_or(|t| t.block.iter().all(|&a| a == 0))
    }
}

/// Stopping counts `a^i_n` for interior sites `|i| ≤ N`; `±(N+1)` absorb.
///
/// Stage `n` means time `2n` at even sites and `2n - 1` at odd sites.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct StoppingMatrix {
    half_width: u32,
    rows: BTreeMap<i64, MatrixRow>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct MatrixFile {
    half_width: u32,
    entries: Vec<EntryTriple>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tails: Vec<TailFile>,
}

#[derive(Serialize, Deserialize)]
struct EntryTriple {
    site: i64,
    stage: usize,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct TailFile {
    site: i64,
    from: usize,
    block: Vec<u64>,
    ratio: u64,
}

impl TryFrom<MatrixFile> for StoppingMatrix {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        let mut rows: BTreeMap<i64, MatrixRow> = BTreeMap::new();
        for t in file.tails {
            let row = rows.entry(t.site).or_default();
            if row.tail.is_some() {
                return Err(Error::InvalidCertificate(format!(
                    "two tails for site {}",
                    t.site
                )));
            }
            row.prefix.resize(t.from, 0);
            row.tail = Some(RowTail {
                block: t.block,
                ratio: t.ratio,
            });
        }
        for e in file.entries {
            let row = rows.entry(e.site).or_default();
            if row.tail.is_some() && e.stage >= row.prefix.len() {
                return Err(Error::InvalidCertificate(format!(
                    "entry at site {} stage {} lies inside the periodic tail",
                    e.site, e.stage
                )));
            }
            if row.prefix.len() <= e.stage {
                row.prefix.resize(e.stage + 1, 0);
            }
            row.prefix[e.stage] = e.count;
        }
        StoppingMatrix::new(file.half_width, rows)
    }
}

impl From<StoppingMatrix> for MatrixFile {
    fn from(m: StoppingMatrix) -> Self {
        let mut entries = Vec::new();
        let mut tails = Vec::new();
        for (&site, row) in &m.rows {
            for (stage, &count) in row.prefix.iter().enumerate() {
                if count != 0 {
                    entries.push(EntryTriple { site, stage, count });
                }
            }
            if let Some(t) = &row.tail {
                tails.push(TailFile {
                    site,
                    from: row.prefix.len(),
                    block: t.block.clone(),
                    ratio: t.ratio,
                });
            }
        }
        MatrixFile {
            half_width: m.half_width,
            entries,
            tails,
        }
    }
}

impl StoppingMatrix {
    pub fn new(half_width: u32, rows: BTreeMap<i64, MatrixRow>) -> Result<Self> {
        let n = i64::from(half_width);
        for (&site, row) in &rows {
            if site.abs() > n {
                return Err(Error::InvalidCertificate(format!(
                    "row for site {site} outside [-{n}, {n}]"
                )));
            }
            if let Some(t) = &row.tail {
                if t.block.is_empty() || t.ratio == 0 {
                    return Err(Error::InvalidCertificate(format!(
                        "tail at site {site} needs a nonempty block and ratio ≥ 1"
                    )));
                }
                let len = t.block.len() as u32;
                if len >= 32 || u128::from(t.ratio) >= 1u128 << (2 * len) {
                    return Err(Error::InvalidCertificate(format!(
                        "tail at site {site} grows too fast to sum"
                    )));
                }
            }
        }
        let rows = rows.into_iter().filter(|(_, r)| !r.is_zero()).collect();
        Ok(StoppingMatrix { half_width, rows })
    }

    /// Matrix with the given finite rows.
    pub fn finite(
        half_width: u32,
        rows: impl IntoIterator<Item = (i64, Vec<u64>)>,
    ) -> Result<Self> {
        StoppingMatrix::new(
            half_width,
            rows.into_iter()
                .map(|(s, r)| (s, MatrixRow::finite(r)))
                .collect(),
        )
    }

    /// `N = 1` matrix from the digits of `p_0`: stage `n` stops `a_n` classes at 0.
    pub fn from_digits(zero: &Base4Expansion) -> Result<Self> {
        Self::from_s3_digits(zero, None)
    }

    /// `N = 1` matrix from the digits of `p_0`, `p_{-1}/2`, `p_1/2`.
    pub fn from_s3_digits(
        zero: &Base4Expansion,
        odd: Option<(&Base4Expansion, &Base4Expansion)>,
    ) -> Result<Self> {
        let mut rows = BTreeMap::new();
        rows.insert(0, digit_row(zero)?);
        if let Some((minus, plus)) = odd {
            if minus.integer != 0 || plus.integer != 0 {
                return Err(Error::InvalidCertificate(
                    "odd-site digit streams must start with 0".into(),
                ));
            }
            rows.insert(-1, digit_row(minus)?);
            rows.insert(1, digit_row(plus)?);
        }
        StoppingMatrix::new(1, rows)
    }

    pub fn half_width(&self) -> u32 {
        self.half_width
    }

    pub fn rows(&self) -> &BTreeMap<i64, MatrixRow> {
        &self.rows
    }

    pub fn boundary(&self) -> i64 {
        i64::from(self.half_width) + 1
    }

    pub fn entry(&self, site: i64, stage: usize) -> BigUint {
        self.rows
            .get(&site)
            .map(|r| r.entry(stage))
            .unwrap_or_default()
    }

    /// Entry at time `t`: stage `⌈t/2⌉` at sites of parity `t`.
    pub fn entry_at_time(&self, site: i64, time: usize) -> BigUint {
        if (site - time as i64).rem_euclid(2) != 0 {
            return BigUint::zero();
        }
        self.entry(site, time.div_ceil(2))
    }

    pub fn is_terminating_rows(&self) -> bool {
        self.rows.values().all(|r| r.tail.is_none())
    }

    /// Stage from which every row follows its tail (or is zero).
    pub fn tail_start(&self) -> usize {
        self.rows
            .values()
            .map(|r| r.prefix.len())
            .max()
            .unwrap_or(0)
    }

    /// Common `(L, ρ)` such that `a_{n+L} = ρ a_n` past `tail_start`; `None`
    /// when the row tails are incommensurable.
    fn common_period(&self) -> Option<(usize, BigUint)> {
        let tails: Vec<&RowTail> = self.rows.values().filter_map(|r| r.tail.as_ref()).collect();
        if tails.is_empty() {
            return Some((1, BigUint::zero()));
        }
        let l = tails
            .iter()
            .map(|t| t.block.len())
            .fold(1, |a, b| a / gcd(a, b) * b);
        let mut rho: Option<BigUint> = None;
        for t in tails {
            let r = BigUint::from(t.ratio).pow((l / t.block.len()) as u32);
            match &rho {
                None => rho = Some(r),
                Some(x) if *x != r => return None,
                _ => {}
            }
        }
        rho.map(|r| (l, r))
    }

    /// Stopped mass at `site`: `2^{site mod 2} Σ 4^{-n} a_n`.
    pub fn atom(&self, site: i64) -> Rational {
        let sum = self
            .rows
            .get(&site)
            .map(|r| r.quarter_sum())
            .unwrap_or_default();
        if site.rem_euclid(2) == 1 {
            sum * Rational::from(2)
        } else {
            sum
        }
    }
}

fn digit_row(e: &Base4Expansion) -> Result<MatrixRow> {
    if e.preperiod.iter().chain(&e.period).any(|&d| d > 3) {
        return Err(Error::InvalidCertificate(format!("digit above 3 in {e}")));
    }
    let mut prefix = vec![e.integer];
    prefix.extend(e.preperiod.iter().map(|&d| u64::from(d)));
    let tail = (!e.period.is_empty()).then(|| RowTail {
        block: e.period.iter().map(|&d| u64::from(d)).collect(),
        ratio: 1,
    });
    Ok(MatrixRow { prefix, tail })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Alive path classes `k^i_n` at stage `n` for every site in `[-(N+1), N+1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathCountState {
    pub stage: usize,
    half_width: u32,
    counts: Vec<BigUint>,
}

impl PathCountState {
    pub fn initial(half_width: u32) -> Self {
        let width = 2 * half_width as usize + 3;
        let mut counts = vec![BigUint::zero(); width];
        counts[half_width as usize + 1] = BigUint::from(1u8);
        PathCountState {
            stage: 0,
            half_width,
            counts,
        }
    }

    fn index(&self, site: i64) -> Option<usize> {
        let b = i64::from(self.half_width) + 1;
        (site.abs() <= b).then(|| (site + b) as usize)
    }

    pub fn count(&self, site: i64) -> BigUint {
        self.index(site)
            .map(|i| self.counts[i].clone())
            .unwrap_or_default()
    }

    pub fn sites(&self) -> std::ops::RangeInclusive<i64> {
        let b = i64::from(self.half_width) + 1;
        -b..=b
    }

    /// Classes leaving `site` after its stops; none leave the boundary.
    fn survivors(&self, m: &StoppingMatrix, site: i64, stage: usize) -> BigUint {
        if site.abs() > i64::from(self.half_width) {
            return BigUint::zero();
        }
        let k = self.count(site);
        let a = m.entry(site, stage);
        if a >= k {
            BigUint::zero()
        } else {
            k - a
        }
    }

    /// Odd sites at stage `n+1` from even neighbors at stage `n`, then even
    /// sites at stage `n+1` from those odd sites.
    pub fn advance(&self, m: &StoppingMatrix) -> PathCountState {
        let n = self.stage;
        let mut next = PathCountState {
            stage: n + 1,
            half_width: self.half_width,
            counts: vec![BigUint::zero(); self.counts.len()],
        };
        let sites: Vec<i64> = self.sites().collect();
        for &s in sites.iter().filter(|s| s.rem_euclid(2) == 1) {
            let v = self.survivors(m, s - 1, n) + self.survivors(m, s + 1, n);
            let i = next.index(s).expect("site in range");
            next.counts[i] = v;
        }
        for &s in sites.iter().filter(|s| s.rem_euclid(2) == 0) {
            let v = next.survivors(m, s - 1, n + 1) + next.survivors(m, s + 1, n + 1);
            let i = next.index(s).expect("site in range");
            next.counts[i] = v;
        }
        next
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ViolationKind {
    /// `a^i_n > k^i_n`.
    Capacity { needed: String, available: String },
    /// Partial digit sums already exceed the atom.
    AtomExceeded { atom: Rational, partial: Rational },
    /// Full digit sum differs from the atom.
    AtomMismatch { atom: Rational, total: Rational },
    /// Optional stopping forces a mean-zero law.
    NotCentered { mean: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub site: i64,
    /// `None` for conditions on whole rows.
    pub stage: Option<usize>,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum MatrixVerdict {
    /// Every stage is feasible: stages up to `certified_at` were checked
    /// directly and later ones follow from `k_{n+L} ≥ ρ k_n`.
    #[serde(rename_all = "camelCase")]
    Valid {
        certified_at: usize,
    },
    Violation(Violation),
    /// Neither a violation nor a certificate within the stage budget.
    #[serde(rename_all = "camelCase")]
    Inconclusive {
        stages_checked: usize,
    },
}

impl MatrixVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, MatrixVerdict::Valid { .. })
    }
}

pub const DEFAULT_VERIFY_STAGES: usize = 4096;

/// Checks `a^i_n ≤ k^i_n` stage by stage and `μ({i}) = 2^{i mod 2} Σ 4^{-n} a^i_n`
/// at interior sites; boundary atoms follow from optional stopping.
pub fn verify_matrix(m: &StoppingMatrix, mu: &IntegerMeasure) -> Result<MatrixVerdict> {
    verify_matrix_with(m, mu, DEFAULT_VERIFY_STAGES)
}

pub fn verify_matrix_with(
    m: &StoppingMatrix,
    mu: &IntegerMeasure,
    max_stages: usize,
) -> Result<MatrixVerdict> {
    let b = m.boundary();
    if mu.radius() > b {
        return Err(Error::Unsupported(format!(
            "measure reaches {} beyond the boundary ±{b}",
            mu.radius()
        )));
    }
    let interior: Vec<i64> = (-b + 1..b).collect();
    let odd: Vec<i64> = interior
        .iter()
        .copied()
        .filter(|s| s.rem_euclid(2) == 1)
        .collect();
    let even: Vec<i64> = interior
        .iter()
        .copied()
        .filter(|s| s.rem_euclid(2) == 0)
        .collect();
    let budget = |s: i64| {
        let w = mu.weight(s);
        if s.rem_euclid(2) == 1 {
            w * Rational::frac(1, 2)
        } else {
            w
        }
    };
    let mut partial: BTreeMap<i64, Rational> = BTreeMap::new();
    let period = m.common_period();
    let start = m.tail_start();
    let mut history: VecDeque<PathCountState> = VecDeque::new();
    let mut state = PathCountState::initial(m.half_width);
    let mut certified = None;

    for n in 0..max_stages {
        if n > 0 {
            state = state.advance(m);
        }
        // odd sites act at time 2n - 1, before the even sites at time 2n
        let odd_now: &[i64] = if n == 0 { &[] } else { &odd };
        for &s in odd_now.iter().chain(&even) {
            let a = m.entry(s, n);
            if a.is_zero() {
                continue;
            }
            let p = partial.entry(s).or_default();
            *p += Rational::quarter_pow(n as u64).mul_uint(&a);
            let atom = budget(s);
            if *p > atom {
                return Ok(MatrixVerdict::Violation(Violation {
                    site: s,
                    stage: Some(n),
                    kind: ViolationKind::AtomExceeded {
                        atom: mu.weight(s),
                        partial: scale_back(s, p),
                    },
                }));
            }
            let k = state.count(s);
            if a > k {
                return Ok(MatrixVerdict::Violation(Violation {
                    site: s,
                    stage: Some(n),
                    kind: ViolationKind::Capacity {
                        needed: a.to_string(),
                        available: k.to_string(),
                    },
                }));
            }
        }
        if let Some((l, rho)) = &period {
            if rho.is_zero() && n >= start {
                certified = Some(n);
                break;
            }
            if n >= start + l {
                let past = &history[history.len() - l];
                if interior
                    .iter()
                    .all(|&s| state.count(s) >= rho * past.count(s))
                {
                    certified = Some(n);
                    break;
                }
            }
            history.push_back(state.clone());
            if history.len() > *l {
                history.pop_front();
            }
        }
    }
    let Some(certified_at) = certified else {
        return Ok(MatrixVerdict::Inconclusive {
            stages_checked: max_stages,
        });
    };
    for &s in &interior {
        let total = m.atom(s);
        if total != mu.weight(s) {
            return Ok(MatrixVerdict::Violation(Violation {
                site: s,
                stage: None,
                kind: ViolationKind::AtomMismatch {
                    atom: mu.weight(s),
                    total,
                },
            }));
        }
    }
    let mean = mu.mean();
    if !mean.is_zero() {
        return Ok(MatrixVerdict::Violation(Violation {
            site: b,
            stage: None,
            kind: ViolationKind::NotCentered { mean },
        }));
    }
    Ok(MatrixVerdict::Valid { certified_at })
}

fn scale_back(site: i64, x: &Rational) -> Rational {
    if site.rem_euclid(2) == 1 {
        x * &Rational::from(2)
    } else {
        x.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum MatrixSearch {
    /// `terminating`: every path stops, in the interior or at the boundary,
    /// by a finite time.
    Member {
        matrix: StoppingMatrix,
        terminating: bool,
    },
    #[serde(rename_all = "camelCase")]
    Unknown { stages_tried: usize },
}

impl MatrixSearch {
    pub fn is_member(&self) -> bool {
        matches!(self, MatrixSearch::Member { .. })
    }
}

/// Half-step search state: classes alive at time `t` and residual atom mass.
#[derive(Clone, PartialEq, Eq, Hash)]
struct HalfStep {
    t: usize,
    counts: Vec<BigUint>,
    residual: Vec<Rational>,
}

struct Searcher {
    b: i64,
    nodes: usize,
    node_budget: usize,
    max_time: usize,
    failed: HashSet<HalfStep>,
}

impl Searcher {
    fn idx(&self, site: i64) -> usize {
        (site + self.b) as usize
    }

    fn interior(&self, parity: usize) -> Vec<i64> {
        (-self.b + 1..self.b)
            .filter(|s| s.rem_euclid(2) as usize == parity)
            .collect()
    }

    fn alive_mass(&self, st: &HalfStep) -> Rational {
        let alive: BigUint = (-self.b + 1..self.b)
            .map(|s| st.counts[self.idx(s)].clone())
            .sum();
        Rational::from(alive) * Rational::pow2(-(st.t as i64))
    }

    fn max_stop(&self, st: &HalfStep, s: i64) -> BigUint {
        let i = self.idx(s);
        let by_mass = st.residual[i]
            .mul_uint(&(BigUint::from(1u8) << st.t))
            .floor_uint()
            .unwrap_or_default();
        by_mass.min(st.counts[i].clone())
    }

    /// Applies stops `a` at time `t` and moves survivors one step.
    fn step(&self, st: &HalfStep, stops: &[(i64, BigUint)]) -> HalfStep {
        let mut surv = st.counts.clone();
        let mut residual = st.residual.clone();
        let w = Rational::pow2(-(st.t as i64));
        for (s, a) in stops {
            let i = self.idx(*s);
            surv[i] -= a;
            residual[i] -= w.mul_uint(a);
        }
        surv[0] = BigUint::zero();
        let last = surv.len() - 1;
        surv[last] = BigUint::zero();
        let mut counts = vec![BigUint::zero(); surv.len()];
        for i in 0..counts.len() {
            let left = if i > 0 {
                surv[i - 1].clone()
            } else {
                BigUint::zero()
            };
            let right = if i < last {
                surv[i + 1].clone()
            } else {
                BigUint::zero()
            };
            counts[i] = left + right;
        }
        HalfStep {
            t: st.t + 1,
            counts,
            residual,
        }
    }

    fn interior_alive(&self, st: &HalfStep) -> bool {
        (-self.b + 1..self.b).any(|s| !st.counts[self.idx(s)].is_zero())
    }

    /// Depth-first search for stops after which no interior class survives
    /// and every residual is zero.
    fn terminating(&mut self, st: &HalfStep) -> Option<Vec<Vec<(i64, BigUint)>>> {
        self.nodes += 1;
        let done = st.residual.iter().all(Rational::is_zero);
        if !self.interior_alive(st) {
            return done.then(Vec::new);
        }
        if done
            || st.t > self.max_time
            || self.nodes >= self.node_budget
            || self.failed.contains(st)
        {
            return None;
        }
        let remaining: Rational = st.residual.iter().sum();
        if remaining > self.alive_mass(st) {
            return None;
        }
        let sites = self.interior(st.t % 2);
        let caps: Vec<BigUint> = sites.iter().map(|&s| self.max_stop(st, s)).collect();
        let mut choice = caps.clone();
        loop {
            let stops: Vec<(i64, BigUint)> =
                sites.iter().copied().zip(choice.iter().cloned()).collect();
            let next = self.step(st, &stops);
            if let Some(mut rest) = self.terminating(&next) {
                rest.insert(0, stops);
                return Some(rest);
            }
            // next choice in decreasing lexicographic order
            let mut j = choice.len();
            loop {
                if j == 0 {
                    self.failed.insert(st.clone());
                    return None;
                }
                j -= 1;
                if !choice[j].is_zero() {
                    choice[j] -= 1u8;
                    for (c, cap) in choice.iter_mut().zip(&caps).skip(j + 1) {
                        *c = cap.clone();
                    }
                    break;
                }
            }
        }
    }
}

/// Converts per-time stops into matrix rows.
fn rows_from_stops(b: i64, stops: &[Vec<(i64, BigUint)>]) -> Option<BTreeMap<i64, Vec<u64>>> {
    let mut rows: BTreeMap<i64, Vec<u64>> = BTreeMap::new();
    for (t, list) in stops.iter().enumerate() {
        let stage = t.div_ceil(2);
        for (s, a) in list {
            if a.is_zero() {
                continue;
            }
            debug_assert!(s.abs() < b);
            let row = rows.entry(*s).or_default();
            if row.len() <= stage {
                row.resize(stage + 1, 0);
            }
            row[stage] = a.to_u64()?;
        }
    }
    Some(rows)
}

/// Builds a stopping matrix for `μ`: first a terminating one by bounded
/// backtracking, then greedy largest stops with detection of a geometric
/// tail. Every candidate is checked by [`verify_matrix`].
pub fn search_matrix(mu: &IntegerMeasure, max_stage: usize) -> Result<MatrixSearch> {
    mu.require_centered()?;
    let b = mu.radius().max(1);
    let half_width = (b - 1) as u32;
    let width = 2 * b as usize + 1;
    let mut residual = vec![Rational::zero(); width];
    for s in -b + 1..b {
        residual[(s + b) as usize] = mu.weight(s);
    }
    let mut counts = vec![BigUint::zero(); width];
    counts[b as usize] = BigUint::from(1u8);
    let root = HalfStep {
        t: 0,
        counts,
        residual,
    };

    let mut searcher = Searcher {
        b,
        nodes: 0,
        node_budget: 50_000,
        max_time: (2 * max_stage).min(48),
        failed: HashSet::new(),
    };
    if let Some(stops) = searcher.terminating(&root) {
        if let Some(rows) = rows_from_stops(b, &stops) {
            let m = StoppingMatrix::finite(half_width, rows)?;
            if verify_matrix(&m, mu)?.is_valid() {
                return Ok(MatrixSearch::Member {
                    matrix: m,
                    terminating: true,
                });
            }
        }
    }

    // greedy with tail detection
    let mut st = root;
    let mut stops: Vec<Vec<(i64, BigUint)>> = Vec::new();
    let mut tried = 0usize;
    while st.t <= 2 * max_stage {
        let sites = searcher.interior(st.t % 2);
        let list: Vec<(i64, BigUint)> = sites
            .iter()
            .map(|&s| (s, searcher.max_stop(&st, s)))
            .collect();
        st = searcher.step(&st, &list);
        stops.push(list);
        if st.residual.iter().all(Rational::is_zero) {
            let Some(rows) = rows_from_stops(b, &stops) else {
                break;
            };
            let m = StoppingMatrix::finite(half_width, rows)?;
            if verify_matrix(&m, mu)?.is_valid() {
                let terminating = !searcher.interior_alive(&st);
                return Ok(MatrixSearch::Member {
                    matrix: m,
                    terminating,
                });
            }
            break;
        }
        // after a full stage: look for a_{n+L} = ρ a_n over the last two periods
        if st.t % 2 == 1 {
            let stage = st.t / 2;
            let Some(rows) = rows_from_stops(b, &stops) else {
                break;
            };
            for l in 1..=6usize {
                if stage + 1 < 2 * l {
                    break;
                }
                let from = stage + 1 - 2 * l;
                if let Some(m) = tail_candidate(half_width, &rows, from, l, stage) {
                    tried += 1;
                    if verify_matrix_with(&m, mu, 1024)?.is_valid() {
                        return Ok(MatrixSearch::Member {
                            matrix: m,
                            terminating: false,
                        });
                    }
                }
            }
            if tried > 4 * max_stage {
                break;
            }
        }
    }
    Ok(MatrixSearch::Unknown {
        stages_tried: st.t.div_ceil(2),
    })
}

/// Rows cut at `from` with block `from..from+L` repeating at a common integer
/// ratio, if the stages up to `last` agree with it.
fn tail_candidate(
    half_width: u32,
    rows: &BTreeMap<i64, Vec<u64>>,
    from: usize,
    l: usize,
    last: usize,
) -> Option<StoppingMatrix> {
    let at = |row: &Vec<u64>, n: usize| row.get(n).copied().unwrap_or(0);
    let mut ratio: Option<u64> = None;
    for row in rows.values() {
        for n in from..from + l {
            let (x, y) = (at(row, n), at(row, n + l));
            if x == 0 && y == 0 {
                continue;
            }
            if x == 0 || y % x != 0 {
                return None;
            }
            match ratio {
                None => ratio = Some(y / x),
                Some(r) if r != y / x => return None,
                _ => {}
            }
        }
    }
    let ratio = ratio?;
    if ratio == 0 {
        return None;
    }
    for row in rows.values() {
        for n in from..=last.saturating_sub(l) {
            if at(row, n + l) != ratio * at(row, n) {
                return None;
            }
        }
    }
    let out = rows
        .iter()
        .map(|(&s, row)| {
            let prefix: Vec<u64> = (0..from).map(|n| at(row, n)).collect();
            let block: Vec<u64> = (from..from + l).map(|n| at(row, n)).collect();
            let tail = block
                .iter()
                .any(|&a| a != 0)
                .then_some(RowTail { block, ratio });
            (s, MatrixRow { prefix, tail })
        })
        .collect();
    StoppingMatrix::new(half_width, out).ok()
}
