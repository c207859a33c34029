//! Domain types shared by every setting: individuals, type reports, problems,
//! outcomes, feasibility and profile recombination.

use std::fmt;
use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::perm::{self, factorial, Ranking, MAX_N};

/// Largest bid grid supported; payments must fit the 8-bit share encoding.
pub const MAX_BID: u32 = 127;

/// Per-object priority scores of one individual.
pub type Scores = SmallVec<[u32; MAX_N]>;

/// A set of individuals as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Group(u32);

impl Group {
    pub const EMPTY: Group = Group(0);

    pub fn from_bits(bits: u32) -> Self {
        Group(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn full(n: usize) -> Self {
        Group(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        Group(1 << i)
    }

    pub fn from_members(members: impl IntoIterator<Item = usize>) -> Self {
        Group(members.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        Group(self.0 | (1 << i))
    }

    pub fn without(self, i: usize) -> Self {
        Group(self.0 & !(1 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: Group) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Group) -> Self {
        Group(self.0 | other.0)
    }

    pub fn intersection(self, other: Group) -> Self {
        Group(self.0 & other.0)
    }

    pub fn complement(self, n: usize) -> Self {
        Group(!self.0 & Group::full(n).0)
    }

    /// Members in increasing order.
    pub fn members(self) -> impl Iterator<Item = usize> + Clone {
        let bits = self.0;
        (0..32).filter(move |&i| bits & (1 << i) != 0)
    }

    /// All `k`-subsets of `0..n`, ordered lexicographically by sorted member list.
    pub fn combinations(n: usize, k: usize) -> Vec<Group> {
        use itertools::Itertools;
        (0..n).combinations(k).map(Group::from_members).collect()
    }
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for Group {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.members())
    }
}

impl<'de> Deserialize<'de> for Group {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let members = Vec::<usize>::deserialize(d)?;
        if let Some(&bad) = members.iter().find(|&&i| i >= MAX_N) {
            return Err(serde::de::Error::custom(format!(
                "individual index {bad} out of range"
            )));
        }
        Ok(Group::from_members(members))
    }
}

/// Quota, reserve and beneficiary group of the affirmative-action setting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReservesConfig {
    pub q: usize,
    pub r: usize,
    pub low_income: Group,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SettingKind {
    Priority,
    House,
    Auction { max_bid: u32 },
    Vote,
    Reserves(ReservesConfig),
}

/// The environment a problem lives in: the number of individuals and the
/// setting-specific public parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Setting {
    pub n: usize,
    pub kind: SettingKind,
}

impl Setting {
    pub fn priority(n: usize) -> Self {
        Setting {
            n,
            kind: SettingKind::Priority,
        }
    }

    pub fn house(n: usize) -> Self {
        Setting {
            n,
            kind: SettingKind::House,
        }
    }

    pub fn auction(n: usize, max_bid: u32) -> Self {
        Setting {
            n,
            kind: SettingKind::Auction { max_bid },
        }
    }

    pub fn vote(n: usize) -> Self {
        Setting {
            n,
            kind: SettingKind::Vote,
        }
    }

    pub fn reserves(n: usize, q: usize, r: usize, low_income: Group) -> Self {
        Setting {
            n,
            kind: SettingKind::Reserves(ReservesConfig { q, r, low_income }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SettingKind::Priority => "priority",
            SettingKind::House => "house",
            SettingKind::Auction { .. } => "auction",
            SettingKind::Vote => "vote",
            SettingKind::Reserves(_) => "reserves",
        }
    }

    /// Whether outcomes are one-to-one assignments of `n` objects.
    pub fn is_allocation(&self) -> bool {
        matches!(self.kind, SettingKind::Priority | SettingKind::House)
    }

    pub fn max_bid(&self) -> Option<u32> {
        match self.kind {
            SettingKind::Auction { max_bid } => Some(max_bid),
            _ => None,
        }
    }

    pub fn reserves_config(&self) -> Option<ReservesConfig> {
        match self.kind {
            SettingKind::Reserves(cfg) => Some(cfg),
            _ => None,
        }
    }

    /// Short human-readable parameter summary, e.g. `k=5` or `q=3;r=1;low=0,1`.
    pub fn params_label(&self) -> String {
        match self.kind {
            SettingKind::Auction { max_bid } => format!("k={max_bid}"),
            SettingKind::Reserves(c) => {
                let low: Vec<String> = c.low_income.members().map(|i| i.to_string()).collect();
                format!("q={};r={};low={}", c.q, c.r, low.join(","))
            }
            _ => String::new(),
        }
    }

    /// Setting name, size and parameters, e.g. `auction n=3 k=5`.
    pub fn describe(&self) -> String {
        let params = self.params_label();
        if params.is_empty() {
            format!("{} n={}", self.name(), self.n)
        } else {
            format!("{} n={} {params}", self.name(), self.n)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return Err(Error::config(format!("n must be at least 2, got {n}")));
        }
        if n > MAX_N {
            return Err(Error::config(format!("n must be at most {MAX_N}, got {n}")));
        }
        match self.kind {
            SettingKind::Auction { max_bid } => {
                if max_bid < n as u32 + 1 {
                    return Err(Error::config(format!(
                        "bid grid max k = {max_bid} must be at least n + 1 = {}",
                        n + 1
                    )));
                }
                if max_bid > MAX_BID {
                    return Err(Error::config(format!(
                        "bid grid max k = {max_bid} exceeds supported maximum {MAX_BID}"
                    )));
                }
            }
            SettingKind::Reserves(c) => {
                if !c.low_income.is_subset(Group::full(n)) {
                    return Err(Error::config(format!(
                        "low-income set {} is not a subset of 0..{n}",
                        c.low_income
                    )));
                }
                if c.r > c.low_income.len() {
                    return Err(Error::config(format!(
                        "reserve r = {} exceeds low-income group size {}",
                        c.r,
                        c.low_income.len()
                    )));
                }
                if c.r > c.q || c.q >= n {
                    return Err(Error::config(format!(
                        "need r <= q < n, got r = {}, q = {}, n = {n}",
                        c.r, c.q
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// One individual's private report.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeReport {
    /// Preference ranking (best first) and per-object priority scores.
    Priority {
        pref: Ranking,
        scores: Scores,
    },
    /// Preference ranking only.
    House {
        pref: Ranking,
    },
    Bid(u32),
    Vote(bool),
    /// Priority score in the affirmative-action setting.
    Score(u32),
}

impl TypeReport {
    pub fn pref(&self) -> &[u8] {
        match self {
            TypeReport::Priority { pref, .. } | TypeReport::House { pref } => pref,
            _ => &[],
        }
    }
}

/// The canonical finite type space of one individual, in deterministic order.
pub fn enumerate_type_space(setting: &Setting, individual: usize) -> Result<Vec<TypeReport>> {
    setting.validate()?;
    let n = setting.n;
    if individual >= n {
        return Err(Error::usage(format!(
            "individual {individual} out of range 0..{n}"
        )));
    }
    let prefs = perm::permutations(n);
    Ok(match setting.kind {
        SettingKind::House => prefs
            .iter()
            .map(|p| TypeReport::House { pref: p.clone() })
            .collect(),
        SettingKind::Priority => {
            let vectors = (n as u128).pow(n as u32);
            let mut out = Vec::new();
            for p in prefs {
                for mut v in 0..vectors {
                    let mut scores = Scores::from_elem(0, n);
                    for o in (0..n).rev() {
                        scores[o] = (v % n as u128) as u32;
                        v /= n as u128;
                    }
                    out.push(TypeReport::Priority {
                        pref: p.clone(),
                        scores,
                    });
                }
            }
            out
        }
        SettingKind::Auction { max_bid } => (1..=max_bid).map(TypeReport::Bid).collect(),
        SettingKind::Vote => vec![TypeReport::Vote(false), TypeReport::Vote(true)],
        SettingKind::Reserves(_) => (1..=n as u32).map(TypeReport::Score).collect(),
    })
}

/// A profile of type reports together with its setting.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Problem {
    pub setting: Setting,
    pub reports: Vec<TypeReport>,
}

impl Problem {
    pub fn new(setting: Setting, reports: Vec<TypeReport>) -> Result<Self> {
        let p = Problem { setting, reports };
        p.check()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.setting.n
    }

    pub fn house(prefs: &[&[u8]]) -> Result<Self> {
        Problem::new(
            Setting::house(prefs.len()),
            prefs
                .iter()
                .map(|p| TypeReport::House {
                    pref: p.iter().copied().collect(),
                })
                .collect(),
        )
    }

    /// `scores[i][o]` is individual `i`'s score at object `o`.
    pub fn priority(prefs: &[&[u8]], scores: &[&[u32]]) -> Result<Self> {
        if prefs.len() != scores.len() {
            return Err(Error::input("preferences and scores differ in length"));
        }
        Problem::new(
            Setting::priority(prefs.len()),
            prefs
                .iter()
                .zip(scores)
                .map(|(p, s)| TypeReport::Priority {
                    pref: p.iter().copied().collect(),
                    scores: s.iter().copied().collect(),
                })
                .collect(),
        )
    }

    pub fn auction(max_bid: u32, bids: &[u32]) -> Result<Self> {
        Problem::new(
            Setting::auction(bids.len(), max_bid),
            bids.iter().map(|&b| TypeReport::Bid(b)).collect(),
        )
    }

    pub fn vote(votes: &[u8]) -> Result<Self> {
        Problem::new(
            Setting::vote(votes.len()),
            votes.iter().map(|&v| TypeReport::Vote(v != 0)).collect(),
        )
    }

    pub fn reserves(q: usize, r: usize, low_income: Group, scores: &[u32]) -> Result<Self> {
        Problem::new(
            Setting::reserves(scores.len(), q, r, low_income),
            scores.iter().map(|&s| TypeReport::Score(s)).collect(),
        )
    }

    pub fn pref(&self, i: usize) -> &[u8] {
        self.reports[i].pref()
    }

    pub fn scores(&self, i: usize) -> &[u32] {
        match &self.reports[i] {
            TypeReport::Priority { scores, .. } => scores,
            _ => &[],
        }
    }

    pub fn bid(&self, i: usize) -> u32 {
        match self.reports[i] {
            TypeReport::Bid(b) => b,
            _ => 0,
        }
    }

    pub fn vote_of(&self, i: usize) -> bool {
        matches!(self.reports[i], TypeReport::Vote(true))
    }

    pub fn score(&self, i: usize) -> u32 {
        match self.reports[i] {
            TypeReport::Score(s) => s,
            _ => 0,
        }
    }

    /// Shape check: every report has the setting's variant and valid ranges.
    /// Violations are input errors.
    pub fn check_shape(&self) -> Result<()> {
        self.setting.validate()?;
        let n = self.n();
        if self.reports.len() != n {
            return Err(Error::input(format!(
                "expected {n} reports, got {}",
                self.reports.len()
            )));
        }
        for (i, r) in self.reports.iter().enumerate() {
            let ok = match (&self.setting.kind, r) {
                (SettingKind::Priority, TypeReport::Priority { pref, scores }) => {
                    pref.len() == n && perm::is_permutation(pref) && scores.len() == n
                }
                (SettingKind::House, TypeReport::House { pref }) => {
                    pref.len() == n && perm::is_permutation(pref)
                }
                (SettingKind::Auction { max_bid }, TypeReport::Bid(b)) => {
                    (1..=*max_bid).contains(b)
                }
                (SettingKind::Vote, TypeReport::Vote(_)) => true,
                (SettingKind::Reserves(_), TypeReport::Score(s)) => *s >= 1,
                _ => false,
            };
            if !ok {
                return Err(Error::input(format!(
                    "report of individual {i} is not valid for a {} setting with n = {n}: {r:?}",
                    self.setting.name()
                )));
            }
        }
        Ok(())
    }

    /// Cross-individual feasibility: strict priorities, distinct bids, distinct scores.
    pub fn is_feasible(&self) -> bool {
        self.infeasibility().is_none()
    }

    fn infeasibility(&self) -> Option<String> {
        let n = self.n();
        match self.setting.kind {
            SettingKind::Priority => {
                for o in 0..n {
                    for i in 0..n {
                        for j in i + 1..n {
                            if self.scores(i)[o] == self.scores(j)[o] {
                                return Some(format!(
                                    "individuals {i} and {j} share score {} at object {o}",
                                    self.scores(i)[o]
                                ));
                            }
                        }
                    }
                }
                None
            }
            SettingKind::Auction { .. } => duplicate((0..n).map(|i| self.bid(i)))
                .map(|b| format!("bid {b} appears more than once")),
            SettingKind::Reserves(_) => duplicate((0..n).map(|i| self.score(i)))
                .map(|s| format!("score {s} appears more than once")),
            SettingKind::House | SettingKind::Vote => None,
        }
    }

    /// Full validation: shape errors are input errors, feasibility
    /// violations are infeasibility errors.
    pub fn check(&self) -> Result<()> {
        self.check_shape()?;
        match self.infeasibility() {
            Some(msg) => Err(Error::infeasible(msg)),
            None => Ok(()),
        }
    }

    /// Canonical byte encoding: setting tag, n, public parameters, then each
    /// report in individual order (integers little-endian).
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.n() * self.n());
        let tag = match self.setting.kind {
            SettingKind::Priority => 0u8,
            SettingKind::House => 1,
            SettingKind::Auction { .. } => 2,
            SettingKind::Vote => 3,
            SettingKind::Reserves(_) => 4,
        };
        out.push(tag);
        out.push(self.n() as u8);
        match self.setting.kind {
            SettingKind::Auction { max_bid } => out.extend_from_slice(&max_bid.to_le_bytes()),
            SettingKind::Reserves(c) => {
                out.push(c.q as u8);
                out.push(c.r as u8);
                out.extend_from_slice(&c.low_income.bits().to_le_bytes());
            }
            _ => {}
        }
        for r in &self.reports {
            match r {
                TypeReport::Priority { pref, scores } => {
                    out.extend_from_slice(pref);
                    for s in scores {
                        out.extend_from_slice(&s.to_le_bytes());
                    }
                }
                TypeReport::House { pref } => out.extend_from_slice(pref),
                TypeReport::Bid(b) | TypeReport::Score(b) => {
                    out.extend_from_slice(&b.to_le_bytes())
                }
                TypeReport::Vote(v) => out.push(*v as u8),
            }
        }
        out
    }

    /// 64-bit FNV-1a hash of the canonical byte encoding.
    pub fn hash64(&self) -> u64 {
        fnv1a64(&self.canonical_bytes())
    }

    /// The problem hash as 16 lowercase hex digits.
    pub fn hash_hex(&self) -> String {
        format!("{:016x}", self.hash64())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

fn duplicate(values: impl Iterator<Item = u32>) -> Option<u32> {
    let mut seen = std::collections::BTreeSet::new();
    values.into_iter().find(|&v| !seen.insert(v))
}

/// Builds `(θ_I, θ'_{-I})` from a problem, a group and reports for every
/// non-member (in increasing index order). Returns `Ok(None)` when the
/// combined profile is infeasible; it is never repaired.
pub fn recombine(
    problem: &Problem,
    group: Group,
    counterpart_reports: &[TypeReport],
) -> Result<Option<Problem>> {
    let n = problem.n();
    let outsiders: Vec<usize> = group.complement(n).members().collect();
    if !group.is_subset(Group::full(n)) || outsiders.len() != counterpart_reports.len() {
        return Err(Error::usage(format!(
            "group {group} needs {} counterpart reports, got {}",
            outsiders.len(),
            counterpart_reports.len()
        )));
    }
    let mut combined = problem.clone();
    for (&i, r) in outsiders.iter().zip(counterpart_reports) {
        combined.reports[i] = r.clone();
    }
    combined
        .check_shape()
        .map_err(|e| Error::usage(e.to_string()))?;
    Ok(combined.is_feasible().then_some(combined))
}

/// A feasible joint outcome.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "OutcomeRepr", into = "OutcomeRepr")]
pub enum Outcome {
    /// Object assigned to each individual.
    Allocation(Ranking),
    /// The single winner and every individual's payment.
    Auction {
        winner: u8,
        payments: SmallVec<[u32; MAX_N]>,
    },
    /// The common binary decision.
    Vote(bool),
    /// The set of selected individuals.
    Chosen(Group),
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum OutcomeRepr {
    Allocation { allocation: Vec<u8> },
    Auction { winner: u8, payments: Vec<u32> },
    Vote { vote: u8 },
    Chosen { chosen: Group },
}

impl From<Outcome> for OutcomeRepr {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Allocation(a) => OutcomeRepr::Allocation {
                allocation: a.to_vec(),
            },
            Outcome::Auction { winner, payments } => OutcomeRepr::Auction {
                winner,
                payments: payments.to_vec(),
            },
            Outcome::Vote(v) => OutcomeRepr::Vote { vote: v as u8 },
            Outcome::Chosen(g) => OutcomeRepr::Chosen { chosen: g },
        }
    }
}

impl TryFrom<OutcomeRepr> for Outcome {
    type Error = String;

    fn try_from(r: OutcomeRepr) -> std::result::Result<Self, String> {
        Ok(match r {
            OutcomeRepr::Allocation { allocation } => {
                Outcome::Allocation(allocation.into_iter().collect())
            }
            OutcomeRepr::Auction { winner, payments } => Outcome::Auction {
                winner,
                payments: payments.into_iter().collect(),
            },
            OutcomeRepr::Vote { vote } if vote <= 1 => Outcome::Vote(vote == 1),
            OutcomeRepr::Vote { vote } => return Err(format!("vote must be 0 or 1, got {vote}")),
            OutcomeRepr::Chosen { chosen } => Outcome::Chosen(chosen),
        })
    }
}

impl Outcome {
    /// Integer code of individual `i`'s share; codes are below 256.
    pub fn share(&self, i: usize) -> u32 {
        match self {
            Outcome::Allocation(a) => a[i] as u32,
            Outcome::Auction { winner, payments } => {
                payments[i] * 2 + (*winner as usize == i) as u32
            }
            Outcome::Vote(v) => *v as u32,
            Outcome::Chosen(g) => g.contains(i) as u32,
        }
    }

    /// The outcome restricted to `group`, packed one byte per member.
    pub fn restriction(&self, group: Group) -> u64 {
        group
            .members()
            .fold(0u64, |acc, i| (acc << 8) | self.share(i) as u64)
    }

    pub fn allocation(&self) -> Option<&[u8]> {
        match self {
            Outcome::Allocation(a) => Some(a),
            _ => None,
        }
    }

    /// Whether the outcome belongs to the feasible universe of `setting`.
    pub fn check(&self, setting: &Setting) -> Result<()> {
        let n = setting.n;
        let ok = match (&setting.kind, self) {
            (SettingKind::Priority | SettingKind::House, Outcome::Allocation(a)) => {
                a.len() == n && perm::is_permutation(a)
            }
            (SettingKind::Auction { max_bid }, Outcome::Auction { winner, payments }) => {
                (*winner as usize) < n
                    && payments.len() == n
                    && payments.iter().all(|p| p <= max_bid)
            }
            (SettingKind::Vote, Outcome::Vote(_)) => true,
            (SettingKind::Reserves(c), Outcome::Chosen(g)) => {
                g.is_subset(Group::full(n))
                    && g.len() == c.q
                    && g.intersection(c.low_income).len() >= c.r
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!(
                "outcome {self:?} is not a feasible {} outcome for n = {n}",
                setting.name()
            )))
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            serde_json::to_string(self).map_err(|_| fmt::Error)?
        )
    }
}

/// The full feasible outcome universe, in lexicographic order.
pub fn enumerate_outcomes(setting: &Setting) -> Vec<Outcome> {
    let n = setting.n;
    match setting.kind {
        SettingKind::Priority | SettingKind::House => perm::permutations(n)
            .iter()
            .map(|p| Outcome::Allocation(p.clone()))
            .collect(),
        SettingKind::Auction { max_bid } => {
            let base = max_bid as u128 + 1;
            let per_winner = base.pow(n as u32);
            let mut out = Vec::with_capacity(n * per_winner as usize);
            for winner in 0..n as u8 {
                for mut code in 0..per_winner {
                    let mut payments: SmallVec<[u32; MAX_N]> = SmallVec::from_elem(0, n);
                    for i in (0..n).rev() {
                        payments[i] = (code % base) as u32;
                        code /= base;
                    }
                    out.push(Outcome::Auction { winner, payments });
                }
            }
            out
        }
        SettingKind::Vote => vec![Outcome::Vote(false), Outcome::Vote(true)],
        SettingKind::Reserves(c) => Group::combinations(n, c.q)
            .into_iter()
            .filter(|g| g.intersection(c.low_income).len() >= c.r)
            .map(Outcome::Chosen)
            .collect(),
    }
}

/// Number of outcomes `enumerate_outcomes` would produce.
pub fn outcome_count(setting: &Setting) -> u128 {
    let n = setting.n;
    match setting.kind {
        SettingKind::Priority | SettingKind::House => factorial(n),
        SettingKind::Auction { max_bid } => n as u128 * (max_bid as u128 + 1).pow(n as u32),
        SettingKind::Vote => 2,
        SettingKind::Reserves(c) => Group::combinations(n, c.q)
            .into_iter()
            .filter(|g| g.intersection(c.low_income).len() >= c.r)
            .count() as u128,
    }
}

/// Indexed enumeration of one representative per ordinal equivalence class.
///
/// Priority problems use per-object rank scores `0..n` (higher is better);
/// reserves problems use rank scores `1..=n`; auction problems are the
/// distinct-bid tuples on the grid; house and vote spaces are full products.
#[derive(Clone, Copy, Debug)]
pub struct ProblemSpace {
    setting: Setting,
    len: u128,
}

impl ProblemSpace {
    pub fn new(setting: Setting) -> Result<Self> {
        setting.validate()?;
        let n = setting.n;
        let f = factorial(n);
        let len = match setting.kind {
            SettingKind::Priority => f.checked_pow(2 * n as u32),
            SettingKind::House => f.checked_pow(n as u32),
            SettingKind::Auction { max_bid } => {
                Some((0..n as u128).map(|t| max_bid as u128 - t).product())
            }
            SettingKind::Vote => Some(1u128 << n),
            SettingKind::Reserves(_) => Some(f),
        }
        .ok_or_else(|| Error::config("problem space size overflows 128 bits"))?;
        Ok(ProblemSpace { setting, len })
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn len(&self) -> u128 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The problem at position `idx` of the deterministic order.
    pub fn get(&self, idx: u128) -> Problem {
        assert!(idx < self.len, "problem index {idx} out of range");
        let n = self.setting.n;
        let prefs = perm::permutations(n);
        let f = prefs.len() as u128;
        let reports = match self.setting.kind {
            SettingKind::Priority => {
                let digits = mixed_radix(idx, f, 2 * n);
                let mut scores = vec![Scores::from_elem(0, n); n];
                for o in 0..n {
                    let order = &prefs[digits[n + o] as usize];
                    for (k, &i) in order.iter().enumerate() {
                        scores[i as usize][o] = (n - 1 - k) as u32;
                    }
                }
                (0..n)
                    .map(|i| TypeReport::Priority {
                        pref: prefs[digits[i] as usize].clone(),
                        scores: scores[i].clone(),
                    })
                    .collect()
            }
            SettingKind::House => mixed_radix(idx, f, n)
                .into_iter()
                .map(|d| TypeReport::House {
                    pref: prefs[d as usize].clone(),
                })
                .collect(),
            SettingKind::Auction { max_bid } => {
                let mut remaining: Vec<u32> = (1..=max_bid).collect();
                let mut digits = vec![0u128; n];
                let mut rest = idx;
                for t in (0..n).rev() {
                    let radix = max_bid as u128 - t as u128;
                    digits[t] = rest % radix;
                    rest /= radix;
                }
                digits
                    .into_iter()
                    .map(|d| TypeReport::Bid(remaining.remove(d as usize)))
                    .collect()
            }
            SettingKind::Vote => (0..n)
                .map(|i| TypeReport::Vote(idx >> (n - 1 - i) & 1 == 1))
                .collect(),
            SettingKind::Reserves(_) => {
                let order = &prefs[idx as usize];
                let mut scores = vec![0u32; n];
                for (k, &i) in order.iter().enumerate() {
                    scores[i as usize] = (n - k) as u32;
                }
                scores.into_iter().map(TypeReport::Score).collect()
            }
        };
        Problem {
            setting: self.setting,
            reports,
        }
    }

    pub fn iter(&self) -> ProblemIter {
        ProblemIter {
            space: *self,
            next: 0,
            end: self.len,
        }
    }

    /// The `k`-th of `parts` contiguous shards of the enumeration.
    pub fn shard(&self, k: u128, parts: u128) -> ProblemIter {
        let start = self.len * k / parts;
        let end = self.len * (k + 1) / parts;
        ProblemIter {
            space: *self,
            next: start,
            end,
        }
    }
}

/// Digits of `idx` in base `radix`, most significant first.
fn mixed_radix(mut idx: u128, radix: u128, len: usize) -> Vec<u128> {
    let mut digits = vec![0; len];
    for d in digits.iter_mut().rev() {
        *d = idx % radix;
        idx /= radix;
    }
    digits
}

/// Cloneable, independently advanceable iterator over a [`ProblemSpace`].
#[derive(Clone, Debug)]
pub struct ProblemIter {
    space: ProblemSpace,
    next: u128,
    end: u128,
}

impl Iterator for ProblemIter {
    type Item = Problem;

    fn next(&mut self) -> Option<Problem> {
        if self.next >= self.end {
            return None;
        }
        let p = self.space.get(self.next);
        self.next += 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next).min(usize::MAX as u128) as usize;
        (left, Some(left))
    }
}

/// Iterator over the canonical problem space of `setting`.
pub fn enumerate_problems(setting: &Setting) -> Result<ProblemIter> {
    Ok(ProblemSpace::new(*setting)?.iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn group_basics() {
        let g = Group::from_members([0, 2]);
        assert_eq!(g.len(), 2);
        assert!(g.contains(2) && !g.contains(1));
        assert_eq!(g.complement(4), Group::from_members([1, 3]));
        assert_eq!(g.to_string(), "{0,2}");
        let pairs = Group::combinations(4, 2);
        assert_eq!(pairs.len(), 6);
        assert_eq!(pairs[0], Group::from_members([0, 1]));
        assert_eq!(pairs[5], Group::from_members([2, 3]));
    }

    #[test]
    fn type_space_sizes() {
        assert_eq!(
            enumerate_type_space(&Setting::house(3), 0).unwrap().len(),
            6
        );
        assert_eq!(
            enumerate_type_space(&Setting::vote(3), 1).unwrap(),
            vec![TypeReport::Vote(false), TypeReport::Vote(true)]
        );
        let bids = enumerate_type_space(&Setting::auction(3, 5), 2).unwrap();
        assert_eq!(bids, (1..=5).map(TypeReport::Bid).collect::<Vec<_>>());
        assert_eq!(
            enumerate_type_space(&Setting::priority(2), 0)
                .unwrap()
                .len(),
            2 * 4
        );
    }

    #[test]
    fn problem_counts() {
        let count = |s: Setting| enumerate_problems(&s).unwrap().count();
        assert_eq!(count(Setting::vote(3)), 8);
        assert_eq!(count(Setting::house(3)), 216);
        assert_eq!(count(Setting::auction(3, 5)), 60);
        assert_eq!(
            count(Setting::reserves(4, 3, 1, Group::from_members([0, 1]))),
            24
        );
    }

    #[test]
    fn priority_n2_space_matches_direct_enumeration() {
        // Oracle: 2 preferences per individual times 2 priority orders per object.
        let mut direct = HashSet::new();
        for p0 in [[0u8, 1], [1, 0]] {
            for p1 in [[0u8, 1], [1, 0]] {
                for top0 in 0..2usize {
                    for top1 in 0..2usize {
                        let mut s = [[0u32; 2]; 2];
                        s[top0][0] = 1;
                        s[top1][1] = 1;
                        direct.insert(Problem::priority(&[&p0, &p1], &[&s[0], &s[1]]).unwrap());
                    }
                }
            }
        }
        let enumerated: HashSet<Problem> =
            enumerate_problems(&Setting::priority(2)).unwrap().collect();
        assert_eq!(enumerated.len(), 16);
        assert_eq!(enumerated, direct);
    }

    #[test]
    fn enumerated_problems_are_feasible_and_distinct() {
        for s in [
            Setting::priority(2),
            Setting::house(3),
            Setting::auction(3, 5),
            Setting::vote(4),
            Setting::reserves(4, 2, 1, Group::from_members([0])),
        ] {
            let all: Vec<Problem> = enumerate_problems(&s).unwrap().collect();
            assert!(all.iter().all(|p| p.check().is_ok()));
            let set: HashSet<&Problem> = all.iter().collect();
            assert_eq!(set.len(), all.len());
        }
    }

    #[test]
    fn shards_cover_the_space() {
        let space = ProblemSpace::new(Setting::house(3)).unwrap();
        let all: Vec<Problem> = space.iter().collect();
        let sharded: Vec<Problem> = (0..4).flat_map(|k| space.shard(k, 4)).collect();
        assert_eq!(all, sharded);
    }

    #[test]
    fn outcome_universes() {
        assert_eq!(enumerate_outcomes(&Setting::house(3)).len(), 6);
        assert_eq!(enumerate_outcomes(&Setting::vote(5)).len(), 2);
        let res = Setting::reserves(4, 3, 1, Group::from_members([0, 1]));
        let outs = enumerate_outcomes(&res);
        assert_eq!(outs.len(), 4);
        assert_eq!(outcome_count(&res), 4);
        let auction = Setting::auction(3, 5);
        let outs = enumerate_outcomes(&auction);
        assert_eq!(outs.len() as u128, outcome_count(&auction));
        let set: HashSet<&Outcome> = outs.iter().collect();
        assert_eq!(set.len(), outs.len());
        assert!(outs.iter().all(|o| o.check(&auction).is_ok()));
    }

    #[test]
    fn recombination() {
        let p = Problem::auction(5, &[5, 2, 3]).unwrap();
        let g = Group::singleton(0);
        assert!(recombine(&p, g, &[TypeReport::Bid(5), TypeReport::Bid(1)])
            .unwrap()
            .is_none());
        let again = recombine(&p, g, &[TypeReport::Bid(2), TypeReport::Bid(3)]).unwrap();
        assert_eq!(again, Some(p.clone()));
        assert!(matches!(
            recombine(&p, g, &[TypeReport::Bid(2)]),
            Err(Error::Usage(_))
        ));

        let h = Problem::house(&[&[0, 1, 2], &[1, 0, 2], &[2, 1, 0]]).unwrap();
        for q in perm::permutations(3) {
            let r = TypeReport::House { pref: q.clone() };
            assert!(recombine(&h, Group::singleton(0), &[r.clone(), r])
                .unwrap()
                .is_some());
        }

        let pr = Problem::priority(&[&[0, 1], &[0, 1]], &[&[1, 0], &[0, 1]]).unwrap();
        let clash = TypeReport::Priority {
            pref: [0u8, 1].into_iter().collect(),
            scores: [1u32, 1].into_iter().collect(),
        };
        assert!(recombine(&pr, Group::singleton(0), &[clash])
            .unwrap()
            .is_none());
    }

    #[test]
    fn fnv_reference_vector() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn outcome_json_shapes() {
        let a = Outcome::Allocation([1u8, 2, 0].into_iter().collect());
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            r#"{"allocation":[1,2,0]}"#
        );
        let v: Outcome = serde_json::from_str(r#"{"vote":1}"#).unwrap();
        assert_eq!(v, Outcome::Vote(true));
        let au: Outcome = serde_json::from_str(r#"{"winner":0,"payments":[4,0,0]}"#).unwrap();
        assert_eq!(au.share(0), 9);
        let c: Outcome = serde_json::from_str(r#"{"chosen":[0,2,3]}"#).unwrap();
        assert_eq!(c, Outcome::Chosen(Group::from_members([0, 2, 3])));
    }

    #[test]
    fn setting_validation() {
        assert!(Setting::auction(3, 3).validate().is_err());
        assert!(Setting::auction(3, 4).validate().is_ok());
        assert!(Setting::house(1).validate().is_err());
        assert!(Setting::reserves(4, 4, 1, Group::from_members([0]))
            .validate()
            .is_err());
        assert!(Setting::reserves(4, 3, 2, Group::from_members([0]))
            .validate()
            .is_err());
    }
}
