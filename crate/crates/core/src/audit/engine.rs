//! Deviation detection, smallest detecting groups and per-problem indices.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use dashmap::DashMap;
use fnv::FnvHashSet;
use rayon::prelude::*;
use serde::Serialize;

use super::space::{member_key, CounterpartSpace, MemberKey, PriorityRoute};
use crate::error::{Error, Result};
use crate::mechanism::MechanismHandle;
use crate::model::{
    enumerate_outcomes, outcome_count, Group, Outcome, Problem, ProblemSpace, Setting,
};

/// Which search produces the achievable restrictions of a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Structural shortcut when the mechanism offers one, otherwise
    /// enumeration of linear-extension counterparts.
    Auto,
    /// Always enumerate counterparts (cross-validation of shortcuts).
    Enumerate,
    /// Enumerate priority counterparts on the integer score grid.
    Grid,
}

#[derive(Clone, Copy, Debug)]
pub struct AuditOptions {
    pub route: Route,
    /// Counterpart spaces up to this size are enumerated once per group and
    /// member reports and cached; larger ones are searched per deviation.
    pub cache_threshold: u128,
    /// Refuse counterpart spaces larger than this.
    pub max_counterparts: u128,
    /// Refuse outcome universes larger than this.
    pub max_outcomes: u128,
    /// Exhaustive sweeps stop after this many problems and report a lower bound.
    pub max_problems: u128,
    /// Also compute a smallest detecting group for every deviation.
    pub per_deviation: bool,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            route: Route::Auto,
            cache_threshold: 2_000_000,
            max_counterparts: 200_000_000,
            max_outcomes: 2_000_000,
            max_problems: 20_000_000,
            per_deviation: false,
        }
    }
}

/// Work counters. Evaluations count mechanism calls (or counterpart
/// profiles scanned by per-deviation searches); cache hits count lookups
/// answered by a previously computed achievable set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AuditStats {
    pub evaluations: u64,
    pub cache_hits: u64,
    pub wall_ms: u64,
}

#[derive(Default)]
pub(crate) struct Counters {
    evaluations: AtomicU64,
    cache_hits: AtomicU64,
}

impl Counters {
    pub(crate) fn add(&self, other: &Counters) {
        self.evaluations
            .fetch_add(other.evaluations.load(Ordering::Relaxed), Ordering::Relaxed);
        self.cache_hits
            .fetch_add(other.cache_hits.load(Ordering::Relaxed), Ordering::Relaxed);
    }

    pub(crate) fn snapshot(&self, started: Instant) -> AuditStats {
        AuditStats {
            evaluations: self.evaluations.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
            wall_ms: started.elapsed().as_millis() as u64,
        }
    }

    fn evaluated(&self, k: u64) {
        self.evaluations.fetch_add(k, Ordering::Relaxed);
    }

    fn hit(&self) {
        self.cache_hits.fetch_add(1, Ordering::Relaxed);
    }
}

/// A smallest group detecting one deviation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeviationWitness {
    pub deviation: Outcome,
    pub min_size: usize,
    pub group: Group,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub mechanism: String,
    pub problem_hash: String,
    /// The outcome the mechanism promises at this problem.
    pub outcome: Outcome,
    pub index: usize,
    /// A deviation whose smallest detecting group has size `index`.
    pub witness_deviation: Option<Outcome>,
    /// The lexicographically first group of size `index` detecting it.
    pub witness_group: Option<Group>,
    /// Per deviation, a smallest detecting group (when requested).
    pub witness_groups: Vec<DeviationWitness>,
    pub stats: AuditStats,
}

impl AuditReport {
    /// The report without wall-clock time, for byte-level comparisons.
    pub fn without_timing(&self) -> AuditReport {
        let mut r = self.clone();
        r.stats.wall_ms = 0;
        r
    }
}

type Achievable = Arc<Vec<u64>>;
type Slot<T> = Arc<OnceLock<Option<T>>>;

/// Audits one mechanism. Achievable restriction sets are shared across
/// problems and threads.
pub struct Auditor {
    mechanism: MechanismHandle,
    setting: Setting,
    options: AuditOptions,
    universe: Vec<Outcome>,
    has_shortcut: bool,
    achievable: DashMap<(u32, MemberKey), Slot<Achievable>>,
    searched: DashMap<(u32, MemberKey, u64), Slot<bool>>,
    restriction_counts: DashMap<u32, usize>,
    pub(crate) totals: Counters,
}

impl Auditor {
    pub fn new(mechanism: MechanismHandle, options: AuditOptions) -> Result<Self> {
        let setting = *mechanism.setting();
        setting.validate()?;
        let count = outcome_count(&setting);
        if count > options.max_outcomes {
            return Err(Error::budget(
                "outcome universe",
                count,
                options.max_outcomes,
            ));
        }
        let probe = ProblemSpace::new(setting)?.get(0);
        let has_shortcut = options.route == Route::Auto
            && mechanism
                .achievable_fast(&probe, Group::singleton(0))
                .is_some();
        Ok(Auditor {
            mechanism,
            setting,
            options,
            universe: enumerate_outcomes(&setting),
            has_shortcut,
            achievable: DashMap::new(),
            searched: DashMap::new(),
            restriction_counts: DashMap::new(),
            totals: Counters::default(),
        })
    }

    pub fn mechanism(&self) -> &MechanismHandle {
        &self.mechanism
    }

    pub fn setting(&self) -> &Setting {
        &self.setting
    }

    pub fn options(&self) -> &AuditOptions {
        &self.options
    }

    /// The feasible outcome universe, in lexicographic order.
    pub fn universe(&self) -> &[Outcome] {
        &self.universe
    }

    /// Totals accumulated by every call on this auditor.
    pub fn stats(&self) -> AuditStats {
        AuditStats {
            evaluations: self.totals.evaluations.load(Ordering::Relaxed),
            cache_hits: self.totals.cache_hits.load(Ordering::Relaxed),
            wall_ms: 0,
        }
    }

    /// A fresh auditor for the same mechanism and options, with empty caches.
    pub fn fresh(&self) -> Auditor {
        Auditor {
            mechanism: self.mechanism.clone(),
            setting: self.setting,
            options: self.options,
            universe: self.universe.clone(),
            has_shortcut: self.has_shortcut,
            achievable: DashMap::new(),
            searched: DashMap::new(),
            restriction_counts: DashMap::new(),
            totals: Counters::default(),
        }
    }

    pub(crate) fn check_problem(&self, problem: &Problem) -> Result<()> {
        if problem.setting != self.setting {
            return Err(Error::input(format!(
                "mechanism '{}' is defined for {}, got a problem for {}",
                self.mechanism.descriptor(),
                self.setting.describe(),
                problem.setting.describe()
            )));
        }
        problem.check()
    }

    pub(crate) fn evaluate(&self, problem: &Problem, c: &Counters) -> Result<Outcome> {
        c.evaluated(1);
        self.mechanism.evaluate(problem)
    }

    fn route(&self) -> PriorityRoute {
        match self.options.route {
            Route::Grid => PriorityRoute::Grid,
            _ => PriorityRoute::LinearExtensions,
        }
    }

    /// Number of distinct restrictions of the outcome universe to `group`.
    fn restriction_count(&self, group: Group) -> usize {
        *self
            .restriction_counts
            .entry(group.bits())
            .or_insert_with(|| {
                self.universe
                    .iter()
                    .map(|o| o.restriction(group))
                    .collect::<FnvHashSet<u64>>()
                    .len()
            })
    }

    /// Whether some counterpart profile makes the mechanism produce the
    /// restriction `code` on `group`.
    pub(crate) fn achievable_contains(
        &self,
        problem: &Problem,
        group: Group,
        code: u64,
        c: &Counters,
    ) -> Result<bool> {
        let key = member_key(problem, group);
        if self.has_shortcut {
            return Ok(self
                .cached_set(problem, group, key, c)?
                .binary_search(&code)
                .is_ok());
        }
        let space = CounterpartSpace::new(problem, group, self.route());
        if space.len() > self.options.max_counterparts {
            return Err(Error::budget(
                format!("counterpart space of group {group}"),
                space.len(),
                self.options.max_counterparts,
            ));
        }
        if space.len() <= self.options.cache_threshold {
            return Ok(self
                .cached_set(problem, group, key, c)?
                .binary_search(&code)
                .is_ok());
        }
        let slot = self
            .searched
            .entry((group.bits(), key, code))
            .or_insert_with(|| Arc::new(OnceLock::new()))
            .clone();
        if let Some(Some(v)) = slot.get() {
            c.hit();
            return Ok(*v);
        }
        // The scan runs outside the slot so that a worker stealing another
        // job during the scan can never block on its own initialization.
        let local = Counters::default();
        let found = self.search(&space, group, code, &local)?;
        if slot.set(Some(found)).is_ok() {
            c.add(&local);
        } else {
            c.hit();
        }
        Ok(found)
    }

    /// Parallel scan for the first counterpart profile producing `code`.
    fn search(
        &self,
        space: &CounterpartSpace,
        group: Group,
        code: u64,
        c: &Counters,
    ) -> Result<bool> {
        let len = u64::try_from(space.len())
            .map_err(|_| Error::budget("counterpart space", space.len(), u64::MAX as u128))?;
        let hit = (0..len).into_par_iter().find_map_first(|idx| {
            let p = space.get(idx as u128)?;
            match self.mechanism.evaluate(&p) {
                Ok(o) if o.restriction(group) == code => Some(Ok(idx)),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            }
        });
        match hit {
            Some(Ok(idx)) => {
                c.evaluated(idx + 1);
                Ok(true)
            }
            Some(Err(e)) => Err(e),
            None => {
                c.evaluated(len);
                Ok(false)
            }
        }
    }

    /// The sorted achievable restriction codes of `group` at the members'
    /// reports in `problem`.
    pub(crate) fn achievable_set(
        &self,
        problem: &Problem,
        group: Group,
        c: &Counters,
    ) -> Result<Achievable> {
        let key = member_key(problem, group);
        if !self.has_shortcut {
            let space = CounterpartSpace::new(problem, group, self.route());
            if space.len() > self.options.max_counterparts {
                return Err(Error::budget(
                    format!("counterpart space of group {group}"),
                    space.len(),
                    self.options.max_counterparts,
                ));
            }
        }
        self.cached_set(problem, group, key, c)
    }

    fn cached_set(
        &self,
        problem: &Problem,
        group: Group,
        key: MemberKey,
        c: &Counters,
    ) -> Result<Achievable> {
        let slot = self
            .achievable
            .entry((group.bits(), key))
            .or_insert_with(|| Arc::new(OnceLock::new()))
            .clone();
        let mut computed = false;
        let set = slot.get_or_init(|| {
            computed = true;
            self.compute_set(problem, group, c).ok()
        });
        match set {
            Some(s) => {
                if !computed {
                    c.hit();
                }
                Ok(s.clone())
            }
            // Failures are not cached; recompute to surface the error.
            None => self.compute_set(problem, group, c),
        }
    }

    fn compute_set(&self, problem: &Problem, group: Group, c: &Counters) -> Result<Achievable> {
        if self.has_shortcut {
            if let Some(r) = self.mechanism.achievable_fast(problem, group) {
                return r.map(Arc::new);
            }
        }
        let space = CounterpartSpace::new(problem, group, self.route());
        let full = self.restriction_count(group);
        let mut seen = FnvHashSet::default();
        let mut evaluations = 0;
        for idx in 0..space.len() {
            let Some(p) = space.get(idx) else { continue };
            evaluations += 1;
            seen.insert(self.mechanism.evaluate(&p)?.restriction(group));
            if seen.len() == full {
                break;
            }
        }
        c.evaluated(evaluations);
        let mut v: Vec<u64> = seen.into_iter().collect();
        v.sort_unstable();
        Ok(Arc::new(v))
    }

    fn detects_unchecked(
        &self,
        problem: &Problem,
        deviation: &Outcome,
        group: Group,
        c: &Counters,
    ) -> Result<bool> {
        if group == Group::full(problem.n()) {
            return Ok(true);
        }
        Ok(!self.achievable_contains(problem, group, deviation.restriction(group), c)?)
    }

    fn check_deviation(
        &self,
        problem: &Problem,
        deviation: &Outcome,
        c: &Counters,
    ) -> Result<Outcome> {
        self.check_problem(problem)?;
        deviation.check(&self.setting)?;
        let truth = self.evaluate(problem, c)?;
        if *deviation == truth {
            return Err(Error::usage(format!(
                "{deviation} is the mechanism's own outcome, not a deviation"
            )));
        }
        Ok(truth)
    }

    /// Whether `group` detects `deviation` at `problem`: no counterpart
    /// reports make the mechanism agree with the deviation on every member.
    pub fn detects(&self, problem: &Problem, deviation: &Outcome, group: Group) -> Result<bool> {
        let c = Counters::default();
        self.check_deviation(problem, deviation, &c)?;
        if group.is_empty() || !group.is_subset(Group::full(problem.n())) {
            return Err(Error::usage(format!(
                "group {group} is not a nonempty set of individuals"
            )));
        }
        let r = self.detects_unchecked(problem, deviation, group, &c);
        self.totals.add(&c);
        r
    }

    /// The smallest size of a detecting group, with the lexicographically
    /// first detecting group of that size.
    pub fn min_detecting_size(
        &self,
        problem: &Problem,
        deviation: &Outcome,
    ) -> Result<(usize, Group)> {
        let c = Counters::default();
        self.check_deviation(problem, deviation, &c)?;
        let r = self.min_detecting_unchecked(problem, deviation, &c);
        self.totals.add(&c);
        r
    }

    fn min_detecting_unchecked(
        &self,
        problem: &Problem,
        deviation: &Outcome,
        c: &Counters,
    ) -> Result<(usize, Group)> {
        let n = problem.n();
        for k in 1..=n {
            for g in Group::combinations(n, k) {
                if self.detects_unchecked(problem, deviation, g, c)? {
                    return Ok((k, g));
                }
            }
        }
        unreachable!("the full group detects every deviation")
    }

    /// The auditability index of the mechanism at `problem`.
    pub fn audit_index(&self, problem: &Problem) -> Result<AuditReport> {
        let started = Instant::now();
        let c = Counters::default();
        let r = self.audit_with(problem, &c, self.options.per_deviation);
        self.totals.add(&c);
        let mut report = r?;
        report.stats = c.snapshot(started);
        Ok(report)
    }

    /// Core of [`Auditor::audit_index`]. The index is found by descending
    /// group sizes: it exceeds `s` exactly when some deviation escapes every
    /// group of size `s`.
    pub(crate) fn audit_with(
        &self,
        problem: &Problem,
        c: &Counters,
        per_deviation: bool,
    ) -> Result<AuditReport> {
        self.check_problem(problem)?;
        let n = problem.n();
        let truth = self.evaluate(problem, c)?;
        let deviations: Vec<&Outcome> = self.universe.iter().filter(|o| **o != truth).collect();
        let mut index = 1;
        let mut witness = None;
        'levels: for s in (1..n).rev() {
            let groups = Group::combinations(n, s);
            for &d in &deviations {
                let mut escapes = true;
                for &g in &groups {
                    if self.detects_unchecked(problem, d, g, c)? {
                        escapes = false;
                        break;
                    }
                }
                if escapes {
                    index = s + 1;
                    witness = Some(d);
                    break 'levels;
                }
            }
        }
        if witness.is_none() {
            witness = deviations.first().copied();
        }
        let witness_group = match witness {
            Some(d) => {
                let mut found = None;
                for g in Group::combinations(n, index) {
                    if self.detects_unchecked(problem, d, g, c)? {
                        found = Some(g);
                        break;
                    }
                }
                found
            }
            None => None,
        };
        let mut witness_groups = Vec::new();
        if per_deviation {
            for &d in &deviations {
                let (min_size, group) = self.min_detecting_unchecked(problem, d, c)?;
                witness_groups.push(DeviationWitness {
                    deviation: d.clone(),
                    min_size,
                    group,
                });
            }
        }
        Ok(AuditReport {
            mechanism: self.mechanism.descriptor().to_string(),
            problem_hash: problem.hash_hex(),
            outcome: truth,
            index,
            witness_deviation: witness.cloned(),
            witness_group,
            witness_groups,
            stats: AuditStats::default(),
        })
    }
}
