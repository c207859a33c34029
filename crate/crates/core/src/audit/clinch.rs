//! Possible objects, clinching and sequential clinching implementations.

use std::collections::HashMap;

use fnv::FnvHashSet;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::{Auditor, Counters};
use super::space::member_key;
use crate::error::{Error, Result};
use crate::model::{enumerate_type_space, Group, Outcome, Problem, ProblemSpace, TypeReport};

fn objects(mask: u32) -> Vec<u8> {
    (0..32).filter(|o| mask & (1 << o) != 0).collect()
}

/// One step of a sequential clinching implementation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClinchStep {
    pub individual: usize,
    pub object: u8,
}

/// The universal clincher chosen at one reachable state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClincherRow {
    pub available_individuals: Group,
    pub available_objects: Vec<u8>,
    pub clincher: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformityReport {
    pub uniform: bool,
    /// Clinchers at every state reached by the construction (when uniform).
    pub clinchers: Vec<ClincherRow>,
    /// Whether the clincher at each state depends on the available objects
    /// alone.
    pub depends_only_on_objects: bool,
    /// A state with no universal clincher (when not uniform).
    pub stuck_at: Option<ClincherRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FullRangeReport {
    pub full_range: bool,
    pub achieved: usize,
    pub universe: usize,
    /// The first outcome never produced (when not full range).
    pub missing: Option<Outcome>,
}

impl Auditor {
    fn require_allocation(&self) -> Result<()> {
        if !self.setting().is_allocation() {
            return Err(Error::usage(format!(
                "clinching needs an allocation setting, not {}",
                self.setting().name()
            )));
        }
        Ok(())
    }

    /// Objects individual `i` can receive, as a bit mask, when she keeps her
    /// report in `problem` and everybody else may report anything.
    pub fn possible_objects(&self, problem: &Problem, i: usize) -> Result<u32> {
        self.require_allocation()?;
        self.check_problem(problem)?;
        if i >= problem.n() {
            return Err(Error::usage(format!(
                "individual {i} out of range 0..{}",
                problem.n()
            )));
        }
        let c = Counters::default();
        let r = self.achievable_set(problem, Group::singleton(i), &c);
        self.totals.add(&c);
        Ok(r?.iter().fold(0, |m, &o| m | 1 << o))
    }

    /// [`Auditor::possible_objects`] for an explicit type report.
    pub fn possible_objects_for(&self, i: usize, report: &TypeReport) -> Result<u32> {
        let mut template = ProblemSpace::new(*self.setting())?.get(0);
        if i >= template.n() {
            return Err(Error::usage(format!(
                "individual {i} out of range 0..{}",
                template.n()
            )));
        }
        template.reports[i] = report.clone();
        template.check_shape()?;
        // Only the member's own report matters; make the template feasible
        // by giving the others the lowest ranks where they clash.
        if !template.is_feasible() {
            template = feasible_around(&template, i);
        }
        self.possible_objects(&template, i)
    }

    /// The object `i` clinches from `available` (a bit mask), if any.
    pub fn clinches(&self, problem: &Problem, i: usize, available: u32) -> Result<Option<u8>> {
        if available == 0 {
            return Err(Error::usage("the available set must be nonempty"));
        }
        let both = self.possible_objects(problem, i)? & available;
        Ok((both.count_ones() == 1).then(|| both.trailing_zeros() as u8))
    }

    /// Greedy sequential clinching: at every step the lowest-index available
    /// individual who clinches an available object takes it. Returns the
    /// order when every step has a clincher.
    pub fn sequential_clinching(&self, problem: &Problem) -> Result<Option<Vec<ClinchStep>>> {
        self.require_allocation()?;
        self.check_problem(problem)?;
        let n = problem.n();
        let possible: Vec<u32> = (0..n)
            .map(|i| self.possible_objects(problem, i))
            .collect::<Result<_>>()?;
        let mut people = Group::full(n);
        let mut available: u32 = (1 << n) - 1;
        let mut order = Vec::with_capacity(n);
        while !people.is_empty() {
            let Some((i, o)) = people.members().find_map(|i| {
                let both = possible[i] & available;
                (both.count_ones() == 1).then(|| (i, both.trailing_zeros() as u8))
            }) else {
                return Ok(None);
            };
            order.push(ClinchStep {
                individual: i,
                object: o,
            });
            people = people.without(i);
            available &= !(1 << o);
        }
        let truth = self.mechanism().evaluate(problem)?;
        debug_assert!(order
            .iter()
            .all(|s| truth.allocation().unwrap()[s.individual] == s.object));
        Ok(Some(order))
    }

    /// Distinct possible-object sets of individual `i` over her whole type space.
    fn possible_sets(&self, i: usize) -> Result<Vec<u32>> {
        let template = ProblemSpace::new(*self.setting())?.get(0);
        let mut seen_keys = FnvHashSet::default();
        let mut sets = Vec::new();
        for report in enumerate_type_space(self.setting(), i)? {
            let mut p = template.clone();
            p.reports[i] = report;
            if !p.is_feasible() {
                p = feasible_around(&p, i);
            }
            if seen_keys.insert(member_key(&p, Group::singleton(i))) {
                let s = self.possible_objects(&p, i)?;
                if !sets.contains(&s) {
                    sets.push(s);
                }
            }
        }
        sets.sort_unstable();
        Ok(sets)
    }

    /// Whether a clinching order driven only by the available sets exists:
    /// starting from everyone and everything, some available individual
    /// must clinch from the available objects at every one of her reports,
    /// and the same must hold at every state her choices lead to.
    pub fn clinching_order_uniformity(&self) -> Result<UniformityReport> {
        self.require_allocation()?;
        let n = self.setting().n;
        let sets: Vec<Vec<u32>> = (0..n)
            .map(|i| self.possible_sets(i))
            .collect::<Result<_>>()?;
        let mut memo: HashMap<(Group, u32), Option<usize>> = HashMap::new();
        let all = Group::full(n);
        let objects_all: u32 = (1 << n) - 1;
        let uniform = solve(&sets, all, objects_all, &mut memo);
        let mut clinchers: Vec<ClincherRow> = memo
            .iter()
            .filter_map(|(&(people, avail), &c)| {
                c.map(|clincher| ClincherRow {
                    available_individuals: people,
                    available_objects: objects(avail),
                    clincher,
                })
            })
            .filter(|r| !r.available_individuals.is_empty())
            .collect();
        clinchers.sort_by(|a, b| {
            (
                b.available_objects.len(),
                &a.available_objects,
                a.available_individuals,
            )
                .cmp(&(
                    a.available_objects.len(),
                    &b.available_objects,
                    b.available_individuals,
                ))
        });
        let stuck_at = if uniform {
            None
        } else {
            let mut stuck: Vec<ClincherRow> = memo
                .iter()
                .filter(|(_, c)| c.is_none())
                .map(|(&(people, avail), _)| ClincherRow {
                    available_individuals: people,
                    available_objects: objects(avail),
                    clincher: usize::MAX,
                })
                .collect();
            stuck.sort_by_key(|r| {
                (
                    std::cmp::Reverse(r.available_objects.len()),
                    r.available_objects.clone(),
                )
            });
            stuck.into_iter().next()
        };
        let mut by_objects: HashMap<&[u8], usize> = HashMap::new();
        let depends_only_on_objects = uniform
            && clinchers.iter().all(|r| {
                *by_objects.entry(&r.available_objects).or_insert(r.clincher) == r.clincher
            });
        Ok(UniformityReport {
            uniform,
            clinchers: if uniform { clinchers } else { Vec::new() },
            depends_only_on_objects,
            stuck_at,
        })
    }

    /// Whether every feasible outcome is produced at some problem.
    pub fn full_range(&self) -> Result<FullRangeReport> {
        let space = ProblemSpace::new(*self.setting())?;
        if space.len() > self.options().max_problems {
            return Err(Error::budget(
                "full-range sweep",
                space.len(),
                self.options().max_problems,
            ));
        }
        let len = space.len() as u64;
        let achieved: FnvHashSet<Outcome> = (0..len)
            .into_par_iter()
            .map(|k| self.mechanism().evaluate(&space.get(k as u128)))
            .try_fold(FnvHashSet::default, |mut acc, o| {
                acc.insert(o?);
                Ok::<_, Error>(acc)
            })
            .try_reduce(FnvHashSet::default, |mut a, b| {
                a.extend(b);
                Ok(a)
            })?;
        let missing = self
            .universe()
            .iter()
            .find(|o| !achieved.contains(o))
            .cloned();
        Ok(FullRangeReport {
            full_range: missing.is_none(),
            achieved: achieved.len(),
            universe: self.universe().len(),
            missing,
        })
    }
}

/// Backtracking search for universal clinchers; `memo` records the chosen
/// clincher (or `None` for a dead end) of every visited state.
fn solve(
    sets: &[Vec<u32>],
    people: Group,
    avail: u32,
    memo: &mut HashMap<(Group, u32), Option<usize>>,
) -> bool {
    if people.is_empty() {
        memo.insert((people, avail), None);
        return true;
    }
    if let Some(c) = memo.get(&(people, avail)) {
        return c.is_some();
    }
    for i in people.members() {
        if !sets[i].iter().all(|s| (s & avail).count_ones() == 1) {
            continue;
        }
        let mut next: Vec<u32> = sets[i].iter().map(|s| s & avail).collect();
        next.sort_unstable();
        next.dedup();
        if next
            .iter()
            .all(|&o| solve(sets, people.without(i), avail & !o, memo))
        {
            memo.insert((people, avail), Some(i));
            return true;
        }
    }
    memo.insert((people, avail), None);
    false
}

/// A feasible problem that keeps individual `i`'s report: the other
/// individuals take the remaining priority ranks or grid values.
fn feasible_around(problem: &Problem, i: usize) -> Problem {
    let n = problem.n();
    let mut p = problem.clone();
    match &problem.reports[i] {
        TypeReport::Priority { scores: own, .. } => {
            for j in (0..n).filter(|&j| j != i) {
                if let TypeReport::Priority { scores, .. } = &mut p.reports[j] {
                    for (o, s) in scores.iter_mut().enumerate() {
                        // Distinct values that avoid the member's score.
                        let rank = if j < i { j } else { j - 1 } as u32;
                        *s = if rank < own[o] { rank } else { rank + 1 } + own[o].max(n as u32) + 1;
                    }
                }
            }
        }
        TypeReport::Bid(b) | TypeReport::Score(b) => {
            let mut next = 1;
            for j in (0..n).filter(|&j| j != i) {
                if next == *b {
                    next += 1;
                }
                p.reports[j] = match p.reports[j] {
                    TypeReport::Bid(_) => TypeReport::Bid(next),
                    _ => TypeReport::Score(next),
                };
                next += 1;
            }
        }
        _ => {}
    }
    p
}
