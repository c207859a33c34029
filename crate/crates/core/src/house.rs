//! House allocation by sequential dictatorships: the dictatorial-structure
//! engine, reachability analysis, the vice-dictatorship conditions, the
//! chain condition of serial dictatorships and its exact frequency.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use fnv::FnvHashSet;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{Group, Outcome, Problem, Setting, SettingKind};
use crate::perm::{self, Ranking, MAX_N};

/// Default cap on `n` for reachability analysis.
pub const REACH_CAP: usize = 7;

/// A partial one-to-one assignment, packed four bits per individual
/// (`0` = unassigned, `o + 1` = assigned object `o`).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Suboutcome(u64);

impl Suboutcome {
    pub const EMPTY: Suboutcome = Suboutcome(0);

    pub fn get(self, i: usize) -> Option<u8> {
        match (self.0 >> (4 * i)) & 0xf {
            0 => None,
            x => Some(x as u8 - 1),
        }
    }

    pub fn assign(self, i: usize, o: u8) -> Self {
        debug_assert!(self.get(i).is_none());
        Suboutcome(self.0 | ((o as u64 + 1) << (4 * i)))
    }

    pub fn len(self) -> usize {
        (0..16).filter(|&i| self.get(i).is_some()).count()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn assigned_individuals(self, n: usize) -> Group {
        Group::from_members((0..n).filter(|&i| self.get(i).is_some()))
    }

    /// Bitmask of assigned objects.
    pub fn assigned_objects(self, n: usize) -> u32 {
        (0..n)
            .filter_map(|i| self.get(i))
            .fold(0, |acc, o| acc | (1 << o))
    }

    pub fn unassigned_individuals(self, n: usize) -> Group {
        self.assigned_individuals(n).complement(n)
    }

    pub fn unassigned_objects(self, n: usize) -> u32 {
        !self.assigned_objects(n) & ((1u32 << n) - 1)
    }

    /// `(individual, object)` pairs in individual order.
    pub fn pairs(self, n: usize) -> Vec<(usize, u8)> {
        (0..n).filter_map(|i| self.get(i).map(|o| (i, o))).collect()
    }

    pub fn from_pairs(pairs: &[(usize, u8)]) -> Result<Self> {
        let mut s = Suboutcome::EMPTY;
        let mut used = 0u32;
        for &(i, o) in pairs {
            if i >= MAX_N || o as usize >= MAX_N || s.get(i).is_some() || used & (1 << o) != 0 {
                return Err(Error::input(format!("invalid suboutcome pairs {pairs:?}")));
            }
            used |= 1 << o;
            s = s.assign(i, o);
        }
        Ok(s)
    }
}

impl fmt::Debug for Suboutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.pairs(MAX_N)).finish()
    }
}

impl Serialize for Suboutcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.pairs(MAX_N))
    }
}

/// Who dictates at each suboutcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DictatorialStructure {
    /// A fixed ordering of individuals.
    Serial(Vec<u8>),
    /// Dictator keyed by (unassigned individuals, unassigned objects bitmask).
    BySets(HashMap<(Group, u32), u8>),
    /// Dictator keyed by the full suboutcome.
    BySuboutcome(HashMap<Suboutcome, u8>),
}

impl DictatorialStructure {
    pub fn serial(n: usize, order: Vec<u8>) -> Result<Self> {
        if order.len() != n || !perm::is_permutation(&order) {
            return Err(Error::config(format!(
                "serial order {order:?} is not a permutation of 0..{n}"
            )));
        }
        Ok(DictatorialStructure::Serial(order))
    }

    /// The dictator at `sigma`; undefined or already-assigned dictators are
    /// configuration errors.
    pub fn dictator(&self, n: usize, sigma: Suboutcome) -> Result<usize> {
        let d = match self {
            DictatorialStructure::Serial(order) => order.get(sigma.len()).copied(),
            DictatorialStructure::BySets(map) => map
                .get(&(sigma.unassigned_individuals(n), sigma.unassigned_objects(n)))
                .copied(),
            DictatorialStructure::BySuboutcome(map) => map.get(&sigma).copied(),
        }
        .ok_or_else(|| {
            Error::config(format!(
                "dictatorial structure undefined at suboutcome {sigma:?}"
            ))
        })? as usize;
        if d >= n || sigma.get(d).is_some() {
            return Err(Error::config(format!(
                "dictator {d} at suboutcome {sigma:?} is not an unassigned individual"
            )));
        }
        Ok(d)
    }

    /// Builds a full-suboutcome table over the reachable suboutcomes of `rule`.
    fn tabulate(n: usize, rule: impl Fn(Suboutcome) -> usize) -> Self {
        let mut map = HashMap::new();
        let mut queue = VecDeque::from([Suboutcome::EMPTY]);
        while let Some(sigma) = queue.pop_front() {
            if sigma.len() == n || map.contains_key(&sigma) {
                continue;
            }
            let d = rule(sigma);
            map.insert(sigma, d as u8);
            for o in 0..n as u8 {
                if sigma.unassigned_objects(n) & (1 << o) != 0 {
                    queue.push_back(sigma.assign(d, o));
                }
            }
        }
        DictatorialStructure::BySuboutcome(map)
    }

    /// Serial for the first `n − 2` steps (individuals `0..n−2` in order);
    /// individual `n − 2` dictates next only if every earlier individual `k`
    /// took object `k`, otherwise individual `n − 1` does.
    pub fn swap_fixture(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::config(format!(
                "the swap fixture needs n >= 4, got {n}"
            )));
        }
        Ok(Self::tabulate(n, |sigma| {
            let t = sigma.len();
            if t < n - 2 {
                t
            } else if t == n - 2 {
                let special = (0..n - 2).all(|k| sigma.get(k) == Some(k as u8));
                if special {
                    n - 2
                } else {
                    n - 1
                }
            } else {
                sigma.unassigned_individuals(n).members().next().unwrap()
            }
        }))
    }

    /// Individual 0 dictates first; individual 1 follows if 0 took object 0,
    /// otherwise individual 2; the other of {1, 2} is third; the rest follow
    /// in index order. The dictator depends only on the unassigned sets.
    pub fn branching_vice(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::config(format!(
                "the branching structure needs n >= 3, got {n}"
            )));
        }
        let DictatorialStructure::BySuboutcome(full) =
            Self::tabulate(n, |sigma| match sigma.len() {
                0 => 0,
                1 if sigma.get(0) == Some(0) => 1,
                1 => 2,
                _ => sigma.unassigned_individuals(n).members().next().unwrap(),
            })
        else {
            unreachable!()
        };
        let mut by_sets = HashMap::new();
        for (sigma, d) in full {
            by_sets.insert(
                (sigma.unassigned_individuals(n), sigma.unassigned_objects(n)),
                d,
            );
        }
        Ok(DictatorialStructure::BySets(by_sets))
    }
}

fn require_house(problem: &Problem) -> Result<()> {
    if problem.setting.kind != SettingKind::House {
        return Err(Error::input(format!(
            "expected a house problem, got a {} problem",
            problem.setting.name()
        )));
    }
    Ok(())
}

fn favourite(pref: &[u8], available: u32) -> u8 {
    *pref
        .iter()
        .find(|&&o| available & (1 << o) != 0)
        .expect("an unassigned object remains while an individual is unassigned")
}

/// Runs the sequential dictatorship: at every step the dictator named by the
/// structure takes her favourite unassigned object.
pub fn sequential_dictatorship(
    structure: &DictatorialStructure,
    problem: &Problem,
) -> Result<Outcome> {
    require_house(problem)?;
    let n = problem.n();
    let mut sigma = Suboutcome::EMPTY;
    for _ in 0..n {
        let d = structure.dictator(n, sigma)?;
        let o = favourite(problem.pref(d), sigma.unassigned_objects(n));
        sigma = sigma.assign(d, o);
    }
    Ok(Outcome::Allocation(
        (0..n).map(|i| sigma.get(i).unwrap()).collect(),
    ))
}

/// Every restriction to `group` reachable when members keep their reports and
/// non-members may report anything: a non-member dictator can take any
/// unassigned object, a member takes her favourite.
pub fn achievable_restrictions(
    structure: &DictatorialStructure,
    problem: &Problem,
    group: Group,
) -> Result<Vec<u64>> {
    fn walk(
        structure: &DictatorialStructure,
        problem: &Problem,
        group: Group,
        sigma: Suboutcome,
        out: &mut FnvHashSet<u64>,
    ) -> Result<()> {
        let n = problem.n();
        if sigma.len() == n {
            out.insert(
                group
                    .members()
                    .fold(0u64, |acc, i| (acc << 8) | sigma.get(i).unwrap() as u64),
            );
            return Ok(());
        }
        let d = structure.dictator(n, sigma)?;
        let free = sigma.unassigned_objects(n);
        if group.contains(d) {
            walk(
                structure,
                problem,
                group,
                sigma.assign(d, favourite(problem.pref(d), free)),
                out,
            )
        } else {
            for o in (0..n as u8).filter(|o| free & (1 << o) != 0) {
                walk(structure, problem, group, sigma.assign(d, o), out)?;
            }
            Ok(())
        }
    }
    require_house(problem)?;
    let mut out = FnvHashSet::default();
    walk(structure, problem, group, Suboutcome::EMPTY, &mut out)?;
    let mut v: Vec<u64> = out.into_iter().collect();
    v.sort_unstable();
    Ok(v)
}

/// Reachable suboutcomes and the per-step dictator sets.
#[derive(Clone, Debug, Serialize)]
pub struct Reachability {
    pub n: usize,
    /// All reachable suboutcomes, complete ones included, in breadth-first order.
    pub suboutcomes: Vec<Suboutcome>,
    /// `dictators[t]` = individuals that dictate at step `t + 1` for some problem.
    pub dictators: Vec<Group>,
}

pub fn reachable_analysis(
    structure: &DictatorialStructure,
    n: usize,
    cap: usize,
) -> Result<Reachability> {
    if n > cap {
        return Err(Error::budget(
            "reachability analysis",
            (0..=n)
                .map(|t| perm::factorial(n) / perm::factorial(n - t))
                .sum(),
            (0..=cap)
                .map(|t| perm::factorial(cap) / perm::factorial(cap - t))
                .sum(),
        ));
    }
    let mut seen = FnvHashSet::default();
    let mut order = Vec::new();
    let mut dictators = vec![Group::EMPTY; n];
    let mut queue = VecDeque::from([Suboutcome::EMPTY]);
    seen.insert(Suboutcome::EMPTY);
    while let Some(sigma) = queue.pop_front() {
        order.push(sigma);
        if sigma.len() == n {
            continue;
        }
        let d = structure.dictator(n, sigma)?;
        dictators[sigma.len()] = dictators[sigma.len()].with(d);
        for o in 0..n as u8 {
            if sigma.unassigned_objects(n) & (1 << o) != 0 {
                let next = sigma.assign(d, o);
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(Reachability {
        n,
        suboutcomes: order,
        dictators,
    })
}

/// One violated vice-dictatorship condition.
#[derive(Clone, Debug, Serialize)]
pub struct ViceViolation {
    /// Condition number, 1 to 3.
    pub condition: u8,
    pub message: String,
    /// Suboutcomes witnessing the violation (for condition 3: a pair with
    /// equal unassigned sets and different dictators).
    pub witnesses: Vec<Suboutcome>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ViceReport {
    pub is_vice: bool,
    /// Below five individuals the conditions are checked but carry no
    /// characterization guarantee.
    pub advisory: bool,
    pub violations: Vec<ViceViolation>,
}

impl ViceReport {
    pub fn violates(&self, condition: u8) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

/// Checks the three vice-dictatorship conditions over the reachable
/// suboutcomes and reports every violated one.
pub fn is_vice(structure: &DictatorialStructure, n: usize) -> Result<ViceReport> {
    let reach = reachable_analysis(structure, n, REACH_CAP)?;
    let step = |t: usize| reach.dictators[t - 1];
    let mut violations = Vec::new();
    for t in 4..=n.saturating_sub(2) {
        if step(t).len() != 1 {
            violations.push(ViceViolation {
                condition: 1,
                message: format!("step {t} has dictators {}", step(t)),
                witnesses: Vec::new(),
            });
        }
    }
    if n >= 3 {
        let early = step(2).union(step(3));
        if early.len() > 2 {
            violations.push(ViceViolation {
                condition: 2,
                message: format!("steps 2 and 3 have dictators {early}"),
                witnesses: Vec::new(),
            });
        }
    }
    let mut by_sets: HashMap<(Group, u32), (Suboutcome, usize)> = HashMap::new();
    for &sigma in reach.suboutcomes.iter().filter(|s| s.len() < n) {
        let d = structure.dictator(n, sigma)?;
        let key = (sigma.unassigned_individuals(n), sigma.unassigned_objects(n));
        match by_sets.get(&key) {
            Some(&(other, d0)) if d0 != d => {
                violations.push(ViceViolation {
                    condition: 3,
                    message: format!(
                        "suboutcomes {other:?} and {sigma:?} leave the same individuals and objects \
                         unassigned but name dictators {d0} and {d}"
                    ),
                    witnesses: vec![other, sigma],
                });
                break;
            }
            Some(_) => {}
            None => {
                by_sets.insert(key, (sigma, d));
            }
        }
    }
    Ok(ViceReport {
        is_vice: violations.is_empty(),
        advisory: n < 5,
        violations,
    })
}

/// Whether the top-`m` set of the `m`-th dictator is strictly contained in
/// the top-`(m+1)` set of the next dictator, for every `m < n`.
pub fn chain_condition(problem: &Problem, order: &[u8]) -> Result<bool> {
    require_house(problem)?;
    let n = problem.n();
    if order.len() != n || !perm::is_permutation(order) {
        return Err(Error::input(format!(
            "order {order:?} is not a permutation of 0..{n}"
        )));
    }
    let top = |i: u8, m: usize| -> u32 {
        problem.pref(i as usize)[..m]
            .iter()
            .fold(0, |acc, &o| acc | (1 << o))
    };
    Ok((1..n).all(|m| {
        let a = top(order[m - 1], m);
        let b = top(order[m], m + 1);
        a & !b == 0
    }))
}

/// Exact share of preference profiles meeting the chain condition under a
/// fixed serial order: the product over steps of the chance that a uniform
/// ranking's top `m + 1` contains a fixed `m`-set.
pub fn clinch_fraction(n: usize) -> Result<Ratio<u128>> {
    if !(2..=30).contains(&n) {
        return Err(Error::usage(format!(
            "clinch fraction supports 2 <= n <= 30, got {n}"
        )));
    }
    let f = |k: usize| perm::factorial(k);
    Ok((1..n).fold(Ratio::from_integer(1u128), |acc, m| {
        acc * Ratio::new(f(m + 1) * f(n - m), f(n))
    }))
}

/// The same share by counting every profile; feasible for `n <= 4`.
pub fn clinch_fraction_by_count(n: usize) -> Result<Ratio<u128>> {
    if !(2..=4).contains(&n) {
        return Err(Error::usage(format!(
            "exhaustive chain count supports 2 <= n <= 4, got {n}"
        )));
    }
    let space = crate::model::ProblemSpace::new(Setting::house(n))?;
    let order: Vec<u8> = (0..n as u8).collect();
    let mut hits = 0u128;
    for p in space.iter() {
        if chain_condition(&p, &order)? {
            hits += 1;
        }
    }
    Ok(Ratio::new(hits, space.len()))
}

/// A sequential dictatorship as a mechanism.
pub struct SequentialDictatorship {
    descriptor: String,
    setting: Setting,
    structure: DictatorialStructure,
}

impl SequentialDictatorship {
    pub fn new(descriptor: &str, setting: Setting, structure: DictatorialStructure) -> Self {
        SequentialDictatorship {
            descriptor: descriptor.to_string(),
            setting,
            structure,
        }
    }

    pub fn structure(&self) -> &DictatorialStructure {
        &self.structure
    }
}

impl Mechanism for SequentialDictatorship {
    fn descriptor(&self) -> &str {
        &self.descriptor
    }

    fn setting(&self) -> &Setting {
        &self.setting
    }

    fn evaluate(&self, problem: &Problem) -> Result<Outcome> {
        sequential_dictatorship(&self.structure, problem)
    }

    fn achievable_fast(&self, problem: &Problem, group: Group) -> Option<Result<Vec<u64>>> {
        Some(achievable_restrictions(&self.structure, problem, group))
    }
}

/// The mechanism that ignores all reports and always returns one allocation.
pub struct ConstantMechanism {
    descriptor: String,
    setting: Setting,
    assign: Ranking,
}

impl ConstantMechanism {
    pub fn new(descriptor: &str, setting: Setting, assign: Vec<u8>) -> Result<Self> {
        if assign.len() != setting.n || !perm::is_permutation(&assign) {
            return Err(Error::config(format!(
                "constant assignment {assign:?} is not a permutation of 0..{}",
                setting.n
            )));
        }
        Ok(ConstantMechanism {
            descriptor: descriptor.to_string(),
            setting,
            assign: assign.into_iter().collect(),
        })
    }
}

impl Mechanism for ConstantMechanism {
    fn descriptor(&self) -> &str {
        &self.descriptor
    }

    fn setting(&self) -> &Setting {
        &self.setting
    }

    fn evaluate(&self, problem: &Problem) -> Result<Outcome> {
        if problem.setting != self.setting {
            return Err(Error::input("problem setting does not match the mechanism"));
        }
        Ok(Outcome::Allocation(self.assign.clone()))
    }

    fn achievable_fast(&self, _problem: &Problem, group: Group) -> Option<Result<Vec<u64>>> {
        Some(Ok(vec![
            Outcome::Allocation(self.assign.clone()).restriction(group)
        ]))
    }
}

/// Rows of a structure table file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureRow {
    #[serde(default)]
    pub unassigned_individuals: Option<Vec<usize>>,
    #[serde(default)]
    pub unassigned_objects: Option<Vec<u8>>,
    #[serde(default)]
    pub suboutcome: Option<Vec<(usize, u8)>>,
    pub dictator: u8,
}

/// Builds a structure from table rows: either every row is keyed by
/// unassigned sets or every row is keyed by a full suboutcome.
pub fn structure_from_rows(n: usize, rows: &[StructureRow]) -> Result<DictatorialStructure> {
    let by_sets = rows
        .iter()
        .all(|r| r.unassigned_individuals.is_some() && r.unassigned_objects.is_some());
    let by_sub = rows.iter().all(|r| r.suboutcome.is_some());
    if by_sets == by_sub {
        return Err(Error::input(
            "structure rows must all use unassigned_individuals + unassigned_objects, or all use suboutcome",
        ));
    }
    if by_sets {
        let mut map = HashMap::new();
        for r in rows {
            let inds = r.unassigned_individuals.as_ref().unwrap();
            let objs = r.unassigned_objects.as_ref().unwrap();
            if inds.iter().any(|&i| i >= n) || objs.iter().any(|&o| o as usize >= n) {
                return Err(Error::input(format!(
                    "structure row out of range for n = {n}: {r:?}"
                )));
            }
            let objs: BTreeSet<u8> = objs.iter().copied().collect();
            let key = (
                Group::from_members(inds.iter().copied()),
                objs.iter().fold(0u32, |acc, &o| acc | (1 << o)),
            );
            map.insert(key, r.dictator);
        }
        Ok(DictatorialStructure::BySets(map))
    } else {
        let mut map = HashMap::new();
        for r in rows {
            let pairs = r.suboutcome.as_ref().unwrap();
            if pairs.iter().any(|&(i, o)| i >= n || o as usize >= n) {
                return Err(Error::input(format!(
                    "structure row out of range for n = {n}: {r:?}"
                )));
            }
            map.insert(Suboutcome::from_pairs(pairs)?, r.dictator);
        }
        Ok(DictatorialStructure::BySuboutcome(map))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn serial(n: usize) -> DictatorialStructure {
        DictatorialStructure::serial(n, (0..n as u8).collect()).unwrap()
    }

    fn alloc(a: &[u8]) -> Outcome {
        Outcome::Allocation(a.iter().copied().collect())
    }

    #[test]
    fn serial_runs() {
        let p = Problem::house(&[&[0, 1, 2], &[0, 1, 2], &[0, 1, 2]]).unwrap();
        assert_eq!(
            sequential_dictatorship(&serial(3), &p).unwrap(),
            alloc(&[0, 1, 2])
        );
        let p = Problem::house(&[&[2, 0, 1], &[2, 1, 0], &[0, 1, 2]]).unwrap();
        assert_eq!(
            sequential_dictatorship(&serial(3), &p).unwrap(),
            alloc(&[2, 1, 0])
        );
    }

    #[test]
    fn branching_structure_routes_both_ways() {
        let s = DictatorialStructure::branching_vice(3).unwrap();
        // 0 takes o0, so 1 chooses next and grabs o1 before 2 can.
        let p = Problem::house(&[&[0, 1, 2], &[1, 2, 0], &[1, 2, 0]]).unwrap();
        assert_eq!(sequential_dictatorship(&s, &p).unwrap(), alloc(&[0, 1, 2]));
        // 0 takes o2, so 2 chooses next and grabs o1.
        let p = Problem::house(&[&[2, 1, 0], &[1, 0, 2], &[1, 0, 2]]).unwrap();
        assert_eq!(sequential_dictatorship(&s, &p).unwrap(), alloc(&[2, 0, 1]));
    }

    #[test]
    fn reachability_of_serial() {
        let r = reachable_analysis(&serial(3), 3, REACH_CAP).unwrap();
        assert_eq!(r.suboutcomes.len(), 1 + 3 + 6 + 6);
        assert!(r.dictators.iter().all(|g| g.len() == 1));
        for n in 2..=7 {
            let rep = is_vice(&serial(n), n).unwrap();
            assert!(rep.is_vice, "serial n = {n}: {:?}", rep.violations);
        }
        assert!(matches!(
            reachable_analysis(&serial(8), 8, REACH_CAP),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn swap_fixture_analysis() {
        let s = DictatorialStructure::swap_fixture(4).unwrap();
        let r = reachable_analysis(&s, 4, REACH_CAP).unwrap();
        let late = r.dictators[2].union(r.dictators[3]);
        assert_eq!(late, Group::from_members([2, 3]));
        assert_eq!(r.dictators[2], Group::from_members([2, 3]));
        let rep = is_vice(&s, 4).unwrap();
        assert!(!rep.is_vice);
        assert!(rep.violates(3));
        let w = &rep
            .violations
            .iter()
            .find(|v| v.condition == 3)
            .unwrap()
            .witnesses;
        assert_eq!(w[0].unassigned_objects(4), w[1].unassigned_objects(4));
        assert_eq!(
            w[0].unassigned_individuals(4),
            w[1].unassigned_individuals(4)
        );
        assert!(
            !is_vice(&DictatorialStructure::swap_fixture(5).unwrap(), 5)
                .unwrap()
                .is_vice
        );
    }

    #[test]
    fn branching_structure_is_vice() {
        for n in 3..=6 {
            let rep = is_vice(&DictatorialStructure::branching_vice(n).unwrap(), n).unwrap();
            assert!(rep.is_vice, "n = {n}: {:?}", rep.violations);
        }
    }

    #[test]
    fn undefined_structure_is_a_configuration_error() {
        let s = DictatorialStructure::BySuboutcome(HashMap::from([(Suboutcome::EMPTY, 0)]));
        let p = Problem::house(&[&[0, 1], &[0, 1]]).unwrap();
        assert!(matches!(
            sequential_dictatorship(&s, &p),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn chain_examples() {
        let p = Problem::house(&[&[0, 1, 2], &[0, 1, 2], &[2, 1, 0]]).unwrap();
        assert!(chain_condition(&p, &[0, 1, 2]).unwrap());
        let p = Problem::house(&[&[0, 1, 2], &[1, 2, 0], &[2, 1, 0]]).unwrap();
        assert!(!chain_condition(&p, &[0, 1, 2]).unwrap());
    }

    #[test]
    fn fraction_matches_count() {
        assert_eq!(clinch_fraction(2).unwrap(), Ratio::from_integer(1));
        assert_eq!(clinch_fraction(3).unwrap(), Ratio::new(2, 3));
        for n in 2..=4 {
            assert_eq!(
                clinch_fraction(n).unwrap(),
                clinch_fraction_by_count(n).unwrap()
            );
        }
        for n in 2..6 {
            assert!(clinch_fraction(n + 1).unwrap() < clinch_fraction(n).unwrap());
        }
    }

    #[test]
    fn achievable_sets_match_brute_force() {
        let s = DictatorialStructure::swap_fixture(4).unwrap();
        let space = crate::model::ProblemSpace::new(Setting::house(4)).unwrap();
        let prefs = perm::permutations(4);
        for idx in (0..space.len()).step_by(9973) {
            let p = space.get(idx);
            for bits in 1..15u32 {
                let g = Group::from_bits(bits);
                let fast = achievable_restrictions(&s, &p, g).unwrap();
                let outsiders: Vec<usize> = g.complement(4).members().collect();
                let mut brute = BTreeSet::new();
                let total = prefs.len().pow(outsiders.len() as u32);
                let mut q = p.clone();
                for mut code in 0..total {
                    for &i in &outsiders {
                        q.reports[i] = crate::model::TypeReport::House {
                            pref: prefs[code % prefs.len()].clone(),
                        };
                        code /= prefs.len();
                    }
                    brute.insert(sequential_dictatorship(&s, &q).unwrap().restriction(g));
                }
                assert_eq!(fast, brute.into_iter().collect::<Vec<_>>());
            }
        }
    }
}
