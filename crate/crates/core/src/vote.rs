//! Binary-outcome social choice: majority, dictatorial and veto rules, truth
//! tables, and their structural recognizers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{Outcome, Problem, Setting, SettingKind};

/// Largest electorate whose truth table the recognizers will scan.
pub const TABLE_MAX_N: usize = 20;

/// Position of a vote profile in a truth table: individual 0 is the most
/// significant bit, matching the canonical problem enumeration.
pub fn profile_index(votes: &[bool]) -> usize {
    votes.iter().fold(0, |acc, &v| (acc << 1) | v as usize)
}

pub fn profile_votes(n: usize, idx: usize) -> Vec<bool> {
    (0..n).map(|i| idx >> (n - 1 - i) & 1 == 1).collect()
}

fn ones(votes: &[bool]) -> usize {
    votes.iter().filter(|&&v| v).count()
}

/// `x` iff at least `(n+1)/2` reports equal 1, the complement otherwise.
pub fn majority(votes: &[bool], x: bool) -> Result<bool> {
    let n = votes.len();
    if n.is_multiple_of(2) {
        return Err(Error::config(format!(
            "majority voting needs an odd electorate, got n = {n}"
        )));
    }
    Ok(if ones(votes) >= n.div_ceil(2) { x } else { !x })
}

pub fn dictatorial(votes: &[bool], i: usize) -> bool {
    votes[i]
}

/// 1 unless somebody reports 0.
pub fn veto(votes: &[bool]) -> bool {
    votes.iter().all(|&v| v)
}

/// A materialized mechanism: one output bit per vote profile.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VoteTable {
    n: usize,
    bits: Vec<bool>,
}

impl VoteTable {
    pub fn new(n: usize, bits: Vec<bool>) -> Result<Self> {
        check_size(n)?;
        if bits.len() != 1 << n {
            return Err(Error::input(format!(
                "a vote table for n = {n} needs {} rows, got {}",
                1usize << n,
                bits.len()
            )));
        }
        Ok(VoteTable { n, bits })
    }

    pub fn from_fn(n: usize, f: impl Fn(&[bool]) -> bool) -> Result<Self> {
        check_size(n)?;
        let bits = (0..1usize << n)
            .map(|idx| f(&profile_votes(n, idx)))
            .collect();
        Ok(VoteTable { n, bits })
    }

    /// The anonymous table whose output on `k` ones is `by_count[k]`.
    pub fn anonymous(n: usize, by_count: &[bool]) -> Result<Self> {
        if by_count.len() != n + 1 {
            return Err(Error::input(format!(
                "an anonymous vote rule for n = {n} needs {} outputs, got {}",
                n + 1,
                by_count.len()
            )));
        }
        VoteTable::from_fn(n, |v| by_count[ones(v)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, votes: &[bool]) -> bool {
        self.bits[profile_index(votes)]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Every one of the `2^(2^n)` tables for a tiny electorate.
    pub fn all(n: usize) -> Result<Vec<VoteTable>> {
        if n > 4 {
            return Err(Error::budget(
                "exhaustive vote-table sweep",
                1u128 << (1u32 << n).min(127),
                1 << 16,
            ));
        }
        let rows = 1usize << n;
        Ok((0..1u64 << rows)
            .map(|code| VoteTable {
                n,
                bits: (0..rows).map(|r| code >> (rows - 1 - r) & 1 == 1).collect(),
            })
            .collect())
    }

    /// Every anonymous table (one output per count of ones).
    pub fn all_anonymous(n: usize) -> Result<Vec<VoteTable>> {
        check_size(n)?;
        (0..1u32 << (n + 1))
            .map(|code| {
                let by_count: Vec<bool> = (0..=n).map(|k| code >> (n - k) & 1 == 1).collect();
                VoteTable::anonymous(n, &by_count)
            })
            .collect()
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > TABLE_MAX_N {
        return Err(Error::budget(
            "vote truth table",
            1u128 << n,
            1 << TABLE_MAX_N,
        ));
    }
    Ok(())
}

/// Two profiles with the same number of ones but different outputs.
#[derive(Clone, Debug, Serialize)]
pub struct AnonymityWitness {
    pub first: Vec<u8>,
    pub second: Vec<u8>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnonymityReport {
    pub anonymous: bool,
    pub witness: Option<AnonymityWitness>,
}

pub fn is_anonymous(table: &VoteTable) -> AnonymityReport {
    let n = table.n;
    let mut first_by_count: Vec<Option<usize>> = vec![None; n + 1];
    for (idx, &out) in table.bits.iter().enumerate() {
        let k = idx.count_ones() as usize;
        match first_by_count[k] {
            None => first_by_count[k] = Some(idx),
            Some(prev) if table.bits[prev] != out => {
                let bits = |i| profile_votes(n, i).into_iter().map(u8::from).collect();
                return AnonymityReport {
                    anonymous: false,
                    witness: Some(AnonymityWitness {
                        first: bits(prev),
                        second: bits(idx),
                    }),
                };
            }
            Some(_) => {}
        }
    }
    AnonymityReport {
        anonymous: true,
        witness: None,
    }
}

/// The lowest-index individual whose report alone determines the outcome.
/// Constant tables qualify: every individual is then a (trivial) dictator.
pub fn is_dictatorial(table: &VoteTable) -> Option<usize> {
    let n = table.n;
    (0..n).find(|&i| {
        let mut seen = [None::<bool>; 2];
        table.bits.iter().enumerate().all(|(idx, &out)| {
            let own = idx >> (n - 1 - i) & 1;
            *seen[own].get_or_insert(out) == out
        })
    })
}

/// The outcome `x` for which `table` is the majority rule, if any.
pub fn is_majority(table: &VoteTable) -> Option<bool> {
    if table.n.is_multiple_of(2) {
        return None;
    }
    [false, true].into_iter().find(|&x| {
        table
            .bits
            .iter()
            .enumerate()
            .all(|(idx, &out)| majority(&profile_votes(table.n, idx), x).ok() == Some(out))
    })
}

#[derive(Clone, Debug)]
pub enum VoteRule {
    Majority(bool),
    Dictator(usize),
    Veto,
    Table(VoteTable),
}

pub struct VoteMechanism {
    descriptor: String,
    setting: Setting,
    rule: VoteRule,
}

impl VoteMechanism {
    pub fn new(descriptor: &str, setting: Setting, rule: VoteRule) -> Result<Self> {
        if !matches!(setting.kind, SettingKind::Vote) {
            return Err(Error::config(format!(
                "'{descriptor}' needs a vote setting"
            )));
        }
        match &rule {
            VoteRule::Majority(_) if setting.n.is_multiple_of(2) => {
                return Err(Error::config(format!(
                    "majority voting needs an odd electorate, got n = {}",
                    setting.n
                )))
            }
            VoteRule::Dictator(i) if *i >= setting.n => {
                return Err(Error::config(format!(
                    "dictator {i} out of range 0..{}",
                    setting.n
                )))
            }
            VoteRule::Table(t) if t.n != setting.n => {
                return Err(Error::config(format!(
                    "vote table is for n = {} but the setting has n = {}",
                    t.n, setting.n
                )))
            }
            _ => {}
        }
        Ok(VoteMechanism {
            descriptor: descriptor.to_string(),
            setting,
            rule,
        })
    }

    pub fn from_table(descriptor: &str, table: VoteTable) -> Self {
        VoteMechanism {
            descriptor: descriptor.to_string(),
            setting: Setting::vote(table.n),
            rule: VoteRule::Table(table),
        }
    }

    /// The truth table of this mechanism.
    pub fn table(&self) -> Result<VoteTable> {
        match &self.rule {
            VoteRule::Table(t) => Ok(t.clone()),
            _ => VoteTable::from_fn(self.setting.n, |v| self.decide(v)),
        }
    }

    fn decide(&self, votes: &[bool]) -> bool {
        match &self.rule {
            VoteRule::Majority(x) => {
                if ones(votes) >= votes.len().div_ceil(2) {
                    *x
                } else {
                    !*x
                }
            }
            VoteRule::Dictator(i) => dictatorial(votes, *i),
            VoteRule::Veto => veto(votes),
            VoteRule::Table(t) => t.get(votes),
        }
    }
}

impl Mechanism for VoteMechanism {
    fn descriptor(&self) -> &str {
        &self.descriptor
    }

    fn setting(&self) -> &Setting {
        &self.setting
    }

    fn evaluate(&self, problem: &Problem) -> Result<Outcome> {
        if problem.setting != self.setting {
            return Err(Error::input(format!(
                "'{}' expects a vote problem with n = {}",
                self.descriptor, self.setting.n
            )));
        }
        problem.check()?;
        let votes: Vec<bool> = (0..problem.n()).map(|i| problem.vote_of(i)).collect();
        Ok(Outcome::Vote(self.decide(&votes)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(bits: &[u8]) -> Vec<bool> {
        bits.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn rules_on_reference_profiles() {
        assert!(majority(&v(&[1, 1, 0]), true).unwrap());
        assert!(!majority(&v(&[0, 0, 1]), true).unwrap());
        assert!(majority(&v(&[1, 1, 1, 0, 0]), true).unwrap());
        assert!(majority(&v(&[1, 0]), true).is_err());
        assert!(dictatorial(&v(&[0, 1, 0]), 1));
        assert!(!veto(&v(&[1, 0, 1])));
        assert!(veto(&v(&[1, 1, 1])));
    }

    #[test]
    fn recognizers() {
        let maj = VoteMechanism::new("m", Setting::vote(3), VoteRule::Majority(true))
            .unwrap()
            .table()
            .unwrap();
        assert!(is_anonymous(&maj).anonymous);
        assert_eq!(is_majority(&maj), Some(true));
        assert_eq!(is_dictatorial(&maj), None);

        let dict = VoteTable::from_fn(3, |v| v[2]).unwrap();
        assert_eq!(is_dictatorial(&dict), Some(2));
        let rep = is_anonymous(&dict);
        assert!(!rep.anonymous);
        let w = rep.witness.unwrap();
        assert_eq!(w.first.iter().sum::<u8>(), w.second.iter().sum::<u8>());

        let vt = VoteTable::from_fn(3, veto).unwrap();
        assert!(is_anonymous(&vt).anonymous);
        assert_eq!(is_majority(&vt), None);
        assert_eq!(is_dictatorial(&vt), None);

        let constant = VoteTable::anonymous(3, &[true; 4]).unwrap();
        assert_eq!(is_dictatorial(&constant), Some(0));
    }

    #[test]
    fn table_enumeration() {
        assert_eq!(VoteTable::all(2).unwrap().len(), 16);
        let anon = VoteTable::all_anonymous(3).unwrap();
        assert_eq!(anon.len(), 16);
        assert!(anon.iter().all(|t| is_anonymous(t).anonymous));
        assert_eq!(anon.iter().filter(|t| is_majority(t).is_some()).count(), 2);
    }

    #[test]
    fn profile_order_matches_problem_space() {
        let space = crate::model::ProblemSpace::new(Setting::vote(3)).unwrap();
        for (idx, p) in space.iter().enumerate() {
            let votes: Vec<bool> = (0..3).map(|i| p.vote_of(i)).collect();
            assert_eq!(profile_index(&votes), idx);
        }
    }
}
