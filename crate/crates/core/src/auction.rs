//! Single-object auctions on a discrete bid grid and the structural
//! predicates used to classify them.

use std::collections::HashMap;

use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{Outcome, Problem, ProblemSpace, Setting, SettingKind};
use crate::perm::MAX_N;

type Bids = SmallVec<[u32; MAX_N]>;

fn bids_of(problem: &Problem) -> Result<Bids> {
    if !matches!(problem.setting.kind, SettingKind::Auction { .. }) {
        return Err(Error::input(format!(
            "expected an auction problem, got a {} problem",
            problem.setting.name()
        )));
    }
    problem.check()?;
    Ok((0..problem.n()).map(|i| problem.bid(i)).collect())
}

fn top_two(bids: &[u32]) -> (usize, u32) {
    let winner = (0..bids.len()).max_by_key(|&i| bids[i]).unwrap();
    let second = (0..bids.len())
        .filter(|&i| i != winner)
        .map(|i| bids[i])
        .max()
        .unwrap_or(0);
    (winner, second)
}

/// Top bidder wins and pays her bid; losers pay nothing.
pub fn fpa(bids: &[u32]) -> Outcome {
    let (w, _) = top_two(bids);
    let mut payments: Bids = SmallVec::from_elem(0, bids.len());
    payments[w] = bids[w];
    Outcome::Auction {
        winner: w as u8,
        payments,
    }
}

/// Top bidder wins; everyone pays her own bid.
pub fn apa(bids: &[u32]) -> Outcome {
    let (w, _) = top_two(bids);
    Outcome::Auction {
        winner: w as u8,
        payments: bids.iter().copied().collect(),
    }
}

/// Top bidder wins and pays the second-highest bid; losers pay nothing.
pub fn spa(bids: &[u32]) -> Outcome {
    let (w, second) = top_two(bids);
    let mut payments: Bids = SmallVec::from_elem(0, bids.len());
    payments[w] = second;
    Outcome::Auction {
        winner: w as u8,
        payments,
    }
}

#[derive(Clone, Debug)]
pub enum AuctionRule {
    FirstPrice,
    AllPay,
    SecondPrice,
    /// A materialized mechanism over every distinct-bid profile.
    Table(HashMap<Bids, Outcome>),
}

pub struct AuctionMechanism {
    descriptor: String,
    setting: Setting,
    rule: AuctionRule,
}

impl AuctionMechanism {
    pub fn new(descriptor: &str, setting: Setting, rule: AuctionRule) -> Self {
        AuctionMechanism {
            descriptor: descriptor.to_string(),
            setting,
            rule,
        }
    }

    /// Materializes `rule` over every feasible bid profile of `setting`.
    pub fn from_fn(
        descriptor: &str,
        setting: Setting,
        rule: impl Fn(&[u32]) -> Outcome,
    ) -> Result<Self> {
        let space = ProblemSpace::new(setting)?;
        let mut table = HashMap::new();
        for p in space.iter() {
            let bids = bids_of(&p)?;
            let out = rule(&bids);
            out.check(&setting)?;
            table.insert(bids, out);
        }
        Ok(AuctionMechanism::new(
            descriptor,
            setting,
            AuctionRule::Table(table),
        ))
    }

    /// Builds a table mechanism from explicit rows, requiring every feasible
    /// bid profile to be covered.
    pub fn from_rows(
        descriptor: &str,
        setting: Setting,
        rows: Vec<(Vec<u32>, Outcome)>,
    ) -> Result<Self> {
        let mut table = HashMap::new();
        for (bids, out) in rows {
            let p = Problem::auction(setting.max_bid().unwrap_or(0), &bids)?;
            out.check(&setting)?;
            table.insert(bids_of(&p)?, out);
        }
        let space = ProblemSpace::new(setting)?;
        if let Some(missing) = space
            .iter()
            .find(|p| !table.contains_key(&bids_of(p).unwrap()))
        {
            return Err(Error::input(format!(
                "auction table has no row for bids {:?}",
                bids_of(&missing)?.to_vec()
            )));
        }
        Ok(AuctionMechanism::new(
            descriptor,
            setting,
            AuctionRule::Table(table),
        ))
    }
}

impl Mechanism for AuctionMechanism {
    fn descriptor(&self) -> &str {
        &self.descriptor
    }

    fn setting(&self) -> &Setting {
        &self.setting
    }

    fn evaluate(&self, problem: &Problem) -> Result<Outcome> {
        let bids = bids_of(problem)?;
        Ok(match &self.rule {
            AuctionRule::FirstPrice => fpa(&bids),
            AuctionRule::AllPay => apa(&bids),
            AuctionRule::SecondPrice => spa(&bids),
            AuctionRule::Table(t) => t.get(&bids).cloned().ok_or_else(|| {
                Error::input(format!(
                    "auction table has no row for bids {:?}",
                    bids.to_vec()
                ))
            })?,
        })
    }
}

/// Largest grid swept by the structural predicates.
const SWEEP_MAX_N: usize = 4;
const SWEEP_MAX_K: u32 = 8;

fn sweep_space(setting: &Setting) -> Result<ProblemSpace> {
    let k = setting
        .max_bid()
        .ok_or_else(|| Error::input("structural auction predicates need an auction setting"))?;
    if setting.n > SWEEP_MAX_N || k > SWEEP_MAX_K {
        let space = ProblemSpace::new(*setting)?;
        return Err(Error::budget(
            "auction table sweep",
            space.len(),
            (0..SWEEP_MAX_N as u128)
                .map(|t| SWEEP_MAX_K as u128 - t)
                .product(),
        ));
    }
    ProblemSpace::new(*setting)
}

fn share(outcome: &Outcome, i: usize) -> (bool, u32) {
    match outcome {
        Outcome::Auction { winner, payments } => (*winner as usize == i, payments[i]),
        _ => (false, 0),
    }
}

/// Two profiles where an individual with the same bid and the same
/// allocation pays different amounts.
#[derive(Clone, Debug, Serialize)]
pub struct FixedPayWitness {
    pub individual: usize,
    pub bid: u32,
    pub wins: bool,
    pub first_bids: Vec<u32>,
    pub first_payment: u32,
    pub second_bids: Vec<u32>,
    pub second_payment: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPayReport {
    pub fixed_pay: bool,
    pub witness: Option<FixedPayWitness>,
}

pub fn is_fixed_pay(mechanism: &dyn Mechanism, setting: &Setting) -> Result<FixedPayReport> {
    let space = sweep_space(setting)?;
    let mut seen: HashMap<(usize, u32, bool), (Bids, u32)> = HashMap::new();
    for p in space.iter() {
        let bids = bids_of(&p)?;
        let out = mechanism.evaluate(&p)?;
        for i in 0..setting.n {
            let (wins, pay) = share(&out, i);
            match seen.get(&(i, bids[i], wins)) {
                Some((first, first_pay)) if *first_pay != pay => {
                    return Ok(FixedPayReport {
                        fixed_pay: false,
                        witness: Some(FixedPayWitness {
                            individual: i,
                            bid: bids[i],
                            wins,
                            first_bids: first.to_vec(),
                            first_payment: *first_pay,
                            second_bids: bids.to_vec(),
                            second_payment: pay,
                        }),
                    })
                }
                Some(_) => {}
                None => {
                    seen.insert((i, bids[i], wins), (bids.clone(), pay));
                }
            }
        }
    }
    Ok(FixedPayReport {
        fixed_pay: true,
        witness: None,
    })
}

/// The two dictators and the bids of the first that make her win.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualDictatorship {
    pub i1: usize,
    pub i2: usize,
    pub winning_bids: Vec<u32>,
}

/// Recognizes a fixed-pay mechanism where only `i1` and `i2` ever win and
/// `i1` wins exactly when her own bid lies in a fixed set. With a single
/// possible winner, `i2` is the lowest-index other individual.
pub fn is_dual_dictatorship(
    mechanism: &dyn Mechanism,
    setting: &Setting,
) -> Result<Option<DualDictatorship>> {
    if !is_fixed_pay(mechanism, setting)?.fixed_pay {
        return Ok(None);
    }
    let space = sweep_space(setting)?;
    let mut rows = Vec::with_capacity(space.len() as usize);
    let mut winners = std::collections::BTreeSet::new();
    for p in space.iter() {
        let bids = bids_of(&p)?;
        let Outcome::Auction { winner, .. } = mechanism.evaluate(&p)? else {
            return Err(Error::input(
                "auction mechanism returned a non-auction outcome",
            ));
        };
        winners.insert(winner as usize);
        rows.push((bids, winner as usize));
    }
    let k = setting.max_bid().unwrap();
    match winners.len() {
        1 => {
            let i1 = *winners.iter().next().unwrap();
            let i2 = (0..setting.n).find(|&i| i != i1).unwrap();
            Ok(Some(DualDictatorship {
                i1,
                i2,
                winning_bids: (1..=k).collect(),
            }))
        }
        2 => {
            let pair: Vec<usize> = winners.into_iter().collect();
            for (i1, i2) in [(pair[0], pair[1]), (pair[1], pair[0])] {
                let mut verdict: HashMap<u32, bool> = HashMap::new();
                let consistent = rows
                    .iter()
                    .all(|(bids, w)| *verdict.entry(bids[i1]).or_insert(*w == i1) == (*w == i1));
                if consistent {
                    let mut winning_bids: Vec<u32> = verdict
                        .into_iter()
                        .filter(|&(_, wins)| wins)
                        .map(|(b, _)| b)
                        .collect();
                    winning_bids.sort_unstable();
                    return Ok(Some(DualDictatorship {
                        i1,
                        i2,
                        winning_bids,
                    }));
                }
            }
            Ok(None)
        }
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setting() -> Setting {
        Setting::auction(3, 5)
    }

    fn auction(winner: u8, payments: &[u32]) -> Outcome {
        Outcome::Auction {
            winner,
            payments: payments.iter().copied().collect(),
        }
    }

    #[test]
    fn formats_on_reference_bids() {
        let b = [5, 2, 3];
        assert_eq!(fpa(&b), auction(0, &[5, 0, 0]));
        assert_eq!(apa(&b), auction(0, &[5, 2, 3]));
        assert_eq!(spa(&b), auction(0, &[3, 0, 0]));
    }

    #[test]
    fn duplicate_bids_are_rejected() {
        let m = AuctionMechanism::new("fpa", setting(), AuctionRule::FirstPrice);
        let p = Problem {
            setting: setting(),
            reports: vec![crate::model::TypeReport::Bid(5); 3],
        };
        assert!(matches!(m.evaluate(&p), Err(Error::Infeasible(_))));
    }

    #[test]
    fn fixed_pay_classification() {
        let s = setting();
        for (rule, fixed) in [
            (AuctionRule::FirstPrice, true),
            (AuctionRule::AllPay, true),
            (AuctionRule::SecondPrice, false),
        ] {
            let m = AuctionMechanism::new("x", s, rule);
            let rep = is_fixed_pay(&m, &s).unwrap();
            assert_eq!(rep.fixed_pay, fixed);
            if let Some(w) = rep.witness {
                assert_eq!(w.bid, w.first_bids[w.individual]);
                assert_eq!(w.bid, w.second_bids[w.individual]);
                assert_ne!(w.first_payment, w.second_payment);
            }
        }
    }

    #[test]
    fn dual_dictatorship_recognition() {
        let s = setting();
        let constant =
            AuctionMechanism::from_fn("c", s, |b| auction(0, &vec![0; b.len()])).unwrap();
        assert_eq!(
            is_dual_dictatorship(&constant, &s).unwrap(),
            Some(DualDictatorship {
                i1: 0,
                i2: 1,
                winning_bids: vec![1, 2, 3, 4, 5]
            })
        );
        let parity = AuctionMechanism::from_fn("p", s, |b| {
            auction(if b[0] % 2 == 0 { 0 } else { 1 }, &vec![0; b.len()])
        })
        .unwrap();
        assert_eq!(
            is_dual_dictatorship(&parity, &s).unwrap(),
            Some(DualDictatorship {
                i1: 0,
                i2: 1,
                winning_bids: vec![2, 4]
            })
        );
        let first = AuctionMechanism::new("fpa", s, AuctionRule::FirstPrice);
        assert_eq!(is_dual_dictatorship(&first, &s).unwrap(), None);
    }

    #[test]
    fn sweep_budget() {
        let s = Setting::auction(3, 9);
        let m = AuctionMechanism::new("fpa", s, AuctionRule::FirstPrice);
        assert!(matches!(is_fixed_pay(&m, &s), Err(Error::Budget { .. })));
    }

    #[test]
    fn incomplete_table_is_rejected() {
        let rows = vec![(vec![5, 2, 3], auction(0, &[5, 0, 0]))];
        assert!(AuctionMechanism::from_rows("t", setting(), rows).is_err());
    }
}
