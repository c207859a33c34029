//! Constructed problems and deviations that pin down index bounds, plus
//! small mechanism batteries used by the characterization checks.

use smallvec::SmallVec;

use crate::auction::AuctionMechanism;
use crate::error::{Error, Result};
use crate::house::{ConstantMechanism, DictatorialStructure, SequentialDictatorship};
use crate::mechanism::{parse_mechanism, MechanismHandle};
use crate::model::{Group, Outcome, Problem, Setting};
use std::sync::Arc;

/// The preference cycle on which every application-rejection mechanism
/// with period above one needs all `n` individuals to detect a deviation:
/// individual `k` ranks object `k + 1` first (cyclically) and object `k`
/// second, and has the top priority at object `k`. Priorities at object
/// `o` descend cyclically from `o`.
pub fn cycle_problem(n: usize) -> Result<Problem> {
    if !(2..=8).contains(&n) {
        return Err(Error::usage(format!(
            "the cycle problem needs 2 <= n <= 8, got {n}"
        )));
    }
    let prefs: Vec<Vec<u8>> = (0..n)
        .map(|k| {
            let mut p = vec![((k + 1) % n) as u8, k as u8];
            p.extend((0..n as u8).filter(|&o| o as usize != k && o as usize != (k + 1) % n));
            p
        })
        .collect();
    let scores: Vec<Vec<u32>> = (0..n)
        .map(|i| (0..n).map(|o| (n - 1 - (o + n - i) % n) as u32).collect())
        .collect();
    let prefs: Vec<&[u8]> = prefs.iter().map(Vec::as_slice).collect();
    let scores: Vec<&[u32]> = scores.iter().map(Vec::as_slice).collect();
    Problem::priority(&prefs, &scores)
}

/// Everyone receives her second choice at the cycle problem.
pub fn cycle_deviation(n: usize) -> Outcome {
    Outcome::Allocation((0..n as u8).collect())
}

/// The sequential dictatorship whose next-to-last dictator depends on the
/// whole history, so that two late dictators can trade undetected.
pub fn swap_structure(n: usize) -> Result<DictatorialStructure> {
    DictatorialStructure::swap_fixture(n)
}

/// The problem at which the swap structure's last two dictators hold
/// objects `n − 2` and `n − 1`: individual `k < n − 2` ranks object `k`
/// first, and both late dictators rank every early object above `n − 2`
/// and `n − 2` above `n − 1`.
pub fn swap_problem(n: usize) -> Result<Problem> {
    if n < 4 {
        return Err(Error::usage(format!(
            "the swap problem needs n >= 4, got {n}"
        )));
    }
    let prefs: Vec<Vec<u8>> = (0..n)
        .map(|k| {
            if k < n - 2 {
                let mut p = vec![k as u8];
                p.extend((0..n as u8).filter(|&o| o as usize != k));
                p
            } else {
                (0..n as u8).collect()
            }
        })
        .collect();
    let prefs: Vec<&[u8]> = prefs.iter().map(Vec::as_slice).collect();
    Problem::house(&prefs)
}

/// The two late dictators swap objects.
pub fn swap_deviation(n: usize) -> Outcome {
    let mut a: Vec<u8> = (0..n as u8).collect();
    a.swap(n - 2, n - 1);
    Outcome::Allocation(a.into_iter().collect())
}

/// The swap structure as a mechanism.
pub fn swap_mechanism(n: usize) -> Result<MechanismHandle> {
    parse_mechanism(&format!("fixture:swap:n={n}"), &Setting::house(n))
}

/// Reserves setting used by the constructions: four applicants, three
/// seats, one reserved seat, applicants 0 and 1 low-income.
pub fn reserves_setting() -> Setting {
    Setting::reserves(4, 3, 1, Group::from_members([0, 1]))
}

/// Every low-income applicant ranks below every other applicant; the
/// deviation admits both low-income applicants and only the best of the
/// others. No group smaller than `R + 2` detects it under either
/// processing order.
pub fn reserves_low_last() -> Result<(Problem, Outcome)> {
    let p = Problem::reserves(3, 1, Group::from_members([0, 1]), &[2, 1, 4, 3])?;
    Ok((p, Outcome::Chosen(Group::from_members([0, 1, 2]))))
}

/// One low-income applicant on top, the other at the bottom; open seats
/// first admits both, and the deviation trades the bottom low-income
/// applicant for the best unadmitted other applicant. No group smaller
/// than `Q − R + 1` detects it under open seats first.
pub fn reserves_split_low() -> Result<(Problem, Outcome)> {
    let p = Problem::reserves(3, 1, Group::from_members([0, 1]), &[4, 1, 3, 2])?;
    Ok((p, Outcome::Chosen(Group::from_members([0, 2, 3]))))
}

/// Second-price problem with bids (5, 2, 3) on grid 1..=5, and the
/// deviation where the winner pays 4, strictly between the second-highest
/// bid and her own.
pub fn spa_between_payment() -> Result<(Problem, Outcome)> {
    let p = Problem::auction(5, &[5, 2, 3])?;
    Ok((
        p,
        Outcome::Auction {
            winner: 0,
            payments: SmallVec::from_slice(&[4, 0, 0]),
        },
    ))
}

/// A three-individual house problem meeting the chain condition for the
/// order 0, 1, 2.
pub fn chain_problem() -> Result<Problem> {
    Problem::house(&[&[0, 1, 2], &[1, 0, 2], &[2, 0, 1]])
}

/// A three-individual house problem violating the chain condition for the
/// order 0, 1, 2: the second dictator's top two omit the first's top.
pub fn non_chain_problem() -> Result<Problem> {
    Problem::house(&[&[0, 1, 2], &[1, 2, 0], &[2, 0, 1]])
}

/// Immediate acceptance on the four-individual cycle, with the deviation
/// in which everyone gets her second choice; some pair detects it.
pub fn ia_pair_fixture() -> Result<(Problem, Outcome)> {
    Ok((cycle_problem(4)?, cycle_deviation(4)))
}

/// Serial dictatorship, deferred acceptance, immediate acceptance and a
/// constant assignment at `n` individuals.
pub fn allocation_battery(n: usize) -> Result<Vec<MechanismHandle>> {
    let order: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let order = order.join(",");
    let reversed: Vec<u8> = (0..n as u8).rev().collect();
    Ok(vec![
        parse_mechanism(&format!("serial:order={order}"), &Setting::house(n))?,
        parse_mechanism("da", &Setting::priority(n))?,
        parse_mechanism("ia", &Setting::priority(n))?,
        Arc::new(ConstantMechanism::new(
            &format!(
                "constant:assign={}",
                reversed
                    .iter()
                    .map(u8::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            Setting::house(n),
            reversed,
        )?),
    ])
}

/// A serial dictatorship in index order.
pub fn serial_mechanism(n: usize) -> MechanismHandle {
    let order: Vec<u8> = (0..n as u8).collect();
    let desc = format!(
        "serial:order={}",
        order
            .iter()
            .map(u8::to_string)
            .collect::<Vec<_>>()
            .join(",")
    );
    Arc::new(SequentialDictatorship::new(
        &desc,
        Setting::house(n),
        DictatorialStructure::Serial(order),
    ))
}

type BidRule = Box<dyn Fn(&[u32]) -> Outcome + Send + Sync>;

/// Hand-built auction tables at three bidders on grid 1..=5: three
/// dual dictatorships (first) and three tables that are not.
pub fn auction_battery() -> Result<Vec<(MechanismHandle, bool)>> {
    let setting = Setting::auction(3, 5);
    let pay = |winner: usize, amounts: [u32; 3]| Outcome::Auction {
        winner: winner as u8,
        payments: SmallVec::from_slice(&amounts),
    };
    let table = |desc: &str, f: BidRule| -> Result<MechanismHandle> {
        Ok(Arc::new(AuctionMechanism::from_fn(desc, setting, f)?))
    };
    Ok(vec![
        // 0 wins with an odd bid, 1 otherwise; nobody pays.
        (
            table(
                "dual:0-odd-else-1",
                Box::new(move |b: &[u32]| pay(if b[0] % 2 == 1 { 0 } else { 1 }, [0, 0, 0])),
            )?,
            true,
        ),
        // 2 wins when bidding at least 4, 0 otherwise; the winner pays a flat 1.
        (
            table(
                "dual:2-high-else-0",
                Box::new(move |b: &[u32]| {
                    if b[2] >= 4 {
                        pay(2, [0, 0, 1])
                    } else {
                        pay(0, [1, 0, 0])
                    }
                }),
            )?,
            true,
        ),
        // 1 always wins and pays her own bid.
        (
            table(
                "dual:1-always",
                Box::new(move |b: &[u32]| {
                    let mut p = [0; 3];
                    p[1] = b[1];
                    pay(1, p)
                }),
            )?,
            true,
        ),
        (parse_mechanism("fpa", &setting)?, false),
        (parse_mechanism("apa", &setting)?, false),
        (parse_mechanism("spa", &setting)?, false),
    ])
}
