//! Choice with affirmative action: reserved-seats-first and
//! open-seats-first processing, and the two priority-compatibility
//! predicates that single out reserved-seats-first.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{Group, Outcome, Problem, ReservesConfig, Setting};

fn config_of(problem: &Problem) -> Result<ReservesConfig> {
    let c = problem.setting.reserves_config().ok_or_else(|| {
        Error::input(format!(
            "expected a reserves problem, got a {} problem",
            problem.setting.name()
        ))
    })?;
    problem.check()?;
    Ok(c)
}

/// Members of `pool` in decreasing score order.
fn by_priority(problem: &Problem, pool: Group) -> Vec<usize> {
    let mut v: Vec<usize> = pool.members().collect();
    v.sort_by_key(|&i| std::cmp::Reverse(problem.score(i)));
    v
}

/// Adds the best `k` members of `pool` (or all of them if fewer) to `chosen`.
fn take(problem: &Problem, pool: Group, k: usize, chosen: Group) -> Group {
    by_priority(problem, pool)
        .into_iter()
        .take(k)
        .fold(chosen, |g, i| g.with(i))
}

/// Up to `r` best low-income individuals, then the best of everyone else.
pub fn rsf(problem: &Problem) -> Result<Outcome> {
    let c = config_of(problem)?;
    let reserved = take(problem, c.low_income, c.r, Group::EMPTY);
    let chosen = take(
        problem,
        reserved.complement(problem.n()),
        c.q - reserved.len(),
        reserved,
    );
    Ok(Outcome::Chosen(chosen))
}

/// Up to `q - r` best overall, then up to `r` best remaining low-income
/// individuals, then the best remaining individuals until `q` are chosen.
pub fn osf(problem: &Problem) -> Result<Outcome> {
    let c = config_of(problem)?;
    let n = problem.n();
    let open = take(problem, Group::full(n), c.q - c.r, Group::EMPTY);
    let reserved = take(
        problem,
        c.low_income.intersection(open.complement(n)),
        c.r,
        open,
    );
    let chosen = take(
        problem,
        reserved.complement(n),
        c.q - reserved.len(),
        reserved,
    );
    Ok(Outcome::Chosen(chosen))
}

/// An individual `i` whose priority is violated by `j`: `j` is chosen,
/// `i` is not, and `i` has the higher score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompatibilityReport {
    pub compatible: bool,
    pub violation: Option<Violation>,
}

fn chosen_of(problem: &Problem, c: &ReservesConfig, outcome: &Outcome) -> Result<Group> {
    outcome.check(&problem.setting)?;
    match outcome {
        Outcome::Chosen(g) if g.len() == c.q => Ok(*g),
        _ => Err(Error::input(format!("{outcome} is not a reserves outcome"))),
    }
}

fn violations(problem: &Problem, chosen: Group) -> impl Iterator<Item = Violation> + '_ {
    let n = problem.n();
    (0..n).flat_map(move |i| {
        (0..n)
            .filter(move |&j| {
                !chosen.contains(i) && chosen.contains(j) && problem.score(i) > problem.score(j)
            })
            .map(move |j| Violation { i, j })
    })
}

fn report(first: Option<Violation>) -> CompatibilityReport {
    CompatibilityReport {
        compatible: first.is_none(),
        violation: first,
    }
}

/// Every priority violation has a high-income victim and a low-income
/// beneficiary.
pub fn within_type_compatible(problem: &Problem, outcome: &Outcome) -> Result<CompatibilityReport> {
    let c = config_of(problem)?;
    let chosen = chosen_of(problem, &c, outcome)?;
    let low = c.low_income;
    Ok(report(
        violations(problem, chosen).find(|v| !(!low.contains(v.i) && low.contains(v.j))),
    ))
}

/// A high-income individual may only be passed over for a low-income one
/// while exactly `r` low-income individuals are chosen.
pub fn saturated_compatible(problem: &Problem, outcome: &Outcome) -> Result<CompatibilityReport> {
    let c = config_of(problem)?;
    let chosen = chosen_of(problem, &c, outcome)?;
    let low = c.low_income;
    let saturated = chosen.intersection(low).len() == c.r;
    Ok(report(violations(problem, chosen).find(|v| {
        !low.contains(v.i) && low.contains(v.j) && !saturated
    })))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReservesRule {
    ReservedSeatsFirst,
    OpenSeatsFirst,
}

pub struct ReservesMechanism {
    descriptor: String,
    setting: Setting,
    rule: ReservesRule,
}

impl ReservesMechanism {
    pub fn new(descriptor: &str, setting: Setting, rule: ReservesRule) -> Self {
        ReservesMechanism {
            descriptor: descriptor.to_string(),
            setting,
            rule,
        }
    }
}

impl Mechanism for ReservesMechanism {
    fn descriptor(&self) -> &str {
        &self.descriptor
    }

    fn setting(&self) -> &Setting {
        &self.setting
    }

    fn evaluate(&self, problem: &Problem) -> Result<Outcome> {
        if problem.setting != self.setting {
            return Err(Error::input(format!(
                "'{}' expects a reserves problem with setting {}",
                self.descriptor,
                self.setting.describe()
            )));
        }
        match self.rule {
            ReservesRule::ReservedSeatsFirst => rsf(problem),
            ReservesRule::OpenSeatsFirst => osf(problem),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{enumerate_outcomes, ProblemSpace};

    fn low() -> Group {
        Group::from_members([0, 1])
    }

    /// Individuals a, b, c, d = 0, 1, 2, 3 with c > a > d > b.
    fn reference() -> Problem {
        Problem::reserves(3, 1, low(), &[3, 1, 4, 2]).unwrap()
    }

    fn chosen(members: &[usize]) -> Outcome {
        Outcome::Chosen(Group::from_members(members.iter().copied()))
    }

    #[test]
    fn reference_instance() {
        let p = reference();
        assert_eq!(rsf(&p).unwrap(), chosen(&[0, 2, 3]));
        assert_eq!(osf(&p).unwrap(), chosen(&[0, 1, 2]));
        let r = rsf(&p).unwrap();
        assert!(within_type_compatible(&p, &r).unwrap().compatible);
        assert!(saturated_compatible(&p, &r).unwrap().compatible);
        let o = osf(&p).unwrap();
        let sat = saturated_compatible(&p, &o).unwrap();
        assert!(!sat.compatible);
        assert_eq!(sat.violation, Some(Violation { i: 3, j: 1 }));
    }

    #[test]
    fn degenerate_reserves() {
        let p = Problem::reserves(3, 0, low(), &[3, 1, 4, 2]).unwrap();
        assert_eq!(rsf(&p).unwrap(), chosen(&[0, 2, 3]));
        assert_eq!(osf(&p).unwrap(), rsf(&p).unwrap());
        let everyone = Problem::reserves(2, 1, Group::full(4), &[3, 1, 4, 2]).unwrap();
        assert_eq!(rsf(&everyone).unwrap(), chosen(&[0, 2]));
        // Low-income individuals all below the open seats: both rules agree.
        let p = Problem::reserves(3, 1, low(), &[2, 1, 4, 3]).unwrap();
        assert_eq!(rsf(&p).unwrap(), osf(&p).unwrap());
    }

    #[test]
    fn within_type_violation_detected() {
        let p = reference();
        // d chosen over c, both high-income.
        let rep = within_type_compatible(&p, &chosen(&[0, 1, 3])).unwrap();
        assert!(!rep.compatible);
        assert_eq!(rep.violation, Some(Violation { i: 2, j: 3 }));
    }

    #[test]
    fn rsf_is_the_unique_doubly_compatible_outcome() {
        for n in 3..=5 {
            for q in 1..n {
                for r in 0..=q.min(2) {
                    let s = Setting::reserves(n, q, r, low());
                    let universe = enumerate_outcomes(&s);
                    for p in ProblemSpace::new(s).unwrap().iter() {
                        let compatible: Vec<&Outcome> = universe
                            .iter()
                            .filter(|o| {
                                within_type_compatible(&p, o).unwrap().compatible
                                    && saturated_compatible(&p, o).unwrap().compatible
                            })
                            .collect();
                        assert_eq!(compatible, vec![&rsf(&p).unwrap()], "{p:?}");
                        let lows = |o: Outcome| match o {
                            Outcome::Chosen(g) => g.intersection(low()).len(),
                            _ => 0,
                        };
                        assert!(lows(osf(&p).unwrap()) >= lows(rsf(&p).unwrap()));
                    }
                }
            }
        }
    }
}
