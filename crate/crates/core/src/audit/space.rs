//! Counterpart spaces: every way the individuals outside a group can report,
//! canonicalized so that enumeration is exact for ordinal mechanisms.

use smallvec::SmallVec;

use crate::model::{Group, Problem, Scores, SettingKind, TypeReport};
use crate::perm::{self, binomial, factorial};

/// How priority counterparts are enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorityRoute {
    /// Per object, every linear extension of the members' internal order.
    LinearExtensions,
    /// Members on nonzero multiples of `n + 1`, counterparts anywhere on
    /// `0..=n(n+1)`; only distinct score columns are feasible.
    Grid,
}

/// Canonical data of the members that determines the achievable set.
pub type MemberKey = SmallVec<[u8; 64]>;

/// Members of `group` at object `o`, best first.
fn internal_order(problem: &Problem, group: Group, o: usize) -> SmallVec<[u8; 8]> {
    let mut m: SmallVec<[u8; 8]> = group.members().map(|i| i as u8).collect();
    m.sort_by_key(|&i| std::cmp::Reverse(problem.scores(i as usize)[o]));
    m
}

/// Members of `group` ordered by reserves score, best first.
fn score_order(problem: &Problem, group: Group) -> SmallVec<[u8; 8]> {
    let mut m: SmallVec<[u8; 8]> = group.members().map(|i| i as u8).collect();
    m.sort_by_key(|&i| std::cmp::Reverse(problem.score(i as usize)));
    m
}

/// The cache key of the members' reports: everything about them an ordinal
/// mechanism can react to.
pub fn member_key(problem: &Problem, group: Group) -> MemberKey {
    let n = problem.n();
    let mut key = MemberKey::new();
    match problem.setting.kind {
        SettingKind::House => {
            for i in group.members() {
                key.extend_from_slice(problem.pref(i));
            }
        }
        SettingKind::Priority => {
            for i in group.members() {
                key.extend_from_slice(problem.pref(i));
            }
            for o in 0..n {
                key.extend_from_slice(&internal_order(problem, group, o));
            }
        }
        SettingKind::Auction { .. } => {
            for i in group.members() {
                key.push(problem.bid(i) as u8);
            }
        }
        SettingKind::Vote => {
            for i in group.members() {
                key.push(problem.vote_of(i) as u8);
            }
        }
        SettingKind::Reserves(_) => key.extend_from_slice(&score_order(problem, group)),
    }
    key
}

/// An indexed enumeration of counterpart profiles for one group.
pub struct CounterpartSpace {
    template: Problem,
    group: Group,
    outsiders: SmallVec<[usize; 8]>,
    route: PriorityRoute,
    /// Per-object (priority) or overall (reserves) member order, best first.
    orders: Vec<SmallVec<[u8; 8]>>,
    /// Number of choices for one object's counterpart placement.
    per_object: u128,
    len: u128,
}

impl CounterpartSpace {
    pub fn new(problem: &Problem, group: Group, route: PriorityRoute) -> Self {
        let n = problem.n();
        let outsiders: SmallVec<[usize; 8]> = group.complement(n).members().collect();
        let m = outsiders.len() as u32;
        let k = group.len();
        let f = factorial(n);
        let mut orders = Vec::new();
        let mut per_object = 0;
        let len = match problem.setting.kind {
            SettingKind::House => f.pow(m),
            SettingKind::Vote => 1u128 << m,
            SettingKind::Auction { max_bid } => (max_bid as u128).pow(m),
            SettingKind::Reserves(_) => {
                orders.push(score_order(problem, group));
                f / factorial(k)
            }
            SettingKind::Priority => {
                orders = (0..n).map(|o| internal_order(problem, group, o)).collect();
                per_object = match route {
                    PriorityRoute::LinearExtensions => f / factorial(k),
                    PriorityRoute::Grid => ((n * (n + 1) + 1) as u128).pow(m),
                };
                f.pow(m) * per_object.pow(n as u32)
            }
        };
        CounterpartSpace {
            template: problem.clone(),
            group,
            outsiders,
            route,
            orders,
            per_object,
            len,
        }
    }

    pub fn len(&self) -> u128 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The combined profile at position `idx`, or `None` when it is
    /// infeasible (duplicate bids or duplicate scores on the grid).
    pub fn get(&self, mut idx: u128) -> Option<Problem> {
        let n = self.template.n();
        let prefs = perm::permutations(n);
        let f = prefs.len() as u128;
        let mut p = self.template.clone();
        match p.setting.kind {
            SettingKind::House => {
                for &i in self.outsiders.iter().rev() {
                    p.reports[i] = TypeReport::House {
                        pref: prefs[(idx % f) as usize].clone(),
                    };
                    idx /= f;
                }
            }
            SettingKind::Vote => {
                for &i in self.outsiders.iter().rev() {
                    p.reports[i] = TypeReport::Vote(idx & 1 == 1);
                    idx >>= 1;
                }
            }
            SettingKind::Auction { max_bid } => {
                let k = max_bid as u128;
                for &i in self.outsiders.iter().rev() {
                    p.reports[i] = TypeReport::Bid((idx % k) as u32 + 1);
                    idx /= k;
                }
                if !p.is_feasible() {
                    return None;
                }
            }
            SettingKind::Reserves(_) => {
                let order = self.extension(&self.orders[0], idx);
                for (pos, &i) in order.iter().enumerate() {
                    p.reports[i as usize] = TypeReport::Score((n - pos) as u32);
                }
            }
            SettingKind::Priority => {
                let mut scores = vec![Scores::from_elem(0, n); n];
                for o in (0..n).rev() {
                    let digit = idx % self.per_object;
                    idx /= self.per_object;
                    match self.route {
                        PriorityRoute::LinearExtensions => {
                            let order = self.extension(&self.orders[o], digit);
                            for (pos, &i) in order.iter().enumerate() {
                                scores[i as usize][o] = (n - 1 - pos) as u32;
                            }
                        }
                        PriorityRoute::Grid => {
                            let step = (n + 1) as u32;
                            let k = self.orders[o].len();
                            for (rank, &i) in self.orders[o].iter().enumerate() {
                                scores[i as usize][o] = (k - rank) as u32 * step;
                            }
                            let base = (n * (n + 1) + 1) as u128;
                            let mut d = digit;
                            for &i in self.outsiders.iter().rev() {
                                scores[i][o] = (d % base) as u32;
                                d /= base;
                            }
                        }
                    }
                }
                let mut outsider_prefs = idx;
                let mut pref_of = vec![None; n];
                for &i in self.outsiders.iter().rev() {
                    pref_of[i] = Some(prefs[(outsider_prefs % f) as usize].clone());
                    outsider_prefs /= f;
                }
                for i in 0..n {
                    let pref = pref_of[i]
                        .take()
                        .unwrap_or_else(|| p.pref(i).iter().copied().collect());
                    p.reports[i] = TypeReport::Priority {
                        pref,
                        scores: scores[i].clone(),
                    };
                }
                if self.route == PriorityRoute::Grid && !p.is_feasible() {
                    return None;
                }
            }
        }
        Some(p)
    }

    /// The `idx`-th total order of all individuals (best first) that keeps
    /// the members in `members` order: a choice of member positions, then an
    /// arrangement of the outsiders in the remaining positions.
    fn extension(&self, members: &[u8], idx: u128) -> SmallVec<[u8; 8]> {
        let n = self.template.n();
        let k = members.len();
        let arrangements = factorial(n - k);
        let positions = unrank_combination(n, k, idx / arrangements);
        let outsider_order = &perm::permutations(n - k)[(idx % arrangements) as usize];
        let mut order: SmallVec<[u8; 8]> = SmallVec::from_elem(0, n);
        let mut member = members.iter();
        let mut outsider = outsider_order.iter();
        for (pos, slot) in order.iter_mut().enumerate() {
            *slot = if positions & (1 << pos) != 0 {
                *member.next().unwrap()
            } else {
                self.outsiders[*outsider.next().unwrap() as usize] as u8
            };
        }
        order
    }

    pub fn group(&self) -> Group {
        self.group
    }
}

/// The `idx`-th `k`-subset of `0..n` in lexicographic order, as a bit mask.
fn unrank_combination(n: usize, k: usize, mut idx: u128) -> u32 {
    let mut mask = 0u32;
    let mut need = k;
    for pos in 0..n {
        if need == 0 {
            break;
        }
        let with = binomial(n - pos - 1, need - 1);
        if idx < with {
            mask |= 1 << pos;
            need -= 1;
        } else {
            idx -= with;
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn cycle() -> Problem {
        Problem::priority(
            &[&[1, 0, 2], &[2, 1, 0], &[0, 2, 1]],
            &[&[2, 0, 0], &[0, 2, 1], &[1, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn combinations_unrank_in_order() {
        let masks: Vec<u32> = (0..6).map(|i| unrank_combination(4, 2, i)).collect();
        let expected: Vec<u32> = Group::combinations(4, 2)
            .into_iter()
            .map(|g| g.bits())
            .collect();
        assert_eq!(masks, expected);
    }

    #[test]
    fn linear_extensions_cover_every_interleaving_once() {
        let p = cycle();
        for g in [Group::from_members([0]), Group::from_members([0, 2])] {
            let space = CounterpartSpace::new(&p, g, PriorityRoute::LinearExtensions);
            let k = g.len() as u128;
            assert_eq!(
                space.len(),
                6u128.pow(3 - k as u32) * (6 / factorial(k as usize)).pow(3)
            );
            let mut seen = HashSet::new();
            for idx in 0..space.len() {
                let q = space.get(idx).unwrap();
                assert!(q.is_feasible());
                for i in g.members() {
                    assert_eq!(q.pref(i), p.pref(i));
                }
                for o in 0..3 {
                    assert_eq!(internal_order(&q, g, o), internal_order(&p, g, o));
                }
                assert!(seen.insert(q));
            }
        }
    }

    #[test]
    fn grid_route_realizes_the_same_orders() {
        let p = cycle();
        let g = Group::from_members([0, 1]);
        let exact = CounterpartSpace::new(&p, g, PriorityRoute::LinearExtensions);
        let grid = CounterpartSpace::new(&p, g, PriorityRoute::Grid);
        let orders = |s: &CounterpartSpace| -> HashSet<Vec<SmallVec<[u8; 8]>>> {
            (0..s.len())
                .filter_map(|i| s.get(i))
                .map(|q| {
                    let mut v: Vec<SmallVec<[u8; 8]>> = (0..3)
                        .map(|o| internal_order(&q, Group::full(3), o))
                        .collect();
                    v.push(q.pref(2).iter().copied().collect());
                    v
                })
                .collect()
        };
        assert_eq!(orders(&exact), orders(&grid));
    }

    #[test]
    fn other_settings() {
        let bids = Problem::auction(5, &[5, 2, 3]).unwrap();
        let s = CounterpartSpace::new(&bids, Group::singleton(0), PriorityRoute::LinearExtensions);
        assert_eq!(s.len(), 25);
        assert_eq!((0..25).filter_map(|i| s.get(i)).count(), 12);

        let votes = Problem::vote(&[1, 0, 1]).unwrap();
        assert_eq!(
            CounterpartSpace::new(&votes, Group::singleton(1), PriorityRoute::Grid).len(),
            4
        );

        let r = Problem::reserves(3, 1, Group::from_members([0, 1]), &[3, 1, 4, 2]).unwrap();
        let s = CounterpartSpace::new(
            &r,
            Group::from_members([1, 2]),
            PriorityRoute::LinearExtensions,
        );
        assert_eq!(s.len(), 12);
        for i in 0..12 {
            let q = s.get(i).unwrap();
            assert!(q.score(2) > q.score(1));
        }

        let h = Problem::house(&[&[0, 1, 2], &[1, 0, 2], &[2, 1, 0]]).unwrap();
        let s = CounterpartSpace::new(&h, Group::singleton(1), PriorityRoute::LinearExtensions);
        assert_eq!(s.len(), 36);
        assert_eq!(member_key(&h, Group::singleton(1)).as_slice(), &[1, 0, 2]);
    }
}
