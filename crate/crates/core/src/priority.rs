//! Priority-based allocation: deferred acceptance (both proposing sides),
//! immediate acceptance, the application-rejection family, DA
//! representations through modified priorities, and stability tooling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{enumerate_outcomes, Outcome, Problem, Scores, Setting, SettingKind};
use crate::perm::{Ranking, MAX_N};

/// Fixed-size copy of a priority problem's preferences and scores.
#[derive(Clone, Copy, Debug)]
pub struct PriorityView {
    pub n: usize,
    /// `pref[i][k]` = object in position `k` of `i`'s ranking.
    pub pref: [[u8; MAX_N]; MAX_N],
    /// `pos[i][o]` = position of object `o` in `i`'s ranking.
    pub pos: [[u8; MAX_N]; MAX_N],
    /// `score[i][o]` = priority of `i` at `o`; higher is better.
    pub score: [[u32; MAX_N]; MAX_N],
}

impl PriorityView {
    pub fn new(problem: &Problem) -> Self {
        let n = problem.n();
        let mut v = PriorityView {
            n,
            pref: [[0; MAX_N]; MAX_N],
            pos: [[0; MAX_N]; MAX_N],
            score: [[0; MAX_N]; MAX_N],
        };
        for i in 0..n {
            for (k, &o) in problem.pref(i).iter().enumerate() {
                v.pref[i][k] = o;
                v.pos[i][o as usize] = k as u8;
            }
            v.score[i][..n].copy_from_slice(&problem.scores(i)[..n]);
        }
        v
    }

    /// The same preferences with modified priority scores.
    pub fn with_scores(mut self, scores: &ModifiedScores) -> Self {
        for i in 0..self.n {
            self.score[i][..self.n].copy_from_slice(&scores.0[i][..self.n]);
        }
        self
    }

    fn prefers(&self, i: usize, a: u8, b: u8) -> bool {
        self.pos[i][a as usize] < self.pos[i][b as usize]
    }
}

fn require_priority(problem: &Problem) -> Result<()> {
    if problem.setting.kind != SettingKind::Priority {
        return Err(Error::input(format!(
            "expected a priority problem, got a {} problem",
            problem.setting.name()
        )));
    }
    Ok(())
}

fn to_outcome(n: usize, assigned: &[u8; MAX_N]) -> Outcome {
    Outcome::Allocation(assigned[..n].iter().copied().collect())
}

/// Individual-proposing deferred acceptance on a view.
pub fn da_view(v: &PriorityView) -> Outcome {
    let n = v.n;
    let mut next = [0usize; MAX_N];
    let mut holder = [u8::MAX; MAX_N];
    let mut free: Vec<usize> = (0..n).rev().collect();
    while let Some(i) = free.pop() {
        let o = v.pref[i][next[i]] as usize;
        next[i] += 1;
        match holder[o] {
            u8::MAX => holder[o] = i as u8,
            h if v.score[i][o] > v.score[h as usize][o] => {
                holder[o] = i as u8;
                free.push(h as usize);
            }
            _ => free.push(i),
        }
    }
    let mut assigned = [0u8; MAX_N];
    for o in 0..n {
        assigned[holder[o] as usize] = o as u8;
    }
    to_outcome(n, &assigned)
}

/// Object-proposing deferred acceptance on a view: the individual-pessimal
/// stable outcome.
pub fn da_object_view(v: &PriorityView) -> Outcome {
    let n = v.n;
    let mut order = [[0u8; MAX_N]; MAX_N];
    for (o, row) in order.iter_mut().enumerate().take(n) {
        let mut ids: Vec<u8> = (0..n as u8).collect();
        ids.sort_by(|&a, &b| v.score[b as usize][o].cmp(&v.score[a as usize][o]));
        row[..n].copy_from_slice(&ids);
    }
    let mut next = [0usize; MAX_N];
    let mut held = [u8::MAX; MAX_N];
    let mut free: Vec<usize> = (0..n).rev().collect();
    while let Some(o) = free.pop() {
        let i = order[o][next[o]] as usize;
        next[o] += 1;
        match held[i] {
            u8::MAX => held[i] = o as u8,
            h if v.prefers(i, o as u8, h) => {
                held[i] = o as u8;
                free.push(h as usize);
            }
            _ => free.push(o),
        }
    }
    to_outcome(n, &held)
}

/// Immediate acceptance ("Boston"): at step `t` every unassigned individual
/// claims the object in position `t` of her ranking; each still-available
/// object goes to its highest-priority claimant and assignments are final.
pub fn ia_view(v: &PriorityView) -> Outcome {
    let n = v.n;
    let mut assigned = [u8::MAX; MAX_N];
    let mut taken = [false; MAX_N];
    for t in 0..n {
        let mut best = [u8::MAX; MAX_N];
        for i in 0..n {
            if assigned[i] != u8::MAX {
                continue;
            }
            let o = v.pref[i][t] as usize;
            if taken[o] {
                continue;
            }
            if best[o] == u8::MAX || v.score[i][o] > v.score[best[o] as usize][o] {
                best[o] = i as u8;
            }
        }
        for o in 0..n {
            if best[o] != u8::MAX {
                assigned[best[o] as usize] = o as u8;
                taken[o] = true;
            }
        }
    }
    to_outcome(n, &assigned)
}

/// Application-rejection with permanency-execution period `e`, run as
/// rounds: in round `t` each available individual may claim the objects in
/// positions `te..te+e` of her ranking, holdings inside a round are
/// tentative, objects made permanent earlier reject every claim, and all
/// tentative holdings become permanent when the round ends.
pub fn ar_view(v: &PriorityView, e: usize) -> Outcome {
    let n = v.n;
    let mut assigned = [u8::MAX; MAX_N];
    let mut permanent = [false; MAX_N];
    let mut left = n;
    let mut round = 0usize;
    while left > 0 {
        let start = round * e;
        if start >= n {
            unreachable!("application-rejection rounds exhausted with individuals unassigned");
        }
        let end = (start + e).min(n);
        let mut next = [start; MAX_N];
        let mut holder = [u8::MAX; MAX_N];
        let mut active: Vec<usize> = (0..n).rev().filter(|&i| assigned[i] == u8::MAX).collect();
        while let Some(i) = active.pop() {
            while next[i] < end {
                let o = v.pref[i][next[i]] as usize;
                next[i] += 1;
                if permanent[o] {
                    continue;
                }
                match holder[o] {
                    u8::MAX => {
                        holder[o] = i as u8;
                        break;
                    }
                    h if v.score[i][o] > v.score[h as usize][o] => {
                        holder[o] = i as u8;
                        active.push(h as usize);
                        break;
                    }
                    _ => continue,
                }
            }
        }
        for o in 0..n {
            if holder[o] != u8::MAX {
                assigned[holder[o] as usize] = o as u8;
                permanent[o] = true;
                left -= 1;
            }
        }
        round += 1;
    }
    to_outcome(n, &assigned)
}

pub fn da(problem: &Problem) -> Result<Outcome> {
    require_priority(problem)?;
    Ok(da_view(&PriorityView::new(problem)))
}

pub fn da_object_proposing(problem: &Problem) -> Result<Outcome> {
    require_priority(problem)?;
    Ok(da_object_view(&PriorityView::new(problem)))
}

pub fn ia(problem: &Problem) -> Result<Outcome> {
    require_priority(problem)?;
    Ok(ia_view(&PriorityView::new(problem)))
}

pub fn ar(problem: &Problem, e: usize) -> Result<Outcome> {
    require_priority(problem)?;
    if e == 0 {
        return Err(Error::config(
            "application-rejection period e must be at least 1",
        ));
    }
    Ok(ar_view(&PriorityView::new(problem), e))
}

/// Priority modification used by a DA representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TauKind {
    /// Keep the reported scores.
    Identity,
    /// Order by the position of the object in the ranking, then by score.
    IaRank,
    /// Order by tier `position / e`, then by score.
    ArTier(usize),
}

impl TauKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(TauKind::Identity),
            "ia" => Ok(TauKind::IaRank),
            other => match other.strip_prefix("ar-").map(str::parse::<usize>) {
                Some(Ok(e)) if e >= 1 => Ok(TauKind::ArTier(e)),
                _ => Err(Error::config(format!(
                    "unknown priority modification '{other}' (expected identity, ia or ar-<e>)"
                ))),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            TauKind::Identity => "identity".into(),
            TauKind::IaRank => "ia".into(),
            TauKind::ArTier(e) => format!("ar-{e}"),
        }
    }

    fn tier(&self, position: usize) -> usize {
        match self {
            TauKind::Identity => 0,
            TauKind::IaRank => position,
            TauKind::ArTier(e) => position / e,
        }
    }
}

/// Modified priority scores, `0[i][o]`; distinct per object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModifiedScores(pub Vec<Scores>);

/// Modified scores on a view. Non-identity kinds encode
/// `(n - tier) * n + rank`, where `rank` counts the individuals with a lower
/// reported score at the object.
pub fn tau_view(kind: TauKind, v: &PriorityView) -> ModifiedScores {
    let n = v.n;
    let mut out = vec![Scores::from_elem(0, n); n];
    for o in 0..n {
        for i in 0..n {
            out[i][o] = match kind {
                TauKind::Identity => v.score[i][o],
                _ => {
                    let rank = (0..n).filter(|&j| v.score[j][o] < v.score[i][o]).count();
                    let tier = kind.tier(v.pos[i][o] as usize);
                    ((n - tier) * n + rank) as u32
                }
            };
        }
    }
    ModifiedScores(out)
}

pub fn apply_tau(kind: TauKind, problem: &Problem) -> Result<ModifiedScores> {
    require_priority(problem)?;
    Ok(tau_view(kind, &PriorityView::new(problem)))
}

/// DA run on the reported preferences and modified priorities.
pub fn da_represent(problem: &Problem, kind: TauKind) -> Result<Outcome> {
    require_priority(problem)?;
    let v = PriorityView::new(problem);
    Ok(da_view(&v.with_scores(&tau_view(kind, &v))))
}

/// Whether an allocation admits no blocking triple `(i, j, o)` with
/// `o` preferred by `i` to her own object, `o` held by `j`, and `i` above `j` at `o`.
pub fn is_stable_view(v: &PriorityView, outcome: &Outcome) -> bool {
    blocking_triple(v, outcome).is_none()
}

/// The first blocking triple `(i, j, o)`, if any.
pub fn blocking_triple(v: &PriorityView, outcome: &Outcome) -> Option<(usize, usize, usize)> {
    let a = outcome.allocation()?;
    let n = v.n;
    let mut owner = [0usize; MAX_N];
    for i in 0..n {
        owner[a[i] as usize] = i;
    }
    for i in 0..n {
        for k in 0..v.pos[i][a[i] as usize] as usize {
            let o = v.pref[i][k] as usize;
            let j = owner[o];
            if v.score[i][o] > v.score[j][o] {
                return Some((i, j, o));
            }
        }
    }
    None
}

pub fn is_stable(problem: &Problem, outcome: &Outcome) -> Result<bool> {
    require_priority(problem)?;
    outcome.check(&problem.setting)?;
    Ok(is_stable_view(&PriorityView::new(problem), outcome))
}

/// Default cap on `n` for stable-set enumeration.
pub const STABLE_CAP: usize = 6;

/// All stable allocations of a view, by filtering the allocation universe.
pub fn enumerate_stable_view(v: &PriorityView, cap: usize) -> Result<Vec<Outcome>> {
    if v.n > cap {
        return Err(Error::budget(
            "stable-set enumeration",
            crate::perm::factorial(v.n),
            crate::perm::factorial(cap),
        ));
    }
    Ok(enumerate_outcomes(&Setting::priority(v.n))
        .into_iter()
        .filter(|o| is_stable_view(v, o))
        .collect())
}

/// Stable allocations of a problem, optionally under modified priorities.
pub fn enumerate_stable(
    problem: &Problem,
    tau: Option<TauKind>,
    cap: usize,
) -> Result<Vec<Outcome>> {
    require_priority(problem)?;
    let v = PriorityView::new(problem);
    let v = match tau {
        Some(kind) => v.with_scores(&tau_view(kind, &v)),
        None => v,
    };
    enumerate_stable_view(&v, cap)
}

/// Which priority-based rule a [`PriorityMechanism`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorityRule {
    Da,
    DaObjectProposing,
    Ia,
    Ar(usize),
    DaRepresent(TauKind),
}

pub struct PriorityMechanism {
    descriptor: String,
    setting: Setting,
    rule: PriorityRule,
}

impl PriorityMechanism {
    pub fn new(descriptor: &str, setting: Setting, rule: PriorityRule) -> Self {
        PriorityMechanism {
            descriptor: descriptor.to_string(),
            setting,
            rule,
        }
    }

    pub fn rule(&self) -> PriorityRule {
        self.rule
    }
}

impl Mechanism for PriorityMechanism {
    fn descriptor(&self) -> &str {
        &self.descriptor
    }

    fn setting(&self) -> &Setting {
        &self.setting
    }

    fn evaluate(&self, problem: &Problem) -> Result<Outcome> {
        require_priority(problem)?;
        let v = PriorityView::new(problem);
        Ok(match self.rule {
            PriorityRule::Da => da_view(&v),
            PriorityRule::DaObjectProposing => da_object_view(&v),
            PriorityRule::Ia => ia_view(&v),
            PriorityRule::Ar(e) => ar_view(&v, e),
            PriorityRule::DaRepresent(kind) => da_view(&v.with_scores(&tau_view(kind, &v))),
        })
    }
}

/// Ranking helper for tests and fixtures.
pub fn ranking(objects: &[u8]) -> Ranking {
    objects.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{enumerate_problems, Setting};

    fn cycle3() -> Problem {
        Problem::priority(
            &[&[1, 0, 2], &[2, 1, 0], &[0, 2, 1]],
            &[&[2, 0, 0], &[0, 2, 1], &[1, 1, 2]],
        )
        .unwrap()
    }

    fn alloc(a: &[u8]) -> Outcome {
        Outcome::Allocation(ranking(a))
    }

    /// Brute-force oracle: the stable matching every individual weakly prefers.
    fn optimal_stable(v: &PriorityView, pessimal: bool) -> Outcome {
        let stable = enumerate_stable_view(v, 6).unwrap();
        stable
            .iter()
            .find(|cand| {
                stable.iter().all(|other| {
                    (0..v.n).all(|i| {
                        let c = v.pos[i][cand.allocation().unwrap()[i] as usize];
                        let o = v.pos[i][other.allocation().unwrap()[i] as usize];
                        if pessimal {
                            c >= o
                        } else {
                            c <= o
                        }
                    })
                })
            })
            .cloned()
            .unwrap()
    }

    #[test]
    fn cycle_fixture_outcomes() {
        let p = cycle3();
        assert_eq!(da(&p).unwrap(), alloc(&[1, 2, 0]));
        assert_eq!(ia(&p).unwrap(), alloc(&[1, 2, 0]));
        assert_eq!(ar(&p, 2).unwrap(), alloc(&[1, 2, 0]));
        assert_eq!(da_object_proposing(&p).unwrap(), alloc(&[0, 1, 2]));
        assert!(is_stable(&p, &alloc(&[0, 1, 2])).unwrap());
        assert!(!is_stable(&p, &alloc(&[2, 1, 0])).unwrap());
        let stable = enumerate_stable(&p, None, STABLE_CAP).unwrap();
        assert_eq!(stable, vec![alloc(&[0, 1, 2]), alloc(&[1, 2, 0])]);
    }

    #[test]
    fn two_agent_contest() {
        let p = Problem::priority(&[&[0, 1], &[0, 1]], &[&[1, 0], &[0, 1]]).unwrap();
        for out in [da(&p), ia(&p), da_object_proposing(&p)] {
            assert_eq!(out.unwrap(), alloc(&[0, 1]));
        }
        assert_eq!(enumerate_stable(&p, None, STABLE_CAP).unwrap().len(), 1);
    }

    #[test]
    fn da_sides_match_brute_force_optima_exhaustively_n3() {
        for p in enumerate_problems(&Setting::priority(3))
            .unwrap()
            .step_by(7)
        {
            let v = PriorityView::new(&p);
            assert_eq!(da_view(&v), optimal_stable(&v, false));
            assert_eq!(da_object_view(&v), optimal_stable(&v, true));
        }
    }

    /// Immediate acceptance in which each individual claims her most
    /// preferred object that is still available.
    fn ia_adaptive(v: &PriorityView) -> Outcome {
        let n = v.n;
        let mut assigned = [u8::MAX; MAX_N];
        let mut taken = [false; MAX_N];
        while assigned[..n].contains(&u8::MAX) {
            let mut best = [u8::MAX; MAX_N];
            for i in (0..n).filter(|&i| assigned[i] == u8::MAX) {
                let o = *v.pref[i][..n]
                    .iter()
                    .find(|&&o| !taken[o as usize])
                    .unwrap() as usize;
                if best[o] == u8::MAX || v.score[i][o] > v.score[best[o] as usize][o] {
                    best[o] = i as u8;
                }
            }
            for o in 0..n {
                if best[o] != u8::MAX {
                    assigned[best[o] as usize] = o as u8;
                    taken[o] = true;
                }
            }
        }
        to_outcome(n, &assigned)
    }

    #[test]
    fn family_identities_exhaustive_n3() {
        for p in enumerate_problems(&Setting::priority(3)).unwrap() {
            let v = PriorityView::new(&p);
            let d = da_view(&v);
            let i = ia_view(&v);
            assert_eq!(ar_view(&v, 1), i);
            assert_eq!(ar_view(&v, 3), d);
            assert_eq!(ar_view(&v, 4), d);
            assert_eq!(ia_adaptive(&v), i);
            assert_eq!(da_represent(&p, TauKind::Identity).unwrap(), d);
            assert_eq!(da_represent(&p, TauKind::IaRank).unwrap(), i);
            assert_eq!(
                da_represent(&p, TauKind::ArTier(2)).unwrap(),
                ar_view(&v, 2)
            );
            assert!(is_stable_view(&v, &d));
            assert!(is_stable_view(&v, &da_object_view(&v)));
            let worse = da_object_view(&v);
            for k in 0..3 {
                let a = d.allocation().unwrap()[k] as usize;
                let b = worse.allocation().unwrap()[k] as usize;
                assert!(v.pos[k][a] <= v.pos[k][b]);
            }
        }
    }

    #[test]
    fn tau_orders() {
        // i0 ranks o0 second, i1 ranks o0 first, i0 has the higher score.
        let p = Problem::priority(&[&[1, 0], &[0, 1]], &[&[1, 0], &[0, 1]]).unwrap();
        let t = apply_tau(TauKind::IaRank, &p).unwrap();
        assert!(t.0[1][0] > t.0[0][0]);
        let id = apply_tau(TauKind::Identity, &p).unwrap();
        assert_eq!(id.0[0].as_slice(), p.scores(0));
        // i0 ranks o2 first and i1 ranks it second: the same tier for e = 2.
        let p = Problem::priority(
            &[&[2, 0, 1], &[0, 2, 1], &[1, 0, 2]],
            &[&[0, 0, 2], &[1, 1, 1], &[2, 2, 0]],
        )
        .unwrap();
        let t = apply_tau(TauKind::ArTier(2), &p).unwrap();
        assert!(t.0[0][2] > t.0[1][2]);
    }

    #[test]
    fn stable_cap_refuses() {
        let n = 7;
        let rows: Vec<Vec<u8>> = (0..n).map(|_| (0..n as u8).collect()).collect();
        let scores: Vec<Vec<u32>> = (0..n).map(|i| vec![i as u32; n]).collect();
        let prefs: Vec<&[u8]> = rows.iter().map(|r| r.as_slice()).collect();
        let sc: Vec<&[u32]> = scores.iter().map(|r| r.as_slice()).collect();
        let p = Problem::priority(&prefs, &sc).unwrap();
        assert!(matches!(
            enumerate_stable(&p, None, STABLE_CAP),
            Err(Error::Budget { .. })
        ));
    }
}
