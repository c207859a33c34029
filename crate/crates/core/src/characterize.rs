//! Predicates that decide auditability indices without brute force, each
//! paired with the oracle it is checked against, plus the audit-sampling
//! estimator.

use std::sync::Arc;

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::audit::{AuditOptions, Auditor, ProblemScope, WorstCase};
use crate::error::{Error, Result};
use crate::house::{is_vice, DictatorialStructure, SequentialDictatorship, ViceReport};
use crate::mechanism::MechanismHandle;
use crate::model::{Group, Outcome, Problem, ProblemSpace, Setting, SettingKind, TypeReport};
use crate::perm::binomial;
use crate::priority::{
    da_object_view, da_view, enumerate_stable_view, tau_view, PriorityView, TauKind, STABLE_CAP,
};
use crate::reserves::{rsf, saturated_compatible, within_type_compatible};
use crate::vote::{is_anonymous, is_dictatorial, is_majority, VoteMechanism, VoteTable};

/// Two individuals who envy each other's objects at `outcome` and, between
/// them, prefer every third object to what they hold.
pub fn swap_pair(v: &PriorityView, outcome: &Outcome) -> Option<(usize, usize)> {
    let a = outcome.allocation()?;
    let n = v.n;
    let prefers = |i: usize, x: u8, y: u8| v.pos[i][x as usize] < v.pos[i][y as usize];
    for i in 0..n {
        for j in i + 1..n {
            let (oi, oj) = (a[i], a[j]);
            if !prefers(i, oj, oi) || !prefers(j, oi, oj) {
                continue;
            }
            if (0..n as u8)
                .filter(|&o| o != oi && o != oj)
                .all(|o| prefers(i, o, oi) || prefers(j, o, oj))
            {
                return Some((i, j));
            }
        }
    }
    None
}

/// Verdict of the index-two characterization of a DA-representable
/// mechanism at one problem.
#[derive(Clone, Debug, Serialize)]
pub struct IndexTwoVerdict {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<Problem>,
    /// The mechanism's outcome: DA on the modified priorities.
    pub outcome: Outcome,
    /// Every stable deviation at the modified problem has a swap pair.
    pub full: bool,
    /// The individual-pessimal stable outcome alone decides the predicate.
    pub fast: bool,
    pub stable_outcomes: usize,
    pub least_preferred: Outcome,
    /// A stable deviation without a swap pair (when `full` is false).
    pub failing_deviation: Option<Outcome>,
    /// The swap pair found at the least preferred stable outcome.
    pub pair: Option<(usize, usize)>,
}

/// Decides whether the mechanism that runs DA on priorities modified by
/// `kind` has index two at `problem`, by the full stable-set scan and by
/// the least-preferred stable outcome.
pub fn index_two_da_representable(problem: &Problem, kind: TauKind) -> Result<IndexTwoVerdict> {
    if problem.setting.kind != SettingKind::Priority {
        return Err(Error::input(format!(
            "expected a priority problem, got a {} problem",
            problem.setting.name()
        )));
    }
    problem.check()?;
    let base = PriorityView::new(problem);
    let v = base.with_scores(&tau_view(kind, &base));
    let outcome = da_view(&v);
    let stable = enumerate_stable_view(&v, STABLE_CAP)?;
    let failing_deviation = stable
        .iter()
        .find(|w| **w != outcome && swap_pair(&v, w).is_none())
        .cloned();
    let least_preferred = da_object_view(&v);
    let pair = swap_pair(&v, &least_preferred);
    let fast = least_preferred == outcome || pair.is_some();
    Ok(IndexTwoVerdict {
        kind: kind.label(),
        problem: None,
        outcome,
        full: failing_deviation.is_none(),
        fast,
        stable_outcomes: stable.len(),
        least_preferred,
        failing_deviation,
        pair,
    })
}

/// Oracle comparison of the index-two characterization over a scope.
#[derive(Clone, Debug, Serialize)]
pub struct IndexTwoSweep {
    pub kind: String,
    pub scope: String,
    pub problems: u64,
    pub predicate_true: u64,
    pub oracle_two: u64,
    /// Problems where the predicate and the oracle index disagree.
    pub oracle_disagreements: u64,
    /// Problems where the full and fast paths disagree.
    pub path_disagreements: u64,
    /// The first problem, in scope order, where the predicate and the
    /// oracle disagree.
    pub first_disagreement: Option<Problem>,
    /// The first problem where the fast path disagrees with the full one.
    pub first_path_disagreement: Option<IndexTwoVerdict>,
    /// Path disagreements where the fast path says index two and the full
    /// scan does not.
    pub fast_only: u64,
    pub histogram: Vec<u64>,
}

/// Runs the characterization on every problem of `scope` and compares it
/// with the audited index of `da-rep:<kind>`.
pub fn index_two_sweep(
    n: usize,
    kind: TauKind,
    scope: &ProblemScope,
    options: AuditOptions,
) -> Result<IndexTwoSweep> {
    let setting = Setting::priority(n);
    let mech = crate::mechanism::parse_mechanism(&format!("da-rep:{}", kind.label()), &setting)?;
    let auditor = Auditor::new(mech, options)?;
    let worst = auditor.max_index_over(scope)?;
    if worst.problems_skipped > 0 {
        return Err(Error::budget(
            "index-two oracle sweep",
            worst.problems_skipped as u128,
            0,
        ));
    }
    let problems = scope_problems(&worst, scope, &setting)?;
    let verdicts: Vec<Result<IndexTwoVerdict>> = problems
        .par_iter()
        .map(|p| index_two_da_representable(p, kind))
        .collect();
    let mut out = IndexTwoSweep {
        kind: kind.label(),
        scope: scope.label(),
        problems: problems.len() as u64,
        predicate_true: 0,
        oracle_two: 0,
        oracle_disagreements: 0,
        path_disagreements: 0,
        first_disagreement: None,
        first_path_disagreement: None,
        fast_only: 0,
        histogram: worst.histogram.clone(),
    };
    for ((p, v), &ix) in problems.iter().zip(verdicts).zip(&worst.indices) {
        let v = v?;
        let v = IndexTwoVerdict {
            problem: Some(p.clone()),
            ..v
        };
        out.predicate_true += v.full as u64;
        out.oracle_two += (ix == 2) as u64;
        if v.full != v.fast {
            out.path_disagreements += 1;
            out.fast_only += v.fast as u64;
            if out.first_path_disagreement.is_none() {
                out.first_path_disagreement = Some(v.clone());
            }
        }
        if v.full != (ix == 2) {
            out.oracle_disagreements += 1;
            if out.first_disagreement.is_none() {
                out.first_disagreement = Some(p.clone());
            }
        }
    }
    Ok(out)
}

/// The problems a finished sweep visited, in scope order.
fn scope_problems(
    worst: &WorstCase,
    scope: &ProblemScope,
    setting: &Setting,
) -> Result<Vec<Problem>> {
    let space = ProblemSpace::new(*setting)?;
    Ok(match scope {
        ProblemScope::Family { .. } => worst.problems.clone(),
        ProblemScope::Exhaustive => (0..worst.indices.len() as u128)
            .map(|k| space.get(k))
            .collect(),
        ProblemScope::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*count)
                .map(|_| space.get(rng.gen_range(0..space.len())))
                .collect()
        }
    })
}

/// Vice-dictatorship conditions against the audited worst case.
#[derive(Clone, Debug, Serialize)]
pub struct ViceVerdict {
    pub n: usize,
    pub vice: ViceReport,
    pub worst: WorstCase,
    /// True below five individuals, where the equivalence is not claimed.
    pub advisory: bool,
    /// True when the worst case comes from a sample or a family.
    pub sampled: bool,
    /// Vice exactly when the (observed) worst-case index is at most two.
    pub agree: bool,
}

pub fn check_vice_equals_index_two(
    descriptor: &str,
    structure: DictatorialStructure,
    n: usize,
    scope: &ProblemScope,
    options: AuditOptions,
) -> Result<ViceVerdict> {
    let vice = is_vice(&structure, n)?;
    let mech: MechanismHandle = Arc::new(SequentialDictatorship::new(
        descriptor,
        Setting::house(n),
        structure,
    ));
    let worst = Auditor::new(mech, options)?.max_index_over(scope)?;
    let agree = vice.is_vice == (worst.index <= 2);
    Ok(ViceVerdict {
        n,
        advisory: n < 5,
        sampled: worst.lower_bound,
        vice,
        worst,
        agree,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DictatorialVerdict {
    pub table: String,
    pub dictator: Option<usize>,
    pub constant: bool,
    pub worst_index: usize,
    pub agree: bool,
}

fn table_label(t: &VoteTable) -> String {
    t.bits()
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect()
}

fn table_worst(table: &VoteTable, options: AuditOptions) -> Result<usize> {
    let mech: MechanismHandle = Arc::new(VoteMechanism::from_table(
        &format!("table:{}", table_label(table)),
        table.clone(),
    ));
    Ok(Auditor::new(mech, options)?
        .max_index_over(&ProblemScope::Exhaustive)?
        .index)
}

/// Dictatorial (some individual's vote alone fixes the outcome) exactly
/// when the exhaustive worst-case index is one.
pub fn check_dictatorial_iff_index_one(
    table: &VoteTable,
    options: AuditOptions,
) -> Result<DictatorialVerdict> {
    let dictator = is_dictatorial(table);
    let worst_index = table_worst(table, options)?;
    Ok(DictatorialVerdict {
        table: table_label(table),
        dictator,
        constant: table.bits().iter().all(|&b| b == table.bits()[0]),
        worst_index,
        agree: dictator.is_some() == (worst_index == 1),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MajorityRow {
    pub table: String,
    pub majority_for: Option<u8>,
    pub constant: bool,
    pub worst_index: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MajorityVerdict {
    pub n: usize,
    pub bound: usize,
    pub rows: Vec<MajorityRow>,
    /// Majority tables attain the bound and every other non-constant
    /// anonymous table exceeds it.
    pub holds: bool,
    /// Constant tables, whose index is one, are outside the claim.
    pub constant_tables: usize,
}

pub fn check_majority_minimal(
    tables: &[VoteTable],
    options: AuditOptions,
) -> Result<MajorityVerdict> {
    let n = tables
        .first()
        .map(VoteTable::n)
        .ok_or_else(|| Error::usage("empty table battery"))?;
    if n % 2 == 0 {
        return Err(Error::usage(format!(
            "the majority comparison needs an odd n, got {n}"
        )));
    }
    let bound = n.div_ceil(2);
    let mut rows = Vec::with_capacity(tables.len());
    for t in tables {
        if t.n() != n {
            return Err(Error::usage("tables in a battery must share n"));
        }
        let report = is_anonymous(t);
        if !report.anonymous {
            return Err(Error::usage(format!(
                "table {} is not anonymous",
                table_label(t)
            )));
        }
        rows.push(MajorityRow {
            table: table_label(t),
            majority_for: is_majority(t).map(|x| x as u8),
            constant: t.bits().iter().all(|&b| b == t.bits()[0]),
            worst_index: table_worst(t, options)?,
        });
    }
    let holds = rows
        .iter()
        .filter(|r| !r.constant)
        .all(|r| match r.majority_for {
            Some(_) => r.worst_index == bound,
            None => r.worst_index > bound,
        });
    Ok(MajorityVerdict {
        n,
        bound,
        constant_tables: rows.iter().filter(|r| r.constant).count(),
        rows,
        holds,
    })
}

/// Detection probability of a uniformly sampled audit group.
#[derive(Clone, Debug, Serialize)]
pub struct SampleAudit {
    pub n: usize,
    pub m: usize,
    pub trials: u64,
    pub seed: u64,
    pub detecting_subsets: u64,
    pub total_subsets: u64,
    /// Exact probability as a reduced fraction.
    pub exact_fraction: String,
    pub exact: f64,
    pub empirical: f64,
    pub standard_error: f64,
    /// The large-market lower bound `(m/n)^2` for a detecting pair.
    pub asymptotic: f64,
    /// Chance that a uniform `m`-subset contains a fixed pair.
    pub pair_hypergeometric: f64,
}

pub fn sample_audit_probability(
    auditor: &Auditor,
    problem: &Problem,
    deviation: &Outcome,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<SampleAudit> {
    let n = problem.n();
    if m == 0 || m > n {
        return Err(Error::usage(format!(
            "sample size m must lie in 1..={n}, got {m}"
        )));
    }
    if trials == 0 {
        return Err(Error::usage("trials must be at least 1"));
    }
    let groups = Group::combinations(n, m);
    let detecting: Vec<bool> = groups
        .iter()
        .map(|&g| auditor.detects(problem, deviation, g))
        .collect::<Result<_>>()?;
    let hits = detecting.iter().filter(|&&d| d).count() as u64;
    let total = binomial(n, m) as u64;
    let exact = Ratio::new(hits, total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut detected = 0u64;
    for _ in 0..trials {
        let members = sample(&mut rng, n, m);
        let g = Group::from_members(members.iter());
        let pos = groups
            .iter()
            .position(|&h| h == g)
            .expect("sampled group is an m-subset");
        detected += detecting[pos] as u64;
    }
    let p = hits as f64 / total as f64;
    Ok(SampleAudit {
        n,
        m,
        trials,
        seed,
        detecting_subsets: hits,
        total_subsets: total,
        exact_fraction: format!("{}/{}", exact.numer(), exact.denom()),
        exact: p,
        empirical: detected as f64 / trials as f64,
        standard_error: (p * (1.0 - p) / trials as f64).sqrt(),
        asymptotic: (m as f64 / n as f64).powi(2),
        pair_hypergeometric: (m * m.saturating_sub(1)) as f64 / (n * (n - 1)) as f64,
    })
}

/// The three conditions a priority modification must meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TauAxiom {
    IndependenceOfIrrelevantAlternatives,
    Monotonicity,
    EqualTreatment,
}

impl TauAxiom {
    pub const ALL: [TauAxiom; 3] = [
        TauAxiom::IndependenceOfIrrelevantAlternatives,
        TauAxiom::Monotonicity,
        TauAxiom::EqualTreatment,
    ];
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub kind: String,
    pub axiom: TauAxiom,
    pub samples: u64,
    pub violations: u64,
    /// The first violating pair of problems with the individuals and object.
    pub witness: Option<(Problem, Problem, usize, usize, usize)>,
}

fn random_priority(rng: &mut ChaCha8Rng, n: usize) -> Result<Problem> {
    let space = ProblemSpace::new(Setting::priority(n))?;
    Ok(space.get(rng.gen_range(0..space.len())))
}

fn parts(p: &Problem) -> (Vec<Vec<u8>>, Vec<Vec<u32>>) {
    (0..p.n())
        .map(|i| (p.pref(i).to_vec(), p.scores(i).to_vec()))
        .unzip()
}

fn assemble(n: usize, prefs: Vec<Vec<u8>>, scores: Vec<Vec<u32>>) -> Result<Problem> {
    let reports = prefs
        .into_iter()
        .zip(scores)
        .map(|(pref, s)| TypeReport::Priority {
            pref: pref.into_iter().collect(),
            scores: s.into_iter().collect(),
        })
        .collect();
    let p = Problem::new(Setting::priority(n), reports)?;
    p.check()?;
    Ok(p)
}

fn move_to(pref: &mut Vec<u8>, o: u8, position: usize) {
    let at = pref.iter().position(|&x| x == o).unwrap();
    pref.remove(at);
    pref.insert(position, o);
}

fn position(pref: &[u8], o: u8) -> usize {
    pref.iter().position(|&x| x == o).unwrap()
}

/// Samples problem pairs meeting each axiom's premise (sizes 3 to 5) and
/// checks its conclusion on the modified scores.
pub fn tau_axiom_check(
    kind: TauKind,
    axiom: TauAxiom,
    samples: u64,
    seed: u64,
) -> Result<AxiomReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AxiomReport {
        kind: kind.label(),
        axiom,
        samples,
        violations: 0,
        witness: None,
    };
    for _ in 0..samples {
        let n = rng.gen_range(3..=5);
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let o = rng.gen_range(0..n) as u8;
        let first = random_priority(&mut rng, n)?;
        let (p1, r1) = parts(&first);
        let (mut p2, mut r2) = parts(&random_priority(&mut rng, n)?);
        let (oi, ou) = (o as usize, o as usize);
        let above = |r: &Vec<Vec<u32>>| r[i][ou] > r[j][ou];
        let ok = match axiom {
            TauAxiom::IndependenceOfIrrelevantAlternatives | TauAxiom::Monotonicity => {
                if axiom == TauAxiom::IndependenceOfIrrelevantAlternatives {
                    move_to(&mut p2[i], o, position(&p1[i], o));
                    move_to(&mut p2[j], o, position(&p1[j], o));
                    if above(&r1) != above(&r2) {
                        let t = r2[i][oi];
                        r2[i][oi] = r2[j][oi];
                        r2[j][oi] = t;
                    }
                } else {
                    let up = rng.gen_range(0..=position(&p1[i], o));
                    move_to(&mut p2[i], o, up);
                    let down = rng.gen_range(position(&p1[j], o)..n);
                    move_to(&mut p2[j], o, down);
                    if above(&r1) && !above(&r2) {
                        let t = r2[i][oi];
                        r2[i][oi] = r2[j][oi];
                        r2[j][oi] = t;
                    }
                }
                let second = assemble(n, p2, r2)?;
                let m1 = tau_view(kind, &PriorityView::new(&first)).0;
                let m2 = tau_view(kind, &PriorityView::new(&second)).0;
                let (a, b) = (m1[i][oi] > m1[j][oi], m2[i][oi] > m2[j][oi]);
                let ok = if axiom == TauAxiom::Monotonicity {
                    !a || b
                } else {
                    a == b
                };
                if !ok && report.witness.is_none() {
                    report.witness = Some((first.clone(), second, i, j, oi));
                }
                ok
            }
            TauAxiom::EqualTreatment => {
                let (mut p, mut r) = (p1, r1);
                let at = position(&p[i], o);
                move_to(&mut p[j], o, at);
                if !above(&r) {
                    let t = r[i][oi];
                    r[i][oi] = r[j][oi];
                    r[j][oi] = t;
                }
                let q = assemble(n, p, r)?;
                let m = tau_view(kind, &PriorityView::new(&q)).0;
                let ok = m[i][oi] > m[j][oi];
                if !ok && report.witness.is_none() {
                    report.witness = Some((q.clone(), q, i, j, oi));
                }
                ok
            }
        };
        report.violations += (!ok) as u64;
    }
    Ok(report)
}

/// Reserved-seats-first is the only feasible choice that is both
/// within-type and saturated priority compatible.
#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityUniqueness {
    pub problems: u64,
    pub unique_everywhere: bool,
    /// A problem where the compatible set is not exactly the RSF choice.
    pub failure: Option<Problem>,
}

pub fn reserves_compatibility_uniqueness(setting: &Setting) -> Result<CompatibilityUniqueness> {
    let space = ProblemSpace::new(*setting)?;
    let outcomes = crate::model::enumerate_outcomes(setting);
    let mut problems = 0;
    for p in space.iter() {
        problems += 1;
        let chosen = rsf(&p)?;
        let compatible: Vec<&Outcome> = outcomes
            .iter()
            .filter(|o| {
                within_type_compatible(&p, o)
                    .map(|r| r.compatible)
                    .unwrap_or(false)
                    && saturated_compatible(&p, o)
                        .map(|r| r.compatible)
                        .unwrap_or(false)
            })
            .collect();
        if compatible.len() != 1 || *compatible[0] != chosen {
            return Ok(CompatibilityUniqueness {
                problems,
                unique_everywhere: false,
                failure: Some(p),
            });
        }
    }
    Ok(CompatibilityUniqueness {
        problems,
        unique_everywhere: true,
        failure: None,
    })
}
