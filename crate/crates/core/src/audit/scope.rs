//! Worst-case indices over problem scopes.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::{AuditReport, AuditStats, Auditor, Counters};
use crate::error::{Error, Result};
use crate::model::{Problem, ProblemSpace};

/// The problems a worst-case sweep ranges over.
#[derive(Clone, Debug)]
pub enum ProblemScope {
    /// The whole canonical problem space.
    Exhaustive,
    /// A named list of constructed problems.
    Family {
        name: String,
        problems: Vec<Problem>,
    },
    /// `count` problems drawn uniformly (with replacement) from the
    /// canonical space by a ChaCha8 generator seeded with `seed`.
    Sample { count: usize, seed: u64 },
}

impl ProblemScope {
    pub fn label(&self) -> String {
        match self {
            ProblemScope::Exhaustive => "exhaustive".into(),
            ProblemScope::Family { name, .. } => format!("family:{name}"),
            ProblemScope::Sample { count, seed } => format!("sample:{count}:seed={seed}"),
        }
    }
}

/// Result of a worst-case sweep.
#[derive(Clone, Debug, Serialize)]
pub struct WorstCase {
    pub mechanism: String,
    pub params: String,
    pub scope: String,
    pub index: usize,
    pub witness_problem: Option<Problem>,
    pub witness_problem_hash: Option<String>,
    /// The witness problem re-audited by a fresh sequential auditor.
    pub report: Option<AuditReport>,
    pub problems_evaluated: u64,
    /// Problems whose audit was refused for exceeding a budget.
    pub problems_skipped: u64,
    /// True unless every problem of the canonical space was audited, so
    /// that `index` is only a lower bound on the worst case.
    pub lower_bound: bool,
    /// `histogram[k]` problems had index `k`.
    pub histogram: Vec<u64>,
    /// Per-problem indices in scope order (0 for skipped problems).
    #[serde(skip)]
    pub indices: Vec<u8>,
    #[serde(skip)]
    pub problems: Vec<Problem>,
    pub stats: AuditStats,
}

impl WorstCase {
    /// The sweep without wall-clock times, for byte-level comparisons.
    pub fn without_timing(&self) -> WorstCase {
        let mut w = self.clone();
        w.stats.wall_ms = 0;
        if let Some(r) = &mut w.report {
            r.stats.wall_ms = 0;
        }
        w
    }
}

enum Source {
    Prefix(ProblemSpace, usize),
    Drawn(ProblemSpace, Vec<u128>),
    List(Vec<Problem>),
}

impl Source {
    fn len(&self) -> usize {
        match self {
            Source::Prefix(_, len) => *len,
            Source::Drawn(_, idx) => idx.len(),
            Source::List(p) => p.len(),
        }
    }

    fn get(&self, k: usize) -> Problem {
        match self {
            Source::Prefix(space, _) => space.get(k as u128),
            Source::Drawn(space, idx) => space.get(idx[k]),
            Source::List(p) => p[k].clone(),
        }
    }
}

impl Auditor {
    /// The maximum per-problem index over `scope`, with a witness problem.
    /// Problems are audited in parallel; the witness is the first problem
    /// (in scope order) attaining the maximum.
    pub fn max_index_over(&self, scope: &ProblemScope) -> Result<WorstCase> {
        let started = Instant::now();
        let space = ProblemSpace::new(*self.setting())?;
        let mut truncated = false;
        let source = match scope {
            ProblemScope::Exhaustive => {
                let count = space.len().min(self.options().max_problems);
                truncated = count < space.len();
                Source::Prefix(space, count as usize)
            }
            ProblemScope::Sample { count, seed } => {
                if *count == 0 {
                    return Err(Error::usage("a sample scope needs at least one problem"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Source::Drawn(
                    space,
                    (0..*count).map(|_| rng.gen_range(0..space.len())).collect(),
                )
            }
            ProblemScope::Family { problems, .. } => {
                for p in problems {
                    self.check_problem(p)?;
                }
                Source::List(problems.clone())
            }
        };
        let partial_scope = !matches!(scope, ProblemScope::Exhaustive);

        let counters = Counters::default();
        let results: Vec<Result<Option<u8>>> = (0..source.len())
            .into_par_iter()
            .map(|k| {
                let p = source.get(k);
                match self.audit_with(&p, &counters, false) {
                    Ok(r) => Ok(Some(r.index as u8)),
                    Err(Error::Budget { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect();
        self.totals.add(&counters);

        let n = self.setting().n;
        let mut indices = Vec::with_capacity(results.len());
        let mut histogram = vec![0u64; n + 1];
        let mut skipped = 0;
        let mut best: Option<(u8, usize)> = None;
        for (k, r) in results.into_iter().enumerate() {
            match r? {
                Some(ix) => {
                    histogram[ix as usize] += 1;
                    indices.push(ix);
                    if best.is_none_or(|(b, _)| ix > b) {
                        best = Some((ix, k));
                    }
                }
                None => {
                    skipped += 1;
                    indices.push(0);
                }
            }
        }
        let (index, witness_problem, report) = match best {
            Some((ix, k)) => {
                let p = source.get(k);
                let report = self.fresh().audit_index(&p)?;
                (ix as usize, Some(p), Some(report))
            }
            None => (0, None, None),
        };
        let problems = match &source {
            Source::List(p) => p.clone(),
            _ => Vec::new(),
        };
        Ok(WorstCase {
            mechanism: self.mechanism().descriptor().to_string(),
            params: self.setting().params_label(),
            scope: scope.label(),
            index,
            witness_problem_hash: witness_problem.as_ref().map(|p| p.hash_hex()),
            witness_problem,
            report,
            problems_evaluated: indices.len() as u64 - skipped,
            problems_skipped: skipped,
            lower_bound: truncated || partial_scope || skipped > 0,
            histogram,
            indices,
            problems,
            stats: counters.snapshot(started),
        })
    }
}
