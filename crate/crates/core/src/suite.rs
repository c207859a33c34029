//! The reproduction suite: one row per index claim, each a runnable exact
//! check with a pass/fail verdict.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::auction::is_dual_dictatorship;
use crate::audit::{AuditOptions, Auditor, ProblemScope, WorstCase};
use crate::characterize::{
    index_two_sweep, reserves_compatibility_uniqueness, sample_audit_probability, tau_axiom_check,
    TauAxiom,
};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::house::{
    chain_condition, clinch_fraction, clinch_fraction_by_count, is_vice, DictatorialStructure,
};
use crate::mechanism::{parse_mechanism, MechanismHandle};
use crate::model::{Group, Outcome, ProblemSpace, Setting};
use crate::priority::TauKind;
use crate::vote::{is_dictatorial, profile_votes, VoteMechanism, VoteTable};

/// Number of rows in the full suite.
pub const ROWS: usize = 14;

#[derive(Clone)]
pub struct SuiteConfig {
    pub options: AuditOptions,
    /// Rows that need more individuals than this are skipped.
    pub max_n: usize,
    /// Run the four-individual serial dictatorship sweep exhaustively;
    /// otherwise three individuals exhaustively plus a four-individual sample.
    pub serial_n4_exhaustive: bool,
    /// Problems drawn by sampled rows.
    pub samples: usize,
    /// Trials for the sampling estimator and pairs for the property checks.
    pub trials: u64,
    pub seed: u64,
    /// Mechanisms that replace the named built-in descriptor everywhere the
    /// suite would construct it (negative controls).
    pub substitutions: HashMap<String, MechanismHandle>,
    /// Run only these rows (all when empty).
    pub only: Vec<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            options: AuditOptions::default(),
            max_n: 5,
            serial_n4_exhaustive: true,
            samples: 1000,
            trials: 10_000,
            seed: 2024,
            substitutions: HashMap::new(),
            only: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRow {
    pub id: usize,
    pub name: String,
    pub status: Status,
    pub summary: String,
    pub wall_ms: u64,
    pub data: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Outcome of one row before timing is attached.
struct Check {
    pass: bool,
    summary: String,
    data: Value,
}

const NAMES: [(&str, usize); ROWS] = [
    ("immediate acceptance worst case is 2", 3),
    ("deferred acceptance worst case is n", 4),
    ("application-rejection e=2 worst case is n", 3),
    ("index-two characterization matches the oracle", 3),
    ("index one iff sequential clinching", 3),
    ("chain condition iff serial index one", 4),
    ("serial dictatorship worst case is 2", 4),
    ("history-dependent dictatorship at n=4", 4),
    ("vice dictatorships at n=5", 5),
    ("auction indices", 3),
    ("voting indices", 5),
    ("reserves indices", 4),
    ("audit sampling probabilities", 4),
    ("property suites", 5),
];

/// Runs the suite; rows never abort the run, errors become failing rows.
pub fn run_suite(config: &SuiteConfig, mut progress: impl FnMut(&SuiteRow)) -> SuiteReport {
    let mut suite = Suite {
        config,
        auditors: HashMap::new(),
        indices_seen: Vec::new(),
    };
    let mut rows = Vec::new();
    for (k, &(name, needs)) in NAMES.iter().enumerate() {
        let id = k + 1;
        if !config.only.is_empty() && !config.only.contains(&id) {
            continue;
        }
        let started = Instant::now();
        let (status, summary, data) = if needs > config.max_n {
            (
                Status::Skipped,
                format!("needs n = {needs} > {}", config.max_n),
                Value::Null,
            )
        } else {
            match suite.row(id) {
                Ok(c) => (
                    if c.pass { Status::Pass } else { Status::Fail },
                    c.summary,
                    c.data,
                ),
                Err(e) => (Status::Fail, format!("error: {e}"), Value::Null),
            }
        };
        let row = SuiteRow {
            id,
            name: name.to_string(),
            status,
            summary,
            wall_ms: started.elapsed().as_millis() as u64,
            data,
        };
        progress(&row);
        rows.push(row);
    }
    let count = |s: Status| rows.iter().filter(|r| r.status == s).count();
    SuiteReport {
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        skipped: count(Status::Skipped),
        rows,
    }
}

struct Suite<'a> {
    config: &'a SuiteConfig,
    auditors: HashMap<(String, String), Arc<Auditor>>,
    /// (n, index) for every audited problem, for the range property.
    indices_seen: Vec<(usize, u8)>,
}

fn summary_of(w: &WorstCase) -> Value {
    json!({
        "mechanism": w.mechanism,
        "params": w.params,
        "scope": w.scope,
        "index": w.index,
        "witness_problem_hash": w.witness_problem_hash,
        "problems_evaluated": w.problems_evaluated,
        "problems_skipped": w.problems_skipped,
        "lower_bound": w.lower_bound,
        "histogram": w.histogram,
    })
}

impl Suite<'_> {
    fn mechanism(&self, desc: &str, setting: &Setting) -> Result<MechanismHandle> {
        match self.config.substitutions.get(desc) {
            Some(m) if m.setting() == setting => Ok(m.clone()),
            _ => parse_mechanism(desc, setting),
        }
    }

    fn auditor(&mut self, desc: &str, setting: &Setting) -> Result<Arc<Auditor>> {
        let key = (desc.to_string(), setting.describe());
        if let Some(a) = self.auditors.get(&key) {
            return Ok(a.clone());
        }
        let a = Arc::new(Auditor::new(
            self.mechanism(desc, setting)?,
            self.config.options,
        )?);
        self.auditors.insert(key, a.clone());
        Ok(a)
    }

    fn sweep(&mut self, desc: &str, setting: &Setting, scope: &ProblemScope) -> Result<WorstCase> {
        let w = self.auditor(desc, setting)?.max_index_over(scope)?;
        let n = setting.n;
        self.indices_seen
            .extend(w.indices.iter().filter(|&&k| k != 0).map(|&k| (n, k)));
        Ok(w)
    }

    fn index(
        &mut self,
        desc: &str,
        setting: &Setting,
        problem: &crate::model::Problem,
    ) -> Result<usize> {
        let ix = self.auditor(desc, setting)?.audit_index(problem)?.index;
        self.indices_seen.push((setting.n, ix as u8));
        Ok(ix)
    }

    fn sample(&self) -> ProblemScope {
        ProblemScope::Sample {
            count: self.config.samples,
            seed: self.config.seed,
        }
    }

    fn row(&mut self, id: usize) -> Result<Check> {
        match id {
            1 => self.immediate_acceptance(),
            2 => self.deferred_acceptance(),
            3 => self.application_rejection(),
            4 => self.index_two(),
            5 => self.clinching(),
            6 => self.chain(),
            7 => self.serial_worst_case(),
            8 => self.swap_n4(),
            9 => self.vice_n5(),
            10 => self.auctions(),
            11 => self.voting(),
            12 => self.reserves(),
            13 => self.sampling(),
            14 => self.properties(),
            _ => Err(Error::usage(format!("no suite row {id}"))),
        }
    }

    fn immediate_acceptance(&mut self) -> Result<Check> {
        let w = self.sweep("ia", &Setting::priority(3), &ProblemScope::Exhaustive)?;
        let all_two = w.indices.iter().all(|&k| k == 2);
        Ok(Check {
            pass: w.index == 2 && all_two && !w.lower_bound,
            summary: format!(
                "worst case {} over {} problems; every index 2: {all_two}",
                w.index, w.problems_evaluated
            ),
            data: summary_of(&w),
        })
    }

    fn deferred_acceptance(&mut self) -> Result<Check> {
        let mut fixture = Vec::new();
        for n in [3, 4] {
            let ix = self.index("da", &Setting::priority(n), &fixtures::cycle_problem(n)?)?;
            fixture.push((n, ix));
        }
        let w = self.sweep("da", &Setting::priority(3), &ProblemScope::Exhaustive)?;
        Ok(Check {
            pass: fixture.iter().all(|&(n, ix)| ix == n) && w.index == 3 && !w.lower_bound,
            summary: format!(
                "cycle fixture indices {fixture:?}; exhaustive n=3 worst case {}",
                w.index
            ),
            data: json!({ "fixture": fixture, "sweep": summary_of(&w) }),
        })
    }

    fn application_rejection(&mut self) -> Result<Check> {
        let setting = Setting::priority(3);
        let ix = self.index("ar:e=2", &setting, &fixtures::cycle_problem(3)?)?;
        let ar = self.mechanism("ar:e=2", &setting)?;
        let rep = self.mechanism("da-rep:ar-2", &setting)?;
        let space = ProblemSpace::new(setting)?;
        let mut differ = 0u64;
        let mut first = None;
        for p in space.iter() {
            if ar.evaluate(&p)? != rep.evaluate(&p)? {
                differ += 1;
                first.get_or_insert(p);
            }
        }
        Ok(Check {
            pass: ix == 3 && differ == 0,
            summary: format!(
                "cycle fixture index {ix}; differs from its DA representation on {differ} of {} problems",
                space.len()
            ),
            data: json!({ "fixture_index": ix, "differences": differ, "first_difference": first }),
        })
    }

    fn index_two(&mut self) -> Result<Check> {
        let mut rows = Vec::new();
        let mut pass = true;
        for kind in [TauKind::Identity, TauKind::IaRank, TauKind::ArTier(2)] {
            let s = index_two_sweep(3, kind, &ProblemScope::Exhaustive, self.config.options)?;
            pass &= s.oracle_disagreements == 0 && s.path_disagreements == 0;
            rows.push(s);
        }
        let summary = rows
            .iter()
            .map(|s| {
                format!(
                    "{}: {} oracle / {} path disagreements ({} where only the fast path says 2)",
                    s.kind, s.oracle_disagreements, s.path_disagreements, s.fast_only
                )
            })
            .collect::<Vec<_>>()
            .join("; ");
        Ok(Check {
            pass,
            summary,
            data: serde_json::to_value(&rows).unwrap(),
        })
    }

    fn clinching(&mut self) -> Result<Check> {
        let battery: Vec<(String, Setting)> = fixtures::allocation_battery(3)?
            .into_iter()
            .map(|m| (m.descriptor().to_string(), *m.setting()))
            .collect();
        let mut pass = true;
        let mut rows = Vec::new();
        for (desc, setting) in battery {
            let a = self.auditor(&desc, &setting)?;
            let w = self.sweep(&desc, &setting, &ProblemScope::Exhaustive)?;
            let space = ProblemSpace::new(setting)?;
            let mut mismatches = 0u64;
            let mut index_one = 0u64;
            for (k, &ix) in w.indices.iter().enumerate() {
                let p = space.get(k as u128);
                let clinch = a.sequential_clinching(&p)?.is_some();
                index_one += (ix == 1) as u64;
                mismatches += (clinch != (ix == 1)) as u64;
            }
            let range = a.full_range()?;
            let uniform = a.clinching_order_uniformity()?.uniform;
            // Index one everywhere rules out a full range, and comes with a
            // clinching order that depends only on the available sets.
            let range_ok = w.index != 1 || !range.full_range;
            let uniform_ok = w.index != 1 || uniform;
            pass &= mismatches == 0 && range_ok && uniform_ok && !w.lower_bound;
            rows.push(json!({
                "mechanism": desc,
                "worst_case": w.index,
                "index_one_problems": index_one,
                "mismatches": mismatches,
                "full_range": range.full_range,
                "uniform_clinching": uniform,
            }));
        }
        let summary = rows
            .iter()
            .map(|r| {
                format!(
                    "{}: worst {}, {} mismatches, full range {}",
                    r["mechanism"].as_str().unwrap(),
                    r["worst_case"],
                    r["mismatches"],
                    r["full_range"]
                )
            })
            .collect::<Vec<_>>()
            .join("; ");
        Ok(Check {
            pass,
            summary,
            data: Value::Array(rows),
        })
    }

    fn serial_desc(n: usize) -> String {
        format!(
            "serial:order={}",
            (0..n).map(|i| i.to_string()).collect::<Vec<_>>().join(",")
        )
    }

    fn chain(&mut self) -> Result<Check> {
        let mut pass = true;
        let mut sweeps = Vec::new();
        for n in [3, 4] {
            let setting = Setting::house(n);
            let desc = Self::serial_desc(n);
            let w = self.sweep(&desc, &setting, &ProblemScope::Exhaustive)?;
            let space = ProblemSpace::new(setting)?;
            let order: Vec<u8> = (0..n as u8).collect();
            let mut mismatches = 0u64;
            let mut chains = 0u64;
            for (k, &ix) in w.indices.iter().enumerate() {
                let chain = chain_condition(&space.get(k as u128), &order)?;
                chains += chain as u64;
                mismatches += (chain != (ix == 1)) as u64;
            }
            pass &= mismatches == 0 && !w.lower_bound;
            sweeps.push(json!({ "n": n, "chain_problems": chains, "problems": w.problems_evaluated, "mismatches": mismatches }));
        }
        let f3 = clinch_fraction(3)?;
        let counted = clinch_fraction_by_count(3)?;
        let fractions: Vec<Ratio<u128>> = (2..=6).map(clinch_fraction).collect::<Result<_>>()?;
        let decreasing = fractions.windows(2).all(|w| w[1] < w[0]);
        pass &= f3 == Ratio::new(2, 3) && counted == f3 && decreasing;
        let shown: Vec<String> = fractions
            .iter()
            .map(|r| format!("{}/{}", r.numer(), r.denom()))
            .collect();
        Ok(Check {
            pass,
            summary: format!(
                "mismatches n=3: {}, n=4: {}; fraction(3) = {}/{} (count {}/{}); n=2..6: {}",
                sweeps[0]["mismatches"],
                sweeps[1]["mismatches"],
                f3.numer(),
                f3.denom(),
                counted.numer(),
                counted.denom(),
                shown.join(", ")
            ),
            data: json!({ "sweeps": sweeps, "fractions": shown, "strictly_decreasing": decreasing }),
        })
    }

    fn serial_worst_case(&mut self) -> Result<Check> {
        if self.config.serial_n4_exhaustive {
            let w = self.sweep(
                &Self::serial_desc(4),
                &Setting::house(4),
                &ProblemScope::Exhaustive,
            )?;
            Ok(Check {
                pass: w.index == 2 && !w.lower_bound,
                summary: format!(
                    "exhaustive n=4 worst case {} over {} problems",
                    w.index, w.problems_evaluated
                ),
                data: summary_of(&w),
            })
        } else {
            let three = self.sweep(
                &Self::serial_desc(3),
                &Setting::house(3),
                &ProblemScope::Exhaustive,
            )?;
            let scope = ProblemScope::Sample {
                count: 10_000,
                seed: self.config.seed,
            };
            let four = self.sweep(&Self::serial_desc(4), &Setting::house(4), &scope)?;
            Ok(Check {
                pass: three.index == 2 && four.index <= 2,
                summary: format!(
                    "downgraded: exhaustive n=3 worst case {}, sampled n=4 maximum {}",
                    three.index, four.index
                ),
                data: json!({ "n3": summary_of(&three), "n4_sampled": summary_of(&four) }),
            })
        }
    }

    fn swap_n4(&mut self) -> Result<Check> {
        let setting = Setting::house(4);
        let desc = "fixture:swap:n=4";
        let problem = fixtures::swap_problem(4)?;
        let a = self.auditor(desc, &setting)?;
        let report = a.audit_index(&problem)?;
        self.indices_seen.push((4, report.index as u8));
        let (min_size, _) = a.min_detecting_size(&problem, &fixtures::swap_deviation(4))?;
        let vice = is_vice(&fixtures::swap_structure(4)?, 4)?;
        let condition3 = vice.violates(3);
        Ok(Check {
            pass: report.index >= 3 && min_size >= 3 && !vice.is_vice && condition3,
            summary: format!(
                "constructed problem index {} (swap deviation needs {min_size}); vice {} with condition-3 witness {}",
                report.index, vice.is_vice, condition3
            ),
            data: json!({ "report": report.without_timing(), "swap_min_size": min_size, "vice": vice }),
        })
    }

    fn vice_n5(&mut self) -> Result<Check> {
        let setting = Setting::house(5);
        let scope = self.sample();
        let mut pass = true;
        let mut parts = Vec::new();
        for (desc, structure) in [
            (
                Self::serial_desc(5),
                DictatorialStructure::serial(5, (0..5).collect())?,
            ),
            (
                "fixture:vice:n=5".to_string(),
                DictatorialStructure::branching_vice(5)?,
            ),
        ] {
            let vice = is_vice(&structure, 5)?;
            let w = self.sweep(&desc, &setting, &scope)?;
            pass &= vice.is_vice && w.index <= 2 && w.problems_skipped == 0;
            parts.push(json!({ "mechanism": desc, "vice": vice.is_vice, "sampled_max": w.index, "sweep": summary_of(&w) }));
        }
        let swap = self.index("fixture:swap:n=5", &setting, &fixtures::swap_problem(5)?)?;
        let swap_vice = is_vice(&fixtures::swap_structure(5)?, 5)?.is_vice;
        pass &= swap >= 4 && !swap_vice;
        Ok(Check {
            pass,
            summary: format!(
                "sampled maxima: serial {}, branching {}; history-dependent fixture index {swap} (vice {swap_vice})",
                parts[0]["sampled_max"], parts[1]["sampled_max"]
            ),
            data: json!({ "structures": parts, "swap_index": swap, "swap_vice": swap_vice }),
        })
    }

    fn auctions(&mut self) -> Result<Check> {
        let setting = Setting::auction(3, 5);
        let fpa = self.sweep("fpa", &setting, &ProblemScope::Exhaustive)?;
        let apa = self.sweep("apa", &setting, &ProblemScope::Exhaustive)?;
        let spa = self.sweep("spa", &setting, &ProblemScope::Exhaustive)?;
        let spa_not_three: Vec<Vec<u32>> = spa
            .indices
            .iter()
            .enumerate()
            .filter(|(_, &k)| k != 3)
            .map(|(k, _)| {
                let p = ProblemSpace::new(setting).unwrap().get(k as u128);
                (0..3).map(|i| p.bid(i)).collect()
            })
            .collect();
        let mut battery = Vec::new();
        let mut battery_ok = true;
        for (mech, expected_dual) in fixtures::auction_battery()? {
            let desc = mech.descriptor().to_string();
            let mech = self
                .config
                .substitutions
                .get(&desc)
                .cloned()
                .unwrap_or(mech);
            let dual = is_dual_dictatorship(mech.as_ref(), &setting)?;
            let worst = Auditor::new(mech, self.config.options)?
                .max_index_over(&ProblemScope::Exhaustive)?;
            battery_ok &= dual.is_some() == (worst.index == 1) && dual.is_some() == expected_dual;
            battery.push(json!({ "mechanism": desc, "dual": dual, "worst_case": worst.index }));
        }
        let counts = [
            fpa.problems_evaluated,
            apa.problems_evaluated,
            spa.problems_evaluated,
        ];
        let pass = fpa.index == 2
            && apa.index == 2
            && spa_not_three.is_empty()
            && battery_ok
            && counts.iter().all(|&c| c == 60);
        let shown: Vec<String> = spa_not_three
            .iter()
            .take(6)
            .map(|b| format!("{b:?}"))
            .collect();
        Ok(Check {
            pass,
            summary: format!(
                "first-price {}, all-pay {}; second-price index not 3 on {} of 60 profiles{}; dual-dictatorship battery agrees: {battery_ok}",
                fpa.index,
                apa.index,
                spa_not_three.len(),
                if shown.is_empty() {
                    String::new()
                } else {
                    format!(" (e.g. {})", shown.join(" "))
                }
            ),
            data: json!({
                "fpa": summary_of(&fpa),
                "apa": summary_of(&apa),
                "spa": summary_of(&spa),
                "spa_profiles_not_three": spa_not_three,
                "battery": battery,
            }),
        })
    }

    fn voting(&mut self) -> Result<Check> {
        let mut mismatched = Vec::new();
        for table in VoteTable::all(2)? {
            let label: String = table
                .bits()
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            let mech = Arc::new(VoteMechanism::from_table(
                &format!("table:{label}"),
                table.clone(),
            ));
            let worst = Auditor::new(mech, self.config.options)?
                .max_index_over(&ProblemScope::Exhaustive)?;
            if is_dictatorial(&table).is_some() != (worst.index == 1) {
                mismatched.push(label);
            }
        }
        let m3 = self
            .sweep("majority:x=1", &Setting::vote(3), &ProblemScope::Exhaustive)?
            .index;
        let m5 = self
            .sweep("majority:x=1", &Setting::vote(5), &ProblemScope::Exhaustive)?
            .index;
        let mut veto_ok = true;
        for n in [3, 5] {
            let w = self.sweep("veto", &Setting::vote(n), &ProblemScope::Exhaustive)?;
            for (k, &ix) in w.indices.iter().enumerate() {
                let all_ones = profile_votes(n, k).iter().all(|&v| v);
                veto_ok &= ix as usize == if all_ones { n } else { 1 };
            }
        }
        let d = self
            .sweep("dictator:i=1", &Setting::vote(3), &ProblemScope::Exhaustive)?
            .index;
        Ok(Check {
            pass: mismatched.is_empty() && m3 == 2 && m5 == 3 && veto_ok && d == 1,
            summary: format!(
                "n=2 tables disagreeing: {}; majority {m3} (n=3), {m5} (n=5); veto pattern holds: {veto_ok}; dictator {d}",
                mismatched.len()
            ),
            data: json!({ "mismatched_tables": mismatched, "majority": [m3, m5], "veto": veto_ok, "dictator": d }),
        })
    }

    fn reserves(&mut self) -> Result<Check> {
        let setting = fixtures::reserves_setting();
        let rsf = self.sweep("rsf", &setting, &ProblemScope::Exhaustive)?;
        let osf = self.sweep("osf", &setting, &ProblemScope::Exhaustive)?;
        let (low_last, dev_low) = fixtures::reserves_low_last()?;
        let (split, dev_split) = fixtures::reserves_split_low()?;
        let rsf_a = self.auditor("rsf", &setting)?;
        let osf_a = self.auditor("osf", &setting)?;
        let sizes = [
            rsf_a.min_detecting_size(&low_last, &dev_low)?.0,
            osf_a.min_detecting_size(&low_last, &dev_low)?.0,
            osf_a.min_detecting_size(&split, &dev_split)?.0,
        ];
        let fixture_indices = [
            self.index("osf", &setting, &low_last)?,
            self.index("osf", &setting, &split)?,
        ];
        let unique = reserves_compatibility_uniqueness(&setting)?;
        // Not part of the verdict: the same quotas with a fifth applicant,
        // where two applicants are always turned away.
        let wider = Setting::reserves(5, 3, 1, Group::from_members([0, 1]));
        let rsf5 = self.sweep("rsf", &wider, &ProblemScope::Exhaustive)?.index;
        let bound = 3;
        Ok(Check {
            pass: rsf.index == bound
                && osf.index >= bound
                && sizes.iter().all(|&s| s >= bound)
                && fixture_indices.iter().all(|&k| k >= bound)
                && unique.unique_everywhere,
            summary: format!(
                "reserved-first {}, open-first {}; fixture deviations need {:?}; open-first fixture indices {:?}; unique compatible choice on {} problems: {}; reserved-first with five applicants {rsf5}",
                rsf.index, osf.index, sizes, fixture_indices, unique.problems, unique.unique_everywhere
            ),
            data: json!({
                "rsf": summary_of(&rsf),
                "osf": summary_of(&osf),
                "fixture_min_sizes": sizes,
                "osf_fixture_indices": fixture_indices,
                "uniqueness": unique,
                "rsf_n5_worst_case": rsf5,
            }),
        })
    }

    fn sampling(&mut self) -> Result<Check> {
        let da = self.auditor("da", &Setting::priority(3))?;
        let cycle = fixtures::cycle_problem(3)?;
        let dev = fixtures::cycle_deviation(3);
        let mut pass = true;
        let mut parts = Vec::new();
        for m in [1, 2] {
            let s = sample_audit_probability(
                &da,
                &cycle,
                &dev,
                m,
                self.config.trials,
                self.config.seed,
            )?;
            pass &= s.detecting_subsets == 0 && s.empirical == 0.0;
            parts.push(s);
        }
        let ia = self.auditor("ia", &Setting::priority(4))?;
        let (p, dev) = fixtures::ia_pair_fixture()?;
        let s = sample_audit_probability(&ia, &p, &dev, 2, self.config.trials, self.config.seed)?;
        let within = (s.empirical - s.exact).abs() <= 3.0 * s.standard_error;
        pass &= s.detecting_subsets * 6 >= s.total_subsets && within;
        let summary = format!(
            "deferred acceptance cycle m=1,2: exact {} and {}; immediate acceptance n=4 m=2: exact {} = {:.4}, empirical {:.4} (3 SE = {:.4}), (m/n)^2 = {:.4}",
            parts[0].exact_fraction, parts[1].exact_fraction, s.exact_fraction, s.exact, s.empirical,
            3.0 * s.standard_error, s.asymptotic
        );
        parts.push(s);
        Ok(Check {
            pass,
            summary,
            data: serde_json::to_value(&parts).unwrap(),
        })
    }

    fn properties(&mut self) -> Result<Check> {
        let mono = self.monotonicity(self.config.trials)?;
        let range_violations = self
            .indices_seen
            .iter()
            .filter(|&&(n, k)| k == 0 || k as usize > n)
            .count();
        let mut axioms = Vec::new();
        for kind in [TauKind::Identity, TauKind::IaRank, TauKind::ArTier(2)] {
            for axiom in TauAxiom::ALL {
                axioms.push(tau_axiom_check(
                    kind,
                    axiom,
                    self.config.trials,
                    self.config.seed,
                )?);
            }
        }
        let axiom_violations: u64 = axioms.iter().map(|a| a.violations).sum();
        let deterministic = self.deterministic()?;
        Ok(Check {
            pass: mono.0 == 0 && range_violations == 0 && axiom_violations == 0 && deterministic,
            summary: format!(
                "monotonicity violations {} of {}; indices outside [1, n]: {range_violations} of {}; priority-modification axiom violations {axiom_violations} over {} checks; thread-count determinism {deterministic}",
                mono.0,
                mono.1,
                self.indices_seen.len(),
                axioms.len() as u64 * self.config.trials
            ),
            data: json!({
                "monotonicity": { "violations": mono.0, "pairs": mono.1 },
                "range_checked": self.indices_seen.len(),
                "range_violations": range_violations,
                "axioms": axioms,
                "deterministic": deterministic,
            }),
        })
    }

    /// Random (subset, superset) pairs over several settings; returns the
    /// number of violations and of checked pairs.
    fn monotonicity(&mut self, pairs: u64) -> Result<(u64, u64)> {
        let pool: Vec<(&str, Setting)> = vec![
            ("da", Setting::priority(3)),
            ("ia", Setting::priority(3)),
            ("ar:e=2", Setting::priority(3)),
            ("serial:order=2,0,1,3", Setting::house(4)),
            ("fixture:swap:n=4", Setting::house(4)),
            ("fpa", Setting::auction(3, 5)),
            ("spa", Setting::auction(3, 5)),
            ("majority:x=1", Setting::vote(5)),
            ("veto", Setting::vote(5)),
            ("rsf", fixtures::reserves_setting()),
            ("osf", fixtures::reserves_setting()),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ 0x6d6f6e6f);
        let mut violations = 0;
        for _ in 0..pairs {
            let (desc, setting) = *pool.choose(&mut rng).unwrap();
            let a = self.auditor(desc, &setting)?;
            let space = ProblemSpace::new(setting)?;
            let p = space.get(rng.gen_range(0..space.len()));
            let truth = a.mechanism().evaluate(&p)?;
            let deviations: Vec<&Outcome> = a.universe().iter().filter(|o| **o != truth).collect();
            let dev = *deviations.choose(&mut rng).unwrap();
            let n = setting.n;
            // Proper nonempty subset, then a random superset of it.
            let small = Group::from_bits(rng.gen_range(1..(1u32 << n) - 1));
            let big = small.union(Group::from_bits(rng.gen_range(0..1u32 << n)));
            if a.detects(&p, dev, small)? && !a.detects(&p, dev, big)? {
                violations += 1;
            }
        }
        Ok((violations, pairs))
    }

    /// A sampled sweep serializes identically under one and four threads.
    fn deterministic(&self) -> Result<bool> {
        let run = |threads: usize| -> Result<String> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::usage(e.to_string()))?;
            pool.install(|| {
                let a = Auditor::new(
                    self.mechanism("ar:e=2", &Setting::priority(3))?,
                    self.config.options,
                )?;
                let w = a.max_index_over(&ProblemScope::Sample {
                    count: 500,
                    seed: self.config.seed,
                })?;
                Ok(serde_json::to_string(&w.without_timing()).unwrap())
            })
        };
        Ok(run(1)? == run(4)?)
    }
}
