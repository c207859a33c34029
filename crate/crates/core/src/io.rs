//! JSON problem files, deviation files and table-backed mechanisms.
//!
//! Problem files hold one object each, for example
//! `{"setting":"house","n":3,"preferences":[[1,0,2],[2,1,0],[0,2,1]]}`.
//! Serialization is canonical: fields appear in a fixed order on a single
//! line, so parsing and re-serializing a canonical file is byte-stable.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::auction::AuctionMechanism;
use crate::error::{Error, Result};
use crate::house::{structure_from_rows, SequentialDictatorship, StructureRow};
use crate::mechanism::MechanismHandle;
use crate::model::{Group, Outcome, Problem, Setting, SettingKind, TypeReport};
use crate::vote::{profile_index, VoteMechanism, VoteTable};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ScoresField {
    PerObject(Vec<Vec<u32>>),
    PerIndividual(Vec<u32>),
}

/// The on-disk shape shared by problem and setting files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    setting: String,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    low_income: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    preferences: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scores: Option<ScoresField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bids: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    votes: Option<Vec<u8>>,
}

fn required<T>(field: Option<T>, name: &str, setting: &str) -> Result<T> {
    field.ok_or_else(|| Error::input(format!("a {setting} problem needs a '{name}' field")))
}

fn setting_of(f: &ProblemFile) -> Result<Setting> {
    let setting = match f.setting.as_str() {
        "house" => Setting::house(f.n),
        "priority" => Setting::priority(f.n),
        "auction" => Setting::auction(f.n, required(f.k, "k", "auction")?),
        "vote" => Setting::vote(f.n),
        "reserves" => {
            let low = required(f.low_income.clone(), "low_income", "reserves")?;
            if let Some(&i) = low.iter().find(|&&i| i >= f.n) {
                return Err(Error::config(format!(
                    "low-income individual {i} out of range 0..{}",
                    f.n
                )));
            }
            Setting::reserves(
                f.n,
                required(f.q, "q", "reserves")?,
                required(f.r, "r", "reserves")?,
                Group::from_members(low),
            )
        }
        other => return Err(Error::input(format!("unknown setting '{other}'"))),
    };
    setting.validate()?;
    Ok(setting)
}

fn length_matches<T>(v: &[T], n: usize, name: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::input(format!(
            "'{name}' needs {n} entries, got {}",
            v.len()
        )));
    }
    Ok(())
}

fn problem_of(f: ProblemFile) -> Result<Problem> {
    let setting = setting_of(&f)?;
    let n = f.n;
    let name = f.setting.as_str();
    let reports: Vec<TypeReport> = match setting.kind {
        SettingKind::House => {
            let prefs = required(f.preferences, "preferences", name)?;
            length_matches(&prefs, n, "preferences")?;
            prefs
                .into_iter()
                .map(|p| TypeReport::House {
                    pref: p.into_iter().collect(),
                })
                .collect()
        }
        SettingKind::Priority => {
            let prefs = required(f.preferences, "preferences", name)?;
            let Some(ScoresField::PerObject(scores)) = f.scores else {
                return Err(Error::input(
                    "a priority problem needs 'scores' as one list per individual",
                ));
            };
            length_matches(&prefs, n, "preferences")?;
            length_matches(&scores, n, "scores")?;
            prefs
                .into_iter()
                .zip(scores)
                .map(|(p, s)| TypeReport::Priority {
                    pref: p.into_iter().collect(),
                    scores: s.into_iter().collect(),
                })
                .collect()
        }
        SettingKind::Auction { .. } => {
            let bids = required(f.bids, "bids", name)?;
            length_matches(&bids, n, "bids")?;
            bids.into_iter().map(TypeReport::Bid).collect()
        }
        SettingKind::Vote => {
            let votes = required(f.votes, "votes", name)?;
            length_matches(&votes, n, "votes")?;
            if let Some(v) = votes.iter().find(|&&v| v > 1) {
                return Err(Error::input(format!("votes must be 0 or 1, got {v}")));
            }
            votes
                .into_iter()
                .map(|v| TypeReport::Vote(v == 1))
                .collect()
        }
        SettingKind::Reserves(_) => {
            let Some(ScoresField::PerIndividual(scores)) = f.scores else {
                return Err(Error::input(
                    "a reserves problem needs 'scores' as one integer per individual",
                ));
            };
            length_matches(&scores, n, "scores")?;
            scores.into_iter().map(TypeReport::Score).collect()
        }
    };
    Problem::new(setting, reports)
}

fn file_of_setting(setting: &Setting) -> ProblemFile {
    let mut f = ProblemFile {
        setting: setting.name().to_string(),
        n: setting.n,
        k: None,
        q: None,
        r: None,
        low_income: None,
        preferences: None,
        scores: None,
        bids: None,
        votes: None,
    };
    match setting.kind {
        SettingKind::Auction { max_bid } => f.k = Some(max_bid),
        SettingKind::Reserves(c) => {
            f.q = Some(c.q);
            f.r = Some(c.r);
            f.low_income = Some(c.low_income.members().collect());
        }
        _ => {}
    }
    f
}

/// Parses a problem JSON document. Malformed documents are input errors,
/// bad parameters are configuration errors, and profiles that break
/// feasibility are infeasibility errors.
pub fn parse_problem(json: &str) -> Result<Problem> {
    let f: ProblemFile =
        serde_json::from_str(json).map_err(|e| Error::input(format!("problem JSON: {e}")))?;
    problem_of(f)
}

fn problem_file(problem: &Problem) -> ProblemFile {
    let mut f = file_of_setting(&problem.setting);
    let n = problem.n();
    match problem.setting.kind {
        SettingKind::House => {
            f.preferences = Some((0..n).map(|i| problem.pref(i).to_vec()).collect())
        }
        SettingKind::Priority => {
            f.preferences = Some((0..n).map(|i| problem.pref(i).to_vec()).collect());
            f.scores = Some(ScoresField::PerObject(
                (0..n).map(|i| problem.scores(i).to_vec()).collect(),
            ));
        }
        SettingKind::Auction { .. } => f.bids = Some((0..n).map(|i| problem.bid(i)).collect()),
        SettingKind::Vote => f.votes = Some((0..n).map(|i| problem.vote_of(i) as u8).collect()),
        SettingKind::Reserves(_) => {
            f.scores = Some(ScoresField::PerIndividual(
                (0..n).map(|i| problem.score(i)).collect(),
            ))
        }
    }
    f
}

impl Serialize for Problem {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        problem_file(self).serialize(serializer)
    }
}

/// Canonical single-line JSON of a problem, newline-terminated.
pub fn problem_to_json(problem: &Problem) -> String {
    let mut s =
        serde_json::to_string(&problem_file(problem)).expect("problem files always serialize");
    s.push('\n');
    s
}

pub fn read_problem(path: &Path) -> Result<Problem> {
    parse_problem(&std::fs::read_to_string(path)?)
}

/// Parses a setting document: a problem file without the report fields.
pub fn parse_setting(json: &str) -> Result<Setting> {
    let f: ProblemFile =
        serde_json::from_str(json).map_err(|e| Error::input(format!("setting JSON: {e}")))?;
    setting_of(&f)
}

pub fn setting_to_json(setting: &Setting) -> String {
    serde_json::to_string(&file_of_setting(setting)).expect("setting files always serialize")
}

/// Parses a deviation such as `{"allocation":[0,2,1]}` and checks that it
/// lies in the feasible outcome universe of `setting`.
pub fn parse_outcome(json: &str, setting: &Setting) -> Result<Outcome> {
    let o: Outcome =
        serde_json::from_str(json).map_err(|e| Error::input(format!("outcome JSON: {e}")))?;
    o.check(setting)?;
    Ok(o)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AuctionRow {
    bids: Vec<u32>,
    winner: u8,
    payments: Vec<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VoteRow {
    votes: Vec<u8>,
    outcome: u8,
}

/// A hand-built mechanism table.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum TableFile {
    HouseStructure {
        n: usize,
        rows: Vec<StructureRow>,
    },
    Auction {
        n: usize,
        k: u32,
        rows: Vec<AuctionRow>,
    },
    Vote {
        n: usize,
        rows: Vec<VoteRow>,
    },
}

/// The setting a table file declares.
pub fn table_setting(path: &Path) -> Result<Setting> {
    #[derive(Deserialize)]
    #[serde(tag = "kind", rename_all = "kebab-case")]
    enum Header {
        HouseStructure { n: usize },
        Auction { n: usize, k: u32 },
        Vote { n: usize },
    }
    let text = std::fs::read_to_string(path)?;
    let header: Header = serde_json::from_str(&text)
        .map_err(|e| Error::input(format!("table {}: {e}", path.display())))?;
    let setting = match header {
        Header::HouseStructure { n } => Setting::house(n),
        Header::Auction { n, k } => Setting::auction(n, k),
        Header::Vote { n } => Setting::vote(n),
    };
    setting.validate()?;
    Ok(setting)
}

/// Loads a `table:file=<path>` mechanism and checks it against `setting`.
pub fn load_table_mechanism(
    descriptor: &str,
    setting: &Setting,
    path: &Path,
) -> Result<MechanismHandle> {
    let text = std::fs::read_to_string(path)?;
    let table: TableFile = serde_json::from_str(&text)
        .map_err(|e| Error::input(format!("table {}: {e}", path.display())))?;
    let mismatch = |what: &str| {
        Error::config(format!(
            "table {} describes {what}, which does not match the {} setting",
            path.display(),
            setting.describe()
        ))
    };
    Ok(match table {
        TableFile::HouseStructure { n, rows } => {
            if *setting != Setting::house(n) {
                return Err(mismatch(&format!("a house structure for n = {n}")));
            }
            Arc::new(SequentialDictatorship::new(
                descriptor,
                *setting,
                structure_from_rows(n, &rows)?,
            ))
        }
        TableFile::Auction { n, k, rows } => {
            if *setting != Setting::auction(n, k) {
                return Err(mismatch(&format!("an auction for n = {n}, K = {k}")));
            }
            let rows = rows
                .into_iter()
                .map(|r| {
                    (
                        r.bids,
                        Outcome::Auction {
                            winner: r.winner,
                            payments: r.payments.into_iter().collect(),
                        },
                    )
                })
                .collect();
            Arc::new(AuctionMechanism::from_rows(descriptor, *setting, rows)?)
        }
        TableFile::Vote { n, rows } => {
            if *setting != Setting::vote(n) {
                return Err(mismatch(&format!("a vote rule for n = {n}")));
            }
            let mut bits: Vec<Option<bool>> = vec![None; 1 << n];
            for row in rows {
                length_matches(&row.votes, n, "votes")?;
                if row.votes.iter().chain([&row.outcome]).any(|&v| v > 1) {
                    return Err(Error::input("vote table entries must be 0 or 1"));
                }
                let votes: Vec<bool> = row.votes.iter().map(|&v| v == 1).collect();
                bits[profile_index(&votes)] = Some(row.outcome == 1);
            }
            let bits = bits
                .into_iter()
                .enumerate()
                .map(|(idx, b)| {
                    b.ok_or_else(|| {
                        Error::input(format!("vote table has no row for profile #{idx}"))
                    })
                })
                .collect::<Result<Vec<bool>>>()?;
            Arc::new(VoteMechanism::from_table(
                descriptor,
                VoteTable::new(n, bits)?,
            ))
        }
    })
}
