//! `auditlab`: command-line front end for auditability indices.
//!
//! Machine-readable results go to stdout (or `--output`); diagnostics go to
//! stderr. Exit codes: 0 success, 1 a failing suite row, 2 invalid input or
//! usage, 3 infeasible configuration, 4 budget refusal.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use auditlab::auction::is_dual_dictatorship;
use auditlab::audit::{AuditOptions, Auditor, ProblemScope, Route, WorstCase};
use auditlab::characterize::{
    check_dictatorial_iff_index_one, check_majority_minimal, check_vice_equals_index_two,
    index_two_da_representable, index_two_sweep, reserves_compatibility_uniqueness,
    sample_audit_probability, tau_axiom_check, TauAxiom,
};
use auditlab::house::is_vice;
use auditlab::io::{parse_outcome, parse_problem, read_problem, table_setting};
use auditlab::mechanism::parse_structure;
use auditlab::priority::{enumerate_stable, TauKind, STABLE_CAP};
use auditlab::suite::{run_suite, Status, SuiteConfig, SuiteReport};
use auditlab::vote::{profile_votes, VoteTable};
use auditlab::{parse_mechanism, Error, Group, MechanismHandle, Outcome, Problem, Setting};

#[derive(Parser)]
#[command(
    name = "auditlab",
    version,
    about = "Exact auditability indices of mechanisms"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "AUDITLAB_THREADS")]
    threads: Option<usize>,

    /// Omit wall-clock timings so that output is byte-reproducible.
    #[arg(long, global = true)]
    no_timing: bool,

    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-problem auditability index with a witness deviation.
    Index {
        #[command(flatten)]
        target: ProblemTarget,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Whether a group detects a deviation, or the smallest group that does.
    Detect {
        #[command(flatten)]
        target: ProblemTarget,
        /// Deviation as outcome JSON, e.g. '{"allocation":[0,2,1]}', or @file.
        #[arg(long)]
        deviation: String,
        /// Comma-separated members; omit to search for a smallest group.
        #[arg(long, value_delimiter = ',')]
        group: Option<Vec<usize>>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Worst-case index over a problem scope, as CSV or JSON.
    WorstCase {
        #[arg(long)]
        mechanism: String,
        #[command(flatten)]
        setting: SettingArgs,
        #[command(flatten)]
        scope: ScopeArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Evaluate a named characterization against its brute-force oracle.
    Characterize {
        #[arg(value_enum)]
        predicate: Predicate,
        #[arg(long)]
        mechanism: Option<String>,
        /// Dictatorial structure: serial:order=…, fixture:swap:n=…, fixture:vice:n=….
        #[arg(long)]
        structure: Option<String>,
        /// Evaluate at a single problem where the predicate allows it.
        #[arg(long)]
        problem: Option<PathBuf>,
        /// Priority modification for tau-axioms (all kinds when omitted).
        #[arg(long)]
        kind: Option<String>,
        /// Also audit the structure's worst case (vice).
        #[arg(long)]
        audit: bool,
        #[command(flatten)]
        setting: SettingArgs,
        #[command(flatten)]
        scope: ScopeArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Probability that a random m-subset detects a deviation.
    SampleAudit {
        #[command(flatten)]
        target: ProblemTarget,
        #[arg(long)]
        deviation: String,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Run the reproduction suite and write a directory of CSV/JSON results.
    Report {
        /// Suite name.
        #[arg(long, value_enum, default_value_t = SuiteName::Claims)]
        suite: SuiteName,
        /// Output directory.
        #[arg(long, default_value = "report")]
        dir: PathBuf,
        /// Skip rows that need more individuals than this.
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Only these rows (comma-separated ids).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        /// Replace a built-in mechanism with a table file: DESCRIPTOR=PATH.
        #[arg(long)]
        substitute: Vec<String>,
        /// Sample the four-individual serial dictatorship sweep instead of
        /// running it exhaustively.
        #[arg(long)]
        sampled_serial: bool,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// All stable outcomes of a priority problem.
    EnumerateStable {
        #[arg(long)]
        problem: PathBuf,
        /// Modify priorities first: identity, ia, ar-<e>.
        #[arg(long)]
        tau: Option<String>,
        #[arg(long, default_value_t = STABLE_CAP)]
        cap: usize,
    },
}

#[derive(Args)]
struct ProblemTarget {
    #[arg(long)]
    mechanism: String,
    /// Problem JSON file (or '-' for stdin).
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Args)]
struct SettingArgs {
    /// Setting kind; inferred from the mechanism when omitted.
    #[arg(long, value_enum)]
    setting: Option<SettingName>,
    #[arg(long)]
    n: Option<usize>,
    /// Highest bid on the auction grid (default n + 2).
    #[arg(long)]
    k: Option<u32>,
    /// Reserves: seats.
    #[arg(long)]
    q: Option<usize>,
    /// Reserves: reserved seats.
    #[arg(long)]
    r: Option<usize>,
    /// Reserves: low-income applicants (default 0..=r).
    #[arg(long, value_delimiter = ',')]
    low_income: Option<Vec<usize>>,
}

#[derive(Args)]
struct ScopeArgs {
    #[arg(long, value_enum, default_value_t = ScopeName::Exhaustive)]
    scope: ScopeName,
    /// Problems drawn by a sampled scope.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Seed of a sampled scope (required for --scope sample).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, value_enum, default_value_t = RouteName::Auto)]
    route: RouteName,
    /// Refuse counterpart searches larger than this.
    #[arg(long)]
    max_counterparts: Option<u128>,
    /// Stop exhaustive sweeps after this many problems (reported as a lower bound).
    #[arg(long)]
    max_problems: Option<u128>,
    /// Report a smallest detecting group for every deviation.
    #[arg(long)]
    per_deviation: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingName {
    House,
    Priority,
    Auction,
    Vote,
    Reserves,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeName {
    Exhaustive,
    Sample,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteName {
    Auto,
    Enumerate,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Claims,
}

#[derive(Clone, Copy, ValueEnum)]
enum Predicate {
    Clinching,
    IndexTwo,
    Vice,
    DualDict,
    Dictatorial,
    MajorityMin,
    TauAxioms,
    FullRange,
    CompatReserves,
}

/// What a command produced: text for stdout, and whether it signals failure.
struct Output {
    text: String,
    failed: bool,
}

impl Output {
    fn json(value: &impl Serialize) -> Self {
        Output {
            text: format!(
                "{}\n",
                serde_json::to_string_pretty(value).expect("results serialize")
            ),
            failed: false,
        }
    }
}

type CliResult<T> = std::result::Result<T, Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot start the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli).and_then(|out| {
        emit(cli.output.as_deref(), &out.text)?;
        Ok(out.failed)
    }) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<Output> {
    let timing = !cli.no_timing;
    match &cli.command {
        Command::Index { target, budget } => {
            let (auditor, problem) = target_auditor(target, budget)?;
            let report = auditor.audit_index(&problem)?;
            Ok(Output::json(&if timing {
                report
            } else {
                report.without_timing()
            }))
        }
        Command::Detect {
            target,
            deviation,
            group,
            budget,
        } => {
            let (auditor, problem) = target_auditor(target, budget)?;
            let deviation = read_outcome(deviation, auditor.setting())?;
            let value = match group {
                Some(members) => {
                    let g = group_of(members, problem.n())?;
                    json!({
                        "mechanism": auditor.mechanism().descriptor(),
                        "problem_hash": problem.hash_hex(),
                        "deviation": deviation,
                        "group": members,
                        "detects": auditor.detects(&problem, &deviation, g)?,
                    })
                }
                None => {
                    let (size, g) = auditor.min_detecting_size(&problem, &deviation)?;
                    json!({
                        "mechanism": auditor.mechanism().descriptor(),
                        "problem_hash": problem.hash_hex(),
                        "deviation": deviation,
                        "min_size": size,
                        "group": g.members().collect::<Vec<_>>(),
                    })
                }
            };
            Ok(Output::json(&value))
        }
        Command::WorstCase {
            mechanism,
            setting,
            scope,
            format,
            budget,
        } => {
            let setting = setting.resolve(Some(mechanism))?;
            let auditor = Auditor::new(parse_mechanism(mechanism, &setting)?, budget.options())?;
            warn_coarse_grid(&setting, scope);
            let w = auditor.max_index_over(&scope.scope()?)?;
            let w = if timing { w } else { w.without_timing() };
            Ok(match format {
                Format::Json => Output::json(&w),
                Format::Csv => Output {
                    text: worst_case_csv(&w, setting.n, timing)?,
                    failed: false,
                },
            })
        }
        Command::Characterize {
            predicate,
            mechanism,
            structure,
            problem,
            kind,
            audit,
            setting,
            scope,
            budget,
        } => characterize(
            *predicate,
            CharacterizeArgs {
                mechanism: mechanism.as_deref(),
                structure: structure.as_deref(),
                problem: problem.as_deref(),
                kind: kind.as_deref(),
                audit: *audit,
                setting,
                scope,
                options: budget.options(),
                timing,
            },
        ),
        Command::SampleAudit {
            target,
            deviation,
            m,
            trials,
            seed,
            budget,
        } => {
            let (auditor, problem) = target_auditor(target, budget)?;
            let deviation = read_outcome(deviation, auditor.setting())?;
            Ok(Output::json(&sample_audit_probability(
                &auditor, &problem, &deviation, *m, *trials, *seed,
            )?))
        }
        Command::Report {
            suite: SuiteName::Claims,
            dir,
            n,
            only,
            substitute,
            sampled_serial,
            samples,
            trials,
            seed,
        } => {
            let mut substitutions = HashMap::new();
            for s in substitute {
                let (desc, path) = s.rsplit_once('=').ok_or_else(|| {
                    Error::usage(format!("--substitute expects DESCRIPTOR=PATH, got '{s}'"))
                })?;
                substitutions.insert(desc.to_string(), load_table(desc, Path::new(path))?);
            }
            let config = SuiteConfig {
                max_n: *n,
                serial_n4_exhaustive: !sampled_serial,
                samples: *samples,
                trials: *trials,
                seed: *seed,
                substitutions,
                only: only.clone(),
                ..SuiteConfig::default()
            };
            let report = run_suite(&config, |row| {
                eprintln!(
                    "{} {:>2} {}: {}",
                    status_word(&row.status),
                    row.id,
                    row.name,
                    row.summary
                );
            });
            write_report(dir, &report, timing)?;
            Ok(Output {
                text: suite_csv(&report, timing)?,
                failed: !report.all_passed(),
            })
        }
        Command::EnumerateStable { problem, tau, cap } => {
            let problem = load_problem(problem)?;
            let tau = tau.as_deref().map(TauKind::parse).transpose()?;
            let stable = enumerate_stable(&problem, tau, *cap)?;
            Ok(Output::json(&json!({
                "problem_hash": problem.hash_hex(),
                "tau": tau.map(|t| t.label()),
                "count": stable.len(),
                "stable": stable,
            })))
        }
    }
}

impl SettingArgs {
    /// Builds the setting from explicit flags, inferring the kind from the
    /// mechanism descriptor when `--setting` is absent.
    fn resolve(&self, mechanism: Option<&str>) -> CliResult<Setting> {
        if let Some(path) = mechanism.and_then(|m| m.strip_prefix("table:file=")) {
            return table_setting(Path::new(path));
        }
        let kind = match (self.setting, mechanism) {
            (Some(k), _) => k,
            (None, Some(m)) => infer_setting(m)?,
            (None, None) => return Err(Error::usage("pass --setting or --mechanism")),
        };
        let n = self.n.ok_or_else(|| Error::usage("--n is required"))?;
        let setting = match kind {
            SettingName::House => Setting::house(n),
            SettingName::Priority => Setting::priority(n),
            SettingName::Auction => Setting::auction(n, self.k.unwrap_or(n as u32 + 2)),
            SettingName::Vote => Setting::vote(n),
            SettingName::Reserves => {
                let q = self.q.ok_or_else(|| Error::usage("reserves need --q"))?;
                let r = self.r.ok_or_else(|| Error::usage("reserves need --r"))?;
                let low = match &self.low_income {
                    Some(l) => group_of(l, n)?,
                    None => Group::from_members(0..(r + 1).min(n)),
                };
                Setting::reserves(n, q, r, low)
            }
        };
        setting.validate()?;
        Ok(setting)
    }
}

fn infer_setting(descriptor: &str) -> CliResult<SettingName> {
    let head = descriptor.split(':').next().unwrap_or("");
    Ok(match head {
        "da" | "da-obj" | "ia" | "ar" | "da-rep" => SettingName::Priority,
        "serial" | "fixture" | "constant" => SettingName::House,
        "fpa" | "apa" | "spa" => SettingName::Auction,
        "majority" | "dictator" | "veto" => SettingName::Vote,
        "rsf" | "osf" => SettingName::Reserves,
        _ => {
            return Err(Error::config(format!(
                "cannot infer a setting for '{descriptor}'; pass --setting"
            )))
        }
    })
}

impl ScopeArgs {
    fn scope(&self) -> CliResult<ProblemScope> {
        Ok(match self.scope {
            ScopeName::Exhaustive => ProblemScope::Exhaustive,
            ScopeName::Sample => ProblemScope::Sample {
                count: self.samples,
                seed: self
                    .seed
                    .ok_or_else(|| Error::usage("--scope sample requires --seed"))?,
            },
        })
    }
}

impl BudgetArgs {
    fn options(&self) -> AuditOptions {
        let d = AuditOptions::default();
        AuditOptions {
            route: match self.route {
                RouteName::Auto => Route::Auto,
                RouteName::Enumerate => Route::Enumerate,
                RouteName::Grid => Route::Grid,
            },
            max_counterparts: self.max_counterparts.unwrap_or(d.max_counterparts),
            max_problems: self.max_problems.unwrap_or(d.max_problems),
            per_deviation: self.per_deviation,
            ..d
        }
    }
}

fn load_problem(path: &Path) -> CliResult<Problem> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut text)?;
        parse_problem(&text)
    } else {
        read_problem(path)
    }
}

fn read_outcome(arg: &str, setting: &Setting) -> CliResult<Outcome> {
    match arg.strip_prefix('@') {
        Some(path) => parse_outcome(&fs::read_to_string(path)?, setting),
        None => parse_outcome(arg, setting),
    }
}

fn group_of(members: &[usize], n: usize) -> CliResult<Group> {
    if let Some(&i) = members.iter().find(|&&i| i >= n) {
        return Err(Error::input(format!("individual {i} out of range 0..{n}")));
    }
    Ok(Group::from_members(members.iter().copied()))
}

fn load_table(descriptor: &str, path: &Path) -> CliResult<MechanismHandle> {
    let setting = table_setting(path)?;
    auditlab::io::load_table_mechanism(descriptor, &setting, path)
}

/// The mechanism runs on the problem's own setting; table files must agree.
fn target_auditor(target: &ProblemTarget, budget: &BudgetArgs) -> CliResult<(Auditor, Problem)> {
    let problem = load_problem(&target.problem)?;
    let mech = parse_mechanism(&target.mechanism, &problem.setting)?;
    Ok((Auditor::new(mech, budget.options())?, problem))
}

fn warn_coarse_grid(setting: &Setting, scope: &ScopeArgs) {
    if let (Some(k), ScopeName::Exhaustive) = (setting.max_bid(), scope.scope) {
        if (k as usize) < 2 * setting.n {
            eprintln!(
                "warning: bid grid 1..={k} is too coarse to separate every pair of adjacent bids by 2; \
                 some second-price profiles admit no in-between payment"
            );
        }
    }
}

#[derive(Serialize)]
struct WorstCaseRow<'a> {
    mechanism: &'a str,
    n: usize,
    params: &'a str,
    scope: &'a str,
    worst_index: usize,
    witness_problem_hash: &'a str,
    problems_evaluated: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_ms: Option<u64>,
    lower_bound: bool,
}

fn worst_case_csv(w: &WorstCase, n: usize, timing: bool) -> CliResult<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.serialize(WorstCaseRow {
        mechanism: &w.mechanism,
        n,
        params: &w.params,
        scope: &w.scope,
        worst_index: w.index,
        witness_problem_hash: w.witness_problem_hash.as_deref().unwrap_or(""),
        problems_evaluated: w.problems_evaluated,
        wall_ms: timing.then_some(w.stats.wall_ms),
        lower_bound: w.lower_bound,
    })
    .map_err(csv_error)?;
    into_string(out)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn into_string(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn status_word(s: &Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Skipped => "SKIP",
    }
}

#[derive(Serialize)]
struct SuiteCsvRow<'a> {
    id: usize,
    name: &'a str,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_ms: Option<u64>,
    summary: &'a str,
}

fn suite_csv(report: &SuiteReport, timing: bool) -> CliResult<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    for row in &report.rows {
        out.serialize(SuiteCsvRow {
            id: row.id,
            name: &row.name,
            status: status_word(&row.status),
            wall_ms: timing.then_some(row.wall_ms),
            summary: &row.summary,
        })
        .map_err(csv_error)?;
    }
    into_string(out)
}

/// Writes `suite.csv`, `suite.json` and one `row-XX.json` per row.
fn write_report(dir: &Path, report: &SuiteReport, timing: bool) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("suite.csv"), suite_csv(report, timing)?)?;
    let mut value = serde_json::to_value(report)?;
    if !timing {
        strip_timing(&mut value);
    }
    fs::write(
        dir.join("suite.json"),
        format!("{}\n", serde_json::to_string_pretty(&value)?),
    )?;
    if let Value::Array(rows) = &value["rows"] {
        for row in rows {
            let id = row["id"].as_u64().unwrap_or(0);
            fs::write(
                dir.join(format!("row-{id:02}.json")),
                format!("{}\n", serde_json::to_string_pretty(row)?),
            )?;
        }
    }
    Ok(())
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("wall_ms");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

struct CharacterizeArgs<'a> {
    mechanism: Option<&'a str>,
    structure: Option<&'a str>,
    problem: Option<&'a Path>,
    kind: Option<&'a str>,
    audit: bool,
    setting: &'a SettingArgs,
    scope: &'a ScopeArgs,
    options: AuditOptions,
    timing: bool,
}

impl CharacterizeArgs<'_> {
    fn mechanism(&self) -> CliResult<MechanismHandle> {
        let desc = self
            .mechanism
            .ok_or_else(|| Error::usage("this predicate needs --mechanism"))?;
        let setting = match self.problem {
            Some(p) => load_problem(p)?.setting,
            None => self.setting.resolve(Some(desc))?,
        };
        parse_mechanism(desc, &setting)
    }

    fn n(&self) -> CliResult<usize> {
        self.setting
            .n
            .ok_or_else(|| Error::usage("--n is required"))
    }
}

fn characterize(predicate: Predicate, a: CharacterizeArgs) -> CliResult<Output> {
    let value = match predicate {
        Predicate::Clinching => {
            let auditor = Auditor::new(a.mechanism()?, a.options)?;
            match a.problem {
                Some(p) => {
                    let problem = load_problem(p)?;
                    let order = auditor.sequential_clinching(&problem)?;
                    json!({
                        "mechanism": auditor.mechanism().descriptor(),
                        "problem_hash": problem.hash_hex(),
                        "clinching_order": order,
                        "index": auditor.audit_index(&problem)?.index,
                    })
                }
                None => serde_json::to_value(auditor.clinching_order_uniformity()?)?,
            }
        }
        Predicate::FullRange => {
            serde_json::to_value(Auditor::new(a.mechanism()?, a.options)?.full_range()?)?
        }
        Predicate::IndexTwo => {
            let kind = match (a.kind, a.mechanism) {
                (Some(k), _) => TauKind::parse(k)?,
                (None, Some(m)) => TauKind::parse(m.strip_prefix("da-rep:").ok_or_else(|| {
                    Error::usage("index-two needs --mechanism da-rep:<kind> or --kind")
                })?)?,
                (None, None) => {
                    return Err(Error::usage(
                        "index-two needs --mechanism da-rep:<kind> or --kind",
                    ))
                }
            };
            match a.problem {
                Some(p) => {
                    serde_json::to_value(index_two_da_representable(&load_problem(p)?, kind)?)?
                }
                None => {
                    let sweep = index_two_sweep(a.n()?, kind, &a.scope.scope()?, a.options)?;
                    let failed = sweep.oracle_disagreements > 0 || sweep.path_disagreements > 0;
                    return Ok(Output {
                        failed,
                        ..Output::json(&sweep)
                    });
                }
            }
        }
        Predicate::Vice => {
            let desc = a
                .structure
                .or(a.mechanism)
                .ok_or_else(|| Error::usage("vice needs --structure"))?;
            let n = match a.setting.n {
                Some(n) => n,
                None => structure_n(desc)?,
            };
            let structure = parse_structure(desc, n)?;
            if a.audit {
                let mut v =
                    check_vice_equals_index_two(desc, structure, n, &a.scope.scope()?, a.options)?;
                if !a.timing {
                    v.worst = v.worst.without_timing();
                }
                serde_json::to_value(v)?
            } else {
                serde_json::to_value(is_vice(&structure, n)?)?
            }
        }
        Predicate::DualDict => {
            let mech = a.mechanism()?;
            let dual = is_dual_dictatorship(mech.as_ref(), mech.setting())?;
            json!({ "mechanism": mech.descriptor(), "dual_dictatorship": dual })
        }
        Predicate::Dictatorial => match a.mechanism {
            Some(_) => {
                let mech = a.mechanism()?;
                serde_json::to_value(check_dictatorial_iff_index_one(
                    &vote_table(&mech)?,
                    a.options,
                )?)?
            }
            None => {
                let verdicts = VoteTable::all(a.n()?)?
                    .iter()
                    .map(|t| check_dictatorial_iff_index_one(t, a.options))
                    .collect::<CliResult<Vec<_>>>()?;
                let agree = verdicts.iter().all(|v| v.agree);
                json!({ "tables": verdicts.len(), "agree": agree, "verdicts": verdicts })
            }
        },
        Predicate::MajorityMin => serde_json::to_value(check_majority_minimal(
            &VoteTable::all_anonymous(a.n()?)?,
            a.options,
        )?)?,
        Predicate::TauAxioms => {
            let kinds = match a.kind {
                Some(k) => vec![TauKind::parse(k)?],
                None => vec![TauKind::Identity, TauKind::IaRank, TauKind::ArTier(2)],
            };
            let seed = a.scope.seed.unwrap_or(0);
            let mut reports = Vec::new();
            for kind in kinds {
                for axiom in TauAxiom::ALL {
                    reports.push(tau_axiom_check(kind, axiom, a.scope.samples as u64, seed)?);
                }
            }
            serde_json::to_value(reports)?
        }
        Predicate::CompatReserves => {
            let setting = a.setting.resolve(Some(a.mechanism.unwrap_or("rsf")))?;
            serde_json::to_value(reserves_compatibility_uniqueness(&setting)?)?
        }
    };
    Ok(Output::json(&value))
}

/// Size of a structure descriptor that names it, e.g. `fixture:swap:n=4`.
fn structure_n(desc: &str) -> CliResult<usize> {
    if let Some(order) = desc.strip_prefix("serial:order=") {
        return Ok(order.split(',').count());
    }
    desc.rsplit_once("n=")
        .and_then(|(_, n)| n.trim().parse().ok())
        .ok_or_else(|| Error::usage(format!("cannot tell n from '{desc}'; pass --n")))
}

/// The truth table of a vote mechanism.
fn vote_table(mech: &MechanismHandle) -> CliResult<VoteTable> {
    let n = mech.setting().n;
    let bits = (0..1usize << n)
        .map(|idx| {
            let votes: Vec<u8> = profile_votes(n, idx).into_iter().map(u8::from).collect();
            Ok(mech.evaluate(&Problem::vote(&votes)?)? == Outcome::Vote(true))
        })
        .collect::<CliResult<Vec<bool>>>()?;
    VoteTable::new(n, bits)
}
