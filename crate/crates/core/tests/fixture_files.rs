//! The shipped fixture data files match the constructions in
//! `auditlab::fixtures`. Run with `AUDITLAB_BLESS=1` to rewrite them.

use std::path::PathBuf;

use auditlab::fixtures;
use auditlab::io::{parse_outcome, problem_to_json, read_problem};
use auditlab::{Outcome, Problem};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn expected() -> Vec<(String, String)> {
    let mut files = Vec::new();
    let mut problem = |name: &str, p: &Problem, dev: Option<&Outcome>| {
        files.push((format!("{name}.json"), problem_to_json(p)));
        if let Some(d) = dev {
            files.push((
                format!("{name}.deviation.json"),
                format!("{}\n", serde_json::to_string(d).unwrap()),
            ));
        }
    };
    for n in [3, 4] {
        problem(
            &format!("cycle_n{n}"),
            &fixtures::cycle_problem(n).unwrap(),
            Some(&fixtures::cycle_deviation(n)),
        );
    }
    for n in [4, 5] {
        problem(
            &format!("swap_n{n}"),
            &fixtures::swap_problem(n).unwrap(),
            Some(&fixtures::swap_deviation(n)),
        );
    }
    let (p, d) = fixtures::reserves_low_last().unwrap();
    problem("reserves_low_last", &p, Some(&d));
    let (p, d) = fixtures::reserves_split_low().unwrap();
    problem("reserves_split_low", &p, Some(&d));
    let (p, d) = fixtures::spa_between_payment().unwrap();
    problem("bids_5_2_3", &p, Some(&d));
    problem("votes_101", &Problem::vote(&[1, 0, 1]).unwrap(), None);
    problem("chain_n3", &fixtures::chain_problem().unwrap(), None);
    problem(
        "non_chain_n3",
        &fixtures::non_chain_problem().unwrap(),
        None,
    );
    files
}

#[test]
fn fixture_files_match_constructions() {
    let bless = std::env::var_os("AUDITLAB_BLESS").is_some();
    for (name, text) in expected() {
        let path = dir().join(&name);
        if bless {
            std::fs::write(&path, &text).unwrap();
        }
        let on_disk =
            std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(
            on_disk, text,
            "{name} is stale; rerun with AUDITLAB_BLESS=1"
        );
    }
}

#[test]
fn fixture_files_parse() {
    for (name, _) in expected() {
        if let Some(stem) = name.strip_suffix(".deviation.json") {
            let p = read_problem(&dir().join(format!("{stem}.json"))).unwrap();
            let text = std::fs::read_to_string(dir().join(&name)).unwrap();
            parse_outcome(&text, &p.setting).unwrap();
        } else {
            read_problem(&dir().join(&name)).unwrap();
        }
    }
}
