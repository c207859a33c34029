//! Runs the full reproduction suite and prints one verdict line per
//! criterion. Exits nonzero when any criterion fails.

use auditlab::suite::{run_suite, Status, SuiteConfig};

fn main() {
    let report = run_suite(&SuiteConfig::default(), |row| {
        let verdict = match row.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        println!(
            "{verdict} criterion {:>2} ({:.1}s) {}: {}",
            row.id,
            row.wall_ms as f64 / 1000.0,
            row.name,
            row.summary
        );
    });
    println!(
        "acceptance: {} passed, {} failed, {} skipped",
        report.passed, report.failed, report.skipped
    );
    if !report.all_passed() {
        std::process::exit(1);
    }
}
