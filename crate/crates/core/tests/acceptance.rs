//! Acceptance gate: runs every check, prints one PASS/FAIL line per criterion
//! with the numbers behind it, and exits non-zero if any check fails.
//!
//! Runs without the libtest harness so the table is printed on success too.

use std::process::ExitCode;

use cheshire_core::verify::{run_all, Verdict, VerifyOptions};

fn main() -> ExitCode {
    let reports = run_all(&VerifyOptions::default());
    println!("\nacceptance ({} criteria)", reports.len());
    for r in &reports {
        println!("{}", r.summary_line());
        for line in &r.details {
            println!("    {line}");
        }
    }
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| r.verdict != Verdict::Pass)
        .map(|r| format!("{} {}", r.number, r.key))
        .collect();
    println!(
        "\nacceptance result: {} passed; {} failed{}",
        reports.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" ({})", failed.join(", "))
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
