//! Runs every verification suite at its stated tolerance and prints one
//! PASS/FAIL line per criterion.

use bcslab::verify::{run_suite, suite_names};
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut failed = 0;
    for (i, name) in suite_names().into_iter().enumerate() {
        let line = match run_suite(name).expect("registered suite") {
            Ok(report) => {
                let status = if report.passed() { "PASS" } else { "FAIL" };
                if !report.passed() {
                    failed += 1;
                    for c in report.checks.iter().filter(|c| !c.pass) {
                        eprintln!("    {c}");
                    }
                }
                format!("{status} criterion {:>2} {name} ({:.1}s)", i + 1, report.elapsed.as_secs_f64())
            }
            Err(e) => {
                failed += 1;
                format!("FAIL criterion {:>2} {name}: {e}", i + 1)
            }
        };
        println!("{line}");
    }
    println!("acceptance: {} of {} criteria passed", suite_names().len() - failed, suite_names().len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
