//! One pass/fail line per acceptance criterion; exits nonzero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use wigner_udm::verify::{run_suite, SuiteReport, Suite, VerifyOptions};

const RUNTIME_LIMIT: Duration = Duration::from_secs(60);

fn summary(r: &SuiteReport) -> String {
    r.checks
        .iter()
        .map(|c| {
            let mark = if c.passed { "ok" } else { "FAIL" };
            let detail = c.detail.as_deref().map(|d| format!(" [{d}]")).unwrap_or_default();
            format!("{} {:.3e} <= {:.1e} {mark}{detail}", c.name, c.max_deviation, c.tolerance)
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn main() -> ExitCode {
    let opts = VerifyOptions::default();
    let mut failures = 0;
    for (i, suite) in Suite::ALL.into_iter().enumerate() {
        let start = Instant::now();
        let report = run_suite(suite, &opts);
        let elapsed = start.elapsed();
        let mut passed = report.passed;
        let mut extra = String::new();
        if suite == Suite::Udm {
            passed &= elapsed <= RUNTIME_LIMIT;
            extra = format!("; runtime {:.1} s <= {} s", elapsed.as_secs_f64(), RUNTIME_LIMIT.as_secs());
        }
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {:<13} {}  ({}{extra})",
            i + 1,
            suite.name(),
            if passed { "PASS" } else { "FAIL" },
            summary(&report)
        );
    }
    println!("acceptance: {} of {} criteria passed", Suite::ALL.len() - failures, Suite::ALL.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
