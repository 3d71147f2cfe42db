//! One PASS/FAIL line per acceptance criterion.

use std::process::ExitCode;
use std::time::Instant;

use superp2::selftest::{run, Fixtures};

fn main() -> ExitCode {
    let start = Instant::now();
    let checks = run(&Fixtures::embedded());
    for c in &checks {
        println!("{}", c.line());
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    let regressions: Vec<u32> = checks.iter().filter(|c| c.is_regression()).map(|c| c.id).collect();
    println!("{passed}/{} criteria pass ({:.1}s)", checks.len(), start.elapsed().as_secs_f64());
    if regressions.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexplained failures: {regressions:?}");
        ExitCode::FAILURE
    }
}
