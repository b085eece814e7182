//! One line per acceptance criterion; exits non-zero if any fails.

use cspwb::config::WorkbenchConfig;
use cspwb::suite::run_suite;

fn main() {
    let cfg = match WorkbenchConfig::from_env(0, 0) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("acceptance: {e}");
            std::process::exit(2);
        }
    };
    let report = run_suite(&cfg, None).expect("suite setup failed");
    for line in report.lines() {
        println!("{line}");
    }
    let failed = report.results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} criteria, {failed} failed", report.results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
