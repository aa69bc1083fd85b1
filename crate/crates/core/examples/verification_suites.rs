//! Runs every verification suite and prints one line per check.

use ffrunner::verify::{run_suite, SuiteParams, SUITES};

fn main() -> Result<(), ffrunner::Error> {
    let params = SuiteParams {
        threads: 4,
        ..Default::default()
    };
    for name in SUITES {
        let report = run_suite(name, &params)?;
        println!("{name}: {}", if report.pass { "pass" } else { "FAIL" });
        for c in &report.checks {
            println!("  {:<40} {:?}  {}", c.name, c.status, c.details);
        }
    }
    Ok(())
}
