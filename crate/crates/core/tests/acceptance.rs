use std::process::ExitCode;

use gauss_spectra::acceptance::{criteria, run_one, AcceptanceConfig};

fn main() -> ExitCode {
    let cfg = AcceptanceConfig::default();
    let mut failed = 0;
    for c in criteria() {
        let o = run_one(c.id, &cfg).expect("listed criterion");
        println!("{}", o.line());
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria().len() - failed, criteria().len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
