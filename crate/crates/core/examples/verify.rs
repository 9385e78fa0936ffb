//! Run the oracle self-checks, then again with a deliberately broken
//! closed form.

use qee::config::VerifyConfig;
use qee::verify;

fn main() -> qee::Result<()> {
    let cfg = VerifyConfig::default();
    for inject_fault in [false, true] {
        let summary = verify::run(&VerifyConfig { inject_fault, ..cfg.clone() }, 0)?;
        println!("inject_fault = {inject_fault}: passed = {}", summary.passed);
        for c in &summary.checks {
            println!("  {:<32} {} max error {:.2e}", c.name, if c.passed { "pass" } else { "FAIL" }, c.max_error);
        }
    }
    Ok(())
}
