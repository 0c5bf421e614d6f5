//! Run the verification suite and print one line per check.

use chic::verify::{run_verify, VerifyOptions};

fn main() -> chic::Result<()> {
    let start = std::time::Instant::now();
    let report = run_verify(&VerifyOptions::default())?;
    for c in &report.checks {
        println!(
            "{:<4} {:<40} value {:>12.4e}  threshold {:>10.3e}  {}",
            if c.passed { "ok" } else { "FAIL" },
            c.id,
            c.value,
            c.threshold,
            c.detail
        );
    }
    println!("all passed: {} ({:.1?})", report.all_passed(), start.elapsed());
    Ok(())
}
