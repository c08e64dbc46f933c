//! Pass/fail bookkeeping for the acceptance target.
//!
//! Run with `cargo test -p nethac-validation --test acceptance`. Each
//! criterion prints one line; the process exits non-zero if any fails.

use std::time::Instant;

/// Verdict of one criterion with a human-readable summary of the observed
/// values.
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(passed: bool, detail: String) -> Self {
        Outcome { passed, detail }
    }
}

/// A named criterion.
pub type Criterion = (&'static str, fn() -> Outcome);

/// Runs every criterion in order, printing one line each, and returns the
/// number of failures.
pub fn run_all(criteria: &[Criterion]) -> usize {
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict}: {name} | {} | {:.1}s",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    failed
}
