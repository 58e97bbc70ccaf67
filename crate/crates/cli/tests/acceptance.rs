//! The shipped-guarantee battery, executed at full sample counts.
//!
//! Prints one pass/fail line per criterion and then asserts that every
//! criterion passed. C10's desk-scale comparison includes two sub-checks
//! that are measurably unattainable in this tabular setting (the 1.1x
//! full-simulation ratio and the transitive-game window ablation); they are
//! asserted as stated rather than weakened, so this test stays red with the
//! measured numbers in its output until those bounds are met.

use psro_cli::suite::{render_report, run_battery};

#[test]
fn acceptance_battery() {
    let results = run_battery(false);
    let report = render_report(&results);
    println!("{report}");
    assert_eq!(results.len(), 11, "one result per criterion");
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{} {}: {}", r.id, r.name, r.detail))
        .collect();
    assert!(
        failed.is_empty(),
        "criteria failed (see report above):\n{}",
        failed.join("\n")
    );
}
