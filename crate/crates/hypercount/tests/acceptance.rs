//! Runs every acceptance criterion, prints one line per criterion and fails
//! if any criterion outside `KNOWN_UNATTAINABLE` fails.

use hypercount::validation::{run_criterion, verdict, Budget, KNOWN_UNATTAINABLE};

const SEED: u64 = 20261016;

#[test]
fn acceptance() {
    let budget = Budget::default();
    let mut results = Vec::new();
    for id in 1..=13u8 {
        let r = run_criterion(id, budget, SEED).unwrap_or_else(|e| panic!("criterion {id}: {e}"));
        println!("{}", r.summary_line());
        for c in r.checks.iter().filter(|c| !c.pass) {
            println!("    failed: {} [{}] observed {} bound {}", c.name, c.inputs, c.observed, c.bound);
        }
        results.push(r);
    }
    let failing: Vec<u8> = results
        .iter()
        .filter(|r| !r.pass() && !KNOWN_UNATTAINABLE.contains(&r.id))
        .map(|r| r.id)
        .collect();
    println!(
        "{} of 13 criteria pass; known unattainable: {KNOWN_UNATTAINABLE:?}",
        results.iter().filter(|r| r.pass()).count()
    );
    assert!(verdict(&results), "failing criteria: {failing:?}");
}
