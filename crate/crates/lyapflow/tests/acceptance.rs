//! End-to-end acceptance gate: runs every cross-validation criterion and
//! prints one pass/fail line per criterion. Run with `-- --nocapture` to
//! see the report; any failing criterion fails the test.

use lyapflow::validate;

#[test]
fn acceptance() {
    let results = validate::run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.pass).collect();
    assert!(
        failed.is_empty(),
        "{} criterion(s) failed:\n{}",
        failed.len(),
        failed
            .iter()
            .map(|r| r.line())
            .collect::<Vec<_>>()
            .join("\n")
    );
}
