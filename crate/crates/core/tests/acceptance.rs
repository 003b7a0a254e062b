//! One pass/fail line per acceptance criterion, each a group of oracle
//! suites at full trial count with a wall-clock limit.

use std::process::ExitCode;
use std::time::Duration;

use dynq::check;

const SEED: u64 = 42;

/// Criterion number, what it covers, and its time limit.
const CRITERIA: [(u8, &str, u64); 9] = [
    (1, "acyclic transitive closure", 10),
    (2, "regular path queries", 30),
    (3, "context-free reachability on DAGs", 60),
    (4, "distances", 60),
    (5, "Parikh vectors", 30),
    (6, "conjunctive queries with linear constraints", 60),
    (7, "extended conjunctive queries on acyclic copies", 60),
    (8, "products and NEPS", 60),
    (9, "determinism and rollback of scripts", 60),
];

fn main() -> ExitCode {
    let mut all = true;
    for (crit, about, limit) in CRITERIA {
        let mut elapsed = Duration::ZERO;
        let mut parts = Vec::new();
        let mut failures = Vec::new();
        for s in check::suites().iter().filter(|s| s.criterion == crit) {
            let o = s.run(s.trials, SEED, None);
            elapsed += o.elapsed;
            parts.push(format!("{} {}/{}", o.suite, o.passed(), o.trials));
            failures.extend(o.failures.iter().take(3).map(|(t, e)| format!("{} trial {t}: {e}", o.suite)));
        }
        let ok = failures.is_empty() && elapsed < Duration::from_secs(limit);
        all &= ok;
        println!(
            "criterion {crit} {}: {about}: {} in {:.2}s (limit {limit}s)",
            if ok { "PASS" } else { "FAIL" },
            parts.join(", "),
            elapsed.as_secs_f64()
        );
        for f in failures {
            println!("    {f}");
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
