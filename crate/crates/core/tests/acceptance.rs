//! Acceptance criteria 1–11 plus the four-point residual, one PASS/FAIL
//! line each. Exits nonzero on any unexpected outcome.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bregman_coherence::harness::{suite, SuiteOptions, SuiteReport};

/// Checks that fail for a documented reason: the quoted projection for the
/// weighted generator ½(p1² + 10p2²) on the circle is not its minimizer.
const KNOWN_UNATTAINABLE: [&str; 2] = ["kernel/weighted_f_w/projection", "kernel/weighted_f_w/feature_image"];

struct Outcome {
    id: &'static str,
    title: &'static str,
    failures: Vec<String>,
    elapsed: Duration,
    limit: Duration,
    checks: usize,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.failures.is_empty() && self.elapsed <= self.limit
    }
}

fn run(
    id: &'static str,
    title: &'static str,
    limit_s: f64,
    f: impl FnOnce() -> Vec<SuiteReport>,
    filter: impl Fn(&str) -> bool,
) -> Outcome {
    let start = Instant::now();
    let reports = f();
    let elapsed = start.elapsed();
    let mut failures = Vec::new();
    let mut checks = 0;
    for r in &reports {
        for c in r.checks.iter().filter(|c| filter(&c.name)) {
            checks += 1;
            if c.is_failure() {
                let inst = c.instance.map(|i| format!("[{i}]")).unwrap_or_default();
                let detail = c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default();
                failures.push(format!("{}{inst} value {:.6e} target {:.6e} tol {:.1e}{detail}", c.name, c.value, c.target, c.tolerance));
            }
        }
    }
    Outcome { id, title, failures, elapsed, limit: Duration::from_secs_f64(limit_s), checks }
}

fn main() -> ExitCode {
    let opts = SuiteOptions::default();
    let all = |_: &str| true;
    let outcomes = vec![
        run("1", "toy-example golden values", 1.0, || vec![suite::rigidity(&SuiteOptions { instances: Some(0), ..opts.clone() })], |n| {
            n.starts_with("rigidity/toy/")
        }),
        run("2", "minimax counterexample", 1.0, || vec![suite::minimax(&opts)], all),
        run(
            "3",
            "rigidity examples and kernel circle",
            2.0,
            || vec![suite::rigidity(&SuiteOptions { instances: Some(0), ..opts.clone() }), suite::kernel(&opts)],
            |n| n.starts_with("rigidity/asymmetric/") || n.starts_with("kernel/"),
        ),
        run("4", "direct-improvement property suite", 60.0, || vec![suite::direct_improvement(&opts)], all),
        run("5", "equivalence suite", 60.0, || vec![suite::equivalence(&opts)], all),
        run("6", "two-step bound suite", 30.0, || vec![suite::two_step(&opts)], all),
        run("7", "pythagorean equality", 30.0, || vec![suite::pythagorean(&opts)], all),
        run("8", "maximin", 120.0, || vec![suite::maximin(&opts)], all),
        run(
            "9",
            "empirical suite",
            180.0,
            || vec![suite::empirical(&opts), suite::empirical_consistency(&opts)],
            all,
        ),
        run(
            "10",
            "impossibility suites",
            120.0,
            || vec![suite::orbit_average(&opts), suite::impossibility(&opts)],
            all,
        ),
        run("11", "numerical hygiene identities", 30.0, || vec![suite::bregman_identities(&opts)], all),
        run("4pt", "four-point residual on affine instances", 30.0, || vec![suite::rigidity(&opts)], |n| {
            n.starts_with("rigidity/four_point")
        }),
    ];

    let mut unexpected = false;
    for o in &outcomes {
        let verdict = if o.passed() { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>3} {verdict}  {} ({} checks, {:.2} s, limit {:.0} s)",
            o.id,
            o.title,
            o.checks,
            o.elapsed.as_secs_f64(),
            o.limit.as_secs_f64()
        );
        if o.elapsed > o.limit {
            println!("    runtime limit exceeded");
        }
        for f in &o.failures {
            let known = KNOWN_UNATTAINABLE.iter().any(|k| f.starts_with(k));
            println!("    {} {f}", if known { "known-unattainable" } else { "failed" });
        }
        let ok = if o.id == "3" {
            // only the documented sub-checks may fail, and both must
            let names: Vec<&str> = KNOWN_UNATTAINABLE.iter().copied().collect();
            let all_known = o.failures.iter().all(|f| names.iter().any(|k| f.starts_with(k)));
            let each_fails = names.iter().all(|k| o.failures.iter().any(|f| f.starts_with(k)));
            if !each_fails {
                println!("    note: a known-unattainable check passed; revisit the recorded analysis");
            }
            all_known && each_fails && o.elapsed <= o.limit
        } else {
            o.passed()
        };
        unexpected |= !ok;
    }
    if unexpected {
        println!("acceptance: unexpected outcome");
        ExitCode::FAILURE
    } else {
        println!("acceptance: all criteria as expected (criterion 3 fails only on the documented weighted-circle values)");
        ExitCode::SUCCESS
    }
}
