//! Executable verification suites, counterexample reproductions and the
//! rigidity toy examples.
//!
//! Every suite returns a [`SuiteReport`] made of [`Check`]s. A check is a
//! machine-readable comparison `value REL target ± tolerance`; a clean run
//! has no failed check outside the declared negative controls. Reports
//! carry no timing, so the same seed always serializes to the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod instances;
mod rigidity;
mod suites;
mod witnesses;

pub use rigidity::{
    four_point_residual, kernel_circle_example, rigidity_affine_examples, single_f_characterization_check,
    CharacterizationReport,
};
pub use suites::{run_suite, run_suite_with, SuiteOptions, SUITE_NAMES};
pub use witnesses::{
    minimax_counterexample, orbit_average_universal_check, orbit_infeasibility_witness, reversed_jensen_witness,
    JensenWitness,
};

/// Direct access to the individual suite bodies.
pub mod suite {
    pub use super::suites::{
        bregman_identities, characterization, direct_improvement, empirical, empirical_consistency, equivalence,
        impossibility, kernel, maximin, minimax, orbit_average, pythagorean, relaxed, rigidity, two_step,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// value ≤ target + tolerance
    Le,
    /// value ≥ target − tolerance
    Ge,
    /// |value − target| ≤ tolerance
    Near,
    /// boolean outcome stored as 0/1; passes iff value equals target
    Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<usize>,
    pub value: f64,
    pub relation: Relation,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Negative control: the outcome is reported but never counted as a
    /// failure.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub control: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn make(name: impl Into<String>, value: f64, relation: Relation, target: f64, tolerance: f64) -> Self {
        let mut c = Self {
            name: name.into(),
            instance: None,
            value,
            relation,
            target,
            tolerance,
            passed: false,
            control: false,
            detail: None,
        };
        c.evaluate();
        c
    }

    pub fn le(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self::make(name, value, Relation::Le, target, tolerance)
    }

    pub fn ge(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self::make(name, value, Relation::Ge, target, tolerance)
    }

    pub fn near(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self::make(name, value, Relation::Near, target, tolerance)
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::make(name, if ok { 1.0 } else { 0.0 }, Relation::Flag, 1.0, 0.0)
    }

    /// A check that could not be evaluated because a computation failed.
    pub fn error(name: impl Into<String>, err: &Error) -> Self {
        Self::flag(name, false).with_detail(err.to_string())
    }

    pub fn at(mut self, instance: usize) -> Self {
        self.instance = Some(instance);
        self
    }

    pub fn control(mut self) -> Self {
        self.control = true;
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    fn evaluate(&mut self) {
        let v = self.value;
        self.passed = match self.relation {
            Relation::Le => v <= self.target + self.tolerance,
            Relation::Ge => v >= self.target - self.tolerance,
            Relation::Near => (v - self.target).abs() <= self.tolerance,
            Relation::Flag => v == self.target,
        };
    }

    /// A failed check that is not a negative control.
    pub fn is_failure(&self) -> bool {
        !self.passed && !self.control
    }
}

/// Column-oriented numeric table, emitted as CSV by the command line tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<Table>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, seed: u64) -> Self {
        Self { suite: suite.into(), seed, checks: Vec::new(), tables: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Records `f`'s checks, or a failed check named `name` if it errors.
    pub fn record(&mut self, name: &str, f: impl FnOnce() -> Result<Vec<Check>>) {
        match f() {
            Ok(cs) => self.checks.extend(cs),
            Err(e) => self.checks.push(Check::error(name, &e)),
        }
    }

    pub fn extend(&mut self, other: SuiteReport) {
        self.checks.extend(other.checks);
        self.tables.extend(other.tables);
        self.notes.extend(other.notes);
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.is_failure()).collect()
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| !c.is_failure())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Checks whose name starts with `prefix`.
    pub fn matching<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Check> + 'a {
        self.checks.iter().filter(move |c| c.name.starts_with(prefix))
    }

    /// Replaces the tolerance of every numeric check and re-evaluates its
    /// verdict. Solver internals are unaffected.
    pub fn override_tolerance(&mut self, tol: f64) {
        for c in &mut self.checks {
            if c.relation != Relation::Flag {
                c.tolerance = tol;
                c.evaluate();
            }
        }
    }

    /// Err(Assertion) naming the first failed check.
    pub fn ensure(self) -> Result<Self> {
        match self.failures().first() {
            None => Ok(self),
            Some(c) => Err(Error::Assertion(format!("{}: {}", self.suite, describe(c)))),
        }
    }

    /// Human-readable summary: totals, then one line per failed check.
    pub fn summary(&self) -> String {
        let total = self.checks.len();
        let controls = self.checks.iter().filter(|c| c.control).count();
        let failed = self.failures();
        let mut s = String::new();
        let _ = writeln!(
            s,
            "suite {} (seed {}): {} checks, {} failed, {} negative controls",
            self.suite,
            self.seed,
            total,
            failed.len(),
            controls
        );
        for c in failed {
            let _ = writeln!(s, "  FAIL {}", describe(c));
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        s
    }
}

fn describe(c: &Check) -> String {
    let rel = match c.relation {
        Relation::Le => "<=",
        Relation::Ge => ">=",
        Relation::Near => "~=",
        Relation::Flag => "==",
    };
    let inst = c.instance.map(|i| format!("[{i}]")).unwrap_or_default();
    let detail = c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default();
    format!("{}{} = {:.6e} {} {:.6e} ± {:.1e}{}", c.name, inst, c.value, rel, c.target, c.tolerance, detail)
}

/// Result of a single counterexample or witness construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub name: String,
    /// False when the construction's hypothesis fails (e.g. the orbit
    /// average is already feasible).
    pub applicable: bool,
    /// The impossibility or violation is reproduced.
    pub violation: bool,
    /// Signed size of the effect (gap or smallest violation margin).
    pub margin: f64,
    pub values: BTreeMap<String, Vec<f64>>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl WitnessReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            applicable: true,
            violation: false,
            margin: 0.0,
            values: BTreeMap::new(),
            checks: Vec::new(),
            note: String::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| !c.is_failure())
    }
}
