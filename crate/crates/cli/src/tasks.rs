//! Task runners. Each returns a check report (verdicts, tables, notes) and
//! a deterministic result payload; wall time is kept apart.

use std::time::Instant;

use bregman_coherence::bregman::expected_divergence;
use bregman_coherence::coherence::orbit_partition;
use bregman_coherence::empirical::{empirical_bound_report, sample_prompts, BoundOptions, Verdict};
use bregman_coherence::harness::{run_suite_with, Check, SuiteOptions, SuiteReport, Table};
use bregman_coherence::projection::{direct_projection, equivalence_residual, improvement, two_step_delta};
use bregman_coherence::relaxed::{expected_soft_divergence, penalized_project, relaxed_project};
use bregman_coherence::{ConvexModelSet, Model, SolveReport};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Config, Problem, Task};
use crate::CliError;

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jobs: usize,
    pub suite: Option<String>,
    pub lambda_cap: Option<f64>,
    pub penalty: Option<f64>,
    pub tol_override: Option<f64>,
}

pub struct Outcome {
    pub checks: SuiteReport,
    pub result: Value,
    pub wall_ns: u64,
}

/// Deterministic part of a solver report.
#[derive(Serialize)]
struct SolveSummary {
    status: bregman_coherence::SolveStatus,
    iterations: usize,
    objective: f64,
    kkt_residual: f64,
}

impl From<&SolveReport> for SolveSummary {
    fn from(r: &SolveReport) -> Self {
        Self { status: r.status, iterations: r.iterations, objective: r.objective, kkt_residual: r.kkt_residual }
    }
}

pub fn run(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    let seed = ov.seed.or(cfg.seed).unwrap_or(0);
    if let Some(t) = ov.tol_override {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("--tol-override must be a finite nonnegative number, got {t}")));
        }
    }
    let start = Instant::now();
    let (mut checks, result) = match cfg.task {
        Task::Project => project(cfg, seed)?,
        Task::TwoStep => two_step(cfg, seed)?,
        Task::Relaxed => relaxed(cfg, ov, seed)?,
        Task::Empirical => empirical(cfg, ov, seed)?,
        Task::Verify => verify(cfg, ov, seed)?,
    };
    if let Some(t) = ov.tol_override {
        checks.override_tolerance(t);
    }
    Ok(Outcome { checks, result, wall_ns: start.elapsed().as_nanos() as u64 })
}

fn model_table(name: &str, pi: &Model) -> Table {
    let mut columns = vec!["prompt".to_string()];
    columns.extend((0..pi.d()).map(|k| format!("outcome_{k}")));
    let rows = (0..pi.n())
        .map(|x| std::iter::once(x as f64).chain(pi.row(x).iter().copied()).collect())
        .collect();
    Table { name: name.into(), columns, rows }
}

/// Feasibility, coherence and solver-accuracy verdicts for a projection.
fn projection_checks(rep: &mut SuiteReport, p: &Problem, pi: &Model, solve: &SolveReport, prefix: &str) {
    rep.push(Check::flag(format!("{prefix}/in_set"), p.set.contains(pi, 1e-9)));
    rep.push(Check::near(format!("{prefix}/coherence"), pi.max_abs_diff(&p.phi.compose(pi)), 0.0, 1e-9));
    rep.push(Check::le(format!("{prefix}/kkt_residual"), solve.kkt_residual, 0.0, p.solver.tol_kkt));
}

/// The reference must be a coherent member of Π for the improvement
/// guarantees to apply.
fn checked_reference(p: &Problem) -> Result<Option<&Model>, CliError> {
    let Some(r) = &p.reference else { return Ok(None) };
    let coherent = p.set.merged_with(&orbit_partition(&p.phi)).map_err(CliError::from_lib)?;
    if !coherent.contains(r, 1e-9) {
        return Err(CliError::Config("at `reference`: model must lie in the coherent part of `set`".into()));
    }
    Ok(Some(r))
}

fn improvement_checks(rep: &mut SuiteReport, p: &Problem, pi: &Model, result: &mut Value) -> Result<(), CliError> {
    let Some(r) = checked_reference(p)? else { return Ok(()) };
    let imp = improvement(&p.gen, &p.dist, r, &p.pi0, pi).map_err(CliError::from_lib)?;
    let own = expected_divergence(&p.gen, &p.dist, pi, &p.pi0).map_err(CliError::from_lib)?;
    rep.push(Check::ge("improvement/lower_bound", imp, own, 1e-8));
    result["improvement"] = json!(imp);
    Ok(())
}

fn project(cfg: &Config, seed: u64) -> Result<(SuiteReport, Value), CliError> {
    let p = Problem::from_config(cfg)?;
    let (pi, solve) =
        direct_projection(&p.gen, &p.dist, &p.phi, &p.set, &p.pi0, &p.solver).map_err(CliError::from_lib)?;
    let mut rep = SuiteReport::new("project", seed);
    projection_checks(&mut rep, &p, &pi, &solve, "project");
    let mut result = json!({
        "solution": pi,
        "objective": expected_divergence(&p.gen, &p.dist, &pi, &p.pi0).map_err(CliError::from_lib)?,
        "solver": SolveSummary::from(&solve),
    });
    improvement_checks(&mut rep, &p, &pi, &mut result)?;
    rep.tables.push(model_table("solution", &pi));
    Ok((rep, result))
}

fn two_step(cfg: &Config, seed: u64) -> Result<(SuiteReport, Value), CliError> {
    let p = Problem::from_config(cfg)?;
    let (pi, solve, mid) =
        bregman_coherence::projection::two_step_projection(&p.gen, &p.dist, &p.phi, &p.set, &p.pi0, &p.solver)
            .map_err(CliError::from_lib)?;
    let mut rep = SuiteReport::new("two-step", seed);
    projection_checks(&mut rep, &p, &pi, &solve, "two_step");
    let mut result = json!({
        "intermediate": mid,
        "solution": pi,
        "objective": expected_divergence(&p.gen, &p.dist, &pi, &p.pi0).map_err(CliError::from_lib)?,
        "solver": SolveSummary::from(&solve),
    });
    if p.phi.is_involution() {
        let delta = two_step_delta(&p.gen, &p.dist, &p.phi, &p.pi0).map_err(CliError::from_lib)?;
        rep.push(Check::ge("two_step/delta_nonnegative", delta, 0.0, 1e-12));
        result["delta"] = json!(delta);
    }
    if p.gen.is_separable() || p.gen.is_quadratic() {
        let r = equivalence_residual(&p.gen, &p.dist, &p.phi, &p.set, &p.pi0, &p.solver)
            .map_err(CliError::from_lib)?;
        rep.push(Check::near("two_step/equivalence_residual", r, 0.0, 1e-7));
        result["equivalence_residual"] = json!(r);
    }
    improvement_checks(&mut rep, &p, &pi, &mut result)?;
    rep.tables.push(model_table("intermediate", &mid));
    rep.tables.push(model_table("solution", &pi));
    Ok((rep, result))
}

fn relaxed(cfg: &Config, ov: &Overrides, seed: u64) -> Result<(SuiteReport, Value), CliError> {
    let rc = cfg.relaxed.as_ref().ok_or_else(|| CliError::Config("at `relaxed`: required for this task".into()))?;
    if cfg.set != ConvexModelSet::default() {
        return Err(CliError::Config("at `set`: the relaxed task runs over row-stochastic models only".into()));
    }
    let p = Problem::from_config(cfg)?;
    let cap = ov.lambda_cap.or(if ov.penalty.is_some() { None } else { rc.lambda_cap });
    let penalty = ov.penalty.or(if ov.lambda_cap.is_some() { None } else { rc.penalty });
    let spec = &rc.divergence;
    let mut rep = SuiteReport::new("relaxed", seed);
    let (pi, solve, mult) = match (cap, penalty) {
        (Some(cap), None) => {
            let (pi, mult, solve) = relaxed_project(&p.gen, spec, cap, &p.dist, &p.phi, &p.pi0, &p.solver)
                .map_err(CliError::from_lib)?;
            (pi, solve, mult)
        }
        (None, Some(lam)) => {
            let (pi, solve) =
                penalized_project(&p.gen, spec, lam, &p.dist, &p.phi, &p.pi0, &p.solver).map_err(CliError::from_lib)?;
            (pi, solve, lam)
        }
        _ => {
            return Err(CliError::Config(
                "at `relaxed`: give exactly one of `lambda_cap` and `penalty` (or --lambda-cap / --penalty)".into(),
            ))
        }
    };
    let constraint = expected_soft_divergence(spec, &p.dist, &p.phi, &pi).map_err(CliError::from_lib)?;
    rep.push(Check::flag("relaxed/row_stochastic", pi.is_row_stochastic(1e-9)));
    if let Some(cap) = cap {
        rep.push(Check::le("relaxed/budget", constraint, cap, 1e-9));
        rep.push(Check::near("relaxed/complementary_slackness", mult * (constraint - cap), 0.0, 1e-7));
    }
    let mut result = json!({
        "solution": pi,
        "form": if cap.is_some() { "constrained" } else { "penalized" },
        "lambda_cap": cap,
        "multiplier": mult,
        "constraint_value": constraint,
        "objective": expected_divergence(&p.gen, &p.dist, &pi, &p.pi0).map_err(CliError::from_lib)?,
        "solver": SolveSummary::from(&solve),
    });
    if let Some(r) = checked_reference(&p)? {
        result["improvement"] = json!(improvement(&p.gen, &p.dist, r, &p.pi0, &pi).map_err(CliError::from_lib)?);
    }
    rep.tables.push(model_table("solution", &pi));
    Ok((rep, result))
}

fn empirical(cfg: &Config, ov: &Overrides, seed: u64) -> Result<(SuiteReport, Value), CliError> {
    let ec = cfg.empirical.as_ref().ok_or_else(|| CliError::Config("at `empirical`: required for this task".into()))?;
    if ec.m == 0 {
        return Err(CliError::Config("at `empirical.m`: sample size must be at least 1".into()));
    }
    let p = Problem::from_config(cfg)?;
    // Without a reference the population projection serves as π*.
    let reference = match checked_reference(&p)? {
        Some(r) => r.clone(),
        None => direct_projection(&p.gen, &p.dist, &p.phi, &p.set, &p.pi0, &p.solver).map_err(CliError::from_lib)?.0,
    };
    let sample = sample_prompts(&p.dist, ec.m, ec.sample_seed.unwrap_or(seed)).map_err(CliError::from_lib)?;
    let opts = BoundOptions {
        panel_size: ec.panel_size,
        seed,
        mu: ec.mu,
        lipschitz: ec.lipschitz,
        tol: ov.tol_override.unwrap_or(1e-8),
        solver: Some(p.solver),
    };
    let report = empirical_bound_report(&p.gen, &p.dist, &sample, &p.set, &p.phi, &p.pi0, &reference, &opts)
        .map_err(CliError::from_lib)?;
    let mut rep = SuiteReport::new("empirical", seed);
    for c in &report.checks {
        let detail = format!("{:?}: lhs {:.6e}, rhs {:.6e}", c.verdict, c.lhs, c.rhs);
        rep.push(Check::flag(format!("empirical/{}/not_violated", c.name), c.verdict != Verdict::Violated).with_detail(detail));
    }
    rep.tables.push(model_table("solution", &report.pi_hat_s));
    let result = json!({
        "reference_is_population_projection": p.reference.is_none(),
        "bounds": report,
    });
    Ok((rep, result))
}

fn verify(cfg: &Config, ov: &Overrides, seed: u64) -> Result<(SuiteReport, Value), CliError> {
    let vc = cfg.verify.clone().unwrap_or_default();
    let suite = ov
        .suite
        .clone()
        .or(vc.suite)
        .ok_or_else(|| CliError::Config("at `verify.suite`: no suite given (use --suite)".into()))?;
    let mut opts = SuiteOptions { seed, jobs: ov.jobs, instances: vc.instances, ..SuiteOptions::default() };
    if let Some(m) = vc.minimax_m {
        if m.is_empty() || m.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(CliError::Config("at `verify.minimax_m`: values must be finite and positive".into()));
        }
        opts.minimax_m = m;
    }
    if opts.instances == Some(0) {
        return Err(CliError::Config("at `verify.instances`: must be at least 1".into()));
    }
    let rep = run_suite_with(&suite, &opts).map_err(|e| CliError::Config(format!("suite: {e}")))?;
    let mut result = json!({
        "suite": suite,
        "checks": rep.checks.len(),
        "instances_override": opts.instances,
    });
    if let Some(t) = rep.tables.iter().find(|t| t.name == "minimax_sweep") {
        let col = |name: &str| t.columns.iter().position(|c| c == name).expect("minimax_sweep column");
        let (m, gap, viol) = (col("M"), col("gap"), col("violation"));
        let verdicts: Vec<Value> = t
            .rows
            .iter()
            .map(|r| {
                let verdict = if r[viol] == 1.0 { "violation reproduced" } else { "no violation" };
                json!({ "M": r[m], "gap": r[gap], "verdict": verdict })
            })
            .collect();
        result["minimax"] = Value::Array(verdicts);
    }
    Ok((rep, result))
}
