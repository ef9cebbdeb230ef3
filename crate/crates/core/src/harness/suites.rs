//! Suite bodies and the name-based dispatcher.
//!
//! Instances run in parallel on a rayon pool sized by `jobs`; each instance
//! draws from its own seeded stream and results are collected in instance
//! order, so a report depends only on the seed.

use rand::Rng;
use rayon::prelude::*;

use super::instances::{
    coherent_anchor, invariant_dist, random_conditional, random_dist, random_generator, random_involution, random_set,
    random_spd, rng_for, GenChoice, InstanceShape, ALL_LEGENDRE,
};
use super::rigidity::{asymmetric_instance, four_point_residual, kernel_circle_example, rigidity_affine_examples};
use super::rigidity::{single_f_characterization_check, toy_block_instance};
use super::witnesses::{
    kind_name, minimax_counterexample, orbit_average_universal_check, orbit_infeasibility_witness,
    reversed_jensen_witness,
};
use super::{Check, SuiteReport, Table};
use crate::bregman::{centroid, divergence, duality_residual, expected_divergence, three_point_residual};
use crate::coherence::{incoherence_gamma0, orbit_partition, BlockPartition, InvarianceMap};
use crate::empirical::{
    empirical_bound_report, empirical_objective, empirical_projection, feasible_panel, sample_prompts, BoundOptions,
    Verdict,
};
use crate::error::{Error, Result};
use crate::generators::{GeneratorSpec, NormTag};
use crate::model::{compensated_sum, Model, PromptDistribution};
use crate::projection::{
    direct_projection, hellinger_improvement_floor, improvement, pythagorean_residual, two_step_delta,
    two_step_projection, worst_case_improvement, worst_case_on, SolverOptions,
};
use crate::projection::{bregman_project, equivalence_residual};
use crate::relaxed::{
    expected_soft_divergence, penalized_project, relaxed_improvement_floor, relaxed_project, soft_divergence,
    SoftDivergenceKind, SoftDivergenceSpec,
};
use crate::sets::{ConvexModelSet, Reduced};

pub const SUITE_NAMES: [&str; 13] = [
    "bregman-identities",
    "direct-improvement",
    "two-step",
    "equivalence",
    "relaxed",
    "empirical",
    "minimax",
    "orbit-average",
    "impossibility",
    "characterization",
    "rigidity",
    "kernel",
    "all",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Worker threads; 0 means one per logical core.
    pub jobs: usize,
    /// Values of M for the minimax sweep.
    pub minimax_m: Vec<f64>,
    /// Overrides every random-instance count (smoke runs only).
    pub instances: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 0, jobs: 0, minimax_m: vec![2.0, 5.0, 6.0, 10.0, 100.0], instances: None }
    }
}

impl SuiteOptions {
    fn count(&self, default: usize) -> usize {
        self.instances.unwrap_or(default)
    }
}

pub fn run_suite(name: &str, seed: u64, jobs: usize) -> Result<SuiteReport> {
    run_suite_with(name, &SuiteOptions { seed, jobs, ..SuiteOptions::default() })
}

/// Runs a named suite on a dedicated pool. Unknown names are rejected
/// before any work starts.
pub fn run_suite_with(name: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    if !SUITE_NAMES.contains(&name) {
        return Err(Error::Invalid(format!("unknown suite '{name}'; expected one of {}", SUITE_NAMES.join(", "))));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(|| dispatch(name, opts)))
}

fn dispatch(name: &str, opts: &SuiteOptions) -> SuiteReport {
    let mut rep = match name {
        "bregman-identities" => bregman_identities(opts),
        "direct-improvement" => {
            let mut r = direct_improvement(opts);
            r.extend(pythagorean(opts));
            r
        }
        "two-step" => {
            let mut r = two_step(opts);
            r.extend(maximin(opts));
            r
        }
        "equivalence" => equivalence(opts),
        "relaxed" => relaxed(opts),
        "empirical" => {
            let mut r = empirical(opts);
            r.extend(empirical_consistency(opts));
            r
        }
        "minimax" => minimax(opts),
        "orbit-average" => orbit_average(opts),
        "impossibility" => impossibility(opts),
        "characterization" => characterization(opts),
        "rigidity" => rigidity(opts),
        "kernel" => kernel(opts),
        _ => {
            let mut all = SuiteReport::new("all", opts.seed);
            for s in SUITE_NAMES.iter().filter(|s| **s != "all") {
                all.extend(dispatch(s, opts));
            }
            all
        }
    };
    rep.suite = name.to_string();
    rep.seed = opts.seed;
    rep
}

/// Runs `f` over instance ids in parallel and flattens the checks in id
/// order; an instance error becomes a failed check named `name`.
fn per_instance<F>(count: usize, name: &str, f: F) -> Vec<Check>
where
    F: Fn(usize) -> Result<Vec<Check>> + Sync,
{
    let results: Vec<Result<Vec<Check>>> = (0..count).into_par_iter().map(&f).collect();
    let mut out = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(cs) => out.extend(cs.into_iter().map(|c| if c.instance.is_some() { c } else { c.at(i) })),
            Err(e) => out.push(Check::error(name, &e).at(i)),
        }
    }
    out
}

/// Collapses per-instance checks of the same name into their worst case,
/// keeping every failure individually so a report stays readable.
fn summarize(checks: Vec<Check>) -> Vec<Check> {
    let mut out: Vec<Check> = Vec::new();
    let mut worst: Vec<(Check, usize)> = Vec::new();
    for c in checks {
        if c.is_failure() {
            out.push(c);
            continue;
        }
        let margin = |c: &Check| match c.relation {
            super::Relation::Le => c.target + c.tolerance - c.value,
            super::Relation::Ge => c.value - c.target + c.tolerance,
            super::Relation::Near => c.tolerance - (c.value - c.target).abs(),
            super::Relation::Flag => 0.0,
        };
        match worst.iter_mut().find(|(w, _)| w.name == c.name) {
            Some((w, count)) => {
                *count += 1;
                if margin(&c) < margin(w) {
                    *w = c;
                }
            }
            None => worst.push((c, 1)),
        }
    }
    let mut kept: Vec<Check> = worst
        .into_iter()
        .map(|(c, count)| {
            let note = match &c.detail {
                Some(d) => format!("worst of {count}; {d}"),
                None => format!("worst of {count}"),
            };
            c.with_detail(note)
        })
        .collect();
    kept.extend(out);
    kept
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Reference models usable as first arguments of B_F: every row must lie
/// in the domain of F (Itakura–Saito excludes zero entries).
fn admissible(gen: &GeneratorSpec, models: Vec<Model>) -> Vec<Model> {
    models.into_iter().filter(|m| m.rows().all(|r| gen.value(r).is_ok_and(f64::is_finite))).collect()
}

fn box_point<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(0.05..1.0)).collect()
}

/// (μ/2)·Σ_x P(x) λ_x(1−λ_x)‖π0(x) − π0(Φx)‖², λ_x = P(x)/(P(x)+P(Φx)).
fn strong_convexity_floor(mu: f64, norm: NormTag, dist: &PromptDistribution, phi: &InvarianceMap, pi0: &Model) -> f64 {
    let w = dist.weights();
    let terms = (0..pi0.n()).map(|x| {
        let y = phi.apply(x);
        let lam = w[x] / (w[x] + w[y]);
        w[x] * lam * (1.0 - lam) * norm.sq_dist(pi0.row(x), pi0.row(y))
    });
    0.5 * mu * compensated_sum(terms)
}

// ---------------------------------------------------------------------------
// identities

const IDENTITY_POINTS: usize = 1000;

fn identity_generators(seed: u64) -> Result<Vec<(String, GeneratorSpec, Option<usize>)>> {
    let mut rng = rng_for(seed, 0x01, u64::MAX);
    let maha = GeneratorSpec::mahalanobis(&random_spd(&mut rng, 3))?;
    let diag: Vec<f64> = (0..4).map(|_| rng.gen_range(0.5..4.0)).collect();
    let coupled = GeneratorSpec::quadratic_coupled(
        &[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]],
        None,
    )?;
    Ok(vec![
        ("squared_euclidean".into(), GeneratorSpec::squared_euclidean(), None),
        ("negative_entropy".into(), GeneratorSpec::negative_entropy(), None),
        ("negative_log".into(), GeneratorSpec::negative_log(), None),
        ("mahalanobis".into(), maha, Some(3)),
        ("diagonal_quadratic".into(), GeneratorSpec::diagonal_quadratic(&diag)?, Some(4)),
        ("quadratic_coupled".into(), coupled, Some(3)),
    ])
}

/// Per-point errors of every identity, as (identity, error, tolerance).
fn identity_errors(gen: &GeneratorSpec, dim: Option<usize>, seed: u64, id: u64) -> Result<Vec<(&'static str, f64, f64)>> {
    let mut rng = rng_for(seed, 0x02, id);
    let d = dim.unwrap_or_else(|| rng.gen_range(2..=5));
    let p = box_point(&mut rng, d);
    let q = box_point(&mut rng, d);
    let r = box_point(&mut rng, d);
    let t: f64 = rng.gen_range(0.05..0.95);
    let mut out = Vec::new();

    let g = gen.gradient(&p)?;
    let h = 1e-6;
    let mut fd_err: f64 = 0.0;
    for k in 0..d {
        let mut a = p.clone();
        let mut b = p.clone();
        a[k] += h;
        b[k] -= h;
        let fd = (gen.value(&a)? - gen.value(&b)?) / (2.0 * h);
        fd_err = fd_err.max((fd - g[k]).abs() / g[k].abs().max(1.0));
    }
    out.push(("gradient_fd", fd_err, 1e-5));

    let mix: Vec<f64> = p.iter().zip(&q).map(|(a, b)| t * a + (1.0 - t) * b).collect();
    let conv = gen.value(&mix)? - t * gen.value(&p)? - (1.0 - t) * gen.value(&q)?;
    out.push(("convexity", conv, 1e-12));
    let first_arg = divergence(gen, &mix, &r)? - t * divergence(gen, &p, &r)? - (1.0 - t) * divergence(gen, &q, &r)?;
    out.push(("convexity_first_argument", first_arg, 1e-12));
    out.push(("nonnegativity", -divergence(gen, &p, &q)?, 1e-12));
    out.push(("identity_of_indiscernibles", divergence(gen, &p, &p)?.abs(), 1e-12));
    out.push(("three_point", three_point_residual(gen, &p, &r, &q)?.abs(), 1e-10));

    // Σλ_k B(p_k‖q) − B(Σλ_k p_k‖q) does not depend on q
    let lam = [0.2, 0.3, 0.5];
    let pts = [&p, &q, &r];
    let bar: Vec<f64> = (0..d).map(|k| compensated_sum(pts.iter().zip(lam).map(|(v, l)| l * v[k]))).collect();
    let gap_at = |s: &[f64]| -> Result<f64> {
        let mut terms = Vec::new();
        for (v, l) in pts.iter().zip(lam) {
            terms.push(l * divergence(gen, v, s)?);
        }
        terms.push(-divergence(gen, &bar, s)?);
        Ok(compensated_sum(terms))
    };
    let s1 = box_point(&mut rng, d);
    let s2 = box_point(&mut rng, d);
    out.push(("weighted_combination_q_independence", (gap_at(&s1)? - gap_at(&s2)?).abs(), 1e-10));

    if gen.is_legendre() {
        let back = gen.dual_map_inverse(&g)?;
        out.push(("bijection", max_abs(&back, &p), 1e-10));
        let dot = compensated_sum(p.iter().zip(&g).map(|(a, b)| a * b));
        let fy = compensated_sum([gen.value(&p)?, gen.conjugate_value(&g)?, -dot]);
        out.push(("fenchel_young", fy.abs(), 1e-10));
        out.push(("duality", duality_residual(gen, &p, &q)?, 1e-10));
    }
    Ok(out)
}

/// Gradient, bijection, Fenchel–Young, duality, three-point, convexity and
/// linearity identities on 1000 random points per generator.
pub fn bregman_identities(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = SuiteReport::new("bregman-identities", opts.seed);
    let gens = match identity_generators(opts.seed) {
        Ok(g) => g,
        Err(e) => {
            rep.push(Check::error("identities/setup", &e));
            return rep;
        }
    };
    let points = opts.count(IDENTITY_POINTS);
    for (gi, (name, gen, dim)) in gens.iter().enumerate() {
        let results: Vec<Result<Vec<(&str, f64, f64)>>> = (0..points)
            .into_par_iter()
            .map(|i| identity_errors(gen, *dim, opts.seed, (gi * 1_000_000 + i) as u64))
            .collect();
        let mut worst: Vec<(&str, f64, f64, usize)> = Vec::new();
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok(errs) => {
                    for (id, e, tol) in errs {
                        match worst.iter_mut().find(|w| w.0 == id) {
                            Some(w) if !(e <= w.1) => *w = (id, e, tol, i),
                            Some(_) => {}
                            None => worst.push((id, e, tol, i)),
                        }
                    }
                }
                Err(e) => rep.push(Check::error(format!("identities/{name}/evaluation"), &e).at(i)),
            }
        }
        for (id, e, tol, i) in worst {
            rep.push(Check::le(format!("identities/{name}/{id}"), e, 0.0, tol).at(i));
        }
    }
    rep.record("identities/linearity_in_generator", || linearity_checks(opts));
    rep.record("identities/centroid_jensen_gap", || {
        let kl = GeneratorSpec::negative_entropy();
        let c = centroid(&kl, &[0.5, 0.5], &[&[0.1], &[0.8]])?[0];
        Ok(vec![
            Check::near("identities/centroid/negative_entropy_geometric_mean", c, 0.08f64.sqrt(), 1e-12),
            Check::le("identities/centroid/geometric_below_arithmetic", c, 0.45, 0.0),
        ])
    });
    rep
}

/// B_{αA+βB} = αB_A + βB_B for quadratic generators.
fn linearity_checks(opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    for i in 0..opts.count(IDENTITY_POINTS) as u64 {
        let mut rng = rng_for(opts.seed, 0x03, i);
        let d = rng.gen_range(2..=5);
        let a = random_spd(&mut rng, d);
        let b = random_spd(&mut rng, d);
        let (al, be): (f64, f64) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        let sum: Vec<Vec<f64>> =
            (0..d).map(|r| (0..d).map(|c| al * a[r][c] + be * b[r][c]).collect()).collect();
        let (ga, gb, gs) =
            (GeneratorSpec::mahalanobis(&a)?, GeneratorSpec::mahalanobis(&b)?, GeneratorSpec::mahalanobis(&sum)?);
        let p = box_point(&mut rng, d);
        let q = box_point(&mut rng, d);
        let lhs = divergence(&gs, &p, &q)?;
        let rhs = al * divergence(&ga, &p, &q)? + be * divergence(&gb, &p, &q)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(vec![Check::le("identities/linearity_in_generator", worst, 0.0, 1e-12)])
}

// ---------------------------------------------------------------------------
// direct projection

fn direct_shape() -> InstanceShape {
    InstanceShape {
        n: (2, 8),
        d: (2, 5),
        caps: true,
        affine: true,
        p_cycle: 0.3,
        invariant_dist: false,
        kinds: ALL_LEGENDRE.to_vec(),
    }
}

fn direct_instance(seed: u64, id: usize) -> Result<Vec<Check>> {
    let inst = direct_shape().generate(seed, 0x10, id)?;
    let opts = SolverOptions::default();
    let (pi_hat, _) = direct_projection(&inst.gen, &inst.dist, &inst.phi, &inst.set_pi, &inst.pi0, &opts)?;
    let d_hat = expected_divergence(&inst.gen, &inst.dist, &pi_hat, &inst.pi0)?;
    // exact worst case over Π ∩ C_coh, cross-checked on a sampled panel
    let worst = worst_case_improvement(&inst.gen, &inst.dist, &inst.phi, &inst.set_pi, &inst.pi0, &pi_hat)?;
    let mut panel =
        admissible(&inst.gen, feasible_panel(&inst.set_pi, &inst.phi, inst.pi0.n(), inst.pi0.d(), 4, seed ^ id as u64)?);
    panel.push(inst.anchor.clone());
    let mut panel_min = f64::INFINITY;
    for star in &panel {
        panel_min = panel_min.min(improvement(&inst.gen, &inst.dist, star, &inst.pi0, &pi_hat)?);
    }
    let kind = kind_name(&inst.gen);
    let mut out = vec![
        Check::ge("direct_improvement/improvement", worst - d_hat, 0.0, 1e-8).with_detail(kind.clone()),
        Check::ge("direct_improvement/panel_improvement", panel_min - d_hat, 0.0, 1e-8),
        Check::le("direct_improvement/lp_below_panel", worst - panel_min, 0.0, 1e-9),
    ];
    if inst.phi.is_involution() {
        if let Some(mu) = inst.gen.mu() {
            let floor = strong_convexity_floor(mu, inst.gen.norm_tag(), &inst.dist, &inst.phi, &inst.pi0);
            out.push(Check::ge("direct_improvement/strong_convexity_floor", worst - floor, 0.0, 1e-8).with_detail(kind));
        }
    }
    Ok(out)
}

/// Non-realizable reference: π* is an arbitrary table and π̄ its projection
/// onto Π ∩ C_coh; for a symmetric quadratic generator the projection in
/// either argument coincides.
fn non_realizable_instance(seed: u64, id: usize) -> Result<Vec<Check>> {
    let shape = InstanceShape { kinds: vec![GenChoice::Mahalanobis], p_cycle: 0.0, ..direct_shape() };
    let inst = shape.generate(seed, 0x11, id)?;
    let mut rng = rng_for(seed, 0x12, id as u64);
    let star = random_conditional(&mut rng, inst.pi0.n(), inst.pi0.d(), 0.0);
    let opts = SolverOptions::default();
    let (gen, dist) = (&inst.gen, &inst.dist);
    let (pi_hat, _) = direct_projection(gen, dist, &inst.phi, &inst.set_pi, &inst.pi0, &opts)?;
    let coherent = inst.set_pi.merged_with(&orbit_partition(&inst.phi))?;
    let (bar, _) = bregman_project(gen, dist, &coherent, &star, &opts)?;
    let eps = expected_divergence(gen, dist, &star, &bar)?;
    let d = expected_divergence(gen, dist, &pi_hat, &inst.pi0)?;
    let imp = improvement(gen, dist, &star, &inst.pi0, &pi_hat)?;
    let (mu, l) = match (gen.mu(), gen.smoothness()) {
        (Some(mu), Some(l)) => (mu, l),
        _ => return Err(Error::MissingConstant("Mahalanobis μ and L".into())),
    };
    // E⟨π* − π̄, ∇F(π0) − ∇F(π̂)⟩
    let w = dist.weights();
    let mut cross = Vec::new();
    for x in 0..star.n() {
        let g0 = gen.gradient(inst.pi0.row(x))?;
        let gh = gen.gradient(pi_hat.row(x))?;
        for k in 0..star.d() {
            cross.push(w[x] * (star.get(x, k) - bar.get(x, k)) * (g0[k] - gh[k]));
        }
    }
    let cross = compensated_sum(cross);
    Ok(vec![
        Check::ge("non_realizable/exact_form", imp - (d - cross), 0.0, 1e-8),
        Check::ge("non_realizable/explicit_form", imp - (d - 2.0 * l / mu * (eps * d).sqrt()), 0.0, 1e-6),
    ])
}

/// Improvement of the direct projection over every coherent reference,
/// its strong-convexity floor, and the non-realizable bound.
pub fn direct_improvement(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = SuiteReport::new("direct-improvement", opts.seed);
    let checks = per_instance(opts.count(200), "direct_improvement/instance", |i| direct_instance(opts.seed, i));
    rep.checks.extend(summarize(checks));
    let checks = per_instance(opts.count(50), "non_realizable/instance", |i| non_realizable_instance(opts.seed, i));
    rep.checks.extend(summarize(checks));
    rep
}

fn random_blocks<R: Rng>(rng: &mut R, n: usize) -> Result<BlockPartition> {
    let k = rng.gen_range(1..=n.max(2) - 1);
    let labels: Vec<usize> = (0..n).map(|x| if x < k { x } else { rng.gen_range(0..k) }).collect();
    Ok(BlockPartition::canonical(labels))
}

fn pythagorean_affine_instance(seed: u64, id: usize) -> Result<Vec<Check>> {
    let mut rng = rng_for(seed, 0x20, id as u64);
    let n = rng.gen_range(2..=8);
    let d = rng.gen_range(2..=4);
    let gen = random_generator(&mut rng, d, &ALL_LEGENDRE)?;
    let dist = random_dist(&mut rng, n);
    let set = ConvexModelSet::simplex().with_blocks(random_blocks(&mut rng, n)?);
    let pi0 = random_conditional(&mut rng, n, d, 0.02);
    let (proj, _) = bregman_project(&gen, &dist, &set, &pi0, &SolverOptions::default())?;
    // block centroids of interior rows stay interior, so the set is
    // effectively affine at the optimum
    let panel = admissible(&gen, feasible_panel(&set, &InvarianceMap::identity(n), n, d, 3, rng.gen())?);
    let mut worst: f64 = 0.0;
    for r in &panel {
        worst = worst.max(pythagorean_residual(&gen, &dist, r, &proj, &pi0)?.abs());
    }
    Ok(vec![Check::le("pythagorean/affine_equality", worst, 0.0, 1e-9).with_detail(kind_name(&gen))])
}

fn pythagorean_capped_instance(seed: u64, id: usize) -> Result<Vec<Check>> {
    let shape = InstanceShape { caps: true, affine: false, ..direct_shape() };
    let inst = shape.generate(seed, 0x21, id)?;
    let (proj, _) = direct_projection(&inst.gen, &inst.dist, &inst.phi, &inst.set_pi, &inst.pi0, &SolverOptions::default())?;
    let mut panel =
        admissible(&inst.gen, feasible_panel(&inst.set_pi, &inst.phi, inst.pi0.n(), inst.pi0.d(), 3, seed ^ id as u64)?);
    panel.push(inst.anchor.clone());
    let mut least = f64::INFINITY;
    for r in &panel {
        least = least.min(pythagorean_residual(&inst.gen, &inst.dist, r, &proj, &inst.pi0)?);
    }
    Ok(vec![Check::ge("pythagorean/convex_inequality", least, 0.0, 1e-9).with_detail(kind_name(&inst.gen))])
}

/// Pythagorean equality on blocks-only sets and inequality on capped sets.
pub fn pythagorean(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = SuiteReport::new("pythagorean", opts.seed);
    let a = per_instance(opts.count(50), "pythagorean/instance", |i| pythagorean_affine_instance(opts.seed, i));
    let b = per_instance(opts.count(50), "pythagorean/instance", |i| pythagorean_capped_instance(opts.seed, i));
    rep.checks.extend(summarize(a));
    rep.checks.extend(summarize(b));
    rep
}

// ---------------------------------------------------------------------------
// equivalence and two-step

fn equivalence_instance(seed: u64, id: usize) -> Result<Vec<Check>> {
    let inst = direct_shape().generate(seed, 0x30, id)?;
    let r = equivalence_residual(&inst.gen, &inst.dist, &inst.phi, &inst.set_pi, &inst.pi0, &SolverOptions::default())?;
    Ok(vec![Check::le("equivalence/direct_vs_two_step", r, 0.0, 1e-7).with_detail(kind_name(&inst.gen))])
}

/// Direct projection equals the two-step orbit-centroid projection for
/// separable and quadratic generators.
pub fn equivalence(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = SuiteReport::new("equivalence", opts.seed);
    let checks = per_instance(opts.count(100), "equivalence/instance", |i| equivalence_instance(opts.seed, i));
    rep.checks.extend(summarize(checks));
    rep
}

fn two_step_instance(seed: u64, id: usize) -> Result<Vec<Check>> {
    let shape = InstanceShape { p_cycle: 0.0, kinds: vec![GenChoice::NegativeEntropy], ..direct_shape() };
    let inst = shape.generate(seed, 0x40, id)?;
    let (gen, dist, phi) = (&inst.gen, &inst.dist, &inst.phi);
    let opts = SolverOptions::default();
    let delta = two_step_delta(gen, dist, phi, &inst.pi0)?;
    let (out, _, bar) = two_step_projection(gen, dist, phi, &inst.set_pi, &inst.pi0, &opts)?;
    let (direct, _) = direct_projection(gen, dist, phi, &inst.set_pi, &inst.pi0, &opts)?;
    let b_out_bar = expected_divergence(gen, dist, &out, &bar)?;
    let b_bar_0 = expected_divergence(gen, dist, &bar, &inst.pi0)?;
    let worst = worst_case_improvement(gen, dist, phi, &inst.set_pi, &inst.pi0, &out)?;
    let hell = hellinger_improvement_floor(dist, phi, &inst.pi0)?;
    let b_direct = expected_divergence(gen, dist, &direct, &inst.pi0)?;
    Ok(vec![
        Check::ge("two_step/delta_nonnegative", delta, 0.0, 1e-12),
        Check::ge("two_step/bound", worst - (b_out_bar + b_bar_0), 0.0, 1e-8),
        Check::ge("two_step/delta_form", worst - (b_out_bar + delta), 0.0, 1e-8),
        Check::near("two_step/centroid_divergence_is_delta", b_bar_0 - delta, 0.0, 1e-10),
        Check::ge("two_step/hellinger_floor", worst - hell, 0.0, 1e-8),
        Check::ge("two_step/direct_dominates", b_direct - (b_out_bar + b_bar_0), 0.0, 1e-8),
    ])
}

/// Two-step bound, its δ-form, the Hellinger floor and the ordering against
/// the direct guarantee on negative-entropy instances.
pub fn two_step(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = SuiteReport::new("two-step", opts.seed);
    let checks = per_instance(opts.count(100), "two_step/instance", |i| two_step_instance(opts.seed, i));
    rep.checks.extend(summarize(checks));
    rep
}

/// min over π* of Improv restricted to a single orbit, renormalized to the
/// orbit's own distribution.
fn orbit_subproblem(
    orbit: &[usize],
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    set: &ConvexModelSet,
    pi0: &Model,
) -> Result<(f64, PromptDistribution, Reduced, Model)> {
    let w: Vec<f64> = orbit.iter().map(|&x| dist.weights()[x]).collect();
    let total = compensated_sum(w.iter().copied());
    let sub_dist = PromptDistribution::from_masses(&w)?;
    let mut sub_set = ConvexModelSet::simplex().with_blocks(BlockPartition::new(vec![(0..orbit.len()).collect()])?);
    for &(x, k, u) in &set.caps {
        if let Some(i) = orbit.iter().position(|&y| y == x) {
            sub_set = sub_set.with_cap(i, k, u);
        }
    }
    let rows: Vec<Vec<f64>> = orbit.iter().map(|&x| pi0.row(x).to_vec()).collect();
    let sub_pi0 = Model::from_rows(&rows)?;
    let red = Reduced::build(&sub_set, orbit.len(), pi0.d(), &|_, _| None)?;
    let _ = gen;
    Ok((total, sub_dist, red, sub_pi0))
}

fn maximin_instance(seed: u64, id: usize, step: f64) -> Result<(Vec<Check>, Vec<f64>)> {
    let mut rng = rng_for(seed, 0x50, id as u64);
    let n = rng.gen_range(2..=4);
    let d = 2;
    let phi = random_involution(&mut rng, n);
    let dist = random_dist(&mut rng, n);
    let anchor = coherent_anchor(&mut rng, &phi, d);
    let set = random_set(&mut rng, &anchor, true, false);
    let pi0 = random_conditional(&mut rng, n, d, 0.02);
    let gen = random_generator(&mut rng, d, &[GenChoice::SquaredEuclidean, GenChoice::NegativeEntropy])?;
    let (out, _, _) = two_step_projection(&gen, &dist, &phi, &set, &pi0, &SolverOptions::default())?;
    let own = worst_case_improvement(&gen, &dist, &phi, &set, &pi0, &out)?;
    // caps only: Π ∩ C_coh is a product over orbits, so the inner minimum
    // and the grid maximum both split orbitwise
    let steps = (1.0 / step).round() as usize;
    let mut best_total = Vec::new();
    let mut own_split = Vec::new();
    for orbit in orbit_partition(&phi).blocks() {
        let (total, sub_dist, red, sub_pi0) = orbit_subproblem(orbit, &gen, &dist, &set, &pi0)?;
        let rows: Vec<Vec<f64>> = orbit.iter().map(|&x| out.row(x).to_vec()).collect();
        own_split.push(total * worst_case_on(&gen, &sub_dist, &red, &sub_pi0, &Model::from_rows(&rows)?)?);
        let cap = set
            .caps
            .iter()
            .filter(|(x, _, _)| orbit.contains(x))
            .fold((1.0f64, 1.0f64), |c, &(_, k, u)| if k == 0 { (c.0.min(u), c.1) } else { (c.0, c.1.min(u)) });
        let mut best = f64::NEG_INFINITY;
        for s in 0..=steps {
            let q = s as f64 * step;
            if q > cap.0 + 1e-12 || 1.0 - q > cap.1 + 1e-12 {
                continue;
            }
            let cand = Model::from_rows(&vec![vec![q, 1.0 - q]; orbit.len()])?;
            best = best.max(worst_case_on(&gen, &sub_dist, &red, &sub_pi0, &cand)?);
        }
        best_total.push(total * best);
    }
    let best = compensated_sum(best_total);
    let split = compensated_sum(own_split);
    let checks = vec![
        Check::ge("maximin/own_vs_grid_best", own - best, 0.0, 1e-5).with_detail(kind_name(&gen)),
        Check::near("maximin/orbit_split_consistency", own - split, 0.0, 1e-9),
    ];
    Ok((checks, vec![id as f64, n as f64, own, best, own - best]))
}

/// The two-step output's inner minimum against the best candidate on a
/// grid of coherent models (step 0.005 per orbit, d = 2, caps only).
pub fn maximin(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = SuiteReport::new("maximin", opts.seed);
    let results: Vec<Result<(Vec<Check>, Vec<f64>)>> =
        (0..opts.count(20)).into_par_iter().map(|i| maximin_instance(opts.seed, i, 0.005)).collect();
    let mut table = Table {
        name: "maximin".into(),
        columns: ["instance", "n", "two_step_inner", "grid_best_inner", "difference"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    let mut checks = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((cs, row)) => {
                checks.extend(cs.into_iter().map(|c| c.at(i)));
                table.rows.push(row);
            }
            Err(e) => checks.push(Check::error("maximin/instance", &e).at(i)),
        }
    }
    rep.checks.extend(summarize(checks));
    rep.tables.push(table);
    rep
}

// ---------------------------------------------------------------------------
// relaxed

const RELAXED_PAIRS: [(GenChoice, SoftDivergenceKind); 4] = [
    (GenChoice::SquaredEuclidean, SoftDivergenceKind::SquaredEuclidean),
    (GenChoice::NegativeEntropy, SoftDivergenceKind::KlSymmetrized),
    (GenChoice::NegativeEntropy, SoftDivergenceKind::JensenShannon),
    (GenChoice::NegativeEntropy, SoftDivergenceKind::SquaredHellinger),
];

struct RelaxedInstance {
    gen: GeneratorSpec,
    spec: SoftDivergenceSpec,
    dist: PromptDistribution,
    phi: InvarianceMap,
    pi0: Model,
    c0: f64,
}

fn relaxed_instance_data(seed: u64, id: usize) -> Result<(RelaxedInstance, rand_chacha::ChaCha8Rng)> {
    let mut rng = rng_for(seed, 0x60, id as u64);
    let n = rng.gen_range(2..=6);
    let d = rng.gen_range(2..=4);
    let phi = random_involution(&mut rng, n);
    let dist = invariant_dist(&mut rng, &phi);
    let pi0 = random_conditional(&mut rng, n, d, 0.02);
    let (choice, kind) = RELAXED_PAIRS[rng.gen_range(0..RELAXED_PAIRS.len())];
    let gen = random_generator(&mut rng, d, &[choice])?;
    let spec = SoftDivergenceSpec::new(kind);
    let c0 = expected_soft_divergence(&spec, &dist, &phi, &pi0)?;
    Ok((RelaxedInstance { gen, spec, dist, phi, pi0, c0 }, rng))
}

fn relaxed_instance(seed: u64, id: usize) -> Result<Vec<Check>> {
    let (inst, mut rng) = relaxed_instance_data(seed, id)?;
    let (gen, dist, phi) = (&inst.gen, &inst.dist, &inst.phi);
    let cap = rng.gen_range(0.05..0.8) * inst.c0;
    let (pi_hat, mult, report) = relaxed_project(gen, &inst.spec, cap, dist, phi, &inst.pi0, &SolverOptions::default())?;
    let mu_f = gen.mu().ok_or_else(|| Error::MissingConstant("μ_F".into()))?;
    // P(x) = P(Φx): both bounds on Δ_coh coincide at γ0/4
    let delta_coh = incoherence_gamma0(dist, &inst.pi0, phi, inst.spec.norm_tag)? / 4.0;
    let floor = relaxed_improvement_floor(mu_f, inst.spec.mu_d, cap, delta_coh);
    let simplex = ConvexModelSet::simplex();
    let mut worst = worst_case_improvement(gen, dist, phi, &simplex, &inst.pi0, &pi_hat)?;
    for star in feasible_panel(&simplex, phi, inst.pi0.n(), inst.pi0.d(), 3, rng.gen())? {
        worst = worst.min(improvement(gen, dist, &star, &inst.pi0, &pi_hat)?);
    }
    let used = expected_soft_divergence(&inst.spec, dist, phi, &pi_hat)?;
    let label = format!("{:?}", inst.spec.kind);
    Ok(vec![
        Check::ge("relaxed/improvement_floor", worst - floor, 0.0, 1e-6).with_detail(label),
        Check::le("relaxed/budget", used - cap, 0.0, 1e-9),
        Check::le("relaxed/complementary_slackness", report.kkt_residual, 0.0, 1e-7),
        Check::ge("relaxed/multiplier_nonnegative", mult, 0.0, 0.0),
    ])
}

fn relaxed_monotonicity(seed: u64, id: usize) -> Result<Vec<Check>> {
    let (inst, _) = relaxed_instance_data(seed, id)?;
    let (gen, dist, phi) = (&inst.gen, &inst.dist, &inst.phi);
    let opts = SolverOptions::default();
    let mut objectives = Vec::new();
    for frac in [0.8, 0.4, 0.1] {
        let (_, _, rep) = relaxed_project(gen, &inst.spec, frac * inst.c0, dist, phi, &inst.pi0, &opts)?;
        objectives.push(rep.objective);
    }
    let mut used = Vec::new();
    for pen in [0.5, 1.0, 2.0, 4.0] {
        let (pi, _) = penalized_project(gen, &inst.spec, pen, dist, phi, &inst.pi0, &opts)?;
        used.push(expected_soft_divergence(&inst.spec, dist, phi, &pi)?);
    }
    let obj_drop = objectives.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
    let used_rise = used.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        Check::le("relaxed/objective_monotone_in_budget", obj_drop, 0.0, 1e-10),
        Check::le("relaxed/constraint_monotone_in_multiplier", used_rise, 0.0, 1e-10),
    ])
}

fn joint_convexity_checks(seed: u64) -> Result<Vec<Check>> {
    let kinds = [
        SoftDivergenceKind::KlSymmetrized,
        SoftDivergenceKind::JensenShannon,
        SoftDivergenceKind::SquaredHellinger,
        SoftDivergenceKind::SquaredEuclidean,
        SoftDivergenceKind::TotalVariationSquaredSurrogate,
    ];
    let mut out = Vec::new();
    for (ki, kind) in kinds.into_iter().enumerate() {
        let spec = SoftDivergenceSpec::new(kind);
        let mut worst = f64::NEG_INFINITY;
        for i in 0..1000u64 {
            let mut rng = rng_for(seed, 0x61 + ki as u64, i);
            let d = rng.gen_range(2..=4);
            let rows = random_conditional(&mut rng, 4, d, 0.01);
            let t: f64 = rng.gen_range(0.05..0.95);
            let mix = |a: usize, b: usize| -> Vec<f64> {
                rows.row(a).iter().zip(rows.row(b)).map(|(x, y)| t * x + (1.0 - t) * y).collect()
            };
            let lhs = soft_divergence(&spec, &mix(0, 2), &mix(1, 3))?;
            let rhs = t * soft_divergence(&spec, rows.row(0), rows.row(1))?
                + (1.0 - t) * soft_divergence(&spec, rows.row(2), rows.row(3))?;
            worst = worst.max(lhs - rhs);
        }
        out.push(Check::le(format!("relaxed/joint_convexity/{kind:?}"), worst, 0.0, 1e-12));
    }
    Ok(out)
}

/// Relaxed-coherence floor on Φ-invariant distributions, complementary
/// slackness, monotonicity and joint convexity of every soft divergence.
pub fn relaxed(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = SuiteReport::new("relaxed", opts.seed);
    let checks = per_instance(opts.count(100), "relaxed/instance", |i| relaxed_instance(opts.seed, i));
    rep.checks.extend(summarize(checks));
    let checks = per_instance(opts.count(20), "relaxed/monotonicity", |i| relaxed_monotonicity(opts.seed, i));
    rep.checks.extend(summarize(checks));
    rep.record("relaxed/joint_convexity", || joint_convexity_checks(opts.seed));
    rep
}

// ---------------------------------------------------------------------------
// empirical

fn empirical_instance(seed: u64, id: usize) -> Result<Vec<Check>> {
    let shape = InstanceShape {
        n: (2, 4),
        d: (2, 3),
        p_cycle: 0.0,
        kinds: vec![GenChoice::SquaredEuclidean, GenChoice::NegativeEntropy],
        ..direct_shape()
    };
    let inst = shape.generate(seed, 0x70, id)?;
    let mut rng = rng_for(seed, 0x71, id as u64);
    let m = rng.gen_range(5..=40);
    let sample = sample_prompts(&inst.dist, m, rng.gen())?;
    let bopts = BoundOptions { seed: rng.gen(), ..BoundOptions::default() };
    let rep = empirical_bound_report(
        &inst.gen,
        &inst.dist,
        &sample,
        &inst.set_pi,
        &inst.phi,
        &inst.pi0,
        &inst.anchor,
        &bopts,
    )?;
    let mut out = Vec::new();
    for c in &rep.checks {
        if c.name == "two_sided_left" {
            out.push(Check::le("empirical/population_optimality", c.lhs - c.rhs_base, 0.0, 1e-9));
        }
        out.push(Check::flag(format!("empirical/{}/not_violated", c.name), c.verdict != Verdict::Violated));
    }
    let own = empirical_objective(&inst.gen, &sample, &rep.pi_hat_s, &inst.pi0)?;
    let mut panel = feasible_panel(&inst.set_pi, &inst.phi, inst.pi0.n(), inst.pi0.d(), 6, rng.gen())?;
    panel.push(rep.pi_hat.clone());
    panel.push(inst.anchor.clone());
    let mut slack = f64::NEG_INFINITY;
    for p in &panel {
        slack = slack.max(own - empirical_objective(&inst.gen, &sample, p, &inst.pi0)?);
    }
    out.push(Check::le("empirical/empirical_optimality", slack, 0.0, 1e-9));
    Ok(out)
}

/// Finite-sample inequalities over 50 seeds: population and empirical
/// optimality hold exactly and no inequality is certified violated.
pub fn empirical(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = SuiteReport::new("empirical", opts.seed);
    let checks = per_instance(opts.count(50), "empirical/instance", |i| empirical_instance(opts.seed, i));
    rep.checks.extend(summarize(checks));
    rep
}

/// Fixed reference instance for the consistency check: four prompts in two
/// swapped pairs, three outcomes, one cap.
pub(crate) fn consistency_reference() -> Result<(GeneratorSpec, PromptDistribution, InvarianceMap, ConvexModelSet, Model)> {
    let dist = PromptDistribution::from_masses(&[0.1, 0.2, 0.3, 0.4])?;
    let phi = InvarianceMap::swaps(4, &[(0, 1), (2, 3)])?;
    let set = ConvexModelSet::simplex().with_cap(2, 0, 0.4);
    let pi0 = Model::conditional(&[
        vec![0.5, 0.3, 0.2],
        vec![0.2, 0.3, 0.5],
        vec![0.6, 0.2, 0.2],
        vec![0.4, 0.4, 0.2],
    ])?;
    Ok((GeneratorSpec::negative_entropy(), dist, phi, set, pi0))
}

/// Median over 20 seeds of ‖π̂_S − π̂‖_∞ at m = 10⁵ on the reference instance.
pub fn empirical_consistency(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = SuiteReport::new("empirical", opts.seed);
    rep.record("empirical/consistency", || {
        let (gen, dist, phi, set, pi0) = consistency_reference()?;
        let sopts = SolverOptions::default();
        let (pi_hat, _) = direct_projection(&gen, &dist, &phi, &set, &pi0, &sopts)?;
        let seeds = opts.count(20);
        let errs: Vec<Result<f64>> = (0..seeds)
            .into_par_iter()
            .map(|i| {
                let s = super::instances::derive_seed(opts.seed, 0x72, i as u64);
                let sample = sample_prompts(&dist, 100_000, s)?;
                let (pi_s, _) = empirical_projection(&gen, &dist, &sample, &phi, &set, &pi0, &sopts)?;
                Ok(pi_s.max_abs_diff(&pi_hat))
            })
            .collect();
        let mut errs: Vec<f64> = errs.into_iter().collect::<Result<_>>()?;
        errs.sort_by(f64::total_cmp);
        let median = if errs.len() % 2 == 1 {
            errs[errs.len() / 2]
        } else {
            0.5 * (errs[errs.len() / 2 - 1] + errs[errs.len() / 2])
        };
        Ok(vec![Check::le("empirical/consistency_median_sup_error", median, 0.02, 0.0)])
    });
    rep
}

// ---------------------------------------------------------------------------
// witnesses

/// Minimax counterexample over the configured sweep of M, with a table of
/// solved gaps against (M−5)/8.
pub fn minimax(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = SuiteReport::new("minimax", opts.seed);
    let mut table = Table {
        name: "minimax_sweep".into(),
        columns: ["M", "gap", "formula_gap", "violation", "minimax_value", "pythagorean_deficit"]
            .map(String::from)
            .to_vec(),
        rows: Vec::new(),
    };
    for &m in &opts.minimax_m {
        match minimax_counterexample(m) {
            Ok(w) => {
                for c in w.checks {
                    rep.push(c.with_detail(format!("M = {m}")));
                }
                rep.push(Check::flag(format!("minimax/verdict/M={m}"), w.violation == (m > 5.0)));
                let v = |k: &str| w.values.get(k).and_then(|v| v.first().copied()).unwrap_or(f64::NAN);
                table.rows.push(vec![
                    m,
                    v("gap"),
                    (m - 5.0) / 8.0,
                    if w.violation { 1.0 } else { 0.0 },
                    v("minimax_value"),
                    v("pythagorean_deficit"),
                ]);
                rep.notes.push(format!("M = {m}: {}", w.note));
            }
            Err(e) => rep.push(Check::error(format!("minimax/M={m}"), &e)),
        }
    }
    rep.tables.push(table);
    rep
}

/// Orbitwise averaging over squared-Euclidean, negative-entropy and a random
/// Mahalanobis generator, with Itakura–Saito as a negative control.
pub fn orbit_average(opts: &SuiteOptions) -> SuiteReport {
    let mut rng = rng_for(opts.seed, 0x80, 0);
    let family = GeneratorSpec::mahalanobis(&random_spd(&mut rng, 3)).map(|m| {
        vec![
            GeneratorSpec::squared_euclidean(),
            GeneratorSpec::negative_entropy(),
            m,
            GeneratorSpec::negative_log(),
        ]
    });
    let mut rep = SuiteReport::new("orbit-average", opts.seed);
    match family.and_then(|f| orbit_average_universal_check(&f, opts.count(200), opts.seed)) {
        Ok(r) => {
            rep.checks.extend(summarize(r.checks));
            rep.notes.extend(r.notes);
        }
        Err(e) => rep.push(Check::error("orbit_average/setup", &e)),
    }
    rep
}

/// Itakura–Saito divergence written out independently of the library.
fn itakura_saito(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a / b - (a / b).ln() - 1.0).sum()
}

/// Reversed-Jensen witnesses and the orbit-infeasibility construction.
pub fn impossibility(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = SuiteReport::new("impossibility", opts.seed);
    let trials = opts.count(100_000);
    rep.record("impossibility/reversed_jensen/negative_log", || {
        let w = reversed_jensen_witness(&GeneratorSpec::negative_log(), trials, opts.seed)?;
        let Some(w) = w else {
            return Ok(vec![Check::flag("impossibility/reversed_jensen/negative_log/found", false)]);
        };
        let mix: Vec<f64> = w.q1.iter().zip(&w.q2).map(|(a, b)| w.lambda * a + (1.0 - w.lambda) * b).collect();
        let excess = itakura_saito(&w.p_star, &mix)
            - w.lambda * itakura_saito(&w.p_star, &w.q1)
            - (1.0 - w.lambda) * itakura_saito(&w.p_star, &w.q2);
        Ok(vec![
            Check::flag("impossibility/reversed_jensen/negative_log/found", true),
            Check::ge("impossibility/reversed_jensen/negative_log/reverified_excess", excess, 1e-9, 0.0),
        ])
    });
    for gen in [GeneratorSpec::squared_euclidean(), GeneratorSpec::negative_entropy()] {
        let name = kind_name(&gen);
        rep.record(&format!("impossibility/reversed_jensen/{name}"), || {
            let w = reversed_jensen_witness(&gen, trials, opts.seed)?;
            Ok(vec![Check::flag(format!("impossibility/reversed_jensen/{name}/absent"), w.is_none())])
        });
    }
    rep.record("impossibility/orbit_infeasibility", || {
        let set = ConvexModelSet::simplex().with_cap(0, 0, 0.5).with_cap(1, 0, 0.5);
        let phi = InvarianceMap::swaps(2, &[(0, 1)])?;
        let dist = PromptDistribution::uniform(2);
        let pi0 = Model::conditional(&[vec![0.62, 0.38], vec![0.58, 0.42]])?;
        let w = orbit_infeasibility_witness(&set, &dist, &phi, &pi0)?;
        let open = orbit_infeasibility_witness(&ConvexModelSet::simplex(), &dist, &phi, &pi0)?;
        let mut out = w.checks;
        out.push(Check::flag("impossibility/orbit_infeasibility/applicable", w.applicable));
        out.push(Check::ge("impossibility/orbit_infeasibility/margin", w.margin, 0.0, 0.0).with_detail(w.note));
        out.push(Check::flag("impossibility/orbit_infeasibility/feasible_average_not_applicable", !open.applicable));
        Ok(out)
    });
    rep
}

// ---------------------------------------------------------------------------
// characterization, rigidity, kernel

fn characterization_instance(seed: u64, id: usize) -> Result<Vec<Check>> {
    let shape = InstanceShape { n: (2, 5), d: (2, 3), ..direct_shape() };
    let inst = shape.generate(seed, 0x90, id)?;
    let (pi_hat, _) =
        direct_projection(&inst.gen, &inst.dist, &inst.phi, &inst.set_pi, &inst.pi0, &SolverOptions::default())?;
    // the guarantee holds for references in Π ∩ C_coh, which is therefore
    // the set the characterization runs over
    let coherent = inst.set_pi.merged_with(&orbit_partition(&inst.phi))?;
    let r = single_f_characterization_check(&inst.gen, &inst.dist, &coherent, &inst.pi0, &pi_hat)?;
    Ok(vec![
        Check::flag("characterization/direct_projection_improves", r.improvement_holds),
        Check::le("characterization/direct_projection_residual", r.residual, 0.0, 1e-7).with_detail(kind_name(&inst.gen)),
    ])
}

/// The single-generator characterization on direct projections, the tied
/// baseline example and a far-corner negative control.
pub fn characterization(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = SuiteReport::new("characterization", opts.seed);
    let checks =
        per_instance(opts.count(30), "characterization/instance", |i| characterization_instance(opts.seed, i));
    rep.checks.extend(summarize(checks));
    rep.record("characterization/tied_baseline", || {
        let dist = PromptDistribution::uniform(3);
        let pi0 = Model::column(&[0.5, 0.5, 0.2])?;
        let r = single_f_characterization_check(
            &GeneratorSpec::squared_euclidean(),
            &dist,
            &ConvexModelSet::cube(),
            &pi0,
            &pi0,
        )?;
        Ok(vec![
            Check::flag("characterization/tied_baseline/improves", r.improvement_holds),
            Check::near("characterization/tied_baseline/residual", r.residual, 0.0, 0.0),
            Check::near("characterization/tied_baseline/psi_inf", r.psi_inf.unwrap_or(f64::NAN), 0.0, 0.0),
            Check::ge("characterization/tied_baseline/psi_grid_points", r.psi_grid_points as f64, 1.0, 0.0),
        ])
    });
    rep.record("characterization/far_corner", || {
        let (dist, _, pi0) = toy_block_instance();
        let corner = Model::column(&[1.0, 0.0, 1.0])?;
        let r = single_f_characterization_check(
            &GeneratorSpec::squared_euclidean(),
            &dist,
            &ConvexModelSet::cube(),
            &pi0,
            &corner,
        )?;
        Ok(vec![
            Check::flag("characterization/far_corner/violation_detected", !r.improvement_holds),
            Check::ge("characterization/far_corner/worst_violation", r.worst_violation, 0.0, 0.0),
        ])
    });
    rep
}

fn four_point_random(seed: u64, id: usize) -> Result<Vec<Check>> {
    let mut rng = rng_for(seed, 0xA0, id as u64);
    let n = rng.gen_range(2..=6);
    let d = rng.gen_range(2..=4);
    let dist = random_dist(&mut rng, n);
    let set = ConvexModelSet::simplex().with_blocks(random_blocks(&mut rng, n)?);
    let pi0 = random_conditional(&mut rng, n, d, 0.02);
    let f = random_generator(&mut rng, d, &ALL_LEGENDRE)?;
    let g = random_generator(&mut rng, d, &ALL_LEGENDRE)?;
    let a = four_point_residual(&f, &g, &dist, &set, &pi0)?;
    Ok(vec![Check::le("rigidity/four_point/random_blocks", a.abs(), 0.0, 1e-8)
        .with_detail(format!("{} vs {}", kind_name(&f), kind_name(&g)))])
}

/// The rigidity examples plus the four-point residual on affine
/// geometries, with an active-cap geometry as a negative control.
pub fn rigidity(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = rigidity_affine_examples();
    rep.seed = opts.seed;
    rep.record("rigidity/four_point", || {
        let (dist, set, pi0) = asymmetric_instance();
        let sq = GeneratorSpec::squared_euclidean();
        let kl = GeneratorSpec::negative_entropy();
        let same = four_point_residual(&sq, &sq, &dist, &set, &pi0)?;
        let pair = four_point_residual(&sq, &kl, &dist, &set, &pi0)?;
        let capped = set.clone().with_cap(2, 0, 0.6).with_cap(3, 0, 0.6);
        let control = four_point_residual(&sq, &kl, &dist, &capped, &pi0)?;
        Ok(vec![
            Check::near("rigidity/four_point/same_generator", same, 0.0, 0.0),
            Check::le("rigidity/four_point/asymmetric", pair.abs(), 0.0, 1e-8),
            Check::le("rigidity/four_point/active_cap", control.abs(), 0.0, 1e-8).control(),
        ])
    });
    let checks = per_instance(opts.count(20), "rigidity/four_point/instance", |i| four_point_random(opts.seed, i));
    rep.checks.extend(summarize(checks));
    rep
}

pub fn kernel(opts: &SuiteOptions) -> SuiteReport {
    let mut rep = kernel_circle_example();
    rep.seed = opts.seed;
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke(n: usize) -> SuiteOptions {
        SuiteOptions { seed: 7, jobs: 2, instances: Some(n), ..SuiteOptions::default() }
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(run_suite("nope", 0, 1), Err(Error::Invalid(_))));
    }

    #[test]
    fn reports_are_deterministic_across_pool_sizes() {
        let a = run_suite_with("equivalence", &SuiteOptions { jobs: 1, ..smoke(6) }).unwrap();
        let b = run_suite_with("equivalence", &SuiteOptions { jobs: 3, ..smoke(6) }).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn smoke_suites_pass() {
        for name in ["bregman-identities", "direct-improvement", "two-step", "relaxed", "characterization", "rigidity"] {
            let rep = run_suite_with(name, &smoke(4)).unwrap();
            assert!(rep.passed(), "{}", rep.summary());
        }
    }

    #[test]
    fn summarize_keeps_worst_and_failures() {
        let cs = vec![
            Check::le("a", 0.1, 0.0, 1.0).at(0),
            Check::le("a", 0.5, 0.0, 1.0).at(1),
            Check::le("a", 2.0, 0.0, 1.0).at(2),
        ];
        let s = summarize(cs);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].instance, Some(1));
        assert_eq!(s[1].instance, Some(2));
    }

    #[test]
    fn strong_convexity_floor_two_prompts() {
        // w = (0.25, 0.75), λ = (0.25, 0.75): Σ w λ(1−λ)·0.5 = 0.09375, times μ/2
        let dist = PromptDistribution::from_masses(&[1.0, 3.0]).unwrap();
        let phi = InvarianceMap::swaps(2, &[(0, 1)]).unwrap();
        let pi0 = Model::conditional(&[vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let f = strong_convexity_floor(1.0, NormTag::L2, &dist, &phi, &pi0);
        assert!((f - 0.5 * 0.09375).abs() < 1e-15);
    }
}
