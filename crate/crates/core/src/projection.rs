//! Direct and two-step Bregman projections onto Π ∩ C_coh, optimality
//! certificates and the improvement functionals.

use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bregman::{divergence, expected_divergence, expected_divergence_weighted};
use crate::coherence::{orbit_average, orbit_partition, BlockPartition, InvarianceMap};
use crate::error::{Error, Result};
use crate::generators::GeneratorSpec;
use crate::model::{compensated_sum, Model, PromptDistribution};
use crate::sets::{Base, ConvexModelSet, Reduced};
use crate::solver::first_order::{self, MirrorGeometry};
use crate::solver::ipm::{self, IpmOptions, Linear, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    MirrorDescent,
    FrankWolfe,
    /// Primal-dual Newton method on the block-reduced variables.
    #[default]
    ReducedNewton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub tol_obj: f64,
    pub tol_kkt: f64,
    pub algorithm: Algorithm,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iter: 50_000, tol_obj: 1e-12, tol_kkt: 1e-8, algorithm: Algorithm::ReducedNewton }
    }
}

impl SolverOptions {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        Self { algorithm, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Source already feasible.
    Trivial,
    Optimal,
    /// Finished but the certificate exceeds `tol_kkt`.
    Inaccurate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub objective: f64,
    pub kkt_residual: f64,
    pub wall_ns: u64,
}

/// Σ_x w_x B_F(c_{g(x)} ‖ src_x) in the reduced variables.
pub(crate) struct ProjectionObjective<'a> {
    gen: &'a GeneratorSpec,
    /// per group: (total weight, Σ w_x ∇F(src_x) over present vars, members)
    groups: Vec<GroupTerm>,
    ridge: f64,
}

struct GroupTerm {
    weight: f64,
    shift: Vec<f64>,
    members: Vec<(f64, Vec<f64>)>,
    vars: Vec<Option<usize>>,
}

impl<'a> ProjectionObjective<'a> {
    pub(crate) fn new(
        gen: &'a GeneratorSpec,
        red: &'a Reduced,
        weights: &[f64],
        source: &Model,
    ) -> Result<Self> {
        let d = red.d;
        let mut groups = Vec::new();
        for (gi, block) in red.groups.blocks().iter().enumerate() {
            let vars: Vec<Option<usize>> = (0..d).map(|k| red.var_index[gi * d + k]).collect();
            let mut members = Vec::new();
            let mut shift = vec![Vec::new(); d];
            for &x in block {
                let w = weights[x];
                if w == 0.0 {
                    continue;
                }
                let g = gen.gradient_partial(source.row(x)).map_err(|e| Error::at(x, e))?;
                for k in 0..d {
                    if vars[k].is_some() {
                        match g[k] {
                            Some(v) => shift[k].push(w * v),
                            None => {
                                return Err(Error::DomainAt {
                                    prompt: x,
                                    message: "zero source entry on a free coordinate".into(),
                                })
                            }
                        }
                    }
                }
                members.push((w, source.row(x).to_vec()));
            }
            let weight = compensated_sum(members.iter().map(|m| m.0));
            groups.push(GroupTerm {
                weight,
                shift: shift.into_iter().map(compensated_sum).collect(),
                members,
                vars,
            });
        }
        let ridge = if gen.is_legendre() {
            0.0
        } else {
            1e-12 * gen.matrix().map_or(1.0, |m| m.amax().max(1.0))
        };
        Ok(Self { gen, groups, ridge })
    }

    fn row(&self, gi: usize, z: &[f64]) -> Vec<f64> {
        self.groups[gi].vars.iter().map(|v| v.map_or(0.0, |j| z[j])).collect()
    }

    /// Objective without the ridge term.
    pub(crate) fn plain_gradient(&self, z: &[f64], g: &mut [f64]) {
        g.iter_mut().for_each(|v| *v = 0.0);
        for (gi, term) in self.groups.iter().enumerate() {
            if term.weight == 0.0 {
                continue;
            }
            let c = self.row(gi, z);
            let Ok(grad) = self.gen.gradient_partial(&c) else { continue };
            for (k, v) in term.vars.iter().enumerate() {
                if let (Some(j), Some(gk)) = (v, grad[k]) {
                    g[*j] = term.weight * gk - term.shift[k];
                }
            }
        }
    }
}

impl Objective for ProjectionObjective<'_> {
    fn value(&self, z: &[f64]) -> f64 {
        let mut terms = Vec::new();
        for (gi, term) in self.groups.iter().enumerate() {
            if term.members.is_empty() {
                continue;
            }
            let c = self.row(gi, z);
            for (w, src) in &term.members {
                match divergence(self.gen, &c, src) {
                    Ok(v) => terms.push(w * v),
                    Err(_) => return f64::INFINITY,
                }
            }
        }
        if self.ridge > 0.0 {
            terms.push(0.5 * self.ridge * z.iter().map(|v| v * v).sum::<f64>());
        }
        compensated_sum(terms)
    }

    fn gradient(&self, z: &[f64], g: &mut [f64]) {
        self.plain_gradient(z, g);
        if self.ridge > 0.0 {
            g.iter_mut().zip(z).for_each(|(gi, zi)| *gi += self.ridge * zi);
        }
    }

    fn add_hessian(&self, z: &[f64], h: &mut DMatrix<f64>) {
        for (gi, term) in self.groups.iter().enumerate() {
            if term.weight == 0.0 {
                continue;
            }
            let c = self.row(gi, z);
            let hess = if self.gen.is_steep() {
                // diagonal; zero coordinates are never present variables
                let safe: Vec<f64> = c.iter().map(|v| if *v > 0.0 { *v } else { 1.0 }).collect();
                self.gen.hessian(&safe)
            } else {
                self.gen.hessian(&c)
            };
            let Ok(hess) = hess else { continue };
            for (k1, v1) in term.vars.iter().enumerate() {
                let Some(j1) = v1 else { continue };
                for (k2, v2) in term.vars.iter().enumerate() {
                    let Some(j2) = v2 else { continue };
                    h[(*j1, *j2)] += term.weight * hess[(k1, k2)];
                }
            }
        }
        if self.ridge > 0.0 {
            for i in 0..z.len() {
                h[(i, i)] += self.ridge;
            }
        }
    }
}

fn check_inputs(gen: &GeneratorSpec, weights: &[f64], source: &Model) -> Result<()> {
    if weights.len() != source.n() {
        return Err(Error::Shape("weights and source disagree on n".into()));
    }
    if let Some(dim) = gen.dim() {
        if dim != source.d() {
            return Err(Error::Shape(format!("generator of dimension {dim} on rows of {}", source.d())));
        }
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::Invalid("weights must be nonnegative".into()));
    }
    Ok(())
}

/// Minimum of ⟨g, ·⟩ over the reduced polytope.
pub(crate) fn linear_minimum(red: &Reduced, g: &[f64]) -> Result<(f64, Vec<f64>)> {
    let cons = red.constraints();
    let start = red.interior_start();
    let r = ipm::solve(&Linear(g), &cons, &start, &IpmOptions::default())?;
    let v = compensated_sum(g.iter().zip(&r.z).map(|(a, b)| a * b));
    Ok((v, r.z))
}

/// VI certificate max(0, ⟨g, z⟩ − min_{z'} ⟨g, z'⟩) with g the objective
/// gradient at z.
pub(crate) fn vi_certificate(red: &Reduced, obj: &ProjectionObjective<'_>, z: &[f64]) -> Result<f64> {
    let mut g = vec![0.0; z.len()];
    obj.plain_gradient(z, &mut g);
    let at = compensated_sum(g.iter().zip(z).map(|(a, b)| a * b));
    let (min, _) = linear_minimum(red, &g)?;
    Ok((at - min).max(0.0))
}

/// Projection with explicit nonnegative prompt weights and optional extra
/// block equalities joined into the set.
pub fn bregman_project_weighted(
    gen: &GeneratorSpec,
    weights: &[f64],
    set: &ConvexModelSet,
    source: &Model,
    extra_blocks: Option<&BlockPartition>,
    opts: &SolverOptions,
) -> Result<(Model, SolveReport)> {
    let start = Instant::now();
    check_inputs(gen, weights, source)?;
    let set = match extra_blocks {
        Some(b) => set.merged_with(b)?,
        None => set.clone(),
    };
    set.validate(source.n(), source.d())?;
    if set.contains(source, 1e-12) {
        return Ok((
            source.clone(),
            SolveReport {
                status: SolveStatus::Trivial,
                iterations: 0,
                objective: 0.0,
                kkt_residual: 0.0,
                wall_ns: start.elapsed().as_nanos() as u64,
            },
        ));
    }
    project_holding(gen, weights, &set, source, &|_, _| None, opts, start)
}

/// Projection over an already merged set with some reduced coordinates
/// held at given values (`hold(group, k)`).
#[allow(clippy::too_many_arguments)]
pub(crate) fn project_holding(
    gen: &GeneratorSpec,
    weights: &[f64],
    set: &ConvexModelSet,
    source: &Model,
    hold: &dyn Fn(usize, usize) -> Option<f64>,
    opts: &SolverOptions,
    start: Instant,
) -> Result<(Model, SolveReport)> {
    let part = set.blocks.clone().unwrap_or_else(|| BlockPartition::singletons(source.n()));
    let steep = gen.is_steep();
    let fixed = |gi: usize, k: usize| {
        hold(gi, k).or_else(|| {
            (steep && part.blocks()[gi].iter().any(|&x| weights[x] > 0.0 && source.get(x, k) == 0.0))
                .then_some(0.0)
        })
    };
    let red = Reduced::build(set, source.n(), source.d(), &fixed)?;
    red.check_feasible()?;
    let obj = ProjectionObjective::new(gen, &red, weights, source)?;
    let (z, iterations) = if red.num_vars() == 0 { (Vec::new(), 0) } else { run_algorithm(&red, &obj, set, gen, opts)? };
    let kkt = if red.num_vars() == 0 { 0.0 } else { vi_certificate(&red, &obj, &z)? };
    let model = red.expand(&z);
    let objective = expected_divergence_weighted(gen, weights, &model, source)?;
    let status = if kkt <= opts.tol_kkt { SolveStatus::Optimal } else { SolveStatus::Inaccurate };
    log::debug!("projection: {iterations} iterations, kkt {kkt:.3e}, objective {objective:.6e}");
    Ok((
        model,
        SolveReport {
            status,
            iterations,
            objective,
            kkt_residual: kkt,
            wall_ns: start.elapsed().as_nanos() as u64,
        },
    ))
}

fn run_algorithm(
    red: &Reduced,
    obj: &ProjectionObjective<'_>,
    set: &ConvexModelSet,
    gen: &GeneratorSpec,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, usize)> {
    let ipm_opts = IpmOptions { max_iter: opts.max_iter.min(500), ..IpmOptions::default() };
    match opts.algorithm {
        Algorithm::ReducedNewton => {
            let r = ipm::solve(obj, &red.constraints(), &red.interior_start(), &ipm_opts)?;
            log::trace!("newton residuals: dual {:.2e}, primal {:.2e}, gap {:.2e}", r.r_dual, r.r_pri, r.gap);
            Ok((r.z, r.iterations))
        }
        Algorithm::FrankWolfe => {
            let z0 = red.analytic_center()?;
            let r = first_order::frank_wolfe(obj, &red.constraints(), &z0, opts.max_iter, opts.tol_kkt)?;
            Ok((r.z, r.iterations))
        }
        Algorithm::MirrorDescent => {
            let z0 = red.analytic_center()?;
            if set.base == Base::Simplex && set.caps.is_empty() && set.affine.is_empty() {
                let mut groups = vec![Vec::new(); red.groups.num_blocks()];
                for (j, &(gi, _)) in red.vars.iter().enumerate() {
                    groups[gi].push(j);
                }
                let r = first_order::mirror_descent(
                    obj,
                    MirrorGeometry::Simplices(&groups),
                    &z0,
                    opts.max_iter,
                    opts.tol_obj,
                )?;
                Ok((r.z, r.iterations))
            } else if !gen.is_steep() {
                let project = |v: &[f64]| -> Result<Vec<f64>> {
                    let ambient = red.expand(v);
                    Ok(red.reduce(&set.euclidean_project(&ambient)?))
                };
                let r = first_order::mirror_descent(
                    obj,
                    MirrorGeometry::Euclidean(&project),
                    &z0,
                    opts.max_iter,
                    opts.tol_obj,
                )?;
                Ok((r.z, r.iterations))
            } else {
                Err(Error::Invalid(
                    "mirror descent needs a plain simplex product or a non-steep generator".into(),
                ))
            }
        }
    }
}

/// argmin over `set` of E[B_F(· ‖ source)].
pub fn bregman_project(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    set: &ConvexModelSet,
    source: &Model,
    opts: &SolverOptions,
) -> Result<(Model, SolveReport)> {
    if dist.len() != source.n() {
        return Err(Error::Shape("distribution and source disagree on n".into()));
    }
    bregman_project_weighted(gen, dist.weights(), set, source, None, opts)
}

/// Projection of π0 onto Π ∩ C_coh.
pub fn direct_projection(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    phi: &InvarianceMap,
    set_pi: &ConvexModelSet,
    pi0: &Model,
    opts: &SolverOptions,
) -> Result<(Model, SolveReport)> {
    if phi.len() != pi0.n() || dist.len() != pi0.n() {
        return Err(Error::Shape("map, distribution and model disagree on n".into()));
    }
    let orbits = orbit_partition(phi);
    bregman_project_weighted(gen, dist.weights(), set_pi, pi0, Some(&orbits), opts)
}

/// Orbit centroid π̄, then its projection onto Π ∩ C_coh.
pub fn two_step_projection(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    phi: &InvarianceMap,
    set_pi: &ConvexModelSet,
    pi0: &Model,
    opts: &SolverOptions,
) -> Result<(Model, SolveReport, Model)> {
    // Every supported kind has the nonnegative orthant in the closure of
    // its domain; NegativeLog reaches it only through the zero rule.
    let intermediate = orbit_average(gen, dist, phi, pi0)?;
    let orbits = orbit_partition(phi);
    let (out, report) =
        bregman_project_weighted(gen, dist.weights(), set_pi, &intermediate, Some(&orbits), opts)?;
    Ok((out, report, intermediate))
}

/// max |direct − two-step|.
pub fn equivalence_residual(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    phi: &InvarianceMap,
    set_pi: &ConvexModelSet,
    pi0: &Model,
    opts: &SolverOptions,
) -> Result<f64> {
    if !(gen.is_separable() || gen.is_quadratic()) {
        return Err(Error::Invalid("equivalence needs a separable or quadratic generator".into()));
    }
    let (a, _) = direct_projection(gen, dist, phi, set_pi, pi0, opts)?;
    let (b, _, _) = two_step_projection(gen, dist, phi, set_pi, pi0, opts)?;
    Ok(a.max_abs_diff(&b))
}

/// E[B(π*‖π0)] − E[B(π*‖π)].
pub fn improvement(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    pi_star: &Model,
    pi0: &Model,
    pi: &Model,
) -> Result<f64> {
    Ok(expected_divergence(gen, dist, pi_star, pi0)? - expected_divergence(gen, dist, pi_star, pi)?)
}

/// B(π_ref‖source) − B(π_ref‖projected) − B(projected‖source), in
/// expectation.
pub fn pythagorean_residual(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    pi_ref: &Model,
    projected: &Model,
    source: &Model,
) -> Result<f64> {
    Ok(compensated_sum([
        expected_divergence(gen, dist, pi_ref, source)?,
        -expected_divergence(gen, dist, pi_ref, projected)?,
        -expected_divergence(gen, dist, projected, source)?,
    ]))
}

/// E[λF*(u0) + (1−λ)F*(u1) − F*(λu0 + (1−λ)u1)], u0 = ∇F(π0(x)),
/// u1 = ∇F(π0(Φx)).
pub fn two_step_delta(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    phi: &InvarianceMap,
    pi0: &Model,
) -> Result<f64> {
    if !phi.is_involution() {
        return Err(Error::NotInvolution);
    }
    let w = dist.weights();
    let mut terms = Vec::new();
    for x in 0..pi0.n() {
        let y = phi.apply(x);
        let lam = w[x] / (w[x] + w[y]);
        let u0 = gen.gradient(pi0.row(x)).map_err(|e| Error::at(x, e))?;
        let u1 = gen.gradient(pi0.row(y)).map_err(|e| Error::at(y, e))?;
        let mix: Vec<f64> = u0.iter().zip(&u1).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
        let v = compensated_sum([
            lam * gen.conjugate_value(&u0)?,
            (1.0 - lam) * gen.conjugate_value(&u1)?,
            -gen.conjugate_value(&mix)?,
        ]);
        terms.push(w[x] * v);
    }
    Ok(compensated_sum(terms))
}

/// 1 − Σ√(p_k q_k).
pub fn squared_hellinger(p: &[f64], q: &[f64]) -> f64 {
    1.0 - compensated_sum(p.iter().zip(q).map(|(a, b)| (a * b).sqrt()))
}

/// E[2 min(λ, 1−λ) D²_Hell(π0(x)‖π0(Φx))].
pub fn hellinger_improvement_floor(
    dist: &PromptDistribution,
    phi: &InvarianceMap,
    pi0: &Model,
) -> Result<f64> {
    if !phi.is_involution() {
        return Err(Error::NotInvolution);
    }
    if pi0.as_slice().iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("baseline must be strictly positive".into()));
    }
    let w = dist.weights();
    Ok(compensated_sum((0..pi0.n()).map(|x| {
        let y = phi.apply(x);
        let lam = w[x] / (w[x] + w[y]);
        w[x] * 2.0 * lam.min(1.0 - lam) * squared_hellinger(pi0.row(x), pi0.row(y))
    })))
}

/// min over π* ∈ Π ∩ C_coh of Improv_{π*}(π). Improv is affine in π*, so
/// the minimum is a linear program over the reduced polytope.
pub fn worst_case_improvement(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    phi: &InvarianceMap,
    set_pi: &ConvexModelSet,
    pi0: &Model,
    pi: &Model,
) -> Result<f64> {
    let set = set_pi.merged_with(&orbit_partition(phi))?;
    let red = Reduced::build(&set, pi0.n(), pi0.d(), &|_, _| None)?;
    worst_case_on(gen, dist, &red, pi0, pi)
}

pub(crate) fn worst_case_on(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    red: &Reduced,
    pi0: &Model,
    pi: &Model,
) -> Result<f64> {
    // Improv_{π*}(π) = Σ_x w_x [⟨∇F(π(x)) − ∇F(π0(x)), π*(x)⟩
    //                  + F(π(x)) − ⟨∇F(π(x)), π(x)⟩ − F(π0(x)) + ⟨∇F(π0(x)), π0(x)⟩]
    let w = dist.weights();
    let mut c = vec![0.0; red.num_vars()];
    let mut konst = Vec::new();
    for x in 0..pi0.n() {
        let gp = match gen.gradient(pi.row(x)) {
            Ok(g) => g,
            Err(_) if gen.is_steep() => return Ok(f64::NEG_INFINITY),
            Err(e) => return Err(e),
        };
        let g0 = gen.gradient(pi0.row(x)).map_err(|e| Error::at(x, e))?;
        let gi = red.groups.block_of(x);
        for k in 0..pi0.d() {
            if let Some(j) = red.var_index[gi * pi0.d() + k] {
                c[j] += w[x] * (gp[k] - g0[k]);
            }
        }
        let dp: f64 = gp.iter().zip(pi.row(x)).map(|(a, b)| a * b).sum();
        let d0: f64 = g0.iter().zip(pi0.row(x)).map(|(a, b)| a * b).sum();
        konst.push(w[x] * (gen.value(pi.row(x))? - dp - gen.value(pi0.row(x))? + d0));
    }
    let (min, _) = linear_minimum(red, &c)?;
    Ok(min + compensated_sum(konst))
}

/// Candidate models for the outer maximization of the maximin problem.
#[derive(Debug, Clone, Default)]
pub struct CandidatePanel {
    pub candidates: Vec<Model>,
}

/// inner(two-step output) − max over the panel of inner(candidate), where
/// inner(π) = min over π* ∈ Π ∩ C_coh of Improv_{π*}(π).
pub fn maximin_gap(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    phi: &InvarianceMap,
    set_pi: &ConvexModelSet,
    pi0: &Model,
    candidate: &Model,
    grid: &CandidatePanel,
) -> Result<f64> {
    if !gen.is_jointly_convex() {
        return Err(Error::Invalid("maximin check needs a jointly convex divergence".into()));
    }
    let set = set_pi.merged_with(&orbit_partition(phi))?;
    let red = Reduced::build(&set, pi0.n(), pi0.d(), &|_, _| None)?;
    let own = worst_case_on(gen, dist, &red, pi0, candidate)?;
    let mut best = f64::NEG_INFINITY;
    for c in &grid.candidates {
        best = best.max(worst_case_on(gen, dist, &red, pi0, c)?);
    }
    Ok(own - best)
}

/// E[⟨∇F(π̂(x)) − ∇F(π0(x)), π(x) − π̂(x)⟩].
pub fn variational_gap(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    pi_hat: &Model,
    pi0: &Model,
    pi: &Model,
) -> Result<f64> {
    let w = dist.weights();
    let mut terms = Vec::new();
    for x in 0..pi0.n() {
        let a = gen.gradient(pi_hat.row(x)).map_err(|e| Error::at(x, e))?;
        let b = gen.gradient(pi0.row(x)).map_err(|e| Error::at(x, e))?;
        for k in 0..pi0.d() {
            terms.push(w[x] * (a[k] - b[k]) * (pi.get(x, k) - pi_hat.get(x, k)));
        }
    }
    Ok(compensated_sum(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn already_feasible_source_is_returned() {
        let pi = Model::conditional(&[vec![0.2, 0.8], vec![0.6, 0.4]]).unwrap();
        let (out, rep) = bregman_project(
            &GeneratorSpec::negative_entropy(),
            &PromptDistribution::uniform(2),
            &ConvexModelSet::simplex(),
            &pi,
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(out, pi);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn single_generator_minimax_geometry() {
        let m = 10.0;
        let gen = GeneratorSpec::diagonal_quadratic(&[m, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        // one 6-vector row: both prompts, cube base, coherence and simplex rows
        let set = ConvexModelSet::cube()
            .with_cap(0, 0, 0.5)
            .with_affine(vec![vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]], 1.0)
            .with_affine(vec![vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]], 1.0)
            .with_affine(vec![vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0]], 0.0)
            .with_affine(vec![vec![0.0, 1.0, 0.0, 0.0, -1.0, 0.0]], 0.0);
        let pi0 = Model::from_flat(1, 6, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        let (out, rep) = bregman_project(
            &gen,
            &PromptDistribution::uniform(1),
            &set,
            &pi0,
            &SolverOptions::default(),
        )
        .unwrap();
        // unconstrained minimizer (M+1)/(M+3) = 11/13 > ½, so the cap binds
        let expect = [0.5, 0.5, 0.0, 0.5, 0.5, 0.0];
        for (a, b) in out.as_slice().iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
        assert!(rep.kkt_residual <= 1e-9, "{rep:?}");
    }

    #[test]
    fn block_geometric_mean_under_entropy() {
        let pi0 = Model::conditional(&[vec![0.1, 0.9], vec![0.8, 0.2]]).unwrap();
        let set = ConvexModelSet::simplex().with_blocks(BlockPartition::new(vec![vec![0, 1]]).unwrap());
        let (out, _) = bregman_project(
            &GeneratorSpec::negative_entropy(),
            &PromptDistribution::uniform(2),
            &set,
            &pi0,
            &SolverOptions::default(),
        )
        .unwrap();
        // brute-force 1-D grid oracle over the first coordinate, step 1e-6
        let f = |t: f64| {
            let p = [t, 1.0 - t];
            0.5 * (divergence(&GeneratorSpec::negative_entropy(), &p, &[0.1, 0.9]).unwrap()
                + divergence(&GeneratorSpec::negative_entropy(), &p, &[0.8, 0.2]).unwrap())
        };
        let best = (1..1_000_000)
            .map(|i| i as f64 * 1e-6)
            .min_by(|a, b| f(*a).partial_cmp(&f(*b)).unwrap())
            .unwrap();
        assert_abs_diff_eq!(out.get(0, 0), best, epsilon = 2e-6);
        assert_abs_diff_eq!(out.get(0, 0), 0.4, epsilon = 1e-10);
        assert_abs_diff_eq!(out.get(1, 1), 0.6, epsilon = 1e-10);
    }

    #[test]
    fn two_step_delta_and_hellinger_examples() {
        let swap = InvarianceMap::swaps(2, &[(0, 1)]).unwrap();
        let dist = PromptDistribution::uniform(2);
        let pi0 = Model::conditional(&[vec![0.1, 0.9], vec![0.8, 0.2]]).unwrap();
        let oracle = 1.0 - 0.08_f64.sqrt() - 0.18_f64.sqrt();
        let delta = two_step_delta(&GeneratorSpec::negative_entropy(), &dist, &swap, &pi0).unwrap();
        assert_abs_diff_eq!(delta, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(hellinger_improvement_floor(&dist, &swap, &pi0).unwrap(), oracle, epsilon = 1e-14);
        let coherent = Model::conditional(&[vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        assert_eq!(two_step_delta(&GeneratorSpec::negative_entropy(), &dist, &swap, &coherent).unwrap(), 0.0);
        // quadratic: δ = ½λ(1−λ)(p−q)ᵀA(p−q) per orbit point
        let a = vec![vec![2.0, 0.5], vec![0.5, 1.0]];
        let gen = GeneratorSpec::mahalanobis(&a).unwrap();
        let d = PromptDistribution::new(vec![0.7, 0.3]).unwrap();
        let diff = [0.1 - 0.8, 0.9 - 0.2];
        let quad = 2.0 * diff[0] * diff[0] + 2.0 * 0.5 * diff[0] * diff[1] + diff[1] * diff[1];
        let lam = 0.7;
        let oracle = 0.5 * lam * (1.0 - lam) * quad; // same for both prompts, weights sum to 1
        assert_abs_diff_eq!(two_step_delta(&gen, &d, &swap, &pi0).unwrap(), oracle, epsilon = 1e-12);
    }

    #[test]
    fn algorithms_agree() {
        let pi0 = Model::conditional(&[vec![0.1, 0.6, 0.3], vec![0.5, 0.2, 0.3], vec![0.2, 0.2, 0.6]]).unwrap();
        let swap = InvarianceMap::swaps(3, &[(0, 1)]).unwrap();
        let dist = PromptDistribution::new(vec![0.5, 0.3, 0.2]).unwrap();
        let gen = GeneratorSpec::negative_entropy();
        let (a, _) =
            direct_projection(&gen, &dist, &swap, &ConvexModelSet::simplex(), &pi0, &SolverOptions::default())
                .unwrap();
        let (b, _) = direct_projection(
            &gen,
            &dist,
            &swap,
            &ConvexModelSet::simplex(),
            &pi0,
            &SolverOptions::with_algorithm(Algorithm::MirrorDescent),
        )
        .unwrap();
        assert!(a.max_abs_diff(&b) < 1e-6, "{}", a.max_abs_diff(&b));
        let capped = ConvexModelSet::simplex().with_cap(0, 1, 0.3);
        let sq = GeneratorSpec::squared_euclidean();
        let (a, _) = direct_projection(&sq, &dist, &swap, &capped, &pi0, &SolverOptions::default()).unwrap();
        let (b, _) = direct_projection(
            &sq,
            &dist,
            &swap,
            &capped,
            &pi0,
            &SolverOptions::with_algorithm(Algorithm::MirrorDescent),
        )
        .unwrap();
        assert!(a.max_abs_diff(&b) < 1e-6, "{}", a.max_abs_diff(&b));
        let (c, _) = direct_projection(
            &sq,
            &dist,
            &swap,
            &capped,
            &pi0,
            &SolverOptions::with_algorithm(Algorithm::FrankWolfe),
        )
        .unwrap();
        assert!(a.max_abs_diff(&c) < 1e-3, "{}", a.max_abs_diff(&c));
    }
}
