//! Relaxed coherence: the constraint π(x) = π(Φx) is replaced by a budget
//! E[D(π(x), π(Φx))] ≤ Λ on a jointly convex soft divergence D.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bregman::{divergence, expected_divergence};
use crate::coherence::{orbit_partition, InvarianceMap};
use crate::error::{Error, Result};
use crate::generators::{GeneratorSpec, NormTag};
use crate::model::{compensated_sum, Model, PromptDistribution};
use crate::projection::{SolveReport, SolveStatus, SolverOptions};
use crate::solver::ipm::{self, Constraints, IpmOptions, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoftDivergenceKind {
    #[serde(alias = "KL_symmetrized")]
    KlSymmetrized,
    #[serde(alias = "JensenShannon")]
    JensenShannon,
    #[serde(alias = "SquaredHellinger")]
    SquaredHellinger,
    /// ½‖p − q‖₂².
    #[serde(alias = "SquaredEuclidean")]
    SquaredEuclidean,
    /// ½‖p − q‖₁², a strongly convex stand-in for total variation.
    #[serde(alias = "TotalVariationSquaredSurrogate")]
    TotalVariationSquaredSurrogate,
}

impl SoftDivergenceKind {
    /// Strong-convexity constant and its norm.
    pub fn constants(self) -> (f64, NormTag) {
        match self {
            Self::KlSymmetrized => (2.0, NormTag::L1),
            Self::JensenShannon => (0.25, NormTag::L1),
            Self::SquaredHellinger => (0.25, NormTag::L1),
            Self::SquaredEuclidean => (1.0, NormTag::L2),
            Self::TotalVariationSquaredSurrogate => (1.0, NormTag::L1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SoftDivergenceSpec {
    pub kind: SoftDivergenceKind,
    pub mu_d: f64,
    pub norm_tag: NormTag,
}

impl SoftDivergenceSpec {
    pub fn new(kind: SoftDivergenceKind) -> Self {
        let (mu_d, norm_tag) = kind.constants();
        Self { kind, mu_d, norm_tag }
    }
}

impl<'de> Deserialize<'de> for SoftDivergenceSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            kind: SoftDivergenceKind,
            mu_d: Option<f64>,
            norm_tag: Option<NormTag>,
        }
        let raw = Raw::deserialize(de)?;
        let spec = Self::new(raw.kind);
        if raw.mu_d.is_some_and(|m| (m - spec.mu_d).abs() > 1e-15) {
            return Err(serde::de::Error::custom(format!("mu_d of {:?} is fixed at {}", raw.kind, spec.mu_d)));
        }
        if raw.norm_tag.is_some_and(|t| t != spec.norm_tag) {
            return Err(serde::de::Error::custom(format!("{:?} is strongly convex in {:?}", raw.kind, spec.norm_tag)));
        }
        Ok(spec)
    }
}

fn xlogx(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

fn check_simplex(p: &[f64]) -> Result<()> {
    if p.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::Domain("soft divergence needs nonnegative entries".into()));
    }
    if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain("soft divergence needs rows on the simplex".into()));
    }
    Ok(())
}

/// D(p, q); symmetric, zero iff p = q.
pub fn soft_divergence(spec: &SoftDivergenceSpec, p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Shape("soft divergence arguments differ in length".into()));
    }
    check_simplex(p)?;
    check_simplex(q)?;
    if spec.kind == SoftDivergenceKind::KlSymmetrized
        && p.iter().zip(q).any(|(a, b)| (*a == 0.0) != (*b == 0.0))
    {
        return Err(Error::Domain("symmetrized KL is infinite on mismatched supports".into()));
    }
    Ok(soft_value(spec.kind, p, q))
}

/// Value without domain checks; TV surrogate included.
fn soft_value(kind: SoftDivergenceKind, p: &[f64], q: &[f64]) -> f64 {
    let terms = p.iter().zip(q).map(|(&a, &b)| match kind {
        SoftDivergenceKind::KlSymmetrized => {
            if a == 0.0 && b == 0.0 {
                0.0
            } else {
                (a - b) * (a.ln() - b.ln())
            }
        }
        SoftDivergenceKind::JensenShannon => 0.5 * (xlogx(a) + xlogx(b)) - xlogx(0.5 * (a + b)),
        SoftDivergenceKind::SquaredHellinger => 0.5 * (a.sqrt() - b.sqrt()).powi(2),
        SoftDivergenceKind::SquaredEuclidean => 0.5 * (a - b) * (a - b),
        SoftDivergenceKind::TotalVariationSquaredSurrogate => (a - b).abs(),
    });
    let s = compensated_sum(terms);
    if kind == SoftDivergenceKind::TotalVariationSquaredSurrogate {
        0.5 * s * s
    } else {
        s.max(0.0)
    }
}

/// Per-coordinate (∂_p, ∂_q, ∂²_pp, ∂²_pq, ∂²_qq) of a separable kind.
/// Entries involving a zero coordinate are only used when that coordinate is
/// a free variable, which the caller rules out.
fn soft_derivs(kind: SoftDivergenceKind, a: f64, b: f64) -> [f64; 5] {
    use SoftDivergenceKind::*;
    match kind {
        KlSymmetrized => {
            if a <= 0.0 || b <= 0.0 {
                return [0.0; 5];
            }
            let l = a.ln() - b.ln();
            [l + 1.0 - b / a, -l + 1.0 - a / b, 1.0 / a + b / (a * a), -1.0 / a - 1.0 / b, 1.0 / b + a / (b * b)]
        }
        JensenShannon => {
            let m = 0.5 * (a + b);
            if m <= 0.0 {
                return [0.0; 5];
            }
            let gp = if a > 0.0 { 0.5 * (a / m).ln() } else { 0.0 };
            let gq = if b > 0.0 { 0.5 * (b / m).ln() } else { 0.0 };
            let hpp = if a > 0.0 { 0.5 / a - 0.25 / m } else { 0.0 };
            let hqq = if b > 0.0 { 0.5 / b - 0.25 / m } else { 0.0 };
            [gp, gq, hpp, -0.25 / m, hqq]
        }
        SquaredHellinger => {
            let (sa, sb) = (a.sqrt(), b.sqrt());
            let gp = if a > 0.0 { 0.5 * (1.0 - sb / sa) } else { 0.0 };
            let gq = if b > 0.0 { 0.5 * (1.0 - sa / sb) } else { 0.0 };
            let hpp = if a > 0.0 { 0.25 * sb / (a * sa) } else { 0.0 };
            let hqq = if b > 0.0 { 0.25 * sa / (b * sb) } else { 0.0 };
            let hpq = if a > 0.0 && b > 0.0 { -0.25 / (sa * sb) } else { 0.0 };
            [gp, gq, hpp, hpq, hqq]
        }
        SquaredEuclidean => [a - b, b - a, 1.0, -1.0, 1.0],
        TotalVariationSquaredSurrogate => unreachable!("handled through auxiliary variables"),
    }
}

/// (μ_F/2)·[√Δ_coh − √(Λ/(2μ_D))]₊².
pub fn relaxed_improvement_floor(mu_f: f64, mu_d: f64, lambda_cap: f64, delta_coh: f64) -> f64 {
    let gap = (delta_coh.max(0.0).sqrt() - (lambda_cap.max(0.0) / (2.0 * mu_d)).sqrt()).max(0.0);
    0.5 * mu_f * gap * gap
}

/// E[D(π(x), π(Φx))].
pub fn expected_soft_divergence(
    spec: &SoftDivergenceSpec,
    dist: &PromptDistribution,
    phi: &InvarianceMap,
    pi: &Model,
) -> Result<f64> {
    let w = dist.weights();
    let mut terms = Vec::with_capacity(pi.n());
    for x in 0..pi.n() {
        let y = phi.apply(x);
        if y != x {
            terms.push(w[x] * soft_divergence(spec, pi.row(x), pi.row(y)).map_err(|e| Error::at(x, e))?);
        }
    }
    Ok(compensated_sum(terms))
}

/// Penalized problem restricted to one orbit:
/// Σ_x w_x B_F(p_x ‖ π0_x) + λ Σ_x w_x D(p_x, p_{Φx}).
struct OrbitProblem<'a> {
    gen: &'a GeneratorSpec,
    kind: SoftDivergenceKind,
    penalty: f64,
    d: usize,
    members: Vec<usize>,
    weights: Vec<f64>,
    baseline: Vec<&'a [f64]>,
    /// (slot of x, slot of Φx, w_x) for x not fixed by Φ.
    pairs: Vec<(usize, usize, f64)>,
    /// var index of (slot, k); None for coordinates held at zero.
    var_index: Vec<Option<usize>>,
    /// first auxiliary variable of each pair (TV surrogate only): a at
    /// base + k, b at base + d + k with p − q = a − b.
    aux_base: Vec<usize>,
    num_vars: usize,
}

impl<'a> OrbitProblem<'a> {
    fn new(
        gen: &'a GeneratorSpec,
        kind: SoftDivergenceKind,
        penalty: f64,
        dist: &PromptDistribution,
        phi: &InvarianceMap,
        pi0: &'a Model,
        members: &[usize],
    ) -> Result<Self> {
        let d = pi0.d();
        let slot_of = |x: usize| members.iter().position(|&m| m == x).expect("orbit is closed under Φ");
        let pairs: Vec<(usize, usize, f64)> = members
            .iter()
            .enumerate()
            .filter(|(_, &x)| phi.apply(x) != x)
            .map(|(s, &x)| (s, slot_of(phi.apply(x)), dist.weights()[x]))
            .collect();
        let mut held = vec![false; members.len() * d];
        if gen.is_steep() {
            for (s, &x) in members.iter().enumerate() {
                for k in 0..d {
                    held[s * d + k] = pi0.get(x, k) == 0.0;
                }
            }
            if kind == SoftDivergenceKind::KlSymmetrized {
                // finite D needs equal supports across the orbit
                for k in 0..d {
                    if (0..members.len()).any(|s| held[s * d + k]) {
                        for s in 0..members.len() {
                            held[s * d + k] = true;
                        }
                    }
                }
            }
        }
        let mut var_index = vec![None; members.len() * d];
        let mut nv = 0;
        for (i, h) in held.iter().enumerate() {
            if !h {
                var_index[i] = Some(nv);
                nv += 1;
            }
        }
        for s in 0..members.len() {
            if (0..d).all(|k| var_index[s * d + k].is_none()) {
                return Err(Error::at(members[s], Error::Infeasible("no admissible outcome left in row".into())));
            }
        }
        let mut aux_base = Vec::new();
        if kind == SoftDivergenceKind::TotalVariationSquaredSurrogate {
            for _ in &pairs {
                aux_base.push(nv);
                nv += 2 * d;
            }
        }
        Ok(Self {
            gen,
            kind,
            penalty,
            d,
            members: members.to_vec(),
            weights: members.iter().map(|&x| dist.weights()[x]).collect(),
            baseline: members.iter().map(|&x| pi0.row(x)).collect(),
            pairs,
            var_index,
            aux_base,
            num_vars: nv,
        })
    }

    fn row(&self, s: usize, z: &[f64]) -> Vec<f64> {
        (0..self.d).map(|k| self.var_index[s * self.d + k].map_or(0.0, |j| z[j])).collect()
    }

    fn tv_mass(&self, pair: usize, z: &[f64]) -> f64 {
        let b = self.aux_base[pair];
        z[b..b + 2 * self.d].iter().sum()
    }

    fn constraints(&self) -> (DMatrix<f64>, DVector<f64>) {
        let d = self.d;
        let rows = self.members.len() + if self.aux_base.is_empty() { 0 } else { self.pairs.len() * d };
        let mut a = DMatrix::zeros(rows, self.num_vars);
        let mut b = DVector::zeros(rows);
        for s in 0..self.members.len() {
            for k in 0..d {
                if let Some(j) = self.var_index[s * d + k] {
                    a[(s, j)] = 1.0;
                }
            }
            b[s] = 1.0;
        }
        if !self.aux_base.is_empty() {
            for (pi, &(sx, sy, _)) in self.pairs.iter().enumerate() {
                for k in 0..d {
                    let r = self.members.len() + pi * d + k;
                    if let Some(j) = self.var_index[sx * d + k] {
                        a[(r, j)] += 1.0;
                    }
                    if let Some(j) = self.var_index[sy * d + k] {
                        a[(r, j)] -= 1.0;
                    }
                    a[(r, self.aux_base[pi] + k)] = -1.0;
                    a[(r, self.aux_base[pi] + d + k)] = 1.0;
                }
            }
        }
        (a, b)
    }

    fn start(&self) -> Vec<f64> {
        let d = self.d;
        let mut z = vec![0.0; self.num_vars];
        for s in 0..self.members.len() {
            let present: Vec<usize> = (0..d).filter_map(|k| self.var_index[s * d + k]).collect();
            for &j in &present {
                z[j] = 1.0 / present.len() as f64;
            }
        }
        for (pi, &(sx, sy, _)) in self.pairs.iter().enumerate() {
            if self.aux_base.is_empty() {
                break;
            }
            let (p, q) = (self.row(sx, &z), self.row(sy, &z));
            for k in 0..d {
                let diff = p[k] - q[k];
                let a = diff.max(0.0) + 1.0;
                z[self.aux_base[pi] + k] = a;
                z[self.aux_base[pi] + d + k] = a - diff;
            }
        }
        z
    }

    fn expand(&self, z: &[f64], out: &mut Model) {
        for (s, &x) in self.members.iter().enumerate() {
            out.row_mut(x).copy_from_slice(&self.row(s, z));
        }
    }
}

impl Objective for OrbitProblem<'_> {
    fn value(&self, z: &[f64]) -> f64 {
        if z.iter().any(|v| *v < 0.0) {
            return f64::INFINITY;
        }
        let mut terms = Vec::new();
        let rows: Vec<Vec<f64>> = (0..self.members.len()).map(|s| self.row(s, z)).collect();
        for (s, row) in rows.iter().enumerate() {
            match divergence(self.gen, row, self.baseline[s]) {
                Ok(v) => terms.push(self.weights[s] * v),
                Err(_) => return f64::INFINITY,
            }
        }
        for (pi, &(sx, sy, w)) in self.pairs.iter().enumerate() {
            let v = if self.kind == SoftDivergenceKind::TotalVariationSquaredSurrogate {
                let t = self.tv_mass(pi, z);
                0.5 * t * t
            } else {
                soft_value(self.kind, &rows[sx], &rows[sy])
            };
            if !v.is_finite() {
                return f64::INFINITY;
            }
            terms.push(self.penalty * w * v);
        }
        compensated_sum(terms)
    }

    fn gradient(&self, z: &[f64], g: &mut [f64]) {
        let d = self.d;
        g.iter_mut().for_each(|v| *v = 0.0);
        let rows: Vec<Vec<f64>> = (0..self.members.len()).map(|s| self.row(s, z)).collect();
        for (s, row) in rows.iter().enumerate() {
            let (Ok(a), Ok(b)) = (self.gen.gradient_partial(row), self.gen.gradient_partial(self.baseline[s])) else {
                continue;
            };
            for k in 0..d {
                if let (Some(j), Some(ak), Some(bk)) = (self.var_index[s * d + k], a[k], b[k]) {
                    g[j] += self.weights[s] * (ak - bk);
                }
            }
        }
        for (pi, &(sx, sy, w)) in self.pairs.iter().enumerate() {
            let c = self.penalty * w;
            if self.kind == SoftDivergenceKind::TotalVariationSquaredSurrogate {
                let t = self.tv_mass(pi, z);
                let base = self.aux_base[pi];
                for j in base..base + 2 * d {
                    g[j] += c * t;
                }
                continue;
            }
            for k in 0..d {
                let dv = soft_derivs(self.kind, rows[sx][k], rows[sy][k]);
                if let Some(j) = self.var_index[sx * d + k] {
                    g[j] += c * dv[0];
                }
                if let Some(j) = self.var_index[sy * d + k] {
                    g[j] += c * dv[1];
                }
            }
        }
    }

    fn add_hessian(&self, z: &[f64], h: &mut DMatrix<f64>) {
        let d = self.d;
        let rows: Vec<Vec<f64>> = (0..self.members.len()).map(|s| self.row(s, z)).collect();
        for (s, row) in rows.iter().enumerate() {
            let safe: Vec<f64> = if self.gen.is_steep() {
                row.iter().map(|v| if *v > 0.0 { *v } else { 1.0 }).collect()
            } else {
                row.clone()
            };
            let Ok(hess) = self.gen.hessian(&safe) else { continue };
            for k1 in 0..d {
                let Some(j1) = self.var_index[s * d + k1] else { continue };
                for k2 in 0..d {
                    let Some(j2) = self.var_index[s * d + k2] else { continue };
                    h[(j1, j2)] += self.weights[s] * hess[(k1, k2)];
                }
            }
        }
        if !self.gen.is_legendre() {
            for j in 0..self.num_vars {
                h[(j, j)] += 1e-12;
            }
        }
        for (pi, &(sx, sy, w)) in self.pairs.iter().enumerate() {
            let c = self.penalty * w;
            if self.kind == SoftDivergenceKind::TotalVariationSquaredSurrogate {
                let base = self.aux_base[pi];
                for i in base..base + 2 * d {
                    for j in base..base + 2 * d {
                        h[(i, j)] += c;
                    }
                }
                continue;
            }
            for k in 0..d {
                let dv = soft_derivs(self.kind, rows[sx][k], rows[sy][k]);
                let jx = self.var_index[sx * d + k];
                let jy = self.var_index[sy * d + k];
                if let Some(i) = jx {
                    h[(i, i)] += c * dv[2];
                }
                if let Some(j) = jy {
                    h[(j, j)] += c * dv[4];
                }
                if let (Some(i), Some(j)) = (jx, jy) {
                    h[(i, j)] += c * dv[3];
                    h[(j, i)] += c * dv[3];
                }
            }
        }
    }
}

fn check_pairing(gen: &GeneratorSpec, spec: &SoftDivergenceSpec) -> Result<()> {
    if gen.norm_tag() != spec.norm_tag {
        return Err(Error::Invalid(format!(
            "generator is strongly convex in {:?} but the soft divergence in {:?}",
            gen.norm_tag(),
            spec.norm_tag
        )));
    }
    Ok(())
}

fn check_model(dist: &PromptDistribution, phi: &InvarianceMap, pi0: &Model) -> Result<()> {
    if dist.len() != pi0.n() || phi.len() != pi0.n() {
        return Err(Error::Shape("map, distribution and model disagree on n".into()));
    }
    if !pi0.is_row_stochastic(1e-9) {
        return Err(Error::Domain("relaxed projection needs a row-stochastic baseline".into()));
    }
    Ok(())
}

/// Minimizer of E[B_F(π‖π0)] + λ E[D(π(x), π(Φx))] over row-stochastic
/// models; returns the model and the total Newton iterations.
fn penalized_solve(
    gen: &GeneratorSpec,
    kind: SoftDivergenceKind,
    penalty: f64,
    dist: &PromptDistribution,
    phi: &InvarianceMap,
    pi0: &Model,
    opts: &SolverOptions,
) -> Result<(Model, usize)> {
    let mut out = pi0.clone();
    let mut iterations = 0;
    let ipm_opts = IpmOptions { max_iter: opts.max_iter.min(500), ..IpmOptions::default() };
    for orbit in orbit_partition(phi).blocks() {
        if orbit.len() == 1 || penalty == 0.0 {
            continue;
        }
        let prob = OrbitProblem::new(gen, kind, penalty, dist, phi, pi0, orbit)?;
        let (a, b) = prob.constraints();
        let lower = vec![Some(0.0); prob.num_vars];
        let upper = vec![None; prob.num_vars];
        let cons = Constraints { eq_a: &a, eq_b: &b, lower: &lower, upper: &upper };
        let r = ipm::solve(&prob, &cons, &prob.start(), &ipm_opts)?;
        iterations += r.iterations;
        prob.expand(&r.z, &mut out);
    }
    Ok((out, iterations))
}

/// Penalized form: argmin E[B_F(π‖π0)] + λ E[D(π(x), π(Φx))].
pub fn penalized_project(
    gen: &GeneratorSpec,
    spec: &SoftDivergenceSpec,
    penalty: f64,
    dist: &PromptDistribution,
    phi: &InvarianceMap,
    pi0: &Model,
    opts: &SolverOptions,
) -> Result<(Model, SolveReport)> {
    let start = Instant::now();
    check_pairing(gen, spec)?;
    check_model(dist, phi, pi0)?;
    if !(penalty >= 0.0 && penalty.is_finite()) {
        return Err(Error::Invalid("penalty must be finite and nonnegative".into()));
    }
    let (pi, iterations) = penalized_solve(gen, spec.kind, penalty, dist, phi, pi0, opts)?;
    let objective = expected_divergence(gen, dist, &pi, pi0)?;
    Ok((
        pi,
        SolveReport {
            status: SolveStatus::Optimal,
            iterations,
            objective,
            kkt_residual: 0.0,
            wall_ns: start.elapsed().as_nanos() as u64,
        },
    ))
}

/// argmin E[B_F(π‖π0)] s.t. E[D(π(x), π(Φx))] ≤ Λ, by bisection on the
/// multiplier of the penalized form. Returns (π̂, λ, report); the report's
/// kkt_residual is max(λ·|E[D] − Λ|, [E[D] − Λ]₊).
pub fn relaxed_project(
    gen: &GeneratorSpec,
    spec: &SoftDivergenceSpec,
    lambda_cap: f64,
    dist: &PromptDistribution,
    phi: &InvarianceMap,
    pi0: &Model,
    opts: &SolverOptions,
) -> Result<(Model, f64, SolveReport)> {
    let start = Instant::now();
    check_pairing(gen, spec)?;
    check_model(dist, phi, pi0)?;
    if !(lambda_cap > 0.0 && lambda_cap.is_finite()) {
        return Err(Error::Invalid("budget Λ must be positive".into()));
    }
    let finish = |pi: Model, mult: f64, iterations: usize, c: f64| -> Result<(Model, f64, SolveReport)> {
        let objective = expected_divergence(gen, dist, &pi, pi0)?;
        let kkt = (mult * (c - lambda_cap).abs()).max((c - lambda_cap).max(0.0));
        let status = if kkt <= 1e-7 { SolveStatus::Optimal } else { SolveStatus::Inaccurate };
        Ok((pi, mult, SolveReport { status, iterations, objective, kkt_residual: kkt, wall_ns: start.elapsed().as_nanos() as u64 }))
    };
    let c0 = expected_soft_divergence(spec, dist, phi, pi0)?;
    if c0 <= lambda_cap {
        return finish(pi0.clone(), 0.0, 0, c0);
    }
    let mut iterations = 0;
    let mut eval = |lam: f64| -> Result<(Model, f64)> {
        let (pi, it) = penalized_solve(gen, spec.kind, lam, dist, phi, pi0, opts)?;
        iterations += it;
        let c = expected_soft_divergence(spec, dist, phi, &pi)?;
        Ok((pi, c))
    };
    let mut hi = 1.0;
    let mut best = eval(hi)?;
    let mut doublings = 0;
    while best.1 > lambda_cap {
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Solver("multiplier bracket exceeded 60 doublings".into()));
        }
        hi *= 2.0;
        best = eval(hi)?;
    }
    let mut lo = if doublings == 0 { 0.0 } else { hi / 2.0 };
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi || (lambda_cap - best.1) <= 1e-13 * lambda_cap.max(1e-300) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (pi, c) = eval(mid)?;
        if c > lambda_cap {
            lo = mid;
        } else {
            hi = mid;
            best = (pi, c);
        }
    }
    log::debug!("relaxed: multiplier {hi:.6e}, constraint {:.6e} vs budget {lambda_cap:.6e}", best.1);
    finish(best.0, hi, iterations, best.1)
}
