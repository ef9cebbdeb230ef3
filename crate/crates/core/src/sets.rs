//! Declarative convex model sets Π and their reduced (block-representative)
//! parameterization.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::coherence::BlockPartition;
use crate::error::{Error, Result};
use crate::model::{compensated_sum, Model};
use crate::solver::ipm::{self, Constraints, IpmOptions, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    /// Rows in the probability simplex.
    #[default]
    #[serde(alias = "full_simplex_product")]
    Simplex,
    /// Entries in [0, 1].
    #[serde(alias = "unit_cube_product")]
    Cube,
}

/// Σ_{x,k} coeffs[x][k] π(x)_k = rhs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineRow {
    pub coeffs: Vec<Vec<f64>>,
    pub rhs: f64,
}

/// Π as an intersection of a base product set with caps, affine equalities
/// and block equalities. The sphere flag marks the non-convex kernel example
/// set and is rejected by the convex machinery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ConvexModelSet {
    #[serde(default)]
    pub base: Base,
    /// (prompt, outcome, upper bound)
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub caps: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub affine: Vec<AffineRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlockPartition>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub sphere: bool,
}

impl ConvexModelSet {
    pub fn simplex() -> Self {
        Self::default()
    }

    pub fn cube() -> Self {
        Self { base: Base::Cube, ..Self::default() }
    }

    pub fn with_cap(mut self, prompt: usize, outcome: usize, bound: f64) -> Self {
        self.caps.push((prompt, outcome, bound));
        self
    }

    pub fn with_affine(mut self, coeffs: Vec<Vec<f64>>, rhs: f64) -> Self {
        self.affine.push(AffineRow { coeffs, rhs });
        self
    }

    pub fn with_blocks(mut self, blocks: BlockPartition) -> Self {
        self.blocks = Some(blocks);
        self
    }

    /// Same set with its block partition joined with `extra`.
    pub fn merged_with(&self, extra: &BlockPartition) -> Result<Self> {
        let mut s = self.clone();
        s.blocks = Some(match &self.blocks {
            Some(b) => b.join(extra)?,
            None => extra.clone(),
        });
        Ok(s)
    }

    /// Checks caps, affine coefficient shapes and block sizes against n×d.
    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        if self.sphere {
            return Err(Error::Invalid("sphere constraint is not convex".into()));
        }
        for &(x, k, u) in &self.caps {
            if x >= n || k >= d {
                return Err(Error::Shape(format!("cap ({x},{k}) outside {n}x{d}")));
            }
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::Invalid(format!("cap {u} outside [0,1]")));
            }
        }
        for row in &self.affine {
            if row.coeffs.len() != n || row.coeffs.iter().any(|r| r.len() != d) {
                return Err(Error::Shape("affine coefficient table shape".into()));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Invalid("affine row must be finite".into()));
            }
        }
        if let Some(b) = &self.blocks {
            if b.len() != n {
                return Err(Error::Shape("block partition size".into()));
            }
        }
        Ok(())
    }

    fn partition(&self, n: usize) -> BlockPartition {
        self.blocks.clone().unwrap_or_else(|| BlockPartition::singletons(n))
    }

    /// All constraints hold within `tol`.
    pub fn contains(&self, pi: &Model, tol: f64) -> bool {
        let (n, d) = (pi.n(), pi.d());
        if self.validate(n, d).is_err() {
            return false;
        }
        for row in pi.rows() {
            if row.iter().any(|v| *v < -tol) {
                return false;
            }
            match self.base {
                Base::Simplex => {
                    if (compensated_sum(row.iter().copied()) - 1.0).abs() > tol {
                        return false;
                    }
                }
                Base::Cube => {
                    if row.iter().any(|v| *v > 1.0 + tol) {
                        return false;
                    }
                }
            }
        }
        if self.caps.iter().any(|&(x, k, u)| pi.get(x, k) > u + tol) {
            return false;
        }
        for row in &self.affine {
            let lhs = compensated_sum(
                (0..n).flat_map(|x| (0..d).map(move |k| (x, k))).map(|(x, k)| row.coeffs[x][k] * pi.get(x, k)),
            );
            if (lhs - row.rhs).abs() > tol {
                return false;
            }
        }
        if let Some(b) = &self.blocks {
            for block in b.blocks() {
                let first = pi.row(block[0]);
                for &x in &block[1..] {
                    if pi.row(x).iter().zip(first).any(|(a, c)| (a - c).abs() > tol) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Nearest point in the ambient Euclidean metric.
    ///
    /// Blocks are exact (block means); the remaining atoms (capped simplex or
    /// box per group, weighted hyperplanes) are combined by Dykstra's method.
    pub fn euclidean_project(&self, z: &Model) -> Result<Model> {
        self.validate(z.n(), z.d())?;
        let (n, d) = (z.n(), z.d());
        let part = self.partition(n);
        let g = part.num_blocks();
        let w: Vec<f64> = part.blocks().iter().map(|b| b.len() as f64).collect();
        let mut y = vec![0.0; g * d];
        for (gi, b) in part.blocks().iter().enumerate() {
            for k in 0..d {
                y[gi * d + k] = compensated_sum(b.iter().map(|&x| z.get(x, k))) / w[gi];
            }
        }
        let mut caps = vec![f64::INFINITY; g * d];
        for &(x, k, u) in &self.caps {
            let i = part.block_of(x) * d + k;
            caps[i] = caps[i].min(u);
        }
        let planes: Vec<(Vec<f64>, f64)> = self
            .affine
            .iter()
            .map(|row| {
                let mut a = vec![0.0; g * d];
                for x in 0..n {
                    for k in 0..d {
                        a[part.block_of(x) * d + k] += row.coeffs[x][k];
                    }
                }
                (a, row.rhs)
            })
            .collect();
        for (a, b) in &planes {
            if a.iter().all(|v| *v == 0.0) && b.abs() > 1e-12 {
                return Err(Error::Infeasible("affine row has no support".into()));
            }
        }
        let base_proj = |v: &mut [f64]| -> Result<()> {
            for gi in 0..g {
                let seg = &mut v[gi * d..(gi + 1) * d];
                let cap = &caps[gi * d..(gi + 1) * d];
                match self.base {
                    Base::Simplex => capped_simplex_projection(seg, cap)?,
                    Base::Cube => {
                        for (s, c) in seg.iter_mut().zip(cap) {
                            *s = s.clamp(0.0, c.min(1.0));
                        }
                    }
                }
            }
            Ok(())
        };
        // Exact projection onto the joint affine subspace in the block-weighted
        // metric: v ← v − W⁻¹Aᵀ(AW⁻¹Aᵀ)⁺(Av − b).
        let dim = g * d;
        let a_mat = DMatrix::from_fn(planes.len(), dim, |r, i| planes[r].0[i]);
        let b_vec = DVector::from_iterator(planes.len(), planes.iter().map(|p| p.1));
        let winv = DVector::from_iterator(dim, (0..dim).map(|i| 1.0 / w[i / d]));
        let gram_pinv = if planes.is_empty() {
            DMatrix::zeros(0, 0)
        } else {
            let aw = DMatrix::from_fn(planes.len(), dim, |r, i| a_mat[(r, i)] * winv[i]);
            (&aw * a_mat.transpose())
                .pseudo_inverse(1e-12)
                .map_err(|e| Error::SingularMatrix(e.to_string()))?
        };
        let affine_proj = |v: &mut [f64]| {
            let r = &a_mat * DVector::from_column_slice(v) - &b_vec;
            let mult = &gram_pinv * r;
            let step = a_mat.transpose() * mult;
            for i in 0..v.len() {
                v[i] -= winv[i] * step[i];
            }
        };
        let affine_violation = |v: &[f64]| (&a_mat * DVector::from_column_slice(v) - &b_vec).amax();
        if planes.is_empty() {
            base_proj(&mut y)?;
        } else {
            // Dykstra between the base product and the affine subspace; the
            // subspace needs no correction term.
            let mut incr = vec![0.0; dim];
            let mut converged = false;
            for _ in 0..10_000 {
                let before = y.clone();
                let mut v: Vec<f64> = y.iter().zip(&incr).map(|(a, b)| a + b).collect();
                let pre = v.clone();
                base_proj(&mut v)?;
                for i in 0..dim {
                    incr[i] = pre[i] - v[i];
                }
                affine_proj(&mut v);
                y = v;
                let change = y.iter().zip(&before).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if change <= 1e-13 {
                    converged = true;
                    break;
                }
            }
            // The affine step leaves y slightly outside the base; finish on
            // the base and accept when the planes still hold.
            let mut fin = y.clone();
            base_proj(&mut fin)?;
            if converged && affine_violation(&fin) <= 1e-9 {
                y = fin;
            } else {
                log::debug!("dykstra stalled (affine violation {:.3e}); solving the QP", affine_violation(&fin));
                return self.euclidean_project_qp(z);
            }
        }
        let mut out = Model::zeros(n, d);
        for x in 0..n {
            let gi = part.block_of(x);
            out.row_mut(x).copy_from_slice(&y[gi * d..(gi + 1) * d]);
        }
        Ok(out)
    }

    /// Euclidean projection as a quadratic program over the reduced
    /// variables, used when alternating projections stall.
    fn euclidean_project_qp(&self, z: &Model) -> Result<Model> {
        let n = z.n();
        let opts = crate::projection::SolverOptions::default();
        let gen = crate::generators::GeneratorSpec::squared_euclidean();
        let weights = vec![1.0 / n as f64; n];
        let (out, report) = crate::projection::bregman_project_weighted(&gen, &weights, self, z, None, &opts)?;
        if report.status == crate::projection::SolveStatus::Inaccurate {
            log::warn!("euclidean projection QP finished with KKT residual {:.3e}", report.kkt_residual);
        }
        Ok(out)
    }

    /// A strictly feasible point: the canonical point (uniform rows, or ½ for
    /// the cube) when strictly feasible, else the analytic center.
    pub fn feasible_point(&self, n: usize, d: usize) -> Result<Model> {
        self.validate(n, d)?;
        let fill = match self.base {
            Base::Simplex => 1.0 / d as f64,
            Base::Cube => 0.5,
        };
        let canon = Model::from_flat(n, d, vec![fill; n * d])?;
        let strict_caps = self.caps.iter().all(|&(x, k, u)| canon.get(x, k) < u);
        if strict_caps && self.contains(&canon, 1e-12) {
            return Ok(canon);
        }
        let red = Reduced::build(self, n, d, &|_, _| None)?;
        red.check_feasible()?;
        let z = red.analytic_center()?;
        Ok(red.expand(&z))
    }
}

/// Euclidean projection onto {Σ v = 1, 0 ≤ v ≤ cap}.
pub(crate) fn capped_simplex_projection(v: &mut [f64], cap: &[f64]) -> Result<()> {
    let caps: Vec<f64> = cap.iter().map(|c| c.min(1.0)).collect();
    if compensated_sum(caps.iter().copied()) < 1.0 - 1e-12 {
        return Err(Error::Infeasible("caps leave no room on the simplex".into()));
    }
    let total = |tau: f64| compensated_sum(v.iter().zip(&caps).map(|(x, c)| (x - tau).clamp(0.0, *c)));
    let mut lo = v.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    // Exact threshold from the active pattern at the bracket midpoint.
    let tau0 = 0.5 * (lo + hi);
    let mut free = 0usize;
    let mut acc = Vec::new();
    for (x, c) in v.iter().zip(&caps) {
        let t = x - tau0;
        if t >= *c {
            acc.push(*c);
        } else if t > 0.0 {
            free += 1;
            acc.push(*x);
        }
    }
    let tau = if free > 0 { (compensated_sum(acc) - 1.0) / free as f64 } else { tau0 };
    for (x, c) in v.iter_mut().zip(&caps) {
        *x = (*x - tau).clamp(0.0, *c);
    }
    Ok(())
}

/// Variables c_{g,k} for each group g of the merged partition and outcome k,
/// minus fixed coordinates.
#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    pub n: usize,
    pub d: usize,
    pub groups: BlockPartition,
    /// var_index[g*d + k]
    pub var_index: Vec<Option<usize>>,
    /// (group, outcome) per variable
    pub vars: Vec<(usize, usize)>,
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
    pub eq_a: DMatrix<f64>,
    pub eq_b: DVector<f64>,
    /// value of each non-variable (g, k); zero for capped-out coordinates
    pub fixed: Vec<f64>,
}

impl Reduced {
    /// `fixed(g, k) = Some(v)` removes c_{g,k} and holds it at v.
    pub fn build(
        set: &ConvexModelSet,
        n: usize,
        d: usize,
        fixed: &dyn Fn(usize, usize) -> Option<f64>,
    ) -> Result<Self> {
        set.validate(n, d)?;
        let groups = set.partition(n);
        let ng = groups.num_blocks();
        let mut caps = vec![f64::INFINITY; ng * d];
        if set.base == Base::Cube {
            caps.iter_mut().for_each(|c| *c = 1.0);
        }
        for &(x, k, u) in &set.caps {
            let i = groups.block_of(x) * d + k;
            caps[i] = caps[i].min(u);
        }
        let mut var_index = vec![None; ng * d];
        let mut vars = Vec::new();
        let mut upper = Vec::new();
        let mut held = vec![0.0; ng * d];
        for gi in 0..ng {
            for k in 0..d {
                let i = gi * d + k;
                if let Some(v) = fixed(gi, k) {
                    if v < -1e-12 || v > caps[i] + 1e-12 {
                        return Err(Error::Infeasible(format!("held value {v} outside its bounds")));
                    }
                    held[i] = v;
                    continue;
                }
                if caps[i] <= 0.0 {
                    continue;
                }
                var_index[i] = Some(vars.len());
                vars.push((gi, k));
                upper.push(caps[i].is_finite().then_some(caps[i]));
            }
        }
        let nv = vars.len();
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        if set.base == Base::Simplex {
            for gi in 0..ng {
                let mut a = vec![0.0; nv];
                let mut rhs = 1.0;
                for k in 0..d {
                    match var_index[gi * d + k] {
                        Some(j) => a[j] = 1.0,
                        None => rhs -= held[gi * d + k],
                    }
                }
                rows.push((a, rhs));
            }
        }
        for row in &set.affine {
            let mut a = vec![0.0; nv];
            let mut rhs = vec![row.rhs];
            for x in 0..n {
                for k in 0..d {
                    let i = groups.block_of(x) * d + k;
                    match var_index[i] {
                        Some(j) => a[j] += row.coeffs[x][k],
                        None => rhs.push(-row.coeffs[x][k] * held[i]),
                    }
                }
            }
            rows.push((a, compensated_sum(rhs)));
        }
        let (eq_a, eq_b) = independent_rows(&rows, nv)?;
        Ok(Self {
            n,
            d,
            groups,
            var_index,
            vars,
            lower: vec![Some(0.0); nv],
            upper,
            eq_a,
            eq_b,
            fixed: held,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn constraints(&self) -> Constraints<'_> {
        Constraints { eq_a: &self.eq_a, eq_b: &self.eq_b, lower: &self.lower, upper: &self.upper }
    }

    pub fn expand(&self, z: &[f64]) -> Model {
        let mut out = Model::zeros(self.n, self.d);
        for x in 0..self.n {
            let gi = self.groups.block_of(x);
            for k in 0..self.d {
                let i = gi * self.d + k;
                out.set(x, k, self.var_index[i].map_or(self.fixed[i], |j| z[j]));
            }
        }
        out
    }

    /// Group means of a table, restricted to the variables.
    pub fn reduce(&self, pi: &Model) -> Vec<f64> {
        self.vars
            .iter()
            .map(|&(gi, k)| {
                let b = &self.groups.blocks()[gi];
                compensated_sum(b.iter().map(|&x| pi.get(x, k))) / b.len() as f64
            })
            .collect()
    }

    /// Strictly interior starting point for the bounds (not necessarily on
    /// the equality constraints).
    pub fn interior_start(&self) -> Vec<f64> {
        let mut per_group = vec![0usize; self.groups.num_blocks()];
        for &(gi, _) in &self.vars {
            per_group[gi] += 1;
        }
        self.vars
            .iter()
            .enumerate()
            .map(|(j, &(gi, _))| {
                let guess = 1.0 / per_group[gi].max(1) as f64;
                match self.upper[j] {
                    Some(u) => guess.min(0.5 * u),
                    None => guess,
                }
            })
            .collect()
    }

    /// Minimizes ½‖Ez − e‖² over the box; errors when the minimum is
    /// positive.
    pub fn check_feasible(&self) -> Result<()> {
        if self.eq_a.nrows() == 0 {
            return Ok(());
        }
        struct Phase1<'a>(&'a DMatrix<f64>, &'a DVector<f64>);
        impl Objective for Phase1<'_> {
            fn value(&self, z: &[f64]) -> f64 {
                let r = self.0 * DVector::from_column_slice(z) - self.1;
                0.5 * r.norm_squared()
            }
            fn gradient(&self, z: &[f64], g: &mut [f64]) {
                let r = self.0 * DVector::from_column_slice(z) - self.1;
                let v = self.0.transpose() * r;
                g.copy_from_slice(v.as_slice());
            }
            fn add_hessian(&self, _z: &[f64], h: &mut DMatrix<f64>) {
                *h += self.0.transpose() * self.0;
            }
        }
        let empty_a = DMatrix::zeros(0, self.num_vars());
        let empty_b = DVector::zeros(0);
        let cons = Constraints { eq_a: &empty_a, eq_b: &empty_b, lower: &self.lower, upper: &self.upper };
        let obj = Phase1(&self.eq_a, &self.eq_b);
        let res = ipm::solve(&obj, &cons, &self.interior_start(), &IpmOptions::default())?;
        let r = (&self.eq_a * DVector::from_column_slice(&res.z) - &self.eq_b).amax();
        if r > 1e-8 {
            return Err(Error::Infeasible(format!("constraints violated by at least {r:.3e}")));
        }
        Ok(())
    }

    /// Maximizer of Σ log slacks subject to the equalities.
    pub fn analytic_center(&self) -> Result<Vec<f64>> {
        struct Barrier<'a>(&'a [Option<f64>], &'a [Option<f64>]);
        impl Objective for Barrier<'_> {
            fn value(&self, z: &[f64]) -> f64 {
                let mut v = 0.0;
                for (i, zi) in z.iter().enumerate() {
                    for s in [self.0[i].map(|l| zi - l), self.1[i].map(|u| u - zi)].into_iter().flatten() {
                        if s <= 0.0 {
                            return f64::INFINITY;
                        }
                        v -= s.ln();
                    }
                }
                v
            }
            fn gradient(&self, z: &[f64], g: &mut [f64]) {
                for (i, zi) in z.iter().enumerate() {
                    g[i] = 0.0;
                    if let Some(l) = self.0[i] {
                        g[i] -= 1.0 / (zi - l);
                    }
                    if let Some(u) = self.1[i] {
                        g[i] += 1.0 / (u - zi);
                    }
                }
            }
            fn add_hessian(&self, z: &[f64], h: &mut DMatrix<f64>) {
                for (i, zi) in z.iter().enumerate() {
                    if let Some(l) = self.0[i] {
                        h[(i, i)] += 1.0 / ((zi - l) * (zi - l));
                    }
                    if let Some(u) = self.1[i] {
                        h[(i, i)] += 1.0 / ((u - zi) * (u - zi));
                    }
                }
            }
        }
        let none = vec![None; self.num_vars()];
        let cons = Constraints { eq_a: &self.eq_a, eq_b: &self.eq_b, lower: &none, upper: &none };
        let obj = Barrier(&self.lower, &self.upper);
        let res = ipm::solve(&obj, &cons, &self.interior_start(), &IpmOptions::default())
            .map_err(|e| Error::Infeasible(format!("no strictly feasible point: {e}")))?;
        Ok(res.z)
    }
}

/// Orthonormalized independent equality rows; inconsistent dependent rows
/// are reported as infeasible.
fn independent_rows(rows: &[(Vec<f64>, f64)], nv: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let mut basis: Vec<(Vec<f64>, f64)> = Vec::new();
    for (a, b) in rows {
        let norm0 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = a.clone();
        let mut rhs = *b;
        for _ in 0..2 {
            for (q, t) in &basis {
                let c: f64 = v.iter().zip(q).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                rhs -= c * t;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-10 * norm0.max(1e-300) || norm0 == 0.0 {
            if rhs.abs() > 1e-9 * (1.0 + b.abs()) {
                return Err(Error::Infeasible("inconsistent equality constraints".into()));
            }
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push((v, rhs / norm));
    }
    let m = basis.len();
    let mut a = DMatrix::zeros(m, nv);
    let mut bvec = DVector::zeros(m);
    for (i, (q, t)) in basis.into_iter().enumerate() {
        for j in 0..nv {
            a[(i, j)] = q[j];
        }
        bvec[i] = t;
    }
    Ok((a, bvec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn minimax_set() -> ConvexModelSet {
        ConvexModelSet::simplex().with_cap(0, 0, 0.5).with_cap(1, 0, 0.5)
    }

    fn sum_set() -> ConvexModelSet {
        ConvexModelSet::cube().with_affine(vec![vec![1.0], vec![1.0], vec![1.0]], 1.0)
    }

    #[test]
    fn contains_examples() {
        let pi = Model::conditional(&[vec![0.2, 0.3, 0.5]]).unwrap();
        assert!(ConvexModelSet::simplex().contains(&pi, 1e-12));
        let bad = Model::conditional(&[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
        assert!(!minimax_set().contains(&bad, 1e-12));
        let pi0 = Model::column(&[0.3, 0.3, 0.6]).unwrap();
        assert!(!sum_set().contains(&pi0, 1e-12));
    }

    #[test]
    fn projection_examples() {
        let pi0 = Model::column(&[0.3, 0.3, 0.6]).unwrap();
        let p = sum_set().euclidean_project(&pi0).unwrap();
        let shift = 0.2 / 3.0;
        for (x, v) in [0.3, 0.3, 0.6].iter().enumerate() {
            assert_abs_diff_eq!(p.get(x, 0), v - shift, epsilon = 1e-12);
        }
        let blocks = ConvexModelSet::cube().with_blocks(BlockPartition::new(vec![vec![0, 1]]).unwrap());
        let p = blocks.euclidean_project(&Model::column(&[0.1, 0.8]).unwrap()).unwrap();
        assert_abs_diff_eq!(p.get(0, 0), 0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(1, 0), 0.45, epsilon = 1e-15);
        let inside = Model::conditional(&[vec![0.2, 0.3, 0.5], vec![0.4, 0.4, 0.2]]).unwrap();
        assert_eq!(minimax_set().euclidean_project(&inside).unwrap().max_abs_diff(&inside), 0.0);
    }

    #[test]
    fn feasible_point_examples() {
        let u = ConvexModelSet::simplex().feasible_point(2, 3).unwrap();
        assert!(u.rows().all(|r| r.iter().all(|v| (*v - 1.0 / 3.0).abs() < 1e-15)));
        let u = minimax_set().feasible_point(2, 3).unwrap();
        assert!(u.rows().all(|r| r.iter().all(|v| (*v - 1.0 / 3.0).abs() < 1e-15)));
        let contradictory = ConvexModelSet::cube()
            .with_cap(0, 0, 0.1)
            .with_affine(vec![vec![1.0], vec![0.0]], 0.5);
        assert!(matches!(contradictory.feasible_point(2, 1), Err(Error::Infeasible(_))));
        let p = sum_set().feasible_point(3, 1).unwrap();
        assert!(sum_set().contains(&p, 1e-9));
        assert!(p.as_slice().iter().all(|v| *v > 0.0 && *v < 1.0));
    }

    #[test]
    fn capped_simplex_exact() {
        let mut v = vec![0.9, 0.5, 0.1];
        capped_simplex_projection(&mut v, &[0.5, f64::INFINITY, f64::INFINITY]).unwrap();
        // oracle: first coordinate capped, remaining mass 0.5 split by shifting
        assert_abs_diff_eq!(v[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(v[2], 0.05, epsilon = 1e-15);
    }

    #[test]
    fn json_schema() {
        let s: ConvexModelSet = serde_json::from_str(
            r#"{"base":"simplex","caps":[[0,0,0.5]],"affine":[{"coeffs":[[1,0],[0,0]],"rhs":0.25}],"blocks":[[0,1]]}"#,
        )
        .unwrap();
        assert_eq!(s.caps, vec![(0, 0, 0.5)]);
        assert_eq!(s.blocks.as_ref().unwrap().num_blocks(), 1);
    }
}
