//! Primal-dual interior-point Newton method for
//!
//!   minimize f(z)  subject to  E z = e,  lo_i ≤ z_i ≤ up_i (optional bounds)
//!
//! with f convex and twice differentiable on an open domain. Iterates stay
//! strictly inside the bounds; equality feasibility is reached by the
//! infeasible-start Newton step.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smooth convex objective over the reduced variables.
pub(crate) trait Objective {
    /// f(z), or +∞ outside the domain.
    fn value(&self, z: &[f64]) -> f64;
    fn gradient(&self, z: &[f64], g: &mut [f64]);
    /// Adds ∇²f(z) into `h`.
    fn add_hessian(&self, z: &[f64], h: &mut DMatrix<f64>);
}

/// f(z) = cᵀz.
pub(crate) struct Linear<'a>(pub &'a [f64]);

impl Objective for Linear<'_> {
    fn value(&self, z: &[f64]) -> f64 {
        self.0.iter().zip(z).map(|(a, b)| a * b).sum()
    }
    fn gradient(&self, _z: &[f64], g: &mut [f64]) {
        g.copy_from_slice(self.0);
    }
    fn add_hessian(&self, _z: &[f64], _h: &mut DMatrix<f64>) {}
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct IpmOptions {
    pub max_iter: usize,
    pub tol_feas: f64,
    pub tol_gap: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self { max_iter: 500, tol_feas: 1e-12, tol_gap: 1e-13 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct IpmResult {
    pub z: Vec<f64>,
    pub iterations: usize,
    pub r_dual: f64,
    pub r_pri: f64,
    pub gap: f64,
}

pub(crate) struct Constraints<'a> {
    pub eq_a: &'a DMatrix<f64>,
    pub eq_b: &'a DVector<f64>,
    pub lower: &'a [Option<f64>],
    pub upper: &'a [Option<f64>],
}

#[derive(Clone, Copy)]
struct Bound {
    var: usize,
    value: f64,
    /// +1 for z ≤ value, −1 for z ≥ value.
    sign: f64,
}

impl Bound {
    fn slack(&self, z: &[f64]) -> f64 {
        self.sign * (self.value - z[self.var])
    }
}

struct Residual {
    dual: Vec<f64>,
    cent: Vec<f64>,
    pri: Vec<f64>,
}

impl Residual {
    fn norm(&self) -> f64 {
        self.dual
            .iter()
            .chain(&self.cent)
            .chain(&self.pri)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Runs the method from `z0`, which must lie strictly inside the bounds and
/// in the domain of f.
pub(crate) fn solve(
    obj: &dyn Objective,
    cons: &Constraints<'_>,
    z0: &[f64],
    opts: &IpmOptions,
) -> Result<IpmResult> {
    let nv = z0.len();
    let m = cons.eq_a.nrows();
    if cons.eq_a.ncols() != nv && m > 0 {
        return Err(Error::Solver("equality matrix width differs from variable count".into()));
    }
    let mut bounds = Vec::new();
    for i in 0..nv {
        if let Some(lo) = cons.lower[i] {
            bounds.push(Bound { var: i, value: lo, sign: -1.0 });
        }
        if let Some(up) = cons.upper[i] {
            bounds.push(Bound { var: i, value: up, sign: 1.0 });
        }
    }
    let nb = bounds.len();
    let mut z = z0.to_vec();
    if bounds.iter().any(|b| !(b.slack(&z) > 0.0)) || !obj.value(&z).is_finite() {
        return Err(Error::Solver("starting point is not strictly interior".into()));
    }
    let mut lam = vec![1.0; nb];
    let mut nu = vec![0.0; m];
    let mu_factor = 10.0;

    let mut grad = vec![0.0; nv];
    let residual = |z: &[f64], lam: &[f64], nu: &[f64], t: f64, grad: &mut [f64]| -> Residual {
        obj.gradient(z, grad);
        let mut dual = grad.to_vec();
        for (b, l) in bounds.iter().zip(lam) {
            // ∇(constraint) = sign · e_var
            dual[b.var] += b.sign * l;
        }
        if m > 0 {
            let etn = cons.eq_a.transpose() * DVector::from_column_slice(nu);
            dual.iter_mut().zip(etn.iter()).for_each(|(d, v)| *d += v);
        }
        let cent = bounds
            .iter()
            .zip(lam)
            .map(|(b, l)| l * b.slack(z) - if nb > 0 { 1.0 / t } else { 0.0 })
            .collect();
        let pri = if m > 0 {
            (cons.eq_a * DVector::from_column_slice(z) - cons.eq_b).iter().copied().collect()
        } else {
            Vec::new()
        };
        Residual { dual, cent, pri }
    };

    let scale_b = 1.0 + inf_norm(cons.eq_b.as_slice());
    let mut last = None;
    for iter in 0..opts.max_iter {
        let eta: f64 = bounds.iter().zip(&lam).map(|(b, l)| l * b.slack(&z)).sum();
        let t = if nb > 0 { mu_factor * nb as f64 / eta } else { 1.0 };
        let r = residual(&z, &lam, &nu, t, &mut grad);
        let gscale = 1.0 + inf_norm(&grad);
        let rd = inf_norm(&r.dual);
        let rp = inf_norm(&r.pri);
        last = Some((rd, rp, eta));
        if rd <= opts.tol_feas * gscale && rp <= opts.tol_feas * scale_b && eta <= opts.tol_gap {
            let z = polish(obj, cons, &bounds, &lam, z);
            return Ok(IpmResult { z, iterations: iter, r_dual: rd, r_pri: rp, gap: eta });
        }

        // Newton system.
        let dim = nv + m;
        let mut kkt = DMatrix::<f64>::zeros(dim, dim);
        {
            let mut h = DMatrix::<f64>::zeros(nv, nv);
            obj.add_hessian(&z, &mut h);
            kkt.view_mut((0, 0), (nv, nv)).copy_from(&h);
        }
        let mut rhs = DVector::<f64>::zeros(dim);
        for i in 0..nv {
            rhs[i] = -grad[i];
        }
        if m > 0 {
            let etn = cons.eq_a.transpose() * DVector::from_column_slice(&nu);
            for i in 0..nv {
                rhs[i] -= etn[i];
            }
        }
        for (b, l) in bounds.iter().zip(&lam) {
            let s = b.slack(&z);
            kkt[(b.var, b.var)] += l / s;
            rhs[b.var] -= b.sign / (t * s);
        }
        for r_i in 0..m {
            for c in 0..nv {
                kkt[(nv + r_i, c)] = cons.eq_a[(r_i, c)];
                kkt[(c, nv + r_i)] = cons.eq_a[(r_i, c)];
            }
            rhs[nv + r_i] = -r.pri[r_i];
        }
        let step = solve_refined(&kkt, &rhs)
            .ok_or_else(|| Error::Solver("singular Newton system".into()))?;
        let dz: Vec<f64> = step.rows(0, nv).iter().copied().collect();
        let dnu: Vec<f64> = step.rows(nv, m).iter().copied().collect();
        let dlam: Vec<f64> = bounds
            .iter()
            .zip(&lam)
            .map(|(b, l)| {
                let s = b.slack(&z);
                // ∇gᵀΔz = sign · Δz_var
                (l / s) * (b.sign * dz[b.var]) + 1.0 / (t * s) - l
            })
            .collect();

        let mut smax: f64 = 1.0;
        for (l, dl) in lam.iter().zip(&dlam) {
            if *dl < 0.0 {
                smax = smax.min(-l / dl);
            }
        }
        let mut s = 0.99 * smax;
        let trial = |s: f64| -> Vec<f64> { z.iter().zip(&dz).map(|(a, b)| a + s * b).collect() };
        let mut zn = trial(s);
        while s > 1e-16
            && (bounds.iter().any(|b| !(b.slack(&zn) > 0.0)) || !obj.value(&zn).is_finite())
        {
            s *= 0.5;
            zn = trial(s);
        }
        let r0 = r.norm();
        let mut accepted = false;
        let mut gtmp = vec![0.0; nv];
        while s > 1e-16 {
            zn = trial(s);
            let ln: Vec<f64> = lam.iter().zip(&dlam).map(|(a, b)| a + s * b).collect();
            let nn: Vec<f64> = nu.iter().zip(&dnu).map(|(a, b)| a + s * b).collect();
            let inside = bounds.iter().all(|b| b.slack(&zn) > 0.0) && obj.value(&zn).is_finite();
            if inside && residual(&zn, &ln, &nn, t, &mut gtmp).norm() <= (1.0 - 0.01 * s) * r0 {
                z = zn;
                lam = ln;
                nu = nn;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            // Stalled at rounding level; accept if close enough.
            if rd <= 1e-8 * gscale && rp <= 1e-9 * scale_b && eta <= 1e-9 {
                let z = polish(obj, cons, &bounds, &lam, z);
                return Ok(IpmResult { z, iterations: iter, r_dual: rd, r_pri: rp, gap: eta });
            }
            return Err(Error::Solver(format!(
                "line search stalled (dual {rd:.3e}, primal {rp:.3e}, gap {eta:.3e})"
            )));
        }
    }
    let (rd, rp, eta) = last.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    if rd <= 1e-8 && rp <= 1e-9 && eta <= 1e-9 {
        let z = polish(obj, cons, &bounds, &lam, z);
        return Ok(IpmResult { z, iterations: opts.max_iter, r_dual: rd, r_pri: rp, gap: eta });
    }
    Err(Error::Solver(format!(
        "iteration cap {} reached (dual {rd:.3e}, primal {rp:.3e}, gap {eta:.3e})",
        opts.max_iter
    )))
}

/// Active-set Newton polish. Bounds with slack below their multiplier are
/// fixed; Newton on the remaining equality-constrained problem removes the
/// O(√gap) error the barrier leaves on degenerate bounds. The polished point
/// is kept only if it is feasible, stationary on its face and no worse than
/// `z`; otherwise `z` is returned.
fn polish(obj: &dyn Objective, cons: &Constraints<'_>, bounds: &[Bound], lam: &[f64], z: Vec<f64>) -> Vec<f64> {
    let nv = z.len();
    let mut fixed: Vec<Option<(f64, f64)>> = vec![None; nv];
    for (b, l) in bounds.iter().zip(lam) {
        if b.slack(&z) < *l {
            if fixed[b.var].is_some() {
                return z;
            }
            fixed[b.var] = Some((b.value, b.sign));
        }
    }
    let free: Vec<usize> = (0..nv).filter(|i| fixed[*i].is_none()).collect();
    let nf = free.len();
    // equality rows restricted to the free variables can become dependent
    // (or vanish) once bounds are pinned; keep an independent subset and
    // check the full residual at the end
    let rows = independent_free_rows(cons.eq_a, &free);
    let m = rows.len();
    let mut x = z.clone();
    for (i, f) in fixed.iter().enumerate() {
        if let Some((v, _)) = f {
            x[i] = *v;
        }
    }
    if !obj.value(&x).is_finite() {
        return z;
    }
    let mut g = vec![0.0; nv];
    let mut nu = DVector::<f64>::zeros(m);
    // every variable pinned: the vertex itself is the candidate
    let mut converged = nf + m == 0;
    for _ in 0..if converged { 0 } else { 60 } {
        obj.gradient(&x, &mut g);
        let mut h = DMatrix::<f64>::zeros(nv, nv);
        obj.add_hessian(&x, &mut h);
        let dim = nf + m;
        let mut kkt = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate() {
                kkt[(a, b)] = h[(i, j)];
            }
            rhs[a] = -g[i];
            for (r, &row) in rows.iter().enumerate() {
                kkt[(nf + r, a)] = cons.eq_a[(row, i)];
                kkt[(a, nf + r)] = cons.eq_a[(row, i)];
            }
        }
        if m > 0 {
            let res = cons.eq_a * DVector::from_column_slice(&x) - cons.eq_b;
            for (r, &row) in rows.iter().enumerate() {
                rhs[nf + r] = -res[row];
            }
        }
        let Some(step) = solve_refined(&kkt, &rhs) else { return z };
        nu = step.rows(nf, m).into_owned();
        let size = free.iter().enumerate().map(|(a, _)| step[a].abs()).fold(0.0, f64::max);
        let mut s = 1.0;
        let trial = |s: f64| {
            let mut t = x.clone();
            for (a, &i) in free.iter().enumerate() {
                t[i] += s * step[a];
            }
            t
        };
        let mut xn = trial(s);
        while !obj.value(&xn).is_finite() && s > 1e-12 {
            s *= 0.5;
            xn = trial(s);
        }
        if !obj.value(&xn).is_finite() {
            return z;
        }
        x = xn;
        if s == 1.0 && size <= 1e-15 * (1.0 + inf_norm(&x)) {
            converged = true;
            break;
        }
    }
    if !converged {
        return z;
    }
    // Stationarity on the free variables. Multipliers of fixed bounds are not
    // unique when equality rows tie fixed variables together, so their sign
    // is not checked; the objective comparison below guards the face choice.
    obj.gradient(&x, &mut g);
    let gscale = 1.0 + inf_norm(&g);
    let mut etn = DVector::<f64>::zeros(nv);
    for (r, &row) in rows.iter().enumerate() {
        for i in 0..nv {
            etn[i] += cons.eq_a[(row, i)] * nu[r];
        }
    }
    if free.iter().any(|&i| (g[i] + etn[i]).abs() > 1e-9 * gscale) {
        return z;
    }
    for b in bounds {
        let sl = b.slack(&x);
        if sl < -1e-12 * (1.0 + b.value.abs()) {
            return z;
        }
        if sl < 0.0 {
            x[b.var] = b.value;
        }
    }
    if cons.eq_a.nrows() > 0 {
        let res = cons.eq_a * DVector::from_column_slice(&x) - cons.eq_b;
        if inf_norm(res.as_slice()) > 1e-11 * (1.0 + inf_norm(cons.eq_b.as_slice())) {
            return z;
        }
    }
    let fz = obj.value(&z);
    if !(obj.value(&x) <= fz + 1e-14 * (1.0 + fz.abs())) {
        return z;
    }
    x
}

/// Indices of a maximal independent subset of the rows of `a` restricted
/// to the columns `free` (greedy Gram–Schmidt).
fn independent_free_rows(a: &DMatrix<f64>, free: &[usize]) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut keep = Vec::new();
    for r in 0..a.nrows() {
        let mut v: Vec<f64> = free.iter().map(|&i| a[(r, i)]).collect();
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let c: f64 = v.iter().zip(q).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 * norm0 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
            keep.push(r);
        }
    }
    keep
}

/// LU solve with one step of iterative refinement.
fn solve_refined(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = a.clone().full_piv_lu();
    let mut x = lu.solve(b)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let r = b - a * &x;
    if let Some(dx) = lu.solve(&r) {
        if dx.iter().all(|v| v.is_finite()) {
            x += dx;
        }
    }
    Some(x)
}
