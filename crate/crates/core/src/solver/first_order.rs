//! Mirror descent and Frank–Wolfe over the reduced variables.

#[cfg(test)]
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::solver::ipm::{self, Constraints, IpmOptions, Linear, Objective};

pub(crate) struct FirstOrderResult {
    pub z: Vec<f64>,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// How a mirror step maps back to the feasible set.
pub(crate) enum MirrorGeometry<'a> {
    /// Product of simplices over the listed variable groups; entropic step.
    Simplices(&'a [Vec<usize>]),
    /// Euclidean projected gradient with the supplied projection.
    Euclidean(&'a dyn Fn(&[f64]) -> Result<Vec<f64>>),
}

/// Mirror descent with Armijo backtracking. Stops when the objective
/// decrease falls below `tol_obj` (relative) or after `max_iter` steps.
pub(crate) fn mirror_descent(
    obj: &dyn Objective,
    geometry: MirrorGeometry<'_>,
    z0: &[f64],
    max_iter: usize,
    tol_obj: f64,
) -> Result<FirstOrderResult> {
    let n = z0.len();
    let mut z = z0.to_vec();
    let mut f = obj.value(&z);
    if !f.is_finite() {
        return Err(Error::Solver("mirror descent start outside the domain".into()));
    }
    let mut g = vec![0.0; n];
    let mut eta = 1.0;
    let mut quiet = 0;
    for it in 0..max_iter {
        obj.gradient(&z, &mut g);
        let mut accepted = None;
        for _ in 0..60 {
            let cand = match &geometry {
                MirrorGeometry::Simplices(groups) => {
                    let mut c = z.clone();
                    for grp in groups.iter() {
                        let gmin = grp.iter().map(|&j| g[j]).fold(f64::INFINITY, f64::min);
                        let mut s = 0.0;
                        for &j in grp {
                            c[j] = z[j] * (-eta * (g[j] - gmin)).exp();
                            s += c[j];
                        }
                        for &j in grp {
                            c[j] /= s;
                        }
                    }
                    c
                }
                MirrorGeometry::Euclidean(project) => {
                    let step: Vec<f64> = z.iter().zip(&g).map(|(a, b)| a - eta * b).collect();
                    project(&step)?
                }
            };
            let fc = obj.value(&cand);
            let diff: Vec<f64> = cand.iter().zip(&z).map(|(a, b)| a - b).collect();
            if fc.is_finite() && fc <= f + 1e-4 * dot(&g, &diff) {
                accepted = Some((cand, fc));
                break;
            }
            eta *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            return Ok(FirstOrderResult { z, iterations: it });
        };
        let decrease = f - fc;
        z = cand;
        f = fc;
        eta *= 1.5;
        if decrease <= tol_obj * (1.0 + f.abs()) {
            quiet += 1;
            if quiet >= 20 {
                return Ok(FirstOrderResult { z, iterations: it + 1 });
            }
        } else {
            quiet = 0;
        }
    }
    Ok(FirstOrderResult { z, iterations: max_iter })
}

/// Frank–Wolfe with exact line search; the linear minimization oracle is the
/// interior-point method on the linear objective.
pub(crate) fn frank_wolfe(
    obj: &dyn Objective,
    cons: &Constraints<'_>,
    z0: &[f64],
    max_iter: usize,
    tol_gap: f64,
) -> Result<FirstOrderResult> {
    let n = z0.len();
    let mut z = z0.to_vec();
    let mut g = vec![0.0; n];
    let lmo_start = z0.to_vec();
    for it in 0..max_iter {
        obj.gradient(&z, &mut g);
        let lp = ipm::solve(&Linear(&g), cons, &lmo_start, &IpmOptions::default())?;
        let s = lp.z;
        let dir: Vec<f64> = s.iter().zip(&z).map(|(a, b)| a - b).collect();
        let gap = -dot(&g, &dir);
        if gap <= tol_gap {
            return Ok(FirstOrderResult { z, iterations: it });
        }
        // φ'(γ) = ∇f(z + γ d)·d is nondecreasing; bisect for its root.
        let at = |gamma: f64| -> Vec<f64> { z.iter().zip(&dir).map(|(a, b)| a + gamma * b).collect() };
        let mut gtmp = vec![0.0; n];
        let mut slope = |gamma: f64| -> f64 {
            let p = at(gamma);
            if !obj.value(&p).is_finite() {
                return f64::INFINITY;
            }
            obj.gradient(&p, &mut gtmp);
            dot(&gtmp, &dir)
        };
        let mut hi = 1.0;
        if !slope(hi).is_finite() {
            hi = 1.0 - 1e-12;
        }
        let gamma = if slope(hi) <= 0.0 {
            hi
        } else {
            let mut lo = 0.0;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if slope(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        z = at(gamma);
    }
    Ok(FirstOrderResult { z, iterations: max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quad(Vec<f64>);
    impl Objective for Quad {
        fn value(&self, z: &[f64]) -> f64 {
            0.5 * z.iter().zip(&self.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        }
        fn gradient(&self, z: &[f64], g: &mut [f64]) {
            for i in 0..z.len() {
                g[i] = z[i] - self.0[i];
            }
        }
        fn add_hessian(&self, z: &[f64], h: &mut DMatrix<f64>) {
            for i in 0..z.len() {
                h[(i, i)] += 1.0;
            }
        }
    }

    #[test]
    fn entropic_mirror_descent_on_simplex() {
        let obj = Quad(vec![0.8, 0.6, -0.5]);
        let groups = vec![vec![0, 1, 2]];
        let r = mirror_descent(&obj, MirrorGeometry::Simplices(&groups), &[1.0 / 3.0; 3], 50_000, 1e-15)
            .unwrap();
        assert!((r.z[0] - 0.6).abs() < 1e-5, "{:?}", r.z);
        assert!((r.z[1] - 0.4).abs() < 1e-5);
    }

    #[test]
    fn frank_wolfe_on_simplex() {
        let obj = Quad(vec![0.5, 0.3, 0.2]);
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let b = DVector::from_column_slice(&[1.0]);
        let lo = vec![Some(0.0); 3];
        let up = vec![None; 3];
        let cons = Constraints { eq_a: &a, eq_b: &b, lower: &lo, upper: &up };
        let r = frank_wolfe(&obj, &cons, &[1.0 / 3.0; 3], 2000, 1e-10).unwrap();
        assert!((r.z[0] - 0.5).abs() < 1e-4, "{:?}", r.z);
    }
}
