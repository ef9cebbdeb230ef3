//! Bregman divergences, their identities, centroids and expectation lifting.

use crate::error::{Error, Result};
use crate::generators::{GeneratorKind, GeneratorSpec};
use crate::model::{compensated_sum, dot, Model, PromptDistribution};
use crate::projection::{bregman_project_weighted, SolverOptions};
use crate::sets::ConvexModelSet;

/// B_F(p‖q).
///
/// Steep separable generators accept q_k = 0 when p_k = 0 (the coordinate
/// contributes 0); any other boundary q is a domain error.
pub fn divergence(gen: &GeneratorSpec, p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Shape(format!("{} vs {}", p.len(), q.len())));
    }
    match gen.kind() {
        GeneratorKind::NegativeEntropy => {
            gen.value(p)?;
            let mut terms = Vec::with_capacity(p.len());
            for (&a, &b) in p.iter().zip(q) {
                if b < 0.0 || !b.is_finite() {
                    return Err(Error::Domain("second argument outside the orthant".into()));
                }
                if b == 0.0 {
                    if a != 0.0 {
                        return Err(Error::Domain("B(p||q) infinite: q_k = 0 < p_k".into()));
                    }
                    continue;
                }
                terms.push(if a == 0.0 { b } else { a * (a / b).ln() - a + b });
            }
            Ok(compensated_sum(terms))
        }
        GeneratorKind::NegativeLog => {
            let mut terms = Vec::with_capacity(p.len());
            for (&a, &b) in p.iter().zip(q) {
                if a == 0.0 && b == 0.0 {
                    continue;
                }
                if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::Domain("Itakura-Saito needs positive arguments".into()));
                }
                let r = a / b;
                terms.push(r - r.ln() - 1.0);
            }
            Ok(compensated_sum(terms))
        }
        _ => {
            gen.value(p)?;
            gen.value(q)?;
            let diff: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
            match gen.matrix() {
                None => Ok(0.5 * dot(&diff, &diff)),
                Some(a) => {
                    let ad = a * nalgebra::DVector::from_column_slice(&diff);
                    Ok(0.5 * dot(&diff, ad.as_slice()))
                }
            }
        }
    }
}

/// B_F via the defining formula F(p) − F(q) − ⟨∇F(q), p − q⟩ (interior q).
pub fn divergence_by_definition(gen: &GeneratorSpec, p: &[f64], q: &[f64]) -> Result<f64> {
    let g = gen.gradient(q)?;
    let diff: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
    Ok(compensated_sum([gen.value(p)?, -gen.value(q)?, -dot(&g, &diff)]))
}

/// B_{F*}(a‖b) = F*(a) − F*(b) − ⟨∇F*(b), a − b⟩.
pub fn conjugate_divergence(gen: &GeneratorSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    let gb = gen.dual_map_inverse(b)?;
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    Ok(compensated_sum([
        gen.conjugate_value(a)?,
        -gen.conjugate_value(b)?,
        -dot(&gb, &diff),
    ]))
}

/// Σ_x w_x B_F(a(x)‖b(x)); rows with zero weight are skipped.
pub fn expected_divergence_weighted(
    gen: &GeneratorSpec,
    weights: &[f64],
    a: &Model,
    b: &Model,
) -> Result<f64> {
    a.same_shape(b)?;
    if weights.len() != a.n() {
        return Err(Error::Shape("weights and table disagree".into()));
    }
    let mut terms = Vec::with_capacity(a.n());
    for x in 0..a.n() {
        if weights[x] == 0.0 {
            continue;
        }
        let v = divergence(gen, a.row(x), b.row(x)).map_err(|e| Error::at(x, e))?;
        terms.push(weights[x] * v);
    }
    Ok(compensated_sum(terms))
}

/// E_x[B_F(a(x)‖b(x))].
pub fn expected_divergence(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    a: &Model,
    b: &Model,
) -> Result<f64> {
    expected_divergence_weighted(gen, dist.weights(), a, b)
}

/// B(p‖r) + B(r‖q) − B(p‖q) − ⟨∇F(q) − ∇F(r), p − r⟩.
pub fn three_point_residual(gen: &GeneratorSpec, p: &[f64], r: &[f64], q: &[f64]) -> Result<f64> {
    let gq = gen.gradient(q)?;
    let gr = gen.gradient(r)?;
    let dg: Vec<f64> = gq.iter().zip(&gr).map(|(a, b)| a - b).collect();
    let dp: Vec<f64> = p.iter().zip(r).map(|(a, b)| a - b).collect();
    Ok(compensated_sum([
        divergence(gen, p, r)?,
        divergence(gen, r, q)?,
        -divergence(gen, p, q)?,
        -dot(&dg, &dp),
    ]))
}

fn check_lambdas(lambdas: &[f64], k: usize) -> Result<()> {
    if lambdas.len() != k || k == 0 {
        return Err(Error::Shape("lambda and point counts differ".into()));
    }
    if lambdas.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::Invalid("negative centroid weight".into()));
    }
    if (compensated_sum(lambdas.iter().copied()) - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid("centroid weights must sum to 1".into()));
    }
    Ok(())
}

/// (∇F)⁻¹(Σ λ_k ∇F(q_k)).
///
/// For steep separable generators a coordinate where some point with
/// positive weight is zero is returned as zero.
pub fn centroid(gen: &GeneratorSpec, lambdas: &[f64], points: &[&[f64]]) -> Result<Vec<f64>> {
    check_lambdas(lambdas, points.len())?;
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::Shape("points of different lengths".into()));
    }
    let mut zero = vec![false; d];
    let mut acc = vec![Vec::with_capacity(points.len()); d];
    for (lam, p) in lambdas.iter().zip(points) {
        if *lam == 0.0 {
            continue;
        }
        let g = gen.gradient_partial(p)?;
        for k in 0..d {
            match g[k] {
                Some(v) => acc[k].push(lam * v),
                None => zero[k] = true,
            }
        }
    }
    if !zero.iter().any(|z| *z) {
        let u: Vec<f64> = acc.into_iter().map(compensated_sum).collect();
        return gen.dual_map_inverse(&u);
    }
    // Separable steep kinds only reach here; invert coordinatewise.
    let mut out = vec![0.0; d];
    for k in 0..d {
        if !zero[k] {
            out[k] = gen.dual_map_inverse(&[compensated_sum(acc[k].iter().copied())])?[0];
        }
    }
    Ok(out)
}

/// Centroid, its Bregman projection onto `set` (a single-row set), and the
/// minimum of p ↦ Σ λ_k B(p‖q_k) over the set.
///
/// The minimum is computed directly and checked against the conjugate
/// decomposition Σλ_k F*(∇F(q_k)) − F*(Σλ_k∇F(q_k)) + B(projected‖centroid).
pub fn centroid_decomposition(
    gen: &GeneratorSpec,
    lambdas: &[f64],
    points: &[&[f64]],
    set: &ConvexModelSet,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let c = centroid(gen, lambdas, points)?;
    let src = Model::from_flat(1, c.len(), c.clone())?;
    let (proj, _) = bregman_project_weighted(gen, &[1.0], set, &src, None, &SolverOptions::default())?;
    let projected = proj.row(0).to_vec();
    let direct = compensated_sum(
        lambdas
            .iter()
            .zip(points)
            .map(|(l, q)| divergence(gen, &projected, q).map(|v| l * v))
            .collect::<Result<Vec<_>>>()?,
    );
    let mut terms = Vec::new();
    let mut u = vec![0.0; c.len()];
    for (l, q) in lambdas.iter().zip(points) {
        let g = gen.gradient(q)?;
        terms.push(l * gen.conjugate_value(&g)?);
        u.iter_mut().zip(&g).for_each(|(ui, gi)| *ui += l * gi);
    }
    terms.push(-gen.conjugate_value(&u)?);
    terms.push(divergence(gen, &projected, &c)?);
    let formula = compensated_sum(terms);
    if (formula - direct).abs() > 1e-9 * (1.0 + direct.abs()) {
        return Err(Error::Assertion(format!(
            "centroid decomposition mismatch: direct {direct}, formula {formula}"
        )));
    }
    Ok((c, projected, direct))
}

/// B_F(u‖v) + B_{F*}(α‖∇F(v)) − ⟨u − v, α − ∇F(v)⟩ ≥ 0.
pub fn fenchel_bregman_gap(gen: &GeneratorSpec, u: &[f64], v: &[f64], alpha: &[f64]) -> Result<f64> {
    let beta = gen.gradient(v)?;
    let du: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let da: Vec<f64> = alpha.iter().zip(&beta).map(|(a, b)| a - b).collect();
    Ok(compensated_sum([
        divergence(gen, u, v)?,
        conjugate_divergence(gen, alpha, &beta)?,
        -dot(&du, &da),
    ]))
}

/// |B_F(p‖q) − B_{F*}(∇F(q)‖∇F(p))|.
pub fn duality_residual(gen: &GeneratorSpec, p: &[f64], q: &[f64]) -> Result<f64> {
    let lhs = divergence(gen, p, q)?;
    let rhs = conjugate_divergence(gen, &gen.gradient(q)?, &gen.gradient(p)?)?;
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn divergence_examples() {
        let e = GeneratorSpec::negative_entropy();
        assert_eq!(divergence(&e, &[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            divergence(&e, &[1.0, 0.0], &[0.5, 0.5]).unwrap(),
            2.0_f64.ln(),
            epsilon = 1e-15
        );
        let s = GeneratorSpec::squared_euclidean();
        let p = [0.0, 1.0, 0.0, 0.0, 1.0, 0.0];
        let q = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        assert_eq!(divergence(&s, &p, &q).unwrap(), 1.0);
        assert!(divergence(&e, &[0.5, 0.5], &[1.0, 0.0]).is_err());
        assert_eq!(divergence(&e, &[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn closed_forms_match_definition() {
        let pts = [[0.2, 0.5, 0.3], [0.6, 0.1, 0.3]];
        for g in [
            GeneratorSpec::negative_entropy(),
            GeneratorSpec::negative_log(),
            GeneratorSpec::squared_euclidean(),
            GeneratorSpec::mahalanobis(&[
                vec![2.0, 0.3, 0.0],
                vec![0.3, 1.0, 0.1],
                vec![0.0, 0.1, 0.5],
            ])
            .unwrap(),
        ] {
            let a = divergence(&g, &pts[0], &pts[1]).unwrap();
            let b = divergence_by_definition(&g, &pts[0], &pts[1]).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn expected_divergence_examples() {
        let s = GeneratorSpec::squared_euclidean();
        let dist = PromptDistribution::uniform(3);
        let a = Model::column(&[0.45, 0.45, 0.40]).unwrap();
        let b = Model::column(&[0.10, 0.80, 0.40]).unwrap();
        let oracle = (0.5 * 0.35 * 0.35 * 2.0) / 3.0;
        assert_abs_diff_eq!(expected_divergence(&s, &dist, &a, &b).unwrap(), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle, 0.040833, epsilon = 1e-6);
        assert_eq!(expected_divergence(&s, &dist, &a, &a).unwrap(), 0.0);
        let bad = Model::column(&[0.1, 0.0, 0.4]).unwrap();
        let err = expected_divergence(&GeneratorSpec::negative_log(), &dist, &a, &bad).unwrap_err();
        assert!(matches!(err, Error::DomainAt { prompt: 1, .. }));
    }

    #[test]
    fn centroid_examples() {
        let pts: [&[f64]; 2] = [&[0.1], &[0.8]];
        let l = [0.5, 0.5];
        let c = centroid(&GeneratorSpec::squared_euclidean(), &l, &pts).unwrap();
        assert_abs_diff_eq!(c[0], 0.45, epsilon = 1e-15);
        let c = centroid(&GeneratorSpec::negative_entropy(), &l, &pts).unwrap();
        assert_abs_diff_eq!(c[0], 0.08_f64.sqrt(), epsilon = 1e-15);
        let c = centroid(&GeneratorSpec::negative_log(), &l, &pts).unwrap();
        assert_abs_diff_eq!(c[0], 8.0 / 45.0, epsilon = 1e-15);
        // zero component rule
        let pts: [&[f64]; 2] = [&[0.0, 1.0], &[0.5, 0.5]];
        let c = centroid(&GeneratorSpec::negative_entropy(), &l, &pts).unwrap();
        assert_eq!(c[0], 0.0);
        assert_abs_diff_eq!(c[1], 0.5_f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn three_point_and_duality_examples() {
        let e = GeneratorSpec::negative_entropy();
        let p = [0.2, 0.3, 0.5];
        assert_abs_diff_eq!(three_point_residual(&e, &p, &p, &p).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(duality_residual(&e, &p, &p).unwrap(), 0.0, epsilon = 1e-15);
        let q = [0.6, 0.3, 0.1];
        let alpha = e.gradient(&p).unwrap();
        assert_abs_diff_eq!(fenchel_bregman_gap(&e, &p, &q, &alpha).unwrap(), 0.0, epsilon = 1e-13);
    }
}
