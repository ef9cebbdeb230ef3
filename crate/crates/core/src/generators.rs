//! Legendre generators: value, gradient, inverse gradient, conjugate and the
//! stored strong-convexity / smoothness metadata.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{compensated_sum, dot};

/// Norm the stored constants refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum NormTag {
    L1,
    #[default]
    L2,
}

impl NormTag {
    /// Squared norm of a - b.
    pub fn sq_dist(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            NormTag::L1 => {
                let s = compensated_sum(a.iter().zip(b).map(|(x, y)| (x - y).abs()));
                s * s
            }
            NormTag::L2 => compensated_sum(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    SquaredEuclidean,
    Mahalanobis,
    NegativeEntropy,
    NegativeLog,
    QuadraticCoupled,
    DiagonalQuadratic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixField {
    Dense(Vec<Vec<f64>>),
    Diag(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawGenerator {
    kind: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<MatrixField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linear: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    smoothness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    norm_tag: Option<NormTag>,
}

/// A convex generator F together with its analytic constants.
///
/// Quadratic kinds carry their matrix; `DiagonalQuadratic` stores it as a
/// diagonal matrix. A `QuadraticCoupled` generator with a singular PSD matrix
/// is accepted but is not Legendre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGenerator", into = "RawGenerator")]
pub struct GeneratorSpec {
    kind: GeneratorKind,
    matrix: Option<DMatrix<f64>>,
    linear: Option<DVector<f64>>,
    mu: Option<f64>,
    smoothness: Option<f64>,
    norm_tag: NormTag,
    legendre: bool,
}

const SYM_TOL: f64 = 1e-12;

fn dense(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Shape("generator matrix must be square".into()));
    }
    let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("generator matrix entries must be finite".into()));
    }
    for i in 0..d {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > SYM_TOL * (1.0 + m[(i, j)].abs()) {
                return Err(Error::Invalid("generator matrix must be symmetric".into()));
            }
        }
    }
    Ok(m)
}

fn eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(m.clone());
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

impl GeneratorSpec {
    fn plain(kind: GeneratorKind, mu: Option<f64>, l: Option<f64>, norm: NormTag) -> Self {
        Self {
            kind,
            matrix: None,
            linear: None,
            mu,
            smoothness: l,
            norm_tag: norm,
            legendre: true,
        }
    }

    /// ½‖p‖², μ = L = 1 in L2.
    pub fn squared_euclidean() -> Self {
        Self::plain(GeneratorKind::SquaredEuclidean, Some(1.0), Some(1.0), NormTag::L2)
    }

    /// Σ p log p, μ = 1 in L1 on the simplex.
    pub fn negative_entropy() -> Self {
        Self::plain(GeneratorKind::NegativeEntropy, Some(1.0), None, NormTag::L1)
    }

    /// −Σ log p (Itakura–Saito).
    pub fn negative_log() -> Self {
        Self::plain(GeneratorKind::NegativeLog, None, None, NormTag::L2)
    }

    /// ½ pᵀAp with A positive definite; μ, L are its extreme eigenvalues.
    pub fn mahalanobis(rows: &[Vec<f64>]) -> Result<Self> {
        let a = dense(rows)?;
        let (lo, hi) = eigen_range(&a);
        if !(lo > 0.0) {
            return Err(Error::Invalid("Mahalanobis matrix must be positive definite".into()));
        }
        Ok(Self {
            matrix: Some(a),
            ..Self::plain(GeneratorKind::Mahalanobis, Some(lo), Some(hi), NormTag::L2)
        })
    }

    /// ½ Σ a_k p_k² with a_k > 0.
    pub fn diagonal_quadratic(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() || diag.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Invalid("diagonal entries must be positive".into()));
        }
        let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = diag.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            matrix: Some(DMatrix::from_diagonal(&DVector::from_column_slice(diag))),
            ..Self::plain(GeneratorKind::DiagonalQuadratic, Some(lo), Some(hi), NormTag::L2)
        })
    }

    /// ½ pᵀAp + bᵀp with A positive semidefinite.
    pub fn quadratic_coupled(rows: &[Vec<f64>], linear: Option<&[f64]>) -> Result<Self> {
        let a = dense(rows)?;
        let d = a.nrows();
        let (lo, hi) = eigen_range(&a);
        let scale = hi.abs().max(1.0);
        if lo < -1e-12 * scale {
            return Err(Error::Invalid("coupled matrix must be positive semidefinite".into()));
        }
        let b = match linear {
            Some(b) if b.len() != d => {
                return Err(Error::Shape("linear term length differs from matrix".into()))
            }
            Some(b) => Some(DVector::from_column_slice(b)),
            None => None,
        };
        let legendre = lo > 1e-12 * scale;
        Ok(Self {
            kind: GeneratorKind::QuadraticCoupled,
            matrix: Some(a),
            linear: b,
            mu: legendre.then_some(lo),
            smoothness: Some(hi),
            norm_tag: NormTag::L2,
            legendre,
        })
    }

    /// Overrides the strong-convexity constant and its norm.
    pub fn with_mu(mut self, mu: f64, norm: NormTag) -> Self {
        self.mu = Some(mu);
        self.norm_tag = norm;
        self
    }

    pub fn with_smoothness(mut self, l: f64) -> Self {
        self.smoothness = Some(l);
        self
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    pub fn smoothness(&self) -> Option<f64> {
        self.smoothness
    }

    pub fn norm_tag(&self) -> NormTag {
        self.norm_tag
    }

    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        self.matrix.as_ref()
    }

    pub fn is_legendre(&self) -> bool {
        self.legendre
    }

    /// Fixed dimension for matrix kinds.
    pub fn dim(&self) -> Option<usize> {
        self.matrix.as_ref().map(DMatrix::nrows)
    }

    /// Gradient blows up at the boundary of the orthant.
    pub fn is_steep(&self) -> bool {
        matches!(self.kind, GeneratorKind::NegativeEntropy | GeneratorKind::NegativeLog)
    }

    pub fn is_separable(&self) -> bool {
        matches!(
            self.kind,
            GeneratorKind::SquaredEuclidean
                | GeneratorKind::NegativeEntropy
                | GeneratorKind::NegativeLog
                | GeneratorKind::DiagonalQuadratic
        )
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(
            self.kind,
            GeneratorKind::SquaredEuclidean
                | GeneratorKind::Mahalanobis
                | GeneratorKind::QuadraticCoupled
                | GeneratorKind::DiagonalQuadratic
        )
    }

    /// B_F jointly convex in both arguments.
    pub fn is_jointly_convex(&self) -> bool {
        self.kind != GeneratorKind::NegativeLog
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.is_empty() {
            return Err(Error::Shape("empty vector".into()));
        }
        if let Some(d) = self.dim() {
            if p.len() != d {
                return Err(Error::Shape(format!("generator of dimension {d} got {}", p.len())));
            }
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        Ok(())
    }

    fn quad_apply(&self, p: &[f64]) -> Vec<f64> {
        match &self.matrix {
            None => p.to_vec(),
            Some(a) => {
                let v = a * DVector::from_column_slice(p);
                let mut out: Vec<f64> = v.iter().copied().collect();
                if let Some(b) = &self.linear {
                    out.iter_mut().zip(b.iter()).for_each(|(o, bi)| *o += bi);
                }
                out
            }
        }
    }

    /// F(p); 0·log 0 = 0 for the entropy.
    pub fn value(&self, p: &[f64]) -> Result<f64> {
        self.check_dim(p)?;
        match self.kind {
            GeneratorKind::NegativeEntropy => {
                if p.iter().any(|v| *v < 0.0) {
                    return Err(Error::Domain("negative entropy needs p >= 0".into()));
                }
                Ok(compensated_sum(
                    p.iter().map(|&v| if v == 0.0 { 0.0 } else { v * v.ln() }),
                ))
            }
            GeneratorKind::NegativeLog => {
                if p.iter().any(|v| *v <= 0.0) {
                    return Err(Error::Domain("negative log needs p > 0".into()));
                }
                Ok(-compensated_sum(p.iter().map(|v| v.ln())))
            }
            GeneratorKind::SquaredEuclidean => Ok(0.5 * dot(p, p)),
            _ => {
                let a = self.matrix.as_ref().expect("matrix kind");
                let ap = a * DVector::from_column_slice(p);
                let mut v = 0.5 * dot(p, ap.as_slice());
                if let Some(b) = &self.linear {
                    v += dot(p, b.as_slice());
                }
                Ok(v)
            }
        }
    }

    /// ∇F(p) at an interior point.
    pub fn gradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(p)?;
        match self.kind {
            GeneratorKind::NegativeEntropy => {
                if p.iter().any(|v| *v <= 0.0) {
                    return Err(Error::Domain("entropy gradient needs p > 0".into()));
                }
                Ok(p.iter().map(|v| 1.0 + v.ln()).collect())
            }
            GeneratorKind::NegativeLog => {
                if p.iter().any(|v| *v <= 0.0) {
                    return Err(Error::Domain("negative log gradient needs p > 0".into()));
                }
                Ok(p.iter().map(|v| -1.0 / v).collect())
            }
            _ => Ok(self.quad_apply(p)),
        }
    }

    /// ∇²F(p), row-major d×d.
    pub fn hessian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(p)?;
        let d = p.len();
        match self.kind {
            GeneratorKind::NegativeEntropy | GeneratorKind::NegativeLog => {
                if p.iter().any(|v| *v <= 0.0) {
                    return Err(Error::Domain("hessian needs p > 0".into()));
                }
                let diag = p.iter().map(|v| {
                    if self.kind == GeneratorKind::NegativeEntropy {
                        1.0 / v
                    } else {
                        1.0 / (v * v)
                    }
                });
                Ok(DMatrix::from_diagonal(&DVector::from_iterator(d, diag)))
            }
            GeneratorKind::SquaredEuclidean => Ok(DMatrix::identity(d, d)),
            _ => Ok(self.matrix.clone().expect("matrix kind")),
        }
    }

    /// (∇F)⁻¹(u) = ∇F*(u).
    pub fn dual_map_inverse(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(u)?;
        match self.kind {
            GeneratorKind::NegativeEntropy => Ok(u.iter().map(|v| (v - 1.0).exp()).collect()),
            GeneratorKind::NegativeLog => {
                if u.iter().any(|v| *v >= 0.0) {
                    return Err(Error::Domain("negative log dual point needs u < 0".into()));
                }
                Ok(u.iter().map(|v| -1.0 / v).collect())
            }
            GeneratorKind::SquaredEuclidean => Ok(u.to_vec()),
            GeneratorKind::DiagonalQuadratic => {
                let a = self.matrix.as_ref().expect("matrix kind");
                Ok(u.iter().enumerate().map(|(k, v)| v / a[(k, k)]).collect())
            }
            GeneratorKind::Mahalanobis | GeneratorKind::QuadraticCoupled => {
                let rhs = self.shifted(u);
                let sol = self.solve(&rhs)?;
                Ok(sol)
            }
        }
    }

    fn shifted(&self, u: &[f64]) -> Vec<f64> {
        match &self.linear {
            Some(b) => u.iter().zip(b.iter()).map(|(x, y)| x - y).collect(),
            None => u.to_vec(),
        }
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if !self.legendre {
            return Err(Error::SingularMatrix(
                "generator matrix is only positive semidefinite".into(),
            ));
        }
        let a = self.matrix.clone().expect("matrix kind");
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::SingularMatrix("cholesky factorization failed".into()))?;
        Ok(chol.solve(&DVector::from_column_slice(rhs)).iter().copied().collect())
    }

    /// F*(u).
    pub fn conjugate_value(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u)?;
        match self.kind {
            GeneratorKind::NegativeEntropy => {
                Ok(compensated_sum(u.iter().map(|v| (v - 1.0).exp())))
            }
            GeneratorKind::NegativeLog => {
                if u.iter().any(|v| *v >= 0.0) {
                    return Err(Error::Domain("negative log conjugate needs u < 0".into()));
                }
                Ok(compensated_sum(u.iter().map(|v| -1.0 - (-v).ln())))
            }
            GeneratorKind::SquaredEuclidean => Ok(0.5 * dot(u, u)),
            _ => {
                let s = self.shifted(u);
                let x = self.dual_map_inverse(u)?;
                Ok(0.5 * dot(&s, &x))
            }
        }
    }

    /// ∇F at a point that may have zero coordinates, for separable steep
    /// kinds; zero coordinates are reported as `None`.
    pub(crate) fn gradient_partial(&self, p: &[f64]) -> Result<Vec<Option<f64>>> {
        if !self.is_steep() {
            return Ok(self.gradient(p)?.into_iter().map(Some).collect());
        }
        self.check_dim(p)?;
        p.iter()
            .map(|&v| {
                if v == 0.0 {
                    Ok(None)
                } else if v > 0.0 {
                    Ok(Some(if self.kind == GeneratorKind::NegativeEntropy {
                        1.0 + v.ln()
                    } else {
                        -1.0 / v
                    }))
                } else {
                    Err(Error::Domain("negative coordinate".into()))
                }
            })
            .collect()
    }
}

impl TryFrom<RawGenerator> for GeneratorSpec {
    type Error = Error;
    fn try_from(raw: RawGenerator) -> Result<Self> {
        let needs_matrix = || {
            raw.matrix
                .clone()
                .ok_or_else(|| Error::Invalid(format!("{:?} needs `matrix`", raw.kind)))
        };
        let mut g = match raw.kind {
            GeneratorKind::SquaredEuclidean => Self::squared_euclidean(),
            GeneratorKind::NegativeEntropy => Self::negative_entropy(),
            GeneratorKind::NegativeLog => Self::negative_log(),
            GeneratorKind::Mahalanobis => match needs_matrix()? {
                MatrixField::Dense(rows) => Self::mahalanobis(&rows)?,
                MatrixField::Diag(_) => {
                    return Err(Error::Invalid("mahalanobis needs a square matrix".into()))
                }
            },
            GeneratorKind::QuadraticCoupled => match needs_matrix()? {
                MatrixField::Dense(rows) => Self::quadratic_coupled(&rows, raw.linear.as_deref())?,
                MatrixField::Diag(_) => {
                    return Err(Error::Invalid("quadratic_coupled needs a square matrix".into()))
                }
            },
            GeneratorKind::DiagonalQuadratic => match needs_matrix()? {
                MatrixField::Diag(d) => Self::diagonal_quadratic(&d)?,
                MatrixField::Dense(rows) => {
                    let m = dense(&rows)?;
                    let off = (0..m.nrows())
                        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                        .any(|(i, j)| i != j && m[(i, j)] != 0.0);
                    if off {
                        return Err(Error::Invalid("diagonal_quadratic matrix has off-diagonal entries".into()));
                    }
                    Self::diagonal_quadratic(&m.diagonal().iter().copied().collect::<Vec<_>>())?
                }
            },
        };
        if raw.linear.is_some() && raw.kind != GeneratorKind::QuadraticCoupled {
            return Err(Error::Invalid("`linear` applies to quadratic_coupled only".into()));
        }
        if let Some(mu) = raw.mu {
            if !(mu > 0.0) {
                return Err(Error::Invalid("mu must be positive".into()));
            }
            let tag = raw.norm_tag.unwrap_or(g.norm_tag);
            g = g.with_mu(mu, tag);
        } else if let Some(norm) = raw.norm_tag {
            if norm != g.norm_tag {
                return Err(Error::Invalid("norm_tag given without mu".into()));
            }
        }
        if let Some(l) = raw.smoothness {
            g = g.with_smoothness(l);
        }
        Ok(g)
    }
}

impl From<GeneratorSpec> for RawGenerator {
    fn from(g: GeneratorSpec) -> Self {
        let matrix = g.matrix.map(|m| {
            if g.kind == GeneratorKind::DiagonalQuadratic {
                MatrixField::Diag(m.diagonal().iter().copied().collect())
            } else {
                MatrixField::Dense(
                    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
                )
            }
        });
        RawGenerator {
            kind: g.kind,
            matrix,
            linear: g.linear.map(|b| b.iter().copied().collect()),
            mu: g.mu,
            smoothness: g.smoothness,
            norm_tag: Some(g.norm_tag),
        }
    }
}

/// F(p).
pub fn value(gen: &GeneratorSpec, p: &[f64]) -> Result<f64> {
    gen.value(p)
}

/// ∇F(p).
pub fn gradient(gen: &GeneratorSpec, p: &[f64]) -> Result<Vec<f64>> {
    gen.gradient(p)
}

/// (∇F)⁻¹(u).
pub fn dual_map_inverse(gen: &GeneratorSpec, u: &[f64]) -> Result<Vec<f64>> {
    gen.dual_map_inverse(u)
}

/// F*(u).
pub fn conjugate_value(gen: &GeneratorSpec, u: &[f64]) -> Result<f64> {
    gen.conjugate_value(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn coupled() -> GeneratorSpec {
        GeneratorSpec::quadratic_coupled(
            &[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]],
            None,
        )
        .unwrap()
    }

    #[test]
    fn value_examples() {
        let e = GeneratorSpec::negative_entropy();
        assert_eq!(e.value(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        let s = GeneratorSpec::squared_euclidean();
        assert_abs_diff_eq!(s.value(&[0.3, 0.7]).unwrap(), 0.29, epsilon = 1e-15);
        // ½Σp² + p1 p3 at (0.65, 0.65, 0)
        assert_abs_diff_eq!(coupled().value(&[0.65, 0.65, 0.0]).unwrap(), 0.4225, epsilon = 1e-15);
        assert!(GeneratorSpec::negative_log().value(&[0.0, 1.0]).is_err());
        assert!(e.value(&[-0.1, 1.1]).is_err());
    }

    #[test]
    fn gradient_examples() {
        let s = GeneratorSpec::squared_euclidean();
        assert_eq!(s.gradient(&[0.1, 0.8]).unwrap(), vec![0.1, 0.8]);
        let g = GeneratorSpec::negative_entropy().gradient(&[0.5, 0.5]).unwrap();
        let oracle = 1.0 + 0.5_f64.ln();
        assert_abs_diff_eq!(g[0], oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(g[0], 0.30685, epsilon = 1e-5);
        let g = GeneratorSpec::negative_log().gradient(&[0.1, 0.8]).unwrap();
        assert_abs_diff_eq!(g[0], -10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1], -1.25, epsilon = 1e-12);
        assert!(GeneratorSpec::negative_entropy().gradient(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn inverse_examples() {
        let e = GeneratorSpec::negative_entropy();
        let u = [1.0 + 0.08_f64.sqrt().ln(), 1.0 + 0.18_f64.sqrt().ln()];
        let p = e.dual_map_inverse(&u).unwrap();
        assert_abs_diff_eq!(p[0], 0.08_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.18_f64.sqrt(), epsilon = 1e-15);
        let s = GeneratorSpec::squared_euclidean();
        assert_eq!(s.dual_map_inverse(&[0.45, 0.55]).unwrap(), vec![0.45, 0.55]);
        let l = GeneratorSpec::negative_log();
        assert_abs_diff_eq!(l.dual_map_inverse(&[-5.625]).unwrap()[0], 8.0 / 45.0, epsilon = 1e-15);
        assert!(l.dual_map_inverse(&[0.5]).is_err());
        assert!(matches!(
            coupled().dual_map_inverse(&[1.0, 1.0, 1.0]),
            Err(Error::SingularMatrix(_))
        ));
        assert!(!coupled().is_legendre());
    }

    #[test]
    fn conjugate_examples() {
        let e = GeneratorSpec::negative_entropy();
        let p = [0.2, 0.3, 0.5];
        let u = e.gradient(&p).unwrap();
        assert_abs_diff_eq!(e.conjugate_value(&u).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(GeneratorSpec::squared_euclidean().conjugate_value(&[0.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(e.conjugate_value(&[1.0, 1.0]).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn constructor_validation() {
        assert!(GeneratorSpec::mahalanobis(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(GeneratorSpec::mahalanobis(&[vec![2.0, 0.5], vec![0.4, 1.0]]).is_err());
        let m = GeneratorSpec::mahalanobis(&[vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(m.mu(), Some(0.5));
        assert_eq!(m.smoothness(), Some(2.0));
        assert!(GeneratorSpec::quadratic_coupled(&[vec![-1.0]], None).is_err());
        assert_eq!(GeneratorSpec::negative_entropy().norm_tag(), NormTag::L1);
        assert_eq!(GeneratorSpec::negative_entropy().mu(), Some(1.0));
        assert_eq!(GeneratorSpec::squared_euclidean().norm_tag(), NormTag::L2);
    }

    #[test]
    fn json_descriptors() {
        let g: GeneratorSpec = serde_json::from_str(r#"{"kind":"negative_entropy"}"#).unwrap();
        assert_eq!(g.kind(), GeneratorKind::NegativeEntropy);
        let g: GeneratorSpec =
            serde_json::from_str(r#"{"kind":"mahalanobis","matrix":[[2,0],[0,1]]}"#).unwrap();
        assert_eq!(g.dim(), Some(2));
        let g: GeneratorSpec =
            serde_json::from_str(r#"{"kind":"diagonal_quadratic","matrix":[1,10]}"#).unwrap();
        assert_eq!(g.value(&[1.0, 1.0]).unwrap(), 5.5);
        let back: GeneratorSpec = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<GeneratorSpec>(r#"{"kind":"mahalanobis"}"#).is_err());
    }
}
