//! Finite prompt/outcome tables and prompt distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Weights over a finite prompt set. All weights are strictly positive and
/// sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PromptDistribution {
    weights: Vec<f64>,
}

impl PromptDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Invalid("empty prompt distribution".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Invalid(format!(
                "prompt weight {i} is not strictly positive"
            )));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("prompt weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Normalizes arbitrary positive masses.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let total = compensated_sum(masses.iter().copied());
        if !(total > 0.0) {
            return Err(Error::Invalid("masses must have positive total".into()));
        }
        Self::new(masses.iter().map(|m| m / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self { weights: vec![1.0 / n as f64; n] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl TryFrom<Vec<f64>> for PromptDistribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PromptDistribution> for Vec<f64> {
    fn from(d: PromptDistribution) -> Vec<f64> {
        d.weights
    }
}

/// An n×d table, row x holding the outcome vector of prompt x.
///
/// The same type backs conditional (row-stochastic) and unnormalized
/// (nonnegative) models; the validating constructors enforce the respective
/// invariants while intermediate solver iterates use [`Model::from_rows`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Model {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

/// Row-stochastic table.
pub type ConditionalModel = Model;
/// Nonnegative table.
pub type UnnormalizedModel = Model;

impl Model {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self { n, d, data: vec![0.0; n * d] }
    }

    pub fn from_flat(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 || data.len() != n * d {
            return Err(Error::Shape(format!(
                "table of {} entries cannot be {n}x{d}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("table entries must be finite".into()));
        }
        Ok(Self { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_flat(n, d, rows.concat())
    }

    /// Validates nonnegativity and unit row sums (1e-12).
    pub fn conditional(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Self::unnormalized(rows)?;
        for x in 0..m.n {
            let s = compensated_sum(m.row(x).iter().copied());
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::DomainAt {
                    prompt: x,
                    message: format!("row sums to {s}"),
                });
            }
        }
        Ok(m)
    }

    /// Validates nonnegativity.
    pub fn unnormalized(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Self::from_rows(rows)?;
        if let Some(i) = m.data.iter().position(|v| *v < 0.0) {
            return Err(Error::DomainAt {
                prompt: i / m.d,
                message: "negative entry".into(),
            });
        }
        Ok(m)
    }

    /// A Bernoulli table (d = 1) from head probabilities.
    pub fn column(values: &[f64]) -> Result<Self> {
        Self::from_flat(values.len(), 1, values.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.data[x * self.d..(x + 1) * self.d]
    }

    pub fn row_mut(&mut self, x: usize) -> &mut [f64] {
        &mut self.data[x * self.d..(x + 1) * self.d]
    }

    pub fn get(&self, x: usize, k: usize) -> f64 {
        self.data[x * self.d + k]
    }

    pub fn set(&mut self, x: usize, k: usize, v: f64) {
        self.data[x * self.d + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.d)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn same_shape(&self, other: &Model) -> Result<()> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Model) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_row_stochastic(&self, tol: f64) -> bool {
        self.data.iter().all(|v| *v >= -tol)
            && self
                .rows()
                .all(|r| (compensated_sum(r.iter().copied()) - 1.0).abs() <= tol)
    }

    /// Rows divided by their sums.
    pub fn normalized(&self) -> Result<Model> {
        let mut out = self.clone();
        for x in 0..self.n {
            let s = compensated_sum(self.row(x).iter().copied());
            if !(s > 0.0) {
                return Err(Error::DomainAt { prompt: x, message: "zero row".into() });
            }
            out.row_mut(x).iter_mut().for_each(|v| *v /= s);
        }
        Ok(out)
    }
}

impl TryFrom<Vec<Vec<f64>>> for Model {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<Model> for Vec<Vec<f64>> {
    fn from(m: Model) -> Vec<Vec<f64>> {
        m.to_rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditional_rejects_bad_rows() {
        assert!(Model::conditional(&[vec![0.5, 0.5], vec![0.2, 0.8]]).is_ok());
        assert!(Model::conditional(&[vec![0.5, 0.6]]).is_err());
        assert!(Model::conditional(&[vec![1.5, -0.5]]).is_err());
        assert!(Model::from_rows(&[vec![0.5], vec![0.2, 0.8]]).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(PromptDistribution::new(vec![0.25, 0.75]).is_ok());
        assert!(PromptDistribution::new(vec![0.0, 1.0]).is_err());
        assert!(PromptDistribution::new(vec![0.5, 0.6]).is_err());
        let d = PromptDistribution::from_masses(&[1.0, 3.0]).unwrap();
        assert_eq!(d.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(v), 1.0);
    }

    #[test]
    fn json_round_trip() {
        let m = Model::from_rows(&[vec![0.1, 0.9], vec![1.0 / 3.0, 2.0 / 3.0]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: Model = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
    }
}
