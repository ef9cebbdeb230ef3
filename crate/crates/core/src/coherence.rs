//! Invariance maps, orbits, coherence and the first-step orbit centroid.

use serde::{Deserialize, Serialize};

use crate::bregman::centroid;
use crate::error::{Error, Result};
use crate::generators::{GeneratorSpec, NormTag};
use crate::model::{compensated_sum, Model, PromptDistribution};

/// A permutation Φ of prompt indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct InvarianceMap {
    perm: Vec<usize>,
    involution: bool,
}

impl InvarianceMap {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &y in &perm {
            if y >= n || seen[y] {
                return Err(Error::Invalid("map is not a permutation".into()));
            }
            seen[y] = true;
        }
        let involution = (0..n).all(|x| perm[perm[x]] == x);
        Ok(Self { perm, involution })
    }

    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect(), involution: true }
    }

    /// Involution exchanging each listed pair.
    pub fn swaps(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::Invalid("swap index out of range".into()));
            }
            perm[a] = b;
            perm[b] = a;
        }
        Self::new(perm)
    }

    pub fn apply(&self, x: usize) -> usize {
        self.perm[x]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn is_involution(&self) -> bool {
        self.involution
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.perm.len()];
        for (x, &y) in self.perm.iter().enumerate() {
            inv[y] = x;
        }
        Self { perm: inv, involution: self.involution }
    }

    /// π ∘ Φ.
    pub fn compose(&self, pi: &Model) -> Model {
        let mut out = pi.clone();
        for x in 0..pi.n() {
            out.row_mut(x).copy_from_slice(pi.row(self.perm[x]));
        }
        out
    }
}

impl TryFrom<Vec<usize>> for InvarianceMap {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<InvarianceMap> for Vec<usize> {
    fn from(m: InvarianceMap) -> Vec<usize> {
        m.perm
    }
}

/// A partition of prompts into index sets, each listed in increasing order
/// and ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

/// The cycle decomposition of Φ; same representation as a block partition.
pub type OrbitPartition = BlockPartition;

impl BlockPartition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut block_of = vec![usize::MAX; n];
        for (b, members) in blocks.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::Invalid("empty block".into()));
            }
            for &x in members {
                if x >= n || block_of[x] != usize::MAX {
                    return Err(Error::Invalid("blocks do not partition the prompts".into()));
                }
                block_of[x] = b;
            }
        }
        Ok(Self::canonical(block_of))
    }

    pub fn singletons(n: usize) -> Self {
        Self::canonical((0..n).collect())
    }

    /// Rebuilds from arbitrary labels, renumbering by first appearance.
    pub fn canonical(labels: Vec<usize>) -> Self {
        let mut map = std::collections::BTreeMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut block_of = vec![0; labels.len()];
        for (x, l) in labels.iter().enumerate() {
            let id = *map.entry(*l).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[id].push(x);
            block_of[x] = id;
        }
        Self { blocks, block_of }
    }

    /// Finest partition coarser than both.
    pub fn join(&self, other: &BlockPartition) -> Result<Self> {
        let n = self.len();
        if other.len() != n {
            return Err(Error::Shape("partitions over different prompt sets".into()));
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for part in [self, other] {
            for b in &part.blocks {
                for w in b.windows(2) {
                    let (a, c) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                    if a != c {
                        parent[a.max(c)] = a.min(c);
                    }
                }
            }
        }
        let labels = (0..n).map(|x| find(&mut parent, x)).collect();
        Ok(Self::canonical(labels))
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.block_of[x]
    }

    pub fn len(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_of.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Same grouping of prompts.
    pub fn same_as(&self, other: &BlockPartition) -> bool {
        self.blocks == other.blocks
    }
}

impl TryFrom<Vec<Vec<usize>>> for BlockPartition {
    type Error = Error;
    fn try_from(v: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BlockPartition> for Vec<Vec<usize>> {
    fn from(b: BlockPartition) -> Self {
        b.blocks
    }
}

/// Cycles of Φ.
pub fn orbit_partition(phi: &InvarianceMap) -> OrbitPartition {
    let n = phi.len();
    let mut label = vec![usize::MAX; n];
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let mut x = start;
        while label[x] == usize::MAX {
            label[x] = start;
            x = phi.apply(x);
        }
    }
    BlockPartition::canonical(label)
}

/// λ(x) = P(x) / (P(x) + P(Φ(x))).
pub fn lambda_weight(dist: &PromptDistribution, phi: &InvarianceMap, x: usize) -> Result<f64> {
    if !phi.is_involution() {
        return Err(Error::NotInvolution);
    }
    let w = dist.weights();
    Ok(w[x] / (w[x] + w[phi.apply(x)]))
}

/// max_x ‖π(x) − π(Φ(x))‖_∞ ≤ tol.
pub fn is_coherent(pi: &Model, phi: &InvarianceMap, tol: f64) -> bool {
    (0..pi.n()).all(|x| {
        pi.row(x)
            .iter()
            .zip(pi.row(phi.apply(x)))
            .all(|(a, b)| (a - b).abs() <= tol)
    })
}

fn check_shapes(dist: &PromptDistribution, phi: &InvarianceMap, pi0: &Model) -> Result<()> {
    if dist.len() != pi0.n() || phi.len() != pi0.n() {
        return Err(Error::Shape("distribution, map and model disagree on n".into()));
    }
    Ok(())
}

/// Per-orbit Bregman centroid with within-orbit weights proportional to P.
/// For involutions this is (∇F)⁻¹(λ∇F(π0(x)) + (1−λ)∇F(π0(Φx))).
pub fn orbit_average(
    gen: &GeneratorSpec,
    dist: &PromptDistribution,
    phi: &InvarianceMap,
    pi0: &Model,
) -> Result<Model> {
    check_shapes(dist, phi, pi0)?;
    orbit_average_weighted(gen, dist.weights(), &orbit_partition(phi), pi0)
}

/// Orbit centroid for arbitrary nonnegative weights; an orbit with zero
/// total weight keeps its rows unchanged.
pub(crate) fn orbit_average_weighted(
    gen: &GeneratorSpec,
    weights: &[f64],
    orbits: &OrbitPartition,
    pi0: &Model,
) -> Result<Model> {
    let mut out = pi0.clone();
    for orbit in orbits.blocks() {
        let total = compensated_sum(orbit.iter().map(|&x| weights[x]));
        if orbit.len() == 1 || total == 0.0 {
            continue;
        }
        let lambdas: Vec<f64> = orbit.iter().map(|&x| weights[x] / total).collect();
        let lambdas = renormalize(lambdas);
        let points: Vec<&[f64]> = orbit.iter().map(|&x| pi0.row(x)).collect();
        let c = centroid(gen, &lambdas, &points).map_err(|e| Error::at(orbit[0], e))?;
        for &x in orbit {
            out.row_mut(x).copy_from_slice(&c);
        }
    }
    Ok(out)
}

fn renormalize(mut l: Vec<f64>) -> Vec<f64> {
    let s = compensated_sum(l.iter().copied());
    l.iter_mut().for_each(|v| *v /= s);
    let s = compensated_sum(l.iter().copied());
    if let Some(last) = l.last_mut() {
        *last += 1.0 - s;
    }
    l
}

/// γ0 = Σ_x P(x)‖π0(x) − π0(Φx)‖² in the given row norm.
pub fn incoherence_gamma0(
    dist: &PromptDistribution,
    pi0: &Model,
    phi: &InvarianceMap,
    norm: NormTag,
) -> Result<f64> {
    check_shapes(dist, phi, pi0)?;
    if !phi.is_involution() {
        return Err(Error::NotInvolution);
    }
    Ok(compensated_sum((0..pi0.n()).map(|x| {
        dist.weights()[x] * norm.sq_dist(pi0.row(x), pi0.row(phi.apply(x)))
    })))
}

/// (γ0/(1+C_Φ)², γ0/4).
pub fn delta_coh_bounds(gamma0: f64, c_phi: f64) -> (f64, f64) {
    (gamma0 / ((1.0 + c_phi) * (1.0 + c_phi)), gamma0 / 4.0)
}

/// Operator norm of π ↦ π∘Φ in L2(P): max_x √(P(Φ⁻¹x)/P(x)).
pub fn c_phi(dist: &PromptDistribution, phi: &InvarianceMap) -> f64 {
    let inv = phi.inverse();
    let w = dist.weights();
    (0..w.len())
        .map(|x| (w[inv.apply(x)] / w[x]).sqrt())
        .fold(0.0, f64::max)
}

/// ½(π + π∘Φ).
pub fn symmetrize(pi: &Model, phi: &InvarianceMap) -> Model {
    let comp = phi.compose(pi);
    let mut out = pi.clone();
    for x in 0..pi.n() {
        for (o, c) in out.row_mut(x).iter_mut().zip(comp.row(x)) {
            *o = 0.5 * (*o + c);
        }
    }
    out
}

/// Σ_x P(x)‖a(x) − b(x)‖² (the squared L2(P) distance of tables).
pub fn l2_sq_distance(dist: &PromptDistribution, a: &Model, b: &Model, norm: NormTag) -> f64 {
    compensated_sum((0..a.n()).map(|x| dist.weights()[x] * norm.sq_dist(a.row(x), b.row(x))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn orbit_examples() {
        assert_eq!(orbit_partition(&InvarianceMap::identity(3)).num_blocks(), 3);
        let swap = InvarianceMap::swaps(3, &[(0, 1)]).unwrap();
        assert_eq!(orbit_partition(&swap).blocks(), &[vec![0, 1], vec![2]]);
        let cyc = InvarianceMap::new(vec![1, 2, 0]).unwrap();
        assert!(!cyc.is_involution());
        assert_eq!(orbit_partition(&cyc).blocks(), &[vec![0, 1, 2]]);
        assert!(InvarianceMap::new(vec![0, 0]).is_err());
    }

    #[test]
    fn lambda_examples() {
        let swap = InvarianceMap::swaps(2, &[(0, 1)]).unwrap();
        assert_eq!(lambda_weight(&PromptDistribution::uniform(2), &swap, 0).unwrap(), 0.5);
        let d = PromptDistribution::new(vec![0.75, 0.25]).unwrap();
        assert_eq!(lambda_weight(&d, &swap, 0).unwrap(), 0.75);
        assert_eq!(lambda_weight(&d, &swap, 1).unwrap(), 0.25);
        let id = InvarianceMap::identity(2);
        assert_eq!(lambda_weight(&d, &id, 0).unwrap(), 0.5);
        let cyc = InvarianceMap::new(vec![1, 2, 0]).unwrap();
        assert_eq!(
            lambda_weight(&PromptDistribution::uniform(3), &cyc, 0),
            Err(Error::NotInvolution)
        );
    }

    #[test]
    fn coherence_examples() {
        let swap = InvarianceMap::swaps(2, &[(0, 1)]).unwrap();
        let c = Model::conditional(&[vec![0.2, 0.8], vec![0.2, 0.8]]).unwrap();
        assert!(is_coherent(&c, &swap, 0.0));
        let pi0 = Model::conditional(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!(!is_coherent(&pi0, &swap, 1e-12));
        let g = incoherence_gamma0(&PromptDistribution::uniform(2), &pi0, &swap, NormTag::L2).unwrap();
        assert_eq!(g, 2.0);
    }

    #[test]
    fn orbit_average_examples() {
        let swap = InvarianceMap::swaps(2, &[(0, 1)]).unwrap();
        let dist = PromptDistribution::uniform(2);
        let pi0 = Model::conditional(&[vec![0.1, 0.9], vec![0.8, 0.2]]).unwrap();
        let sq = orbit_average(&GeneratorSpec::squared_euclidean(), &dist, &swap, &pi0).unwrap();
        for x in 0..2 {
            assert_abs_diff_eq!(sq.get(x, 0), 0.45, epsilon = 1e-15);
            assert_abs_diff_eq!(sq.get(x, 1), 0.55, epsilon = 1e-15);
        }
        let kl = orbit_average(&GeneratorSpec::negative_entropy(), &dist, &swap, &pi0).unwrap();
        assert_abs_diff_eq!(kl.get(0, 0), 0.08_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(kl.get(1, 1), 0.18_f64.sqrt(), epsilon = 1e-15);
        assert!(is_coherent(&kl, &swap, 1e-12));
        let id = InvarianceMap::identity(2);
        assert_eq!(orbit_average(&GeneratorSpec::negative_entropy(), &dist, &id, &pi0).unwrap(), pi0);
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(delta_coh_bounds(0.0, 1.0), (0.0, 0.0));
        assert_eq!(delta_coh_bounds(2.0, 1.0), (0.5, 0.5));
        assert_eq!(delta_coh_bounds(4.0, 3.0), (0.25, 1.0));
        let swap = InvarianceMap::swaps(2, &[(0, 1)]).unwrap();
        let d = PromptDistribution::new(vec![0.8, 0.2]).unwrap();
        assert_abs_diff_eq!(c_phi(&d, &swap), 2.0, epsilon = 1e-15);
        assert_eq!(c_phi(&PromptDistribution::uniform(2), &swap), 1.0);
    }

    #[test]
    fn join_merges_chains() {
        let a = BlockPartition::new(vec![vec![0, 1], vec![2], vec![3, 4]]).unwrap();
        let b = BlockPartition::new(vec![vec![0], vec![1, 2], vec![3], vec![4]]).unwrap();
        assert_eq!(a.join(&b).unwrap().blocks(), &[vec![0, 1, 2], vec![3, 4]]);
        assert!(BlockPartition::new(vec![vec![0, 1], vec![1]]).is_err());
    }
}
