//! Seeded random instances for the property suites.
//!
//! Every instance is generated from its own ChaCha8 stream, derived from the
//! suite seed, a per-suite stream tag and the instance id, so instances can
//! be produced in parallel and in any order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::coherence::{orbit_average, symmetrize, InvarianceMap};
use crate::error::Result;
use crate::generators::GeneratorSpec;
use crate::model::{Model, PromptDistribution};
use crate::sets::ConvexModelSet;

/// SplitMix64 mix of (seed, stream, id).
pub fn derive_seed(seed: u64, stream: u64, id: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ id.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64, stream: u64, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, id))
}

/// Random point of the simplex with every entry at least `floor`
/// (requires d·floor < 1).
pub fn simplex_row<R: Rng>(rng: &mut R, d: usize, floor: f64) -> Vec<f64> {
    let e: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect::<Vec<f64>>();
    let s: f64 = e.iter().sum();
    let scale = 1.0 - d as f64 * floor;
    let mut row: Vec<f64> = e.iter().map(|v| floor + scale * v / s).collect();
    // exact unit sum on the largest entry
    let total: f64 = row.iter().sum();
    let (imax, _) = row.iter().enumerate().fold((0, f64::MIN), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
    row[imax] += 1.0 - total;
    row
}

pub fn random_conditional<R: Rng>(rng: &mut R, n: usize, d: usize, floor: f64) -> Model {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| simplex_row(rng, d, floor)).collect();
    Model::from_rows(&rows).expect("rows share a length")
}

/// Weights bounded away from zero.
pub fn random_dist<R: Rng>(rng: &mut R, n: usize) -> PromptDistribution {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    PromptDistribution::from_masses(&w).expect("positive masses")
}

/// Weights with P(x) = P(Φx).
pub fn invariant_dist<R: Rng>(rng: &mut R, phi: &InvarianceMap) -> PromptDistribution {
    let n = phi.len();
    let mut w = vec![0.0; n];
    for x in 0..n {
        if w[x] == 0.0 {
            let v = rng.gen_range(0.2..1.0);
            let mut y = x;
            loop {
                w[y] = v;
                y = phi.apply(y);
                if y == x {
                    break;
                }
            }
        }
    }
    PromptDistribution::from_masses(&w).expect("positive masses")
}

/// Involution with at least one swapped pair (n ≥ 2).
pub fn random_involution<R: Rng>(rng: &mut R, n: usize) -> InvarianceMap {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let pairs = rng.gen_range(1..=n / 2);
    let swaps: Vec<(usize, usize)> = (0..pairs).map(|i| (order[2 * i], order[2 * i + 1])).collect();
    InvarianceMap::swaps(n, &swaps).expect("disjoint pairs")
}

/// Involution, or with probability `p_cycle` a map with one 3-cycle
/// (n ≥ 3) and the remaining prompts paired at random.
pub fn random_orbit_map<R: Rng>(rng: &mut R, n: usize, p_cycle: f64) -> InvarianceMap {
    if n < 3 || !rng.gen_bool(p_cycle) {
        return random_involution(rng, n);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut perm: Vec<usize> = (0..n).collect();
    perm[order[0]] = order[1];
    perm[order[1]] = order[2];
    perm[order[2]] = order[0];
    let mut i = 3;
    while i + 1 < n && rng.gen_bool(0.5) {
        perm[order[i]] = order[i + 1];
        perm[order[i + 1]] = order[i];
        i += 2;
    }
    InvarianceMap::new(perm).expect("valid permutation")
}

/// Random symmetric positive definite d×d matrix with eigenvalues in
/// roughly [0.5, 3].
pub fn random_spd<R: Rng>(rng: &mut R, d: usize) -> Vec<Vec<f64>> {
    let b: Vec<Vec<f64>> =
        (0..d).map(|_| (0..d).map(|_| StandardNormal.sample(rng)).collect::<Vec<f64>>()).collect();
    let mut a = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let s: f64 = (0..d).map(|k| b[i][k] * b[j][k]).sum();
            a[i][j] = s / d as f64;
        }
        a[i][i] += 0.5;
    }
    a
}

/// A coherent anchor strictly inside the simplex: the arithmetic orbit
/// average of random interior rows.
pub fn coherent_anchor<R: Rng>(rng: &mut R, phi: &InvarianceMap, d: usize) -> Model {
    let rows = random_conditional(rng, phi.len(), d, 0.05 / d as f64);
    let uniform = PromptDistribution::uniform(phi.len());
    orbit_average(&GeneratorSpec::squared_euclidean(), &uniform, phi, &rows).unwrap_or_else(|_| symmetrize(&rows, phi))
}

/// Π = simplex product with optional caps and affine rows, all satisfied
/// strictly by `anchor`, so Π ∩ C_coh has a relative interior point.
pub fn random_set<R: Rng>(rng: &mut R, anchor: &Model, caps: bool, affine: bool) -> ConvexModelSet {
    let (n, d) = (anchor.n(), anchor.d());
    let mut set = ConvexModelSet::simplex();
    if caps {
        for x in 0..n {
            for k in 0..d {
                if rng.gen_bool(0.3) {
                    let c = (anchor.get(x, k) + rng.gen_range(0.05..0.3)).min(1.0);
                    set = set.with_cap(x, k, c);
                }
            }
        }
    }
    if affine {
        for _ in 0..rng.gen_range(1..=2) {
            let mut coeffs = vec![vec![0.0; d]; n];
            for _ in 0..rng.gen_range(2..=4) {
                let (x, k) = (rng.gen_range(0..n), rng.gen_range(0..d));
                let z: f64 = StandardNormal.sample(rng);
                coeffs[x][k] += z;
            }
            let rhs: f64 =
                (0..n).flat_map(|x| (0..d).map(move |k| (x, k))).map(|(x, k)| coeffs[x][k] * anchor.get(x, k)).sum();
            set = set.with_affine(coeffs, rhs);
        }
    }
    set
}

/// Generators with per-kind dimension requirements already met for d.
pub fn random_generator<R: Rng>(rng: &mut R, d: usize, kinds: &[GenChoice]) -> Result<GeneratorSpec> {
    Ok(match kinds[rng.gen_range(0..kinds.len())] {
        GenChoice::SquaredEuclidean => GeneratorSpec::squared_euclidean(),
        GenChoice::NegativeEntropy => GeneratorSpec::negative_entropy(),
        GenChoice::NegativeLog => GeneratorSpec::negative_log(),
        GenChoice::Mahalanobis => GeneratorSpec::mahalanobis(&random_spd(rng, d))?,
        GenChoice::DiagonalQuadratic => {
            let diag: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..4.0)).collect();
            GeneratorSpec::diagonal_quadratic(&diag)?
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenChoice {
    SquaredEuclidean,
    NegativeEntropy,
    NegativeLog,
    Mahalanobis,
    DiagonalQuadratic,
}

pub const ALL_LEGENDRE: [GenChoice; 5] = [
    GenChoice::SquaredEuclidean,
    GenChoice::NegativeEntropy,
    GenChoice::NegativeLog,
    GenChoice::Mahalanobis,
    GenChoice::DiagonalQuadratic,
];

#[derive(Debug, Clone)]
pub struct Instance {
    pub id: usize,
    pub gen: GeneratorSpec,
    pub dist: PromptDistribution,
    pub phi: InvarianceMap,
    pub set_pi: ConvexModelSet,
    pub pi0: Model,
    /// Coherent point of Π strictly inside its bounds.
    pub anchor: Model,
}

#[derive(Debug, Clone)]
pub struct InstanceShape {
    pub n: (usize, usize),
    pub d: (usize, usize),
    pub caps: bool,
    pub affine: bool,
    pub p_cycle: f64,
    pub invariant_dist: bool,
    pub kinds: Vec<GenChoice>,
}

impl InstanceShape {
    pub fn generate(&self, seed: u64, stream: u64, id: usize) -> Result<Instance> {
        let mut rng = rng_for(seed, stream, id as u64);
        let n = rng.gen_range(self.n.0..=self.n.1);
        let d = rng.gen_range(self.d.0..=self.d.1);
        let phi = random_orbit_map(&mut rng, n, self.p_cycle);
        let dist = if self.invariant_dist { invariant_dist(&mut rng, &phi) } else { random_dist(&mut rng, n) };
        let anchor = coherent_anchor(&mut rng, &phi, d);
        let caps = self.caps && rng.gen_bool(0.7);
        let affine = self.affine && rng.gen_bool(0.5);
        let set_pi = random_set(&mut rng, &anchor, caps, affine);
        let pi0 = random_conditional(&mut rng, n, d, 0.02);
        let gen = random_generator(&mut rng, d, &self.kinds)?;
        Ok(Instance { id, gen, dist, phi, set_pi, pi0, anchor })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::{is_coherent, orbit_partition};

    #[test]
    fn instances_are_reproducible_and_feasible() {
        let shape = InstanceShape {
            n: (2, 8),
            d: (2, 5),
            caps: true,
            affine: true,
            p_cycle: 0.3,
            invariant_dist: false,
            kinds: ALL_LEGENDRE.to_vec(),
        };
        for id in 0..50 {
            let a = shape.generate(11, 1, id).unwrap();
            let b = shape.generate(11, 1, id).unwrap();
            assert_eq!(a.pi0, b.pi0);
            assert!(a.pi0.is_row_stochastic(1e-12));
            assert!(is_coherent(&a.anchor, &a.phi, 1e-12));
            let merged = a.set_pi.merged_with(&orbit_partition(&a.phi)).unwrap();
            assert!(merged.contains(&a.anchor, 1e-9), "instance {id}");
        }
    }

    #[test]
    fn rows_respect_floor() {
        let mut rng = rng_for(3, 0, 0);
        for _ in 0..100 {
            let r = simplex_row(&mut rng, 4, 0.02);
            assert!(r.iter().all(|v| *v >= 0.02 - 1e-15));
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}
