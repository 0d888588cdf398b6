#![allow(dead_code)]

use greedyprune::similarity::pairwise_similarities;
use greedyprune::{SaliencyVector, SimilarityMatrix, TokenMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct RandomInstance {
    pub tokens: TokenMatrix,
    pub weights: SaliencyVector,
    pub sim: SimilarityMatrix,
}

/// Random unit-norm embeddings. A low dimension plus a shared offset makes
/// conflicts common at moderate thresholds.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> RandomInstance {
    let offset: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let mut data = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let row: Vec<f64> = (0..dim).map(|k| offset[k] + rng.gen_range(-1.0..1.0)).collect();
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        data.extend(row.iter().map(|x| x / norm));
    }
    let tokens = TokenMatrix::new(n, dim, data).unwrap();
    let weights = SaliencyVector::new((0..n).map(|_| rng.gen::<f64>()).collect()).unwrap();
    let sim = pairwise_similarities(&tokens).unwrap();
    RandomInstance { tokens, weights, sim }
}

/// Exhaustive oracle: best feasible subset of size <= budget. Objectives are
/// summed over ascending indices; ties go to the lexicographically smallest
/// ascending index list.
pub fn brute_force_optimum(w: &[f64], sim: &SimilarityMatrix, tau: f64, budget: usize) -> (Vec<usize>, f64) {
    let n = w.len();
    let mut best: (Vec<usize>, f64) = (Vec::new(), 0.0);
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize > budget {
            continue;
        }
        let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let feasible = set.iter().enumerate().all(|(a, &i)| set[a + 1..].iter().all(|&j| sim.get(i, j) <= tau));
        if !feasible {
            continue;
        }
        let obj: f64 = set.iter().map(|&i| w[i]).sum();
        if obj > best.1 || (obj == best.1 && set < best.0) {
            best = (set, obj);
        }
    }
    best
}
