//! Comparison selectors: saliency-only, diversity-only, random and a uniform
//! spatial grid. These are behavioral stand-ins for the families of methods
//! they represent, not reimplementations of any specific published method.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::saliency::rank_tokens;
use crate::similarity::{cosine_from_parts, dot, row_sq_norms};
use crate::tokens::{SaliencyVector, Selection, TokenMatrix};

/// The `budget` most salient tokens.
pub fn topk_select(weights: &SaliencyVector, budget: usize) -> Result<Selection> {
    let mut order = rank_tokens(weights).order;
    order.truncate(budget);
    Selection::new(order, budget)
}

/// Starting point for farthest-point selection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SeedRule {
    #[default]
    LowestIndex,
    /// Row with the largest Euclidean norm (lowest index on ties).
    MaxNorm,
}

/// Greedy max-min (farthest-point) selection under the distance `1 - cos`.
///
/// Weight-blind: only the embeddings matter.
pub fn maxmin_diversity_select(tokens: &TokenMatrix, budget: usize, seed_rule: SeedRule) -> Result<Selection> {
    let n = tokens.n();
    let norms = row_sq_norms(tokens)?;
    let take = budget.min(n);
    let mut selected = Vec::with_capacity(take);
    if take == 0 {
        return Selection::new(selected, budget);
    }
    let seed = match seed_rule {
        SeedRule::LowestIndex => 0,
        SeedRule::MaxNorm => (0..n).fold(0, |best, i| if norms[i] > norms[best] { i } else { best }),
    };
    let mut in_set = vec![false; n];
    let mut min_dist = vec![f64::INFINITY; n];
    let mut last = seed;
    selected.push(seed);
    in_set[seed] = true;

    while selected.len() < take {
        let lrow = tokens.row(last);
        let mut best: Option<usize> = None;
        for i in 0..n {
            if in_set[i] {
                continue;
            }
            let d = 1.0 - cosine_from_parts(dot(lrow, tokens.row(i)), norms[last], norms[i]);
            if d < min_dist[i] {
                min_dist[i] = d;
            }
            if best.is_none_or(|b| min_dist[i] > min_dist[b]) {
                best = Some(i);
            }
        }
        let b = best.expect("take <= n leaves an unselected token");
        selected.push(b);
        in_set[b] = true;
        last = b;
    }
    Selection::new(selected, budget)
}

/// Unbiased integer in `[0, bound)` by rejection.
fn bounded(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

/// Uniform sample without replacement from ChaCha8 seeded with `seed`
/// (partial Fisher-Yates). Indices are returned in draw order.
pub fn random_select(n: usize, budget: usize, seed: u64) -> Result<Selection> {
    if budget > n {
        return Err(Error::BudgetExceedsN { budget, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    for k in 0..budget {
        let j = k + bounded(&mut rng, (n - k) as u64) as usize;
        pool.swap(k, j);
    }
    pool.truncate(budget);
    Selection::new(pool, budget)
}

/// Evenly strided row-major positions `floor(k * n / M)`.
pub fn uniform_grid_select(width: usize, height: usize, n: usize, budget: usize) -> Result<Selection> {
    if width * height != n {
        return Err(Error::GridMismatch { width, height, n });
    }
    if budget > n {
        return Err(Error::BudgetExceedsN { budget, n });
    }
    let indices = (0..budget).map(|k| k * n / budget).collect();
    Selection::new(indices, budget)
}
