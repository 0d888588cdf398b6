//! Greedy pivot extraction with threshold-based redundancy elimination.
//!
//! Candidates are visited in descending saliency. Each step takes the best
//! remaining candidate as a pivot, keeps it, and discards every remaining
//! candidate whose cosine with the pivot exceeds `tau`. Because each later
//! pivot survived elimination by all earlier pivots, the kept set is pairwise
//! feasible for the `cos <= tau` constraint.

use crate::error::{Error, Result};
use crate::saliency::rank_tokens;
use crate::similarity::{cosine_from_parts, dot_rows, row_sq_norms};
use crate::tokens::{SaliencyVector, Selection, TokenMatrix};

/// Default threshold used by the command-line tools.
pub const DEFAULT_TAU: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct PruneConfig {
    pub budget: usize,
    /// Pairs with cosine strictly above this are redundant. Values >= 1 turn
    /// the constraint off; values < -1 make every pair conflict.
    pub tau: f64,
    /// Top up from eliminated tokens when candidates run out before `budget`.
    pub backfill: bool,
    /// Multiplier reported by [`greedy_marginal_score`] diagnostics.
    pub lambda_uniform: f64,
}

impl PruneConfig {
    pub fn new(budget: usize, tau: f64) -> Self {
        Self { budget, tau, backfill: true, lambda_uniform: 1.0 }
    }

    pub fn with_backfill(mut self, backfill: bool) -> Self {
        self.backfill = backfill;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidParameter("budget must be >= 1".into()));
        }
        if !self.tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau must be finite, got {}", self.tau)));
        }
        if !(self.lambda_uniform >= 0.0 && self.lambda_uniform.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda_uniform
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyStep {
    pub pivot: usize,
    /// Candidates eliminated by this pivot, in saliency order.
    pub eliminated: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    BudgetReached,
    CandidatesExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    pub terminated_by: Termination,
    /// Candidates never visited because the budget was met first.
    pub leftover: Vec<usize>,
}

const MAX_BLOCK: usize = 32;
/// Smallest token matrix, in values, that gets blocks of more than one row.
const BLOCKING_MIN_VALUES: usize = 1 << 18;

/// Dot products of the first few remaining candidates against all remaining
/// candidates, filled in one pass over the token rows. The block doubles
/// while every member becomes a pivot and shrinks to twice the pivot count
/// otherwise.
struct DotBlock {
    n: usize,
    size: usize,
    max_size: usize,
    members: Vec<usize>,
    used: usize,
    values: Vec<f64>,
}

impl DotBlock {
    fn new(tokens: &TokenMatrix) -> Self {
        let max_size = if tokens.n() * tokens.dim() >= BLOCKING_MIN_VALUES { MAX_BLOCK } else { 1 };
        Self { n: tokens.n(), size: max_size.min(16), max_size, members: Vec::new(), used: 0, values: Vec::new() }
    }

    /// `scans_left` counts the pivots, this one included, that still need a scan.
    fn dots_for(&mut self, tokens: &TokenMatrix, pivot: usize, candidates: &[usize], scans_left: usize) -> &[f64] {
        let slot = match self.members.iter().position(|&m| m == pivot) {
            Some(slot) => slot,
            None => {
                if !self.members.is_empty() {
                    self.size = (2 * self.used).clamp(1, self.max_size);
                }
                self.members.clear();
                self.members.extend(candidates.iter().take(self.size.min(scans_left)).copied());
                self.used = 0;
                self.values.resize(self.members.len() * self.n, 0.0);
                for &c in candidates {
                    let crow = tokens.row(c);
                    let mut k = 0;
                    while k < self.members.len() {
                        let left = self.members.len() - k;
                        let m = &self.members[k..];
                        let row = |j: usize| tokens.row(m[j]);
                        let (got, width): (&[f64], usize) = match left {
                            8.. => (&dot_rows([0, 1, 2, 3, 4, 5, 6, 7].map(row), crow), 8),
                            4..=7 => (&dot_rows([0, 1, 2, 3].map(row), crow), 4),
                            2 | 3 => (&dot_rows([0, 1].map(row), crow), 2),
                            _ => (&dot_rows([row(0)], crow), 1),
                        };
                        for (j, &d) in got.iter().enumerate() {
                            self.values[(k + j) * self.n + c] = d;
                        }
                        k += width;
                    }
                }
                0
            }
        };
        self.used += 1;
        &self.values[slot * self.n..(slot + 1) * self.n]
    }
}

pub fn greedy_prune(
    tokens: &TokenMatrix,
    weights: &SaliencyVector,
    cfg: &PruneConfig,
) -> Result<(Selection, GreedyTrace)> {
    cfg.validate()?;
    let n = tokens.n();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: weights.len() });
    }
    let norms = row_sq_norms(tokens)?;

    let mut candidates = rank_tokens(weights).order;
    let mut selected = Vec::with_capacity(cfg.budget.min(n));
    let mut steps = Vec::new();
    let mut next = Vec::with_capacity(n);
    let mut block = DotBlock::new(tokens);

    let terminated_by = loop {
        if selected.len() == cfg.budget {
            break Termination::BudgetReached;
        }
        let Some((&pivot, rest)) = candidates.split_first() else {
            break Termination::CandidatesExhausted;
        };
        selected.push(pivot);
        let mut eliminated = Vec::new();
        if selected.len() < cfg.budget {
            let dots = block.dots_for(tokens, pivot, &candidates, cfg.budget - selected.len());
            next.clear();
            for &c in rest {
                let cos = cosine_from_parts(dots[c], norms[pivot], norms[c]);
                if cos > cfg.tau {
                    eliminated.push(c);
                } else {
                    next.push(c);
                }
            }
            std::mem::swap(&mut candidates, &mut next);
        } else {
            candidates.remove(0);
        }
        steps.push(GreedyStep { pivot, eliminated });
    };

    let mut backfilled = 0;
    if cfg.backfill && selected.len() < cfg.budget {
        // Eliminated lists are each in saliency order; merge them globally.
        let mut pool: Vec<usize> = steps.iter().flat_map(|s| s.eliminated.iter().copied()).collect();
        let w = weights.as_slice();
        pool.sort_by(|&a, &b| crate::saliency::saliency_order(w, a, b));
        for idx in pool.into_iter().take(cfg.budget - selected.len()) {
            selected.push(idx);
            backfilled += 1;
        }
    }

    let selection = Selection::with_backfill(selected, cfg.budget, backfilled)?;
    Ok((selection, GreedyTrace { steps, terminated_by, leftover: candidates }))
}

/// Penalized score `w - lambda * (cos - tau)` relating a greedy step to the
/// Lagrangian view of the constrained problem.
pub fn greedy_marginal_score(weight: f64, cos_to_selected: f64, tau: f64, lambda: f64) -> f64 {
    weight - lambda * (cos_to_selected - tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{feasibility_violations, pairwise_similarities, violations_among};

    /// Unit vectors in the plane realizing cos(0,1)=0.95, cos(0,2)=cos(1,2)=0.1
    /// is impossible in 2-D, so use 3-D rows built from those Gram entries.
    fn three_token_instance() -> (TokenMatrix, SaliencyVector) {
        // Cholesky of [[1, .95, .1], [.95, 1, .1], [.1, .1, 1]].
        let a = 0.95f64;
        let b = (1.0 - a * a).sqrt();
        let c0 = 0.1;
        let c1 = (0.1 - a * c0) / b;
        let c2 = (1.0 - c0 * c0 - c1 * c1).sqrt();
        let t = TokenMatrix::from_rows(&[[1.0, 0.0, 0.0], [a, b, 0.0], [c0, c1, c2]]).unwrap();
        (t, SaliencyVector::new(vec![0.9, 0.8, 0.5]).unwrap())
    }

    /// Plain pivot loop over the dense similarity table.
    fn reference_pivots(sim: &crate::SimilarityMatrix, w: &SaliencyVector, budget: usize, tau: f64) -> Vec<usize> {
        let mut candidates = rank_tokens(w).order;
        let mut kept = Vec::new();
        while kept.len() < budget && !candidates.is_empty() {
            let p = candidates.remove(0);
            kept.push(p);
            candidates.retain(|&c| sim.get(p, c) <= tau);
        }
        kept
    }

    #[test]
    fn large_inputs_match_the_dense_reference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let (n, dim) = (300, 1024);
        assert!(n * dim >= BLOCKING_MIN_VALUES);
        let centers: Vec<Vec<f64>> = (0..20).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut data = Vec::with_capacity(n * dim);
        for _ in 0..n {
            let c = &centers[rng.gen_range(0..centers.len())];
            let noise = rng.gen_range(0.0..0.8);
            data.extend(c.iter().map(|x| x + noise * rng.gen_range(-1.0..1.0)));
        }
        let t = TokenMatrix::new(n, dim, data).unwrap();
        let w = SaliencyVector::new((0..n).map(|_| rng.gen()).collect()).unwrap();
        let sim = pairwise_similarities(&t).unwrap();
        for (budget, tau) in [(64, 0.9), (40, 0.7), (300, 0.8), (10, 0.95)] {
            let (sel, trace) = greedy_prune(&t, &w, &PruneConfig::new(budget, tau).with_backfill(false)).unwrap();
            assert_eq!(sel.indices(), reference_pivots(&sim, &w, budget, tau).as_slice(), "budget {budget} tau {tau}");
            assert!(trace.steps.iter().any(|s| !s.eliminated.is_empty()));
        }
    }

    #[test]
    fn three_token_example() {
        let (t, w) = three_token_instance();
        let s = pairwise_similarities(&t).unwrap();
        assert!((s.get(0, 1) - 0.95).abs() < 1e-12);
        assert!((s.get(0, 2) - 0.1).abs() < 1e-12);
        assert!((s.get(1, 2) - 0.1).abs() < 1e-12);
        let (sel, trace) = greedy_prune(&t, &w, &PruneConfig::new(2, 0.9)).unwrap();
        assert_eq!(sel.indices(), &[0, 2]);
        assert_eq!(trace.steps[0], GreedyStep { pivot: 0, eliminated: vec![1] });
        assert_eq!(trace.terminated_by, Termination::BudgetReached);
    }

    #[test]
    fn vacuous_threshold_matches_ranking() {
        let (t, w) = three_token_instance();
        let (sel, trace) = greedy_prune(&t, &w, &PruneConfig::new(2, 1.0)).unwrap();
        assert_eq!(sel.indices(), &[0, 1]);
        assert!(trace.steps.iter().all(|s| s.eliminated.is_empty()));
    }

    #[test]
    fn single_token_budget() {
        let t = TokenMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let w = SaliencyVector::new(vec![0.3, 0.7, 0.7]).unwrap();
        let (sel, trace) = greedy_prune(&t, &w, &PruneConfig::new(1, 0.5)).unwrap();
        assert_eq!(sel.indices(), &[1]);
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.leftover, vec![2, 0]);
    }

    #[test]
    fn equality_at_tau_survives() {
        let t = TokenMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let w = SaliencyVector::new(vec![1.0, 0.5]).unwrap();
        let (sel, _) = greedy_prune(&t, &w, &PruneConfig::new(2, 0.0)).unwrap();
        assert_eq!(sel.indices(), &[0, 1]);
    }

    #[test]
    fn single_cluster_collapse_and_backfill() {
        let t = TokenMatrix::from_rows(&[[1.0, 0.01], [1.0, 0.02], [1.0, 0.0], [1.0, 0.03]]).unwrap();
        let w = SaliencyVector::new(vec![0.2, 0.9, 0.4, 0.9]).unwrap();
        let (sel, trace) = greedy_prune(&t, &w, &PruneConfig::new(3, 0.5).with_backfill(false)).unwrap();
        assert_eq!(sel.indices(), &[1]);
        assert_eq!(trace.terminated_by, Termination::CandidatesExhausted);

        let (sel, _) = greedy_prune(&t, &w, &PruneConfig::new(3, 0.5)).unwrap();
        assert_eq!(sel.indices(), &[1, 3, 2]);
        assert_eq!(sel.backfilled(), 2);
        assert_eq!(sel.core_indices(), &[1]);
    }

    #[test]
    fn errors() {
        let t = TokenMatrix::from_rows(&[[1.0, 0.0]]).unwrap();
        let w = SaliencyVector::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(greedy_prune(&t, &w, &PruneConfig::new(1, 0.5)), Err(Error::DimensionMismatch { .. })));
        let empty = TokenMatrix::new(0, 2, vec![]).unwrap();
        let w0 = SaliencyVector::new(vec![]).unwrap();
        assert_eq!(greedy_prune(&empty, &w0, &PruneConfig::new(1, 0.5)), Err(Error::EmptyInput));
        let w1 = SaliencyVector::new(vec![1.0]).unwrap();
        assert!(greedy_prune(&t, &w1, &PruneConfig::new(0, 0.5)).is_err());
        assert!(greedy_prune(&t, &w1, &PruneConfig::new(1, f64::NAN)).is_err());
    }

    #[test]
    fn marginal_score_examples() {
        assert_eq!(greedy_marginal_score(0.8, 0.5, 0.5, 10.0), 0.8);
        assert!((greedy_marginal_score(0.8, 0.9, 0.5, 1.0) - 0.4).abs() < 1e-12);
        assert_eq!(greedy_marginal_score(0.8, 0.99, -0.3, 0.0), 0.8);
    }

    #[test]
    fn random_instances_are_feasible_and_traced() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..60);
            let d = rng.gen_range(2..8);
            let data: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t = TokenMatrix::new(n, d, data).unwrap();
            let w = SaliencyVector::new((0..n).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap();
            let m = rng.gen_range(1..=n + 2);
            let tau = rng.gen_range(-0.2..1.0);
            let (sel, trace) = greedy_prune(&t, &w, &PruneConfig::new(m, tau)).unwrap();
            let s = pairwise_similarities(&t).unwrap();
            assert!(violations_among(&s, sel.core_indices(), tau + 1e-9).unwrap().is_empty());
            assert_eq!(sel.len(), m.min(n));

            let mut all: Vec<usize> = trace
                .steps
                .iter()
                .flat_map(|st| std::iter::once(st.pivot).chain(st.eliminated.iter().copied()))
                .chain(trace.leftover.iter().copied())
                .collect();
            all.sort_unstable();
            assert_eq!(all, (0..n).collect::<Vec<_>>());

            let again = greedy_prune(&t, &w, &PruneConfig::new(m, tau)).unwrap();
            assert_eq!(again, (sel.clone(), trace));

            let no_bf = greedy_prune(&t, &w, &PruneConfig::new(m, tau).with_backfill(false)).unwrap().0;
            assert!(feasibility_violations(&s, &no_bf, tau).unwrap().is_empty());
            assert_eq!(no_bf.indices(), sel.core_indices());
        }
    }
}
