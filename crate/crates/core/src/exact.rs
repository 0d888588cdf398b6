//! Exact oracle for the budgeted, similarity-constrained selection problem
//! and evaluators for its Lagrangian form.
//!
//! The constrained problem is
//!
//! ```text
//! max  sum_i w_i z_i
//! s.t. z_i z_j (cos(v_i, v_j) - tau) <= 0   for all i < j
//!      sum_i z_i <= M,  z in {0,1}^n
//! ```
//!
//! which is NP-hard (it contains maximum-weight independent set), so the
//! solver is only meant for small instances used in tests and gap studies.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::tokens::{SaliencyVector, Selection, SimilarityMatrix};

pub const DEFAULT_EXACT_CAP: usize = 24;
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub selection: Selection,
    pub objective: f64,
    pub nodes_explored: u64,
    pub proven_optimal: bool,
}

/// Canonical objective: weights summed over ascending indices.
fn canonical_objective(w: &[f64], sorted: &[usize]) -> f64 {
    sorted.iter().map(|&i| w[i]).sum()
}

/// Larger objective wins; equal objectives prefer the lexicographically
/// smaller ascending index list.
fn better(obj_a: f64, set_a: &[usize], obj_b: f64, set_b: &[usize]) -> bool {
    match obj_a.total_cmp(&obj_b) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => set_a < set_b,
    }
}

struct Search<'a> {
    w: &'a [f64],
    sim: &'a SimilarityMatrix,
    tau: f64,
    budget: usize,
    /// Tokens in descending weight order, ties by index.
    order: Vec<usize>,
    chosen: Vec<usize>,
    best_set: Vec<usize>,
    best_obj: f64,
    nodes: u64,
}

impl Search<'_> {
    fn compatible(&self, t: usize) -> bool {
        self.chosen.iter().all(|&c| self.sim.get(c, t) <= self.tau)
    }

    /// Current weight plus the best `remaining budget` positive weights that
    /// are still compatible with the chosen set.
    fn bound(&self, depth: usize, current: f64) -> f64 {
        let mut room = self.budget - self.chosen.len();
        let mut b = current;
        for &t in &self.order[depth..] {
            if room == 0 || self.w[t] <= 0.0 {
                break;
            }
            if self.compatible(t) {
                b += self.w[t];
                room -= 1;
            }
        }
        b
    }

    fn record_leaf(&mut self) {
        let mut set = self.chosen.clone();
        set.sort_unstable();
        let obj = canonical_objective(self.w, &set);
        if better(obj, &set, self.best_obj, &self.best_set) {
            self.best_obj = obj;
            self.best_set = set;
        }
    }

    fn dfs(&mut self, depth: usize, current: f64) {
        self.nodes += 1;
        if depth == self.order.len() || self.chosen.len() == self.budget {
            self.record_leaf();
            return;
        }
        // Slack keeps ties (and near-ties from summation order) explored so
        // the canonical comparison decides them.
        let slack = 1e-9 * (1.0 + self.best_obj.abs());
        if self.bound(depth, current) < self.best_obj - slack {
            return;
        }
        let t = self.order[depth];
        if self.compatible(t) {
            self.chosen.push(t);
            self.dfs(depth + 1, current + self.w[t]);
            self.chosen.pop();
        }
        self.dfs(depth + 1, current);
    }
}

/// Branch-and-bound with the default size cap.
pub fn exact_solve(weights: &SaliencyVector, sim: &SimilarityMatrix, tau: f64, budget: usize) -> Result<ExactSolution> {
    exact_solve_capped(weights, sim, tau, budget, DEFAULT_EXACT_CAP)
}

pub fn exact_solve_capped(
    weights: &SaliencyVector,
    sim: &SimilarityMatrix,
    tau: f64,
    budget: usize,
    cap: usize,
) -> Result<ExactSolution> {
    let n = weights.len();
    if sim.n() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: sim.n() });
    }
    if n > cap {
        return Err(Error::InstanceTooLarge { n, cap });
    }
    if tau.is_nan() {
        return Err(Error::InvalidParameter("tau is NaN".into()));
    }
    let w = weights.as_slice();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| crate::saliency::saliency_order(w, a, b));

    let mut search = Search {
        w,
        sim,
        tau,
        budget,
        order,
        chosen: Vec::with_capacity(budget.min(n)),
        best_set: Vec::new(),
        best_obj: 0.0,
        nodes: 0,
    };
    search.dfs(0, 0.0);

    Ok(ExactSolution {
        selection: Selection::new(search.best_set, budget)?,
        objective: search.best_obj,
        nodes_explored: search.nodes,
        proven_optimal: true,
    })
}

/// Non-negative multipliers for the pairwise constraints.
#[derive(Debug, Clone, PartialEq)]
pub enum LagrangeMultipliers {
    /// Same multiplier for every pair.
    Uniform(f64),
    /// Symmetric `n x n` row-major table; only the upper triangle is read.
    Matrix { n: usize, values: Vec<f64> },
}

impl LagrangeMultipliers {
    pub fn matrix(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, actual: values.len() });
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidParameter(format!("lambda[{i}][{j}] = {v} must be >= 0")));
                }
                if v != values[j * n + i] {
                    return Err(Error::InvalidParameter(format!("lambda not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::Matrix { n, values })
    }

    pub fn uniform(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda {lambda} must be >= 0")));
        }
        Ok(Self::Uniform(lambda))
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::Uniform(l) => *l,
            Self::Matrix { n, values } => values[i * n + j],
        }
    }
}

/// `L(z, lambda) = sum_i w_i z_i - sum_{i<j} lambda_ij (cos_ij - tau) z_i z_j`.
pub fn lagrangian_value(
    z: &[bool],
    weights: &SaliencyVector,
    sim: &SimilarityMatrix,
    tau: f64,
    lambda: &LagrangeMultipliers,
) -> Result<f64> {
    let n = weights.len();
    for len in [z.len(), sim.n()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, actual: len });
        }
    }
    if let LagrangeMultipliers::Matrix { n: ln, .. } = lambda {
        if *ln != n {
            return Err(Error::DimensionMismatch { expected: n, actual: *ln });
        }
    }
    let on: Vec<usize> = (0..n).filter(|&i| z[i]).collect();
    let linear: f64 = on.iter().map(|&i| weights[i]).sum();
    let mut penalty = 0.0;
    for (a, &i) in on.iter().enumerate() {
        for &j in &on[a + 1..] {
            penalty += lambda.get(i, j) * (sim.get(i, j) - tau);
        }
    }
    Ok(linear - penalty)
}

/// Maximizes the Lagrangian over all `2^n` assignments (no budget term).
/// Ties resolve to the lexicographically smallest `z` (with `false < true`).
pub fn lagrangian_brute_max(
    weights: &SaliencyVector,
    sim: &SimilarityMatrix,
    tau: f64,
    lambda: &LagrangeMultipliers,
) -> Result<(Vec<bool>, f64)> {
    lagrangian_brute_max_capped(weights, sim, tau, lambda, DEFAULT_ENUMERATION_CAP)
}

pub fn lagrangian_brute_max_capped(
    weights: &SaliencyVector,
    sim: &SimilarityMatrix,
    tau: f64,
    lambda: &LagrangeMultipliers,
    cap: usize,
) -> Result<(Vec<bool>, f64)> {
    let n = weights.len();
    if n > cap {
        return Err(Error::InstanceTooLarge { n, cap });
    }
    let mut best: Option<(Vec<bool>, f64)> = None;
    let mut z = vec![false; n];
    // Index 0 is the most significant bit, so masks ascend in lexicographic
    // order of z and the first maximizer found is the smallest.
    for mask in 0u64..(1u64 << n) {
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = (mask >> (n - 1 - i)) & 1 == 1;
        }
        let v = lagrangian_value(&z, weights, sim, tau, lambda)?;
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((z.clone(), v));
        }
    }
    Ok(best.expect("at least the all-zero assignment is evaluated"))
}
