//! Experiment drivers shared by the CLI: run one selector, compare several on
//! the same budget, and sweep the redundancy threshold.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::baselines::{maxmin_diversity_select, random_select, topk_select, uniform_grid_select, SeedRule};
use crate::error::{Error, Result};
use crate::exact::{exact_solve_capped, DEFAULT_EXACT_CAP};
use crate::greedy::{greedy_prune, PruneConfig, DEFAULT_TAU};
use crate::io::SelectionRecord;
use crate::report::Table;
use crate::similarity::{cosine_from_parts, dot, objective_of, pairwise_similarities, row_sq_norms};
use crate::synth::recall_of_planted;
use crate::tokens::{SaliencyVector, Selection, TokenMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Greedy,
    Topk,
    Maxmin,
    Random,
    Grid,
    Exact,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Greedy, Method::Topk, Method::Maxmin, Method::Random, Method::Grid, Method::Exact];

    pub fn name(self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::Topk => "topk",
            Method::Maxmin => "maxmin",
            Method::Random => "random",
            Method::Grid => "grid",
            Method::Exact => "exact",
        }
    }

    /// Whether the method reads the redundancy threshold.
    pub fn uses_tau(self) -> bool {
        matches!(self, Method::Greedy | Method::Exact)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

/// Inputs shared by every method in a run.
#[derive(Debug, Clone)]
pub struct Instance {
    pub tokens: TokenMatrix,
    pub weights: SaliencyVector,
    /// Planted critical tokens, when the instance came from the generator.
    pub planted: Option<Vec<usize>>,
}

impl Instance {
    pub fn new(tokens: TokenMatrix, weights: SaliencyVector) -> Result<Self> {
        if weights.len() != tokens.n() {
            return Err(Error::DimensionMismatch { expected: tokens.n(), actual: weights.len() });
        }
        Ok(Self { tokens, weights, planted: None })
    }

    pub fn n(&self) -> usize {
        self.tokens.n()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodParams {
    pub budget: usize,
    pub tau: f64,
    pub backfill: bool,
    pub seed: u64,
    pub grid: Option<(usize, usize)>,
    pub seed_rule: SeedRule,
    pub exact_cap: usize,
    /// When false, runtimes are reported as zero so outputs are reproducible.
    pub timing: bool,
}

impl MethodParams {
    pub fn new(budget: usize) -> Self {
        Self {
            budget,
            tau: DEFAULT_TAU,
            backfill: true,
            seed: 0,
            grid: None,
            seed_rule: SeedRule::LowestIndex,
            exact_cap: DEFAULT_EXACT_CAP,
            timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub method: Method,
    pub selection: Selection,
    /// Total saliency of the whole selection, backfill included.
    pub objective: f64,
    /// Total saliency of the non-backfilled part.
    pub core_objective: f64,
    /// Pairs among non-backfilled indices with cosine above `tau`.
    pub violations: usize,
    pub runtime_us: u64,
}

/// Cosine of every selected pair, computed on demand.
fn selection_pair_cosines(tokens: &TokenMatrix, norms: &[f64], indices: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(indices.len() * indices.len().saturating_sub(1) / 2);
    for (a, &i) in indices.iter().enumerate() {
        for &j in &indices[a + 1..] {
            out.push(cosine_from_parts(dot(tokens.row(i), tokens.row(j)), norms[i], norms[j]));
        }
    }
    out
}

pub fn run_method(method: Method, inst: &Instance, p: &MethodParams) -> Result<MethodRun> {
    let n = inst.n();
    let norms = row_sq_norms(&inst.tokens)?;
    let start = Instant::now();
    let selection = match method {
        Method::Greedy => {
            let cfg = PruneConfig::new(p.budget, p.tau).with_backfill(p.backfill);
            greedy_prune(&inst.tokens, &inst.weights, &cfg)?.0
        }
        Method::Topk => topk_select(&inst.weights, p.budget)?,
        Method::Maxmin => maxmin_diversity_select(&inst.tokens, p.budget, p.seed_rule)?,
        Method::Random => random_select(n, p.budget.min(n), p.seed)?,
        Method::Grid => {
            let (w, h) = p.grid.ok_or_else(|| Error::InvalidParameter("grid method needs grid dimensions".into()))?;
            uniform_grid_select(w, h, n, p.budget.min(n))?
        }
        Method::Exact => {
            if n > p.exact_cap {
                return Err(Error::InstanceTooLarge { n, cap: p.exact_cap });
            }
            let sim = pairwise_similarities(&inst.tokens)?;
            exact_solve_capped(&inst.weights, &sim, p.tau, p.budget, p.exact_cap)?.selection
        }
    };
    let runtime_us = if p.timing { start.elapsed().as_micros() as u64 } else { 0 };
    let violations = selection_pair_cosines(&inst.tokens, &norms, selection.core_indices())
        .into_iter()
        .filter(|&c| c > p.tau)
        .count();
    Ok(MethodRun {
        method,
        objective: objective_of(&inst.weights, selection.indices())?,
        core_objective: objective_of(&inst.weights, selection.core_indices())?,
        selection,
        violations,
        runtime_us,
    })
}

impl MethodRun {
    pub fn to_record(&self, tau: f64, input_checksum: &str) -> SelectionRecord {
        let mut backfilled_indices: Vec<u64> = self.selection.backfilled_indices().iter().map(|&i| i as u64).collect();
        backfilled_indices.sort_unstable();
        SelectionRecord {
            method: self.method.name().into(),
            budget: self.selection.budget() as u64,
            tau: self.method.uses_tau().then_some(tau),
            indices: self.selection.sorted_indices().into_iter().map(|i| i as u64).collect(),
            backfilled: self.selection.backfilled() as u64,
            backfilled_indices,
            objective: self.objective,
            feasibility_violation_count: self.violations as u64,
            runtime_microseconds: self.runtime_us,
            input_checksum: input_checksum.into(),
            extra: Default::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub method: Method,
    pub selected: usize,
    pub backfilled: usize,
    pub objective: f64,
    /// `1 - max cos` over selected pairs; `None` with fewer than two tokens.
    pub min_pair_distance: Option<f64>,
    pub violations: usize,
    pub recall: Option<f64>,
    /// Exact optimum minus the method's non-backfilled objective.
    pub optimality_gap: Option<f64>,
    pub runtime_us: u64,
}

/// Runs each method at the same budget. Rows follow the order of `methods`.
/// When `n` fits the exact solver, the optimality gap column is filled.
pub fn compare(inst: &Instance, methods: &[Method], p: &MethodParams) -> Result<Vec<ComparisonRow>> {
    let norms = row_sq_norms(&inst.tokens)?;
    let optimum = if inst.n() <= p.exact_cap {
        let sim = pairwise_similarities(&inst.tokens)?;
        Some(exact_solve_capped(&inst.weights, &sim, p.tau, p.budget, p.exact_cap)?.objective)
    } else {
        None
    };
    methods
        .iter()
        .map(|&m| {
            let run = run_method(m, inst, p)?;
            let cos = selection_pair_cosines(&inst.tokens, &norms, run.selection.indices());
            let max_cos = cos.iter().copied().fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))));
            Ok(ComparisonRow {
                method: m,
                selected: run.selection.len(),
                backfilled: run.selection.backfilled(),
                objective: run.objective,
                min_pair_distance: max_cos.map(|c| 1.0 - c),
                violations: run.violations,
                recall: inst.planted.as_deref().map(|pl| recall_of_planted(&run.selection, pl)),
                optimality_gap: optimum.map(|o| o - run.core_objective),
                runtime_us: run.runtime_us,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    pub objective: f64,
    pub pre_backfill: usize,
    pub backfilled: usize,
    /// Mean cosine over selected pairs; `None` with fewer than two tokens.
    pub mean_pair_cos: Option<f64>,
}

/// Greedy selection at each threshold in `taus`.
pub fn sweep_tau(inst: &Instance, taus: &[f64], p: &MethodParams) -> Result<Vec<SweepRow>> {
    let norms = row_sq_norms(&inst.tokens)?;
    taus.iter()
        .map(|&tau| {
            let run = run_method(Method::Greedy, inst, &MethodParams { tau, ..p.clone() })?;
            let cos = selection_pair_cosines(&inst.tokens, &norms, run.selection.indices());
            Ok(SweepRow {
                tau,
                objective: run.objective,
                pre_backfill: run.selection.core_indices().len(),
                backfilled: run.selection.backfilled(),
                mean_pair_cos: (!cos.is_empty()).then(|| cos.iter().sum::<f64>() / cos.len() as f64),
            })
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.6}"))
}

pub fn comparison_table(rows: &[ComparisonRow]) -> Table {
    let mut t = Table::new([
        "method",
        "selected",
        "backfilled",
        "objective",
        "min_pair_dist",
        "violations",
        "recall",
        "gap",
        "runtime_us",
    ]);
    for r in rows {
        t.push(vec![
            r.method.to_string(),
            r.selected.to_string(),
            r.backfilled.to_string(),
            format!("{:.6}", r.objective),
            opt(r.min_pair_distance),
            r.violations.to_string(),
            opt(r.recall),
            opt(r.optimality_gap),
            r.runtime_us.to_string(),
        ]);
    }
    t
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(["tau", "objective", "pre_backfill", "backfilled", "mean_pair_cos"]);
    for r in rows {
        t.push(vec![
            format!("{}", r.tau),
            format!("{:.6}", r.objective),
            r.pre_backfill.to_string(),
            r.backfilled.to_string(),
            opt(r.mean_pair_cos),
        ]);
    }
    t
}
