//! Query-driven token saliency and ranking.
//!
//! The query is whatever context vector the caller extracted (for example the
//! hidden state of the last text token); saliency is its cosine with each
//! token. Externally produced weights can be used directly as a
//! [`SaliencyVector`].

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::similarity::{cosine_from_parts, dot, row_sq_norms};
use crate::tokens::{SaliencyVector, Selection, TokenMatrix};

/// Tokens sorted by descending saliency, ties broken by ascending index.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedTokens {
    pub order: Vec<usize>,
    pub weights: SaliencyVector,
}

/// Descending weight, then ascending index.
#[inline]
pub(crate) fn saliency_order(w: &[f64], a: usize, b: usize) -> Ordering {
    w[b].total_cmp(&w[a]).then(a.cmp(&b))
}

pub fn compute_saliency(visual: &TokenMatrix, query: &[f64]) -> Result<SaliencyVector> {
    if query.len() != visual.dim() {
        return Err(Error::DimensionMismatch { expected: visual.dim(), actual: query.len() });
    }
    let qn = dot(query, query);
    if qn == 0.0 {
        return Err(Error::ZeroNormVector { row: None });
    }
    let norms = row_sq_norms(visual)?;
    let weights = visual.rows().zip(&norms).map(|(r, &rn)| cosine_from_parts(dot(r, query), rn, qn)).collect();
    SaliencyVector::new(weights)
}

pub fn rank_tokens(weights: &SaliencyVector) -> RankedTokens {
    let w = weights.as_slice();
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| saliency_order(w, a, b));
    RankedTokens { order, weights: weights.clone() }
}

/// The `floor(fraction * n)` most salient tokens, i.e. the ones to remove in
/// a top-fraction ablation.
pub fn ablate_top_fraction(weights: &SaliencyVector, fraction: f64) -> Result<Selection> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!("fraction {fraction} outside [0, 1]")));
    }
    let n = weights.len();
    let count = ((fraction * n as f64).floor() as usize).min(n);
    let mut order = rank_tokens(weights).order;
    order.truncate(count);
    Selection::new(order, count)
}
