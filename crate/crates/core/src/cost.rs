//! Prefill compute ratio of a decoder whose visual tokens are pruned after
//! layer `K`.
//!
//! Per-layer cost for sequence length `mu` is `4 mu d^2 - 2 mu^2 d + 2 mu d m`.
//! Layers `1..=K` run at the full length `mu = N + M`; layers `K+1..=T` run at
//! the pruned length `N + M_pruned`. The ratio is dimensionless.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostParams {
    pub total_layers: u64,
    pub prune_layer: u64,
    pub text_len: u64,
    pub orig_visual: u64,
    pub pruned_visual: u64,
    pub hidden_dim: u64,
    pub ffn_dim: u64,
}

impl CostParams {
    pub fn full_len(&self) -> u64 {
        self.text_len + self.orig_visual
    }

    pub fn pruned_len(&self) -> u64 {
        self.text_len + self.pruned_visual
    }

    /// Sequence lengths must stay below `d + m/2`, where the per-layer cost
    /// is increasing.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.total_layers == 0 {
            return bad("total_layers must be >= 1".into());
        }
        if self.prune_layer > self.total_layers {
            return bad(format!("prune_layer {} exceeds total_layers {}", self.prune_layer, self.total_layers));
        }
        if self.pruned_visual > self.orig_visual {
            return bad(format!("pruned_visual {} exceeds orig_visual {}", self.pruned_visual, self.orig_visual));
        }
        if self.hidden_dim == 0 || self.ffn_dim == 0 {
            return bad("hidden_dim and ffn_dim must be >= 1".into());
        }
        // mu < d + m/2  <=>  2 mu < 2d + m
        if 2 * self.full_len() >= 2 * self.hidden_dim + self.ffn_dim {
            return bad(format!(
                "sequence length {} outside the monotone regime (< d + m/2 = {})",
                self.full_len(),
                self.hidden_dim as f64 + self.ffn_dim as f64 / 2.0
            ));
        }
        Ok(())
    }
}

/// `4 mu d^2 - 2 mu^2 d + 2 mu d m`.
pub fn layer_flops(seq_len: u64, hidden_dim: u64, ffn_dim: u64) -> f64 {
    let (mu, d, m) = (seq_len as f64, hidden_dim as f64, ffn_dim as f64);
    4.0 * mu * d * d - 2.0 * mu * mu * d + 2.0 * mu * d * m
}

fn ratio_unchecked(p: &CostParams, full: f64) -> f64 {
    let pruned = layer_flops(p.pruned_len(), p.hidden_dim, p.ffn_dim);
    let k = p.prune_layer as f64;
    let t = p.total_layers as f64;
    (k * full + (t - k) * pruned) / (t * full)
}

pub fn tflops_ratio(p: &CostParams) -> Result<f64> {
    p.validate()?;
    let full = layer_flops(p.full_len(), p.hidden_dim, p.ffn_dim);
    if full <= 0.0 {
        return Err(Error::DegenerateModel(full));
    }
    if p.pruned_visual == p.orig_visual || p.prune_layer == p.total_layers {
        return Ok(1.0);
    }
    Ok(ratio_unchecked(p, full))
}

/// Largest pruned visual count whose ratio does not exceed `target`.
/// `p.pruned_visual` is ignored.
pub fn tokens_for_ratio(target: f64, p: &CostParams) -> Result<u64> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidParameter(format!("target ratio {target} outside (0, 1]")));
    }
    let at = |m: u64| tflops_ratio(&CostParams { pruned_visual: m, ..*p });
    let min_ratio = at(0)?;
    if min_ratio > target {
        return Err(Error::TargetUnachievable { target, min_ratio });
    }
    // Invariant: ratio(lo) <= target; ratio(hi + 1) > target or hi == M.
    let (mut lo, mut hi) = (0, p.orig_visual);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if at(mid)? <= target {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}
