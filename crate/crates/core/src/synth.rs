//! Planted-cluster instance generator.
//!
//! Each cluster owns a disjoint block of coordinates. Its anchor is the first
//! basis vector of the block and every member is the anchor rotated by a small
//! angle into the rest of the block, so cross-cluster cosines are exactly zero
//! and same-cluster cosines are bounded below through the cone half-angle.
//! The query is a positive combination of anchors; a member's saliency falls
//! with its rotation angle, which makes the least-rotated member the unique
//! saliency maximum of its cluster.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::pairwise_similarities;
use crate::tokens::{Selection, TokenMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub seed: u64,
    pub n_clusters: usize,
    pub per_cluster: usize,
    pub dim: usize,
    pub intra_sim_min: f64,
    pub inter_sim_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance {
    pub tokens: TokenMatrix,
    pub query: Vec<f64>,
    pub cluster_of: Vec<usize>,
    /// Highest-saliency member of each cluster, indexed by cluster.
    pub planted_critical: Vec<usize>,
    pub intra_sim_min: f64,
    pub inter_sim_max: f64,
}

/// Serializable description of the planted structure, without the embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedMetadata {
    pub params: SynthParams,
    pub cluster_of: Vec<usize>,
    pub planted_critical: Vec<usize>,
}

impl PlantedInstance {
    pub fn n_clusters(&self) -> usize {
        self.planted_critical.len()
    }

    pub fn metadata(&self, params: SynthParams) -> PlantedMetadata {
        PlantedMetadata { params, cluster_of: self.cluster_of.clone(), planted_critical: self.planted_critical.clone() }
    }

    /// Exhaustive pairwise check of the similarity bands.
    pub fn verify(&self) -> Result<()> {
        let sim = pairwise_similarities(&self.tokens)?;
        let n = self.tokens.n();
        for i in 0..n {
            for j in i + 1..n {
                let c = sim.get(i, j);
                let same = self.cluster_of[i] == self.cluster_of[j];
                if same && c < self.intra_sim_min {
                    return Err(Error::InfeasibleGeometry(format!(
                        "same-cluster pair ({i}, {j}) has cosine {c} < {}",
                        self.intra_sim_min
                    )));
                }
                if !same && c > self.inter_sim_max {
                    return Err(Error::InfeasibleGeometry(format!(
                        "cross-cluster pair ({i}, {j}) has cosine {c} > {}",
                        self.inter_sim_max
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Rounds to the nearest `f32` so the instance survives a 32-bit file unchanged.
fn f32_exact(x: f64) -> f64 {
    x as f32 as f64
}

pub fn generate_clustered(p: &SynthParams) -> Result<PlantedInstance> {
    let geometry = |msg: String| Err(Error::InfeasibleGeometry(msg));
    if p.n_clusters == 0 || p.per_cluster == 0 {
        return geometry("need at least one cluster with one member".into());
    }
    if p.n_clusters * 2 > p.dim {
        return geometry(format!("{} clusters need dimension >= {}", p.n_clusters, p.n_clusters * 2));
    }
    if !(0.0 <= p.inter_sim_max && p.inter_sim_max < p.intra_sim_min && p.intra_sim_min <= 1.0) {
        return geometry(format!(
            "need 0 <= inter_sim_max ({}) < intra_sim_min ({}) <= 1",
            p.inter_sim_max, p.intra_sim_min
        ));
    }
    // Two members within `half` of the anchor are within `2 * half` of each
    // other, so cos(2 * half) = intra_sim_min bounds same-cluster cosines.
    let half = p.intra_sim_min.acos() / 2.0;
    let max_angle = 0.9 * half;
    if p.per_cluster > 1 && max_angle <= 0.0 {
        return geometry("intra_sim_min = 1 leaves no room for distinct members".into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let block = p.dim / p.n_clusters;

    // Distinct cluster strengths in (0.5, 1].
    let mut strength: Vec<f64> = (0..p.n_clusters)
        .map(|c| 0.5 + 0.5 * (c as f64 + 0.25 + 0.5 * rng.gen::<f64>()) / p.n_clusters as f64)
        .collect();
    strength.shuffle(&mut rng);

    let mut rows: Vec<(usize, Vec<f64>, f64)> = Vec::with_capacity(p.n_clusters * p.per_cluster);
    for c in 0..p.n_clusters {
        let base = c * block;
        // Strictly increasing angles: member j sits in the j-th sub-interval.
        for j in 0..p.per_cluster {
            let angle = if p.per_cluster == 1 {
                0.0
            } else {
                max_angle * (j as f64 + 0.1 + 0.8 * rng.gen::<f64>()) / p.per_cluster as f64
            };
            let mut dir = vec![0.0; block - 1];
            loop {
                for x in dir.iter_mut() {
                    *x = rng.gen_range(-1.0..1.0);
                }
                if dir.iter().map(|x| x * x).sum::<f64>() > 1e-4 {
                    break;
                }
            }
            let dn = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut row = vec![0.0; p.dim];
            row[base] = f32_exact(angle.cos());
            for (k, x) in dir.iter().enumerate() {
                row[base + 1 + k] = f32_exact(angle.sin() * x / dn);
            }
            rows.push((c, row, angle));
        }
    }
    rows.shuffle(&mut rng);

    let mut query = vec![0.0; p.dim];
    for (c, s) in strength.iter().enumerate() {
        query[c * block] = f32_exact(*s);
    }

    let mut planted_critical = vec![usize::MAX; p.n_clusters];
    let mut best_angle = vec![f64::INFINITY; p.n_clusters];
    for (i, (c, _, angle)) in rows.iter().enumerate() {
        if *angle < best_angle[*c] {
            best_angle[*c] = *angle;
            planted_critical[*c] = i;
        }
    }
    let cluster_of = rows.iter().map(|(c, _, _)| *c).collect();
    let flat: Vec<f64> = rows.into_iter().flat_map(|(_, r, _)| r).collect();
    let n = p.n_clusters * p.per_cluster;

    let inst = PlantedInstance {
        tokens: TokenMatrix::new(n, p.dim, flat)?,
        query,
        cluster_of,
        planted_critical,
        intra_sim_min: p.intra_sim_min,
        inter_sim_max: p.inter_sim_max,
    };
    inst.verify()?;
    Ok(inst)
}

/// Fraction of planted critical tokens present in the selection.
pub fn recall_of_planted(sel: &Selection, planted_critical: &[usize]) -> f64 {
    if planted_critical.is_empty() {
        return 1.0;
    }
    let hits = planted_critical.iter().filter(|c| sel.indices().contains(c)).count();
    hits as f64 / planted_critical.len() as f64
}
