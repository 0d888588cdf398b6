//! Core value types shared by every selector.

use crate::error::{Error, Result};

/// Dense row-major `n x d` embedding matrix, one row per token.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenMatrix {
    data: Vec<f64>,
    n: usize,
    dim: usize,
}

impl TokenMatrix {
    pub fn new(n: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("embedding dimension must be >= 1".into()));
        }
        if data.len() != n * dim {
            return Err(Error::DimensionMismatch { expected: n * dim, actual: data.len() });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { data, n, dim })
    }

    /// Builds a matrix from equally sized rows. An empty row list needs an
    /// explicit dimension, so it is rejected here; use [`TokenMatrix::new`].
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).ok_or(Error::EmptyInput)?;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), dim, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Returns a copy with rows reordered so that row `k` of the result is row
    /// `perm[k]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: perm.len() });
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &p in perm {
            if p >= self.n {
                return Err(Error::IndexOutOfRange { index: p, n: self.n });
            }
            data.extend_from_slice(self.row(p));
        }
        Ok(Self { data, n: self.n, dim: self.dim })
    }
}

/// Per-token saliency weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyVector(Vec<f64>);

impl SaliencyVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(pos) = weights.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self(weights))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for SaliencyVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Symmetric dense cosine-similarity table.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    values: Vec<f64>,
    n: usize,
}

/// Slack allowed outside [-1, 1] for externally supplied similarity values.
pub const SIMILARITY_SLACK: f64 = 1e-6;

impl SimilarityMatrix {
    /// Wraps an `n x n` row-major table after checking symmetry and range.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, actual: values.len() });
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v.abs() > 1.0 + SIMILARITY_SLACK {
                    return Err(Error::InvalidParameter(format!("similarity[{i}][{j}] = {v} outside [-1, 1]")));
                }
                if v != values[j * n + i] {
                    return Err(Error::InvalidParameter(format!("similarity matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { values, n })
    }

    /// Builds the table from a function evaluated once per unordered pair.
    pub fn from_pair_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
            for j in i + 1..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::from_values(n, values)
    }

    pub(crate) fn from_raw(n: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n * n);
        Self { values, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// Ordered set of retained token indices.
///
/// Indices are kept in insertion order. The last `backfilled` entries were
/// added after the constrained selection ran out of candidates and are not
/// covered by the pairwise diversity guarantee.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    indices: Vec<usize>,
    budget: usize,
    backfilled: usize,
}

impl Selection {
    pub fn new(indices: Vec<usize>, budget: usize) -> Result<Self> {
        Self::with_backfill(indices, budget, 0)
    }

    pub fn with_backfill(indices: Vec<usize>, budget: usize, backfilled: usize) -> Result<Self> {
        if indices.len() > budget {
            return Err(Error::InvalidParameter(format!(
                "selection of {} indices exceeds budget {budget}",
                indices.len()
            )));
        }
        if backfilled > indices.len() {
            return Err(Error::InvalidParameter(format!(
                "backfilled count {backfilled} exceeds selection size {}",
                indices.len()
            )));
        }
        let mut seen = std::collections::HashSet::with_capacity(indices.len());
        for &i in &indices {
            if !seen.insert(i) {
                return Err(Error::DuplicateIndex(i));
            }
        }
        Ok(Self { indices, budget, backfilled })
    }

    pub fn empty(budget: usize) -> Self {
        Self { indices: Vec::new(), budget, backfilled: 0 }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn backfilled(&self) -> usize {
        self.backfilled
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Indices chosen before any backfill.
    pub fn core_indices(&self) -> &[usize] {
        &self.indices[..self.indices.len() - self.backfilled]
    }

    pub fn backfilled_indices(&self) -> &[usize] {
        &self.indices[self.indices.len() - self.backfilled..]
    }

    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v
    }

    /// Checks every index against a token count.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self.indices.iter().find(|&&i| i >= n) {
            Some(&index) => Err(Error::IndexOutOfRange { index, n }),
            None => Ok(()),
        }
    }

    /// Binary indicator vector of length `n`.
    pub fn to_indicator(&self, n: usize) -> Result<Vec<bool>> {
        self.validate(n)?;
        let mut z = vec![false; n];
        for &i in &self.indices {
            z[i] = true;
        }
        Ok(z)
    }
}
