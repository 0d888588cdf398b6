//! Cosine kernels plus the objective and feasibility evaluators of the
//! constrained selection problem.

use crate::error::{Error, Result};
use crate::tokens::{SaliencyVector, Selection, SimilarityMatrix, TokenMatrix};

/// Dot product with a fixed sixteen-lane accumulation order.
///
/// Every cosine in the crate goes through this function, so lazily computed
/// similarities are bitwise equal to the dense table.
#[inline]
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    dot_rows([u], v)[0]
}

/// `R` dot products against one shared vector, each bitwise equal to
/// [`dot`]. Loads `v` once per chunk instead of once per row.
pub(crate) fn dot_rows<const R: usize>(rows: [&[f64]; R], v: &[f64]) -> [f64; R] {
    for r in &rows {
        assert_eq!(r.len(), v.len(), "dot product of vectors with different lengths");
    }
    #[cfg(target_arch = "x86_64")]
    if v.len() >= SIMD_MIN_LEN {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: AVX-512F is present and all rows match `v` in length.
            return unsafe { x86::dot_rows_avx512(rows, v) };
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: AVX2 is present.
            return unsafe { x86::dot_rows_avx2(rows, v) };
        }
    }
    dot_rows_portable(rows, v)
}

const LANES: usize = 16;
#[cfg(target_arch = "x86_64")]
const SIMD_MIN_LEN: usize = 128;

/// Reference summation order: lane `k` accumulates elements `k, k + 16, ...`,
/// lanes are folded pairwise by halves, then the tail is added.
#[inline(always)]
fn dot_rows_portable<const R: usize>(rows: [&[f64]; R], v: &[f64]) -> [f64; R] {
    let body = v.len() - v.len() % LANES;
    let mut out = [0.0; R];
    for (r, row) in rows.iter().enumerate() {
        let mut acc = [0.0f64; LANES];
        for (a, b) in row[..body].chunks_exact(LANES).zip(v[..body].chunks_exact(LANES)) {
            for k in 0..LANES {
                acc[k] += a[k] * b[k];
            }
        }
        out[r] = fold(acc, &row[body..], &v[body..]);
    }
    out
}

#[inline(always)]
fn fold(mut acc: [f64; LANES], a: &[f64], b: &[f64]) -> f64 {
    let mut width = LANES;
    while width > 1 {
        width /= 2;
        for k in 0..width {
            acc[k] += acc[k + width];
        }
    }
    let mut tail = 0.0;
    for (x, y) in a.iter().zip(b) {
        tail += x * y;
    }
    acc[0] + tail
}

#[cfg(target_arch = "x86_64")]
mod x86 {
    use super::{dot_rows_portable, fold, LANES};
    use std::arch::x86_64::*;

    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn dot_rows_avx2<const R: usize>(rows: [&[f64]; R], v: &[f64]) -> [f64; R] {
        dot_rows_portable(rows, v)
    }

    #[inline(always)]
    fn load16(x: &[f64]) -> (__m512d, __m512d) {
        let lo: [f64; 8] = x[..8].try_into().unwrap();
        let hi: [f64; 8] = x[8..16].try_into().unwrap();
        // SAFETY: __m512d is eight packed f64 with no invalid bit patterns.
        unsafe { (std::mem::transmute::<[f64; 8], __m512d>(lo), std::mem::transmute::<[f64; 8], __m512d>(hi)) }
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn dot_rows_avx512<const R: usize>(rows: [&[f64]; R], v: &[f64]) -> [f64; R] {
        let body = v.len() - v.len() % LANES;
        let mut lo = [_mm512_setzero_pd(); R];
        let mut hi = [_mm512_setzero_pd(); R];
        let heads = rows.map(|r| &r[..body]);
        for i in (0..body).step_by(LANES) {
            let (b0, b1) = load16(&v[i..i + LANES]);
            for r in 0..R {
                let (a0, a1) = load16(&heads[r][i..i + LANES]);
                lo[r] = _mm512_add_pd(lo[r], _mm512_mul_pd(a0, b0));
                hi[r] = _mm512_add_pd(hi[r], _mm512_mul_pd(a1, b1));
            }
        }
        let mut out = [0.0; R];
        for r in 0..R {
            let mut acc = [0.0f64; LANES];
            _mm512_storeu_pd(acc.as_mut_ptr(), lo[r]);
            _mm512_storeu_pd(acc.as_mut_ptr().add(8), hi[r]);
            out[r] = fold(acc, &rows[r][body..], &v[body..]);
        }
        out
    }
}

#[inline]
pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// Cosine from a dot product and squared norms, clamped to [-1, 1].
///
/// `sqrt(|u|^2 |v|^2)` rather than `|u| |v|` makes identical rows come out
/// as exactly 1.
#[inline]
pub(crate) fn cosine_from_parts(dot: f64, sq_norm_u: f64, sq_norm_v: f64) -> f64 {
    (dot / (sq_norm_u * sq_norm_v).sqrt()).clamp(-1.0, 1.0)
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), actual: v.len() });
    }
    let (nu, nv) = (dot(u, u), dot(v, v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNormVector { row: None });
    }
    Ok(cosine_from_parts(dot(u, v), nu, nv))
}

/// Squared Euclidean norm of every row, failing on the first zero row.
pub fn row_sq_norms(tokens: &TokenMatrix) -> Result<Vec<f64>> {
    tokens
        .rows()
        .enumerate()
        .map(|(i, r)| match dot(r, r) {
            0.0 => Err(Error::ZeroNormVector { row: Some(i) }),
            x => Ok(x),
        })
        .collect()
}

/// Dense all-pairs cosine table. Each unordered pair is computed once and
/// mirrored; the diagonal is exactly 1.
pub fn pairwise_similarities(tokens: &TokenMatrix) -> Result<SimilarityMatrix> {
    let norms = row_sq_norms(tokens)?;
    let n = tokens.n();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        let ri = tokens.row(i);
        for j in i + 1..n {
            let c = cosine_from_parts(dot(ri, tokens.row(j)), norms[i], norms[j]);
            values[i * n + j] = c;
            values[j * n + i] = c;
        }
    }
    Ok(SimilarityMatrix::from_raw(n, values))
}

/// Total saliency of the selected tokens.
pub fn objective_value(weights: &SaliencyVector, sel: &Selection) -> Result<f64> {
    objective_of(weights, sel.indices())
}

pub fn objective_of(weights: &SaliencyVector, indices: &[usize]) -> Result<f64> {
    let n = weights.len();
    indices.iter().try_fold(0.0, |acc, &i| {
        if i >= n {
            Err(Error::IndexOutOfRange { index: i, n })
        } else {
            Ok(acc + weights[i])
        }
    })
}

/// A selected pair whose similarity exceeds the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub cos: f64,
}

/// Every selected pair with `sim[i][j] > tau`, in selection order.
pub fn feasibility_violations(sim: &SimilarityMatrix, sel: &Selection, tau: f64) -> Result<Vec<Violation>> {
    violations_among(sim, sel.indices(), tau)
}

pub fn violations_among(sim: &SimilarityMatrix, indices: &[usize], tau: f64) -> Result<Vec<Violation>> {
    let n = sim.n();
    if let Some(&index) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index, n });
    }
    let mut out = Vec::new();
    for (a, &i) in indices.iter().enumerate() {
        for &j in &indices[a + 1..] {
            let cos = sim.get(i, j);
            if cos > tau {
                out.push(Violation { i, j, cos });
            }
        }
    }
    Ok(out)
}
