//! On-disk formats.
//!
//! # Token file (`TOKD`)
//!
//! All integers little-endian.
//!
//! | offset | size | field                                 |
//! |--------|------|---------------------------------------|
//! | 0      | 4    | magic `b"TOKD"`                        |
//! | 4      | 4    | format version, `u32` = 1              |
//! | 8      | 4    | token count `n`, `u32`                 |
//! | 12     | 4    | embedding dimension `d`, `u32`         |
//! | 16     | 1    | `has_query`, 0 or 1                    |
//! | 17     | 3    | zero padding                           |
//! | 20     | 4nd  | `n * d` IEEE-754 `f32`, row-major      |
//! | ...    | 4d   | query vector, present iff `has_query`  |
//!
//! # Selection record
//!
//! A TOML document with the keys of [`SelectionRecord`]. Unknown keys are
//! kept on read and written back unchanged.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::synth::PlantedMetadata;
use crate::tokens::TokenMatrix;

pub const TOKEN_MAGIC: &[u8; 4] = b"TOKD";
pub const TOKEN_FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic bytes {0:?}, expected \"TOKD\"")]
    BadMagic([u8; 4]),

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated file: expected {expected} bytes, found {actual}")]
    TruncatedFile { expected: usize, actual: usize },

    #[error("file has {actual} bytes, header declares {expected}")]
    TrailingBytes { expected: usize, actual: usize },

    #[error("malformed header: {0}")]
    BadHeader(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("non-finite query value at column {0}")]
    NonFiniteQuery(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Invalid(#[from] crate::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

/// Serializes tokens (and an optional query) into the canonical byte layout.
/// Values are narrowed to `f32`.
pub fn encode_tokens(tokens: &TokenMatrix, query: Option<&[f64]>) -> Result<Vec<u8>, IoError> {
    let too_big = |what: &str, v: usize| IoError::BadHeader(format!("{what} {v} does not fit in u32"));
    let n = u32::try_from(tokens.n()).map_err(|_| too_big("token count", tokens.n()))?;
    let d = u32::try_from(tokens.dim()).map_err(|_| too_big("dimension", tokens.dim()))?;
    if let Some(q) = query {
        if q.len() != tokens.dim() {
            return Err(crate::Error::DimensionMismatch { expected: tokens.dim(), actual: q.len() }.into());
        }
    }
    let floats = tokens.as_slice().len() + query.map_or(0, <[f64]>::len);
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * floats);
    out.extend_from_slice(TOKEN_MAGIC);
    out.extend_from_slice(&TOKEN_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&d.to_le_bytes());
    out.push(u8::from(query.is_some()));
    out.extend_from_slice(&[0; 3]);
    for (k, &x) in tokens.as_slice().iter().enumerate() {
        let v = x as f32;
        if !v.is_finite() {
            return Err(IoError::NonFiniteValue { row: k / tokens.dim(), col: k % tokens.dim() });
        }
        out.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(q) = query {
        for (col, &x) in q.iter().enumerate() {
            let v = x as f32;
            if !v.is_finite() {
                return Err(IoError::NonFiniteQuery(col));
            }
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

fn f32_at(bytes: &[u8], at: usize) -> f32 {
    f32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

pub fn decode_tokens(bytes: &[u8]) -> Result<(TokenMatrix, Option<Vec<f64>>), IoError> {
    if bytes.len() < 4 {
        return Err(IoError::TruncatedFile { expected: HEADER_LEN, actual: bytes.len() });
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("4-byte slice");
    if &magic != TOKEN_MAGIC {
        return Err(IoError::BadMagic(magic));
    }
    if bytes.len() < HEADER_LEN {
        return Err(IoError::TruncatedFile { expected: HEADER_LEN, actual: bytes.len() });
    }
    let version = u32_at(bytes, 4);
    if version != TOKEN_FORMAT_VERSION {
        return Err(IoError::UnsupportedVersion(version));
    }
    let n = u32_at(bytes, 8) as usize;
    let d = u32_at(bytes, 12) as usize;
    let has_query = match bytes[16] {
        0 => false,
        1 => true,
        b => return Err(IoError::BadHeader(format!("has_query byte is {b}"))),
    };
    if bytes[17..20] != [0, 0, 0] {
        return Err(IoError::BadHeader("non-zero padding".into()));
    }
    if d == 0 {
        return Err(IoError::BadHeader("dimension is zero".into()));
    }
    let floats = n
        .checked_mul(d)
        .and_then(|nd| nd.checked_add(if has_query { d } else { 0 }))
        .ok_or_else(|| IoError::BadHeader("declared size overflows".into()))?;
    let expected = floats
        .checked_mul(4)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| IoError::BadHeader("declared size overflows".into()))?;
    if bytes.len() < expected {
        return Err(IoError::TruncatedFile { expected, actual: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(IoError::TrailingBytes { expected, actual: bytes.len() });
    }

    let mut data = Vec::with_capacity(n * d);
    for k in 0..n * d {
        let v = f32_at(bytes, HEADER_LEN + 4 * k);
        if !v.is_finite() {
            return Err(IoError::NonFiniteValue { row: k / d, col: k % d });
        }
        data.push(v as f64);
    }
    let query = if has_query {
        let base = HEADER_LEN + 4 * n * d;
        let mut q = Vec::with_capacity(d);
        for col in 0..d {
            let v = f32_at(bytes, base + 4 * col);
            if !v.is_finite() {
                return Err(IoError::NonFiniteQuery(col));
            }
            q.push(v as f64);
        }
        Some(q)
    } else {
        None
    };
    Ok((TokenMatrix::new(n, d, data)?, query))
}

pub fn read_token_file(path: impl AsRef<Path>) -> Result<(TokenMatrix, Option<Vec<f64>>), IoError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_tokens(&bytes)
}

pub fn write_token_file(path: impl AsRef<Path>, tokens: &TokenMatrix, query: Option<&[f64]>) -> Result<(), IoError> {
    let path = path.as_ref();
    let bytes = encode_tokens(tokens, query)?;
    fs::write(path, bytes).map_err(io_err(path))
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

pub fn checksum_hex(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a64(bytes))
}

/// Result of one selector run, bound to its input by checksum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub method: String,
    pub budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Ascending and distinct.
    pub indices: Vec<u64>,
    pub backfilled: u64,
    /// Subset of `indices` added by backfill, ascending.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub backfilled_indices: Vec<u64>,
    pub objective: f64,
    pub feasibility_violation_count: u64,
    pub runtime_microseconds: u64,
    /// FNV-1a of the token file bytes, 16 lowercase hex digits.
    pub input_checksum: String,
    #[serde(flatten)]
    pub extra: BTreeMap<String, toml::Value>,
}

impl SelectionRecord {
    pub fn validate(&self) -> Result<(), IoError> {
        let bad = |m: String| Err(IoError::Parse(m));
        if self.indices.windows(2).any(|w| w[0] >= w[1]) {
            return bad("field `indices` must be strictly ascending".into());
        }
        if self.backfilled_indices.windows(2).any(|w| w[0] >= w[1]) {
            return bad("field `backfilled_indices` must be strictly ascending".into());
        }
        if self.backfilled_indices.iter().any(|i| self.indices.binary_search(i).is_err()) {
            return bad("field `backfilled_indices` must be a subset of `indices`".into());
        }
        if !self.backfilled_indices.is_empty() && self.backfilled_indices.len() as u64 != self.backfilled {
            return bad("field `backfilled_indices` disagrees with `backfilled`".into());
        }
        if self.backfilled > self.indices.len() as u64 {
            return bad("field `backfilled` exceeds the number of indices".into());
        }
        if self.input_checksum.len() != 16 || !self.input_checksum.bytes().all(|b| b.is_ascii_hexdigit()) {
            return bad(format!("field `input_checksum` must be 16 hex digits, got {:?}", self.input_checksum));
        }
        if let Some(t) = self.tau {
            if !t.is_finite() {
                return bad("field `tau` must be finite".into());
            }
        }
        if !self.objective.is_finite() {
            return bad("field `objective` must be finite".into());
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String, IoError> {
        self.validate()?;
        toml::to_string(self).map_err(|e| IoError::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self, IoError> {
        let rec: Self = toml::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
        rec.validate()?;
        Ok(rec)
    }
}

pub fn write_selection(path: impl AsRef<Path>, record: &SelectionRecord) -> Result<(), IoError> {
    let path = path.as_ref();
    fs::write(path, record.to_toml()?).map_err(io_err(path))
}

pub fn read_selection(path: impl AsRef<Path>) -> Result<SelectionRecord, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    SelectionRecord::from_toml(&text).map_err(|e| match e {
        IoError::Parse(m) => IoError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Whitespace-separated decimal weights, one per token.
pub fn read_saliency_file(path: impl AsRef<Path>) -> Result<Vec<f64>, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.split_whitespace()
        .enumerate()
        .map(|(k, tok)| {
            let v: f64 = tok
                .parse()
                .map_err(|_| IoError::Parse(format!("{}: weight {k} is not a number: {tok:?}", path.display())))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(IoError::Parse(format!("{}: weight {k} is not finite", path.display())))
            }
        })
        .collect()
}

/// Sidecar path for generated instances: `<tokens>.planted.json`.
pub fn planted_sidecar_path(token_path: &Path) -> PathBuf {
    let mut s = token_path.as_os_str().to_owned();
    s.push(".planted.json");
    PathBuf::from(s)
}

pub fn write_planted_metadata(path: impl AsRef<Path>, meta: &PlantedMetadata) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(meta).map_err(|e| IoError::Parse(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_planted_metadata(path: impl AsRef<Path>) -> Result<PlantedMetadata, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| IoError::Parse(format!("{}: {e}", path.display())))
}
