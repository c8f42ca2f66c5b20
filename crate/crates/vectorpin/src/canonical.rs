//! Canonical byte representations and hashes (protocol v1).
//!
//! Everything in this module is part of the cross-implementation byte
//! contract: text is NFC-normalised before hashing, vectors are packed as
//! contiguous little-endian values of their declared dtype, and pin headers
//! serialise to JSON with code-point-sorted keys, no whitespace, and a fixed
//! string-escaping rule. The committed fixture file locks all of it.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::pin::PinHeader;

/// A hash literal of the form `sha256:` followed by 64 lowercase hex chars.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HashString(String);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HashStringError {
    #[error("hash string must start with \"sha256:\"")]
    BadPrefix,
    #[error("hash digest must be 64 hex characters, got {0}")]
    BadLength(usize),
    #[error("hash digest must be lowercase hex")]
    BadDigit,
}

impl HashString {
    pub fn parse(s: &str) -> Result<Self, HashStringError> {
        let digest = s.strip_prefix("sha256:").ok_or(HashStringError::BadPrefix)?;
        if digest.len() != 64 {
            return Err(HashStringError::BadLength(digest.len()));
        }
        if !digest.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return Err(HashStringError::BadDigit);
        }
        Ok(HashString(s.to_owned()))
    }

    pub fn from_digest(digest: [u8; 32]) -> Self {
        HashString(format!("sha256:{}", hex::encode(digest)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for HashString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for HashString {
    type Error = HashStringError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        HashString::parse(&s)
    }
}

impl From<HashString> for String {
    fn from(h: HashString) -> String {
        h.0
    }
}

/// Vector element type. Protocol v1 admits exactly these two; other dtypes
/// are reserved for future versions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dtype {
    #[serde(rename = "f32")]
    F32,
    #[serde(rename = "f64")]
    F64,
}

impl Dtype {
    /// Protocol identifier, `"f32"` or `"f64"`.
    pub fn code(self) -> &'static str {
        match self {
            Dtype::F32 => "f32",
            Dtype::F64 => "f64",
        }
    }

    /// Bytes per element in the canonical packing.
    pub fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    pub fn parse(s: &str) -> Option<Dtype> {
        match s {
            "f32" => Some(Dtype::F32),
            "f64" => Some(Dtype::F64),
            _ => None,
        }
    }
}

impl fmt::Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A dtype-tagged 1-D embedding vector: the unit of hashing and pinning.
///
/// Values are kept as `f64` internally; for [`Dtype::F32`] they are always
/// the exact widening of an `f32`, so the canonical cast back to `f32` is
/// lossless. The strict constructors reject empty vectors and non-finite
/// values — NaN has multiple bit patterns and would break cross-language
/// hash agreement. [`EmbeddingVector::from_stored`] skips the finiteness
/// check for the verification read path, where whatever bytes arrived must
/// be hashed bit-for-bit so that a tampered NaN still surfaces as
/// `VECTOR_TAMPERED` rather than a parse error.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
    dtype: Dtype,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VectorError {
    #[error("embedding vector must have at least one component")]
    Empty,
    #[error("component {index} is not finite under dtype {dtype}")]
    NotFinite { index: usize, dtype: Dtype },
}

impl EmbeddingVector {
    /// Strict constructor: casts `values` to `dtype` and validates.
    pub fn new(values: Vec<f64>, dtype: Dtype) -> Result<Self, VectorError> {
        if values.is_empty() {
            return Err(VectorError::Empty);
        }
        let values = match dtype {
            Dtype::F64 => values,
            Dtype::F32 => values.into_iter().map(|v| v as f32 as f64).collect(),
        };
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(VectorError::NotFinite { index, dtype });
        }
        Ok(EmbeddingVector { values, dtype })
    }

    pub fn from_f32(values: &[f32]) -> Result<Self, VectorError> {
        Self::new(values.iter().map(|&v| v as f64).collect(), Dtype::F32)
    }

    pub fn from_f64(values: Vec<f64>) -> Result<Self, VectorError> {
        Self::new(values, Dtype::F64)
    }

    /// Unchecked constructor for externally stored vectors under audit.
    /// Non-finite values are allowed and hash as their bit patterns.
    pub fn from_stored(values: Vec<f64>, dtype: Dtype) -> Self {
        let values = match dtype {
            Dtype::F64 => values,
            Dtype::F32 => values.into_iter().map(|v| v as f32 as f64).collect(),
        };
        EmbeddingVector { values, dtype }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn dtype(&self) -> Dtype {
        self.dtype
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Reinterpret under another dtype (used at verify time, where the pin
    /// header — not the caller's in-memory precision — declares the
    /// committed dtype).
    pub fn cast(&self, dtype: Dtype) -> EmbeddingVector {
        EmbeddingVector::from_stored(self.values.clone(), dtype)
    }
}

/// NFC-normalise a text. Idempotent; `&str` inputs are valid Unicode by
/// construction, so rejection of undecodable bytes happens at the I/O
/// boundary before this call.
pub fn normalize_text(s: &str) -> String {
    s.nfc().collect()
}

/// `"sha256:" + hex(SHA256(UTF8(NFC(s))))`.
pub fn hash_text(s: &str) -> HashString {
    let normalized = normalize_text(s);
    HashString::from_digest(Sha256::digest(normalized.as_bytes()).into())
}

/// Canonical packing: each value cast to the vector's dtype, serialised
/// little-endian, concatenated in index order.
pub fn canonical_vector_bytes(vec: &EmbeddingVector) -> Vec<u8> {
    vector_bytes(vec.values(), vec.dtype())
}

pub(crate) fn vector_bytes(values: &[f64], dtype: Dtype) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * dtype.width());
    match dtype {
        Dtype::F32 => {
            for &v in values {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        Dtype::F64 => {
            for &v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

/// `"sha256:" + hex(SHA256(canonical_vector_bytes(vec)))`.
pub fn hash_vector(vec: &EmbeddingVector) -> HashString {
    HashString::from_digest(Sha256::digest(canonical_vector_bytes(vec)).into())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CanonicalError {
    /// Producers must omit `extra` entirely when they have no entries; a
    /// present-but-empty map is ambiguous across serialisers and is
    /// rejected rather than canonicalised.
    #[error("extra must be omitted when empty, not present as an empty map")]
    EmptyExtra,
}

/// The canonical signing payload of a pin header: UTF-8 JSON, all object
/// keys sorted lexicographically by code point, `,` and `:` separators with
/// no whitespace, optional fields omitted entirely when unset, no trailing
/// newline.
///
/// String escaping is minimal: only `\` and `"` are backslash-escaped and
/// control characters become `\uXXXX` with lowercase hex; every other code
/// point is emitted as literal UTF-8. Integers are minimal decimal.
pub fn canonical_header_bytes(header: &PinHeader) -> Result<Vec<u8>, CanonicalError> {
    if header.extra.as_ref().is_some_and(BTreeMap::is_empty) {
        return Err(CanonicalError::EmptyExtra);
    }

    enum Field<'a> {
        Str(&'a str),
        UInt(u64),
        Map(&'a BTreeMap<String, String>),
    }

    let mut fields: Vec<(&str, Field)> = vec![
        ("model", Field::Str(&header.model)),
        ("source_hash", Field::Str(header.source_hash.as_str())),
        ("ts", Field::Str(&header.ts)),
        ("v", Field::UInt(header.v)),
        ("vec_dim", Field::UInt(header.vec_dim)),
        ("vec_dtype", Field::Str(header.vec_dtype.code())),
        ("vec_hash", Field::Str(header.vec_hash.as_str())),
    ];
    if let Some(h) = &header.model_hash {
        fields.push(("model_hash", Field::Str(h.as_str())));
    }
    if let Some(extra) = &header.extra {
        fields.push(("extra", Field::Map(extra)));
    }
    fields.sort_by(|a, b| a.0.cmp(b.0));

    let mut out = Vec::with_capacity(256);
    out.push(b'{');
    for (idx, (key, value)) in fields.iter().enumerate() {
        if idx > 0 {
            out.push(b',');
        }
        write_json_string(&mut out, key);
        out.push(b':');
        match value {
            Field::Str(s) => write_json_string(&mut out, s),
            Field::UInt(n) => out.extend_from_slice(n.to_string().as_bytes()),
            Field::Map(map) => {
                out.push(b'{');
                for (i, (k, v)) in map.iter().enumerate() {
                    if i > 0 {
                        out.push(b',');
                    }
                    write_json_string(&mut out, k);
                    out.push(b':');
                    write_json_string(&mut out, v);
                }
                out.push(b'}');
            }
        }
    }
    out.push(b'}');
    Ok(out)
}

fn write_json_string(out: &mut Vec<u8>, s: &str) {
    out.push(b'"');
    for c in s.chars() {
        match c {
            '"' => out.extend_from_slice(b"\\\""),
            '\\' => out.extend_from_slice(b"\\\\"),
            c if (c as u32) < 0x20 => {
                out.extend_from_slice(format!("\\u{:04x}", c as u32).as_bytes());
            }
            c => {
                let mut buf = [0u8; 4];
                out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
            }
        }
    }
    out.push(b'"');
}
