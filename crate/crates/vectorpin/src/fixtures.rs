//! Shared test vectors (`testvectors/v1.json`) and the drift check.
//!
//! The fixture file freezes every canonicalisation, hashing, and signing
//! decision in executable form: each case carries its inputs, the expected
//! canonical header bytes, hashes, and signature, plus a list of mutations
//! with the verifier outcome each must produce. Any implementation of
//! protocol v1 that reproduces the file byte-for-byte is compatible by
//! construction; a CI job that regenerates and diffs it catches silent
//! serialisation drift.
//!
//! Vector components are stored twice — as exact decimal strings of their
//! dtype-cast values and as the canonical little-endian byte hex — so a port
//! never depends on decimal-parsing round-trip behaviour.

use std::collections::BTreeMap;

use ed25519_dalek::{Signer, SigningKey};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{
    canonical_header_bytes, canonical_vector_bytes, hash_text, hash_vector, Dtype,
    EmbeddingVector, HashString,
};
use crate::pin::{create_pin, verify, KeyRegistry, Pin, PinOptions, VerifyOutcome};

pub const FIXTURE_VERSION: u64 = 1;

/// A single verification-input edit applied to an otherwise pristine case.
/// Collectively the mutations pin the whole outcome taxonomy, not just the
/// happy path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Mutation {
    /// No edit; expects `OK`.
    Identity,
    /// Overwrite the header version field, keeping the original signature.
    SetVersion { v: u64 },
    /// Re-address the pin to a kid outside the registry.
    ReplaceKid { kid: String },
    /// Flip one bit of the signature (0 ≤ bit < 512).
    FlipSigBit { bit: u32 },
    /// Add `delta` to one component of the supplied vector.
    PerturbComponent { index: usize, delta: f64 },
    /// Supply a different ground-truth source text.
    ReplaceSource { source: String },
    /// Supply a different expected model identifier.
    ReplaceModel { model: String },
    /// Drop the last component of the supplied vector.
    TruncateVector,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureMutation {
    pub description: String,
    pub expected: VerifyOutcome,
    pub mutation: Mutation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureVector {
    pub dtype: Dtype,
    pub values_dec: Vec<String>,
    pub canonical_hex: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureHeaderInputs {
    pub v: u64,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_hash: Option<String>,
    pub ts: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureCase {
    pub name: String,
    pub seed_hex: String,
    pub public_key_hex: String,
    pub kid: String,
    pub source: String,
    pub vector: FixtureVector,
    pub header: FixtureHeaderInputs,
    pub expected_canonical_header_hex: String,
    pub expected_source_hash: String,
    pub expected_vec_hash: String,
    pub expected_sig_b64: String,
    pub mutations: Vec<FixtureMutation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureFile {
    pub version: u64,
    pub cases: Vec<FixtureCase>,
}

/// Inputs for one generated case.
#[derive(Debug, Clone)]
pub struct CaseSpec {
    pub name: String,
    pub seed: [u8; 32],
    pub kid: String,
    pub source: String,
    pub dtype: Dtype,
    pub values: Vec<f64>,
    pub model: String,
    pub model_hash: Option<HashString>,
    pub ts: String,
    pub extra: Option<BTreeMap<String, String>>,
    pub mutations: Vec<FixtureMutation>,
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("case {name:?}: {message}")]
    BadCase { name: String, message: String },
    #[error("fixture self-check failed for case {name:?}, mutation {mutation:?}: expected {expected}, got {got}")]
    SelfCheck {
        name: String,
        mutation: String,
        expected: VerifyOutcome,
        got: VerifyOutcome,
    },
}

fn mutation(description: &str, mutation: Mutation, expected: VerifyOutcome) -> FixtureMutation {
    FixtureMutation {
        description: description.to_owned(),
        expected,
        mutation,
    }
}

/// The committed case inventory: at least one mutation per outcome code,
/// one case per dtype, one with `extra`, one with `model_hash`, plus
/// boundary float values that exercise the decimal formatter and the
/// bit-level hash rule.
pub fn builtin_cases() -> Vec<CaseSpec> {
    vec![
        CaseSpec {
            name: "minimal-f32-zero".into(),
            seed: [0x01; 32],
            kid: "fixture-key-1".into(),
            source: "test".into(),
            dtype: Dtype::F32,
            values: vec![0.0, 0.0, 0.0, 0.0],
            model: "text-embedding-3-large".into(),
            model_hash: None,
            ts: "2026-05-05T12:00:00Z".into(),
            extra: None,
            mutations: vec![
                mutation("untouched inputs", Mutation::Identity, VerifyOutcome::Ok),
                mutation(
                    "future protocol version",
                    Mutation::SetVersion { v: 2 },
                    VerifyOutcome::UnsupportedVersion,
                ),
                mutation(
                    "kid absent from registry",
                    Mutation::ReplaceKid { kid: "fixture-key-unknown".into() },
                    VerifyOutcome::UnknownKey,
                ),
                mutation(
                    "single bit flipped in signature",
                    Mutation::FlipSigBit { bit: 0 },
                    VerifyOutcome::SignatureInvalid,
                ),
                mutation(
                    "one vector component noised",
                    Mutation::PerturbComponent { index: 2, delta: 0.005 },
                    VerifyOutcome::VectorTampered,
                ),
                mutation(
                    "different source text",
                    Mutation::ReplaceSource { source: "tost".into() },
                    VerifyOutcome::SourceMismatch,
                ),
                mutation(
                    "different expected model",
                    Mutation::ReplaceModel { model: "text-embedding-3-small".into() },
                    VerifyOutcome::ModelMismatch,
                ),
                mutation(
                    "vector truncated by one component",
                    Mutation::TruncateVector,
                    VerifyOutcome::ShapeMismatch,
                ),
            ],
        },
        CaseSpec {
            name: "f64-reserved-extra-nfc".into(),
            seed: [0x02; 32],
            kid: "fixture-key-2".into(),
            // decomposed form; hashing normalises to NFC
            source: "cafe\u{0301} menu".into(),
            dtype: Dtype::F64,
            values: vec![1.0, -0.5, 0.25, -0.0, 0.1],
            model: "nomic-embed-text".into(),
            model_hash: None,
            ts: "2026-05-05T12:00:01Z".into(),
            extra: Some(BTreeMap::from([
                ("vectorpin.collection_id".to_string(), "prod-2026-05-corpus-v3".to_string()),
                ("vectorpin.record_id".to_string(), "doc-12345-chunk-7".to_string()),
                ("vectorpin.tenant_id".to_string(), "tenant-abc".to_string()),
            ])),
            mutations: vec![
                mutation("untouched inputs", Mutation::Identity, VerifyOutcome::Ok),
                mutation(
                    "NFC-equivalent source in composed form",
                    Mutation::ReplaceSource { source: "caf\u{00e9} menu".into() },
                    VerifyOutcome::Ok,
                ),
                mutation(
                    "genuinely different source",
                    Mutation::ReplaceSource { source: "cafe menu".into() },
                    VerifyOutcome::SourceMismatch,
                ),
                mutation(
                    "negative zero flipped to positive zero",
                    Mutation::PerturbComponent { index: 3, delta: 0.0 },
                    VerifyOutcome::VectorTampered,
                ),
                mutation(
                    "last signature bit flipped",
                    Mutation::FlipSigBit { bit: 511 },
                    VerifyOutcome::SignatureInvalid,
                ),
            ],
        },
        CaseSpec {
            name: "f32-model-hash-escaping".into(),
            seed: [0x03; 32],
            kid: "fixture-key-3".into(),
            source: "line1\nline2\ttabbed \"quoted\" back\\slash".into(),
            dtype: Dtype::F32,
            values: vec![0.1, -2.5, 3.25, 1.5e-8, 42.0],
            model: "text-embedding-3-large".into(),
            model_hash: Some(hash_text("model-weights-2026-05")),
            ts: "2026-05-05T12:00:02Z".into(),
            extra: Some(BTreeMap::from([
                ("note".to_string(), "line1\nline2\ttab \"q\" b\\s".to_string()),
                ("unicode".to_string(), "caf\u{00e9} \u{1f600}".to_string()),
            ])),
            mutations: vec![
                mutation("untouched inputs", Mutation::Identity, VerifyOutcome::Ok),
                mutation(
                    "version zero",
                    Mutation::SetVersion { v: 0 },
                    VerifyOutcome::UnsupportedVersion,
                ),
                mutation(
                    "foreign-model fragment",
                    Mutation::ReplaceModel { model: "mxbai-embed-large".into() },
                    VerifyOutcome::ModelMismatch,
                ),
                mutation(
                    "tiny perturbation below f32 epsilon of the component",
                    Mutation::PerturbComponent { index: 4, delta: 1e-5 },
                    VerifyOutcome::VectorTampered,
                ),
            ],
        },
        CaseSpec {
            name: "f64-boundary-values".into(),
            seed: [0x04; 32],
            kid: "fixture-key-4".into(),
            source: "".into(),
            dtype: Dtype::F64,
            values: vec![
                1e300,
                -1e-300,
                0.0,
                -0.0,
                3.141592653589793,
                2.2250738585072014e-308, // smallest normal
                5e-324,                  // smallest subnormal
            ],
            model: "snowflake-arctic-embed".into(),
            model_hash: None,
            ts: "2026-05-05T12:00:03Z".into(),
            extra: None,
            mutations: vec![
                mutation("untouched inputs", Mutation::Identity, VerifyOutcome::Ok),
                mutation(
                    "vector truncated",
                    Mutation::TruncateVector,
                    VerifyOutcome::ShapeMismatch,
                ),
                mutation(
                    "subnormal component zeroed",
                    Mutation::PerturbComponent { index: 6, delta: -5e-324 },
                    VerifyOutcome::VectorTampered,
                ),
            ],
        },
    ]
}

/// Exact decimal expansion of a dtype-cast value. Every finite binary float
/// has one (possibly long); trailing zeros are trimmed.
fn exact_decimal(value: f64, dtype: Dtype) -> String {
    let s = match dtype {
        Dtype::F32 => format!("{:.149}", value as f32),
        Dtype::F64 => format!("{:.1074}", value),
    };
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_owned()
}

fn build_case(spec: &CaseSpec) -> Result<(FixtureCase, Pin, EmbeddingVector, SigningKey), FixtureError> {
    let bad = |message: String| FixtureError::BadCase {
        name: spec.name.clone(),
        message,
    };
    let signing_key = SigningKey::from_bytes(&spec.seed);
    let vector = EmbeddingVector::new(spec.values.clone(), spec.dtype)
        .map_err(|e| bad(e.to_string()))?;
    let mut options = PinOptions::new(spec.model.clone(), spec.ts.clone());
    options.model_hash = spec.model_hash.clone();
    options.extra = spec.extra.clone();
    let pin = create_pin(&spec.source, &vector, &options, &spec.kid, &signing_key)
        .map_err(|e| bad(e.to_string()))?;
    let header_bytes = canonical_header_bytes(&pin.header).map_err(|e| bad(e.to_string()))?;

    let case = FixtureCase {
        name: spec.name.clone(),
        seed_hex: hex::encode(spec.seed),
        public_key_hex: hex::encode(signing_key.verifying_key().to_bytes()),
        kid: spec.kid.clone(),
        source: spec.source.clone(),
        vector: FixtureVector {
            dtype: spec.dtype,
            values_dec: vector
                .values()
                .iter()
                .map(|&v| exact_decimal(v, spec.dtype))
                .collect(),
            canonical_hex: hex::encode(canonical_vector_bytes(&vector)),
        },
        header: FixtureHeaderInputs {
            v: pin.header.v,
            model: spec.model.clone(),
            model_hash: spec.model_hash.as_ref().map(|h| h.as_str().to_owned()),
            ts: spec.ts.clone(),
            extra: spec.extra.clone(),
        },
        expected_canonical_header_hex: hex::encode(&header_bytes),
        expected_source_hash: pin.header.source_hash.as_str().to_owned(),
        expected_vec_hash: pin.header.vec_hash.as_str().to_owned(),
        expected_sig_b64: pin.sig_base64(),
        mutations: spec.mutations.clone(),
    };
    Ok((case, pin, vector, signing_key))
}

/// Generate the fixture file. Deterministic: regeneration from the same
/// specs is byte-identical. Every mutation is executed once during
/// generation and must already produce its declared outcome.
pub fn generate_fixtures(specs: &[CaseSpec]) -> Result<Vec<u8>, FixtureError> {
    let mut cases = Vec::with_capacity(specs.len());
    let mut built = Vec::with_capacity(specs.len());
    for spec in specs {
        let (case, pin, vector, key) = build_case(spec)?;
        cases.push(case);
        built.push((spec, pin, vector, key));
    }
    let registry = registry_of(built.iter().map(|(s, _, _, k)| (s.kid.as_str(), k)));
    for (spec, pin, vector, _) in &built {
        for m in &spec.mutations {
            let got = run_mutation(pin, vector, &spec.source, &spec.model, &registry, &m.mutation);
            if got != m.expected {
                return Err(FixtureError::SelfCheck {
                    name: spec.name.clone(),
                    mutation: m.description.clone(),
                    expected: m.expected,
                    got,
                });
            }
        }
    }

    let file = FixtureFile {
        version: FIXTURE_VERSION,
        cases,
    };
    // Route through Value so every object serialises with sorted keys.
    let value = serde_json::to_value(&file).expect("fixture file serialises");
    let mut bytes = serde_json::to_vec_pretty(&value).expect("fixture file serialises");
    bytes.push(b'\n');
    Ok(bytes)
}

fn registry_of<'a>(keys: impl Iterator<Item = (&'a str, &'a SigningKey)>) -> KeyRegistry {
    let mut registry = KeyRegistry::new();
    for (kid, key) in keys {
        registry = registry
            .with_key(kid, key.verifying_key())
            .expect("fixture kids are unique");
    }
    registry
}

fn run_mutation(
    pin: &Pin,
    vector: &EmbeddingVector,
    source: &str,
    model: &str,
    registry: &KeyRegistry,
    mutation: &Mutation,
) -> VerifyOutcome {
    let mut pin = pin.clone();
    let mut values = vector.values().to_vec();
    let mut dtype = vector.dtype();
    let mut source = source.to_owned();
    let mut expect_model = model.to_owned();
    match mutation {
        Mutation::Identity => {}
        Mutation::SetVersion { v } => pin.header.v = *v,
        Mutation::ReplaceKid { kid } => pin.kid = kid.clone(),
        Mutation::FlipSigBit { bit } => {
            pin.sig[(*bit as usize) / 8] ^= 1 << (*bit % 8);
        }
        Mutation::PerturbComponent { index, delta } => {
            if *delta == 0.0 {
                // flips -0.0 to +0.0 without moving the value
                values[*index] = values[*index] + 0.0;
            } else {
                values[*index] += delta;
            }
        }
        Mutation::ReplaceSource { source: s } => source = s.clone(),
        Mutation::ReplaceModel { model: m } => expect_model = m.clone(),
        Mutation::TruncateVector => {
            values.pop();
        }
    }
    if values.is_empty() {
        dtype = pin.header.vec_dtype;
    }
    let supplied = EmbeddingVector::from_stored(values, dtype);
    verify(&pin, registry, Some(&source), Some(&supplied), Some(&expect_model))
}

/// Outcome of [`check_fixtures`]: per-mismatch messages naming the case.
#[derive(Debug, Clone, Default)]
pub struct FixtureReport {
    pub cases_checked: usize,
    pub mutations_checked: usize,
    pub failures: Vec<String>,
}

impl FixtureReport {
    pub fn is_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

impl std::fmt::Display for FixtureReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_pass() {
            write!(
                f,
                "PASS: {} cases, {} mutations",
                self.cases_checked, self.mutations_checked
            )
        } else {
            writeln!(
                f,
                "FAIL: {} mismatches over {} cases",
                self.failures.len(),
                self.cases_checked
            )?;
            for failure in &self.failures {
                writeln!(f, "  {failure}")?;
            }
            Ok(())
        }
    }
}

fn parse_fixture_vector(fv: &FixtureVector, name: &str, report: &mut FixtureReport) -> Option<EmbeddingVector> {
    let bytes = match hex::decode(&fv.canonical_hex) {
        Ok(b) => b,
        Err(e) => {
            report
                .failures
                .push(format!("{name}: canonical_hex does not decode: {e}"));
            return None;
        }
    };
    let width = fv.dtype.width();
    if bytes.is_empty() || bytes.len() % width != 0 {
        report
            .failures
            .push(format!("{name}: canonical_hex length {} is not a multiple of {width}", bytes.len()));
        return None;
    }
    let values: Vec<f64> = match fv.dtype {
        Dtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
        Dtype::F64 => bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };
    if values.len() != fv.values_dec.len() {
        report.failures.push(format!(
            "{name}: values_dec has {} entries, canonical bytes {}",
            fv.values_dec.len(),
            values.len()
        ));
        return None;
    }
    for (i, (dec, &bin)) in fv.values_dec.iter().zip(&values).enumerate() {
        let parsed_bits = match fv.dtype {
            Dtype::F32 => dec.parse::<f32>().ok().map(|v| (v as f64).to_bits()),
            Dtype::F64 => dec.parse::<f64>().ok().map(f64::to_bits),
        };
        if parsed_bits != Some(bin.to_bits()) {
            report.failures.push(format!(
                "{name}: values_dec[{i}] = {dec:?} does not reproduce the canonical bytes"
            ));
        }
    }
    Some(EmbeddingVector::from_stored(values, fv.dtype))
}

/// Recompute every expected value in a fixture file and run every mutation,
/// reporting each mismatch. A file that fails to parse is itself a failing
/// report.
pub fn check_fixtures(bytes: &[u8]) -> FixtureReport {
    let mut report = FixtureReport::default();
    let file: FixtureFile = match serde_json::from_slice(bytes) {
        Ok(f) => f,
        Err(e) => {
            report.failures.push(format!("fixture file does not parse: {e}"));
            return report;
        }
    };
    if file.version != FIXTURE_VERSION {
        report
            .failures
            .push(format!("fixture version {} unsupported", file.version));
        return report;
    }

    // registry over all cases' declared public keys
    let mut registry = KeyRegistry::new();
    for case in &file.cases {
        let Ok(key_bytes) = hex::decode(&case.public_key_hex) else {
            report
                .failures
                .push(format!("{}: public_key_hex does not decode", case.name));
            continue;
        };
        let Ok(arr) = <[u8; 32]>::try_from(key_bytes) else {
            report
                .failures
                .push(format!("{}: public key is not 32 bytes", case.name));
            continue;
        };
        let Ok(vk) = ed25519_dalek::VerifyingKey::from_bytes(&arr) else {
            report
                .failures
                .push(format!("{}: public key is not a valid Ed25519 point", case.name));
            continue;
        };
        match registry.with_key(&case.kid, vk) {
            Ok(next) => registry = next,
            Err(e) => report.failures.push(format!("{}: {e}", case.name)),
        }
    }

    for case in &file.cases {
        report.cases_checked += 1;
        let name = &case.name;

        let seed: Option<[u8; 32]> = hex::decode(&case.seed_hex).ok().and_then(|b| b.try_into().ok());
        let Some(seed) = seed else {
            report
                .failures
                .push(format!("{name}: seed_hex is not 32 bytes of hex"));
            continue;
        };
        let signing_key = SigningKey::from_bytes(&seed);
        if hex::encode(signing_key.verifying_key().to_bytes()) != case.public_key_hex {
            report
                .failures
                .push(format!("{name}: public_key_hex does not match the seed"));
        }

        let Some(vector) = parse_fixture_vector(&case.vector, name, &mut report) else {
            continue;
        };
        if hex::encode(canonical_vector_bytes(&vector)) != case.vector.canonical_hex {
            report
                .failures
                .push(format!("{name}: canonical vector bytes do not round-trip"));
        }

        let source_hash = hash_text(&case.source);
        if source_hash.as_str() != case.expected_source_hash {
            report.failures.push(format!(
                "{name}: source hash {} != expected {}",
                source_hash, case.expected_source_hash
            ));
        }
        let vec_hash = hash_vector(&vector);
        if vec_hash.as_str() != case.expected_vec_hash {
            report.failures.push(format!(
                "{name}: vector hash {} != expected {}",
                vec_hash, case.expected_vec_hash
            ));
        }

        let model_hash = match &case.header.model_hash {
            Some(s) => match HashString::parse(s) {
                Ok(h) => Some(h),
                Err(e) => {
                    report.failures.push(format!("{name}: model_hash invalid: {e}"));
                    continue;
                }
            },
            None => None,
        };
        let (Ok(source_hash), Ok(vec_hash)) = (
            HashString::parse(&case.expected_source_hash),
            HashString::parse(&case.expected_vec_hash),
        ) else {
            report
                .failures
                .push(format!("{name}: expected hashes do not match the hash grammar"));
            continue;
        };
        let header = crate::pin::PinHeader {
            v: case.header.v,
            model: case.header.model.clone(),
            model_hash,
            source_hash,
            vec_hash,
            vec_dtype: case.vector.dtype,
            vec_dim: vector.dim() as u64,
            ts: case.header.ts.clone(),
            extra: case.header.extra.clone(),
        };
        let header_bytes = match canonical_header_bytes(&header) {
            Ok(b) => b,
            Err(e) => {
                report.failures.push(format!("{name}: header does not canonicalise: {e}"));
                continue;
            }
        };
        if hex::encode(&header_bytes) != case.expected_canonical_header_hex {
            report.failures.push(format!(
                "{name}: canonical header bytes differ from expected_canonical_header_hex"
            ));
        }

        let sig = signing_key.sign(&header_bytes).to_bytes();
        let pin = Pin {
            header,
            kid: case.kid.clone(),
            sig,
        };
        if pin.sig_base64() != case.expected_sig_b64 {
            report.failures.push(format!(
                "{name}: recomputed signature {} != expected {}",
                pin.sig_base64(),
                case.expected_sig_b64
            ));
        }

        for m in &case.mutations {
            report.mutations_checked += 1;
            if let Mutation::PerturbComponent { index, .. } = &m.mutation {
                if *index >= vector.dim() {
                    report.failures.push(format!(
                        "{name}: mutation {:?} indexes past the vector",
                        m.description
                    ));
                    continue;
                }
            }
            let got = run_mutation(
                &pin,
                &vector,
                &case.source,
                &case.header.model,
                &registry,
                &m.mutation,
            );
            if got != m.expected {
                report.failures.push(format!(
                    "{name}: mutation {:?} produced {got}, expected {}",
                    m.description, m.expected
                ));
            }
        }
    }
    report
}
