//! Pin creation, key registry, and structured verification.
//!
//! A verifier never throws on domain failures: every failure mode is one of
//! the eight [`VerifyOutcome`] codes, checked in a fixed order so that
//! multi-fault inputs resolve deterministically (version, then key, then
//! signature, then source, then vector shape/hash, then model).

use std::collections::BTreeMap;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{
    canonical_header_bytes, hash_text, hash_vector, CanonicalError, Dtype, EmbeddingVector,
    HashString,
};

/// Protocol version implemented by this build.
pub const PROTOCOL_VERSION: u64 = 1;

/// The signed portion of a pin. `kid` and `sig` live on [`Pin`] and are
/// excluded from the canonical bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PinHeader {
    pub v: u64,
    pub model: String,
    pub model_hash: Option<HashString>,
    pub source_hash: HashString,
    pub vec_hash: HashString,
    pub vec_dtype: Dtype,
    pub vec_dim: u64,
    pub ts: String,
    pub extra: Option<BTreeMap<String, String>>,
}

/// A signed attestation binding an embedding to its source text hash,
/// producing model, and issuer key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pin {
    pub header: PinHeader,
    pub kid: String,
    pub sig: [u8; 64],
}

/// Verification result. Exactly one code per call; the first failing check
/// in protocol order wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerifyOutcome {
    Ok,
    UnsupportedVersion,
    UnknownKey,
    SignatureInvalid,
    VectorTampered,
    SourceMismatch,
    ModelMismatch,
    ShapeMismatch,
}

impl VerifyOutcome {
    pub fn code(self) -> &'static str {
        match self {
            VerifyOutcome::Ok => "OK",
            VerifyOutcome::UnsupportedVersion => "UNSUPPORTED_VERSION",
            VerifyOutcome::UnknownKey => "UNKNOWN_KEY",
            VerifyOutcome::SignatureInvalid => "SIGNATURE_INVALID",
            VerifyOutcome::VectorTampered => "VECTOR_TAMPERED",
            VerifyOutcome::SourceMismatch => "SOURCE_MISMATCH",
            VerifyOutcome::ModelMismatch => "MODEL_MISMATCH",
            VerifyOutcome::ShapeMismatch => "SHAPE_MISMATCH",
        }
    }

    pub const ALL: [VerifyOutcome; 8] = [
        VerifyOutcome::Ok,
        VerifyOutcome::UnsupportedVersion,
        VerifyOutcome::UnknownKey,
        VerifyOutcome::SignatureInvalid,
        VerifyOutcome::VectorTampered,
        VerifyOutcome::SourceMismatch,
        VerifyOutcome::ModelMismatch,
        VerifyOutcome::ShapeMismatch,
    ];
}

impl std::fmt::Display for VerifyOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Error)]
pub enum PinError {
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
}

/// Header fields supplied by the producer (everything `create_pin` does not
/// derive from the source text and vector).
#[derive(Debug, Clone)]
pub struct PinOptions {
    pub model: String,
    pub ts: String,
    pub model_hash: Option<HashString>,
    pub extra: Option<BTreeMap<String, String>>,
}

impl PinOptions {
    pub fn new(model: impl Into<String>, ts: impl Into<String>) -> Self {
        PinOptions {
            model: model.into(),
            ts: ts.into(),
            model_hash: None,
            extra: None,
        }
    }

    pub fn with_extra(mut self, extra: BTreeMap<String, String>) -> Self {
        self.extra = Some(extra);
        self
    }

    pub fn with_model_hash(mut self, model_hash: HashString) -> Self {
        self.model_hash = Some(model_hash);
        self
    }
}

/// Create a v1 pin over `source` and `vec`, signed with `signing_key`.
///
/// Signatures are deterministic (RFC 8032): identical inputs and key yield
/// byte-identical pins.
pub fn create_pin(
    source: &str,
    vec: &EmbeddingVector,
    options: &PinOptions,
    kid: &str,
    signing_key: &SigningKey,
) -> Result<Pin, PinError> {
    let header = PinHeader {
        v: PROTOCOL_VERSION,
        model: options.model.clone(),
        model_hash: options.model_hash.clone(),
        source_hash: hash_text(source),
        vec_hash: hash_vector(vec),
        vec_dtype: vec.dtype(),
        vec_dim: vec.dim() as u64,
        ts: options.ts.clone(),
        extra: options.extra.clone(),
    };
    let payload = canonical_header_bytes(&header)?;
    let sig = signing_key.sign(&payload).to_bytes();
    Ok(Pin {
        header,
        kid: kid.to_owned(),
        sig,
    })
}

/// Verify a pin against a key registry and whatever ground truth the caller
/// has. The signature check always runs; source/vector/model checks run only
/// when the corresponding argument is supplied (partial verification).
pub fn verify(
    pin: &Pin,
    registry: &KeyRegistry,
    source: Option<&str>,
    vector: Option<&EmbeddingVector>,
    expected_model: Option<&str>,
) -> VerifyOutcome {
    if pin.header.v != PROTOCOL_VERSION {
        return VerifyOutcome::UnsupportedVersion;
    }
    let Some(public_key) = registry.get(&pin.kid) else {
        return VerifyOutcome::UnknownKey;
    };
    // A header that cannot be canonicalised (empty extra map) was never
    // signed by a conforming producer.
    let Ok(payload) = canonical_header_bytes(&pin.header) else {
        return VerifyOutcome::SignatureInvalid;
    };
    let signature = Signature::from_bytes(&pin.sig);
    if public_key.verify(&payload, &signature).is_err() {
        return VerifyOutcome::SignatureInvalid;
    }
    if let Some(source) = source {
        if hash_text(source) != pin.header.source_hash {
            return VerifyOutcome::SourceMismatch;
        }
    }
    if let Some(vector) = vector {
        if vector.dim() as u64 != pin.header.vec_dim {
            return VerifyOutcome::ShapeMismatch;
        }
        if hash_vector(&vector.cast(pin.header.vec_dtype)) != pin.header.vec_hash {
            return VerifyOutcome::VectorTampered;
        }
    }
    if let Some(expected_model) = expected_model {
        if expected_model != pin.header.model {
            return VerifyOutcome::ModelMismatch;
        }
    }
    VerifyOutcome::Ok
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("kid {0:?} already present in registry")]
    DuplicateKid(String),
    #[error("kid {0:?} not present in registry")]
    MissingKid(String),
    #[error("invalid public key for kid {0:?}")]
    InvalidKey(String),
}

/// kid → Ed25519 public key map. Immutable: rotation returns a new value,
/// and multiple kids verify simultaneously during an overlap window.
#[derive(Debug, Clone, Default)]
pub struct KeyRegistry {
    entries: BTreeMap<String, VerifyingKey>,
}

impl KeyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rotation step: returns a registry with `kid` added.
    pub fn with_key(&self, kid: &str, key: VerifyingKey) -> Result<Self, RegistryError> {
        if self.entries.contains_key(kid) {
            return Err(RegistryError::DuplicateKid(kid.to_owned()));
        }
        let mut entries = self.entries.clone();
        entries.insert(kid.to_owned(), key);
        Ok(KeyRegistry { entries })
    }

    /// Retirement step: returns a registry with `kid` removed.
    pub fn without_key(&self, kid: &str) -> Result<Self, RegistryError> {
        if !self.entries.contains_key(kid) {
            return Err(RegistryError::MissingKid(kid.to_owned()));
        }
        let mut entries = self.entries.clone();
        entries.remove(kid);
        Ok(KeyRegistry { entries })
    }

    pub fn get(&self, kid: &str) -> Option<&VerifyingKey> {
        self.entries.get(kid)
    }

    pub fn contains(&self, kid: &str) -> bool {
        self.entries.contains_key(kid)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn kids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Registry file form: JSON map of kid to 64-hex-char public key.
    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, String> = self
            .entries
            .iter()
            .map(|(kid, key)| (kid.as_str(), hex::encode(key.to_bytes())))
            .collect();
        serde_json::to_string_pretty(&map).expect("string map serialises")
    }

    pub fn from_json(json: &str) -> Result<Self, PinParseError> {
        let map: BTreeMap<String, String> = serde_json::from_str(json)?;
        let mut entries = BTreeMap::new();
        for (kid, key_hex) in map {
            let bytes: [u8; 32] = hex::decode(&key_hex)
                .ok()
                .and_then(|b| b.try_into().ok())
                .ok_or_else(|| PinParseError::BadPublicKey(kid.clone()))?;
            let key = VerifyingKey::from_bytes(&bytes)
                .map_err(|_| PinParseError::BadPublicKey(kid.clone()))?;
            entries.insert(kid, key);
        }
        Ok(KeyRegistry { entries })
    }
}

/// Key file form: JSON `{"kid": ..., "seed_hex": ...}` where `seed_hex` is
/// the 32-byte Ed25519 private seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeyFile {
    pub kid: String,
    pub seed_hex: String,
}

impl KeyFile {
    pub fn new(kid: impl Into<String>, seed: [u8; 32]) -> Self {
        KeyFile {
            kid: kid.into(),
            seed_hex: hex::encode(seed),
        }
    }

    pub fn signing_key(&self) -> Result<SigningKey, PinParseError> {
        let seed: [u8; 32] = hex::decode(&self.seed_hex)
            .ok()
            .and_then(|b| b.try_into().ok())
            .ok_or(PinParseError::BadSeed)?;
        Ok(SigningKey::from_bytes(&seed))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("key file serialises")
    }

    pub fn from_json(json: &str) -> Result<Self, PinParseError> {
        Ok(serde_json::from_str(json)?)
    }
}

#[derive(Debug, Error)]
pub enum PinParseError {
    #[error("invalid pin JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("sig is not URL-safe base64 without padding")]
    BadSignatureEncoding,
    #[error("sig must decode to exactly 64 bytes, got {0}")]
    BadSignatureLength(usize),
    #[error("extra must be omitted when empty")]
    EmptyExtra,
    #[error("invalid public key hex for kid {0:?}")]
    BadPublicKey(String),
    #[error("seed_hex must be 64 hex characters")]
    BadSeed,
}

/// Wire form of §the pin format: one flat JSON object. Pretty-printing on
/// disk is allowed; signatures are always computed over canonical bytes.
#[derive(Serialize, Deserialize)]
struct PinWire {
    v: u64,
    model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    model_hash: Option<HashString>,
    source_hash: HashString,
    vec_hash: HashString,
    vec_dtype: Dtype,
    vec_dim: u64,
    ts: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    extra: Option<BTreeMap<String, String>>,
    kid: String,
    sig: String,
}

impl Pin {
    pub fn sig_base64(&self) -> String {
        URL_SAFE_NO_PAD.encode(self.sig)
    }

    pub fn to_json(&self, pretty: bool) -> String {
        let wire = PinWire {
            v: self.header.v,
            model: self.header.model.clone(),
            model_hash: self.header.model_hash.clone(),
            source_hash: self.header.source_hash.clone(),
            vec_hash: self.header.vec_hash.clone(),
            vec_dtype: self.header.vec_dtype,
            vec_dim: self.header.vec_dim,
            ts: self.header.ts.clone(),
            extra: self.header.extra.clone(),
            kid: self.kid.clone(),
            sig: self.sig_base64(),
        };
        if pretty {
            serde_json::to_string_pretty(&wire).expect("pin serialises")
        } else {
            serde_json::to_string(&wire).expect("pin serialises")
        }
    }

    pub fn from_json(json: &str) -> Result<Pin, PinParseError> {
        let wire: PinWire = serde_json::from_str(json)?;
        if wire.extra.as_ref().is_some_and(BTreeMap::is_empty) {
            return Err(PinParseError::EmptyExtra);
        }
        let sig_bytes = URL_SAFE_NO_PAD
            .decode(&wire.sig)
            .map_err(|_| PinParseError::BadSignatureEncoding)?;
        let len = sig_bytes.len();
        let sig: [u8; 64] = sig_bytes
            .try_into()
            .map_err(|_| PinParseError::BadSignatureLength(len))?;
        Ok(Pin {
            header: PinHeader {
                v: wire.v,
                model: wire.model,
                model_hash: wire.model_hash,
                source_hash: wire.source_hash,
                vec_hash: wire.vec_hash,
                vec_dtype: wire.vec_dtype,
                vec_dim: wire.vec_dim,
                ts: wire.ts,
                extra: wire.extra,
            },
            kid: wire.kid,
            sig,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signing_key(byte: u8) -> SigningKey {
        SigningKey::from_bytes(&[byte; 32])
    }

    fn test_vec() -> EmbeddingVector {
        EmbeddingVector::from_f32(&[0.5, -0.25, 1.0, 0.0]).unwrap()
    }

    fn test_pin(key: &SigningKey) -> Pin {
        create_pin(
            "test",
            &test_vec(),
            &PinOptions::new("text-embedding-3-large", "2026-05-05T12:00:00Z"),
            "kid-a",
            key,
        )
        .unwrap()
    }

    fn registry_with(kid: &str, key: &SigningKey) -> KeyRegistry {
        KeyRegistry::new().with_key(kid, key.verifying_key()).unwrap()
    }

    #[test]
    fn rfc8032_test1_vector() {
        // RFC 8032 §7.1 TEST 1: empty message.
        let seed: [u8; 32] =
            hex::decode("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60")
                .unwrap()
                .try_into()
                .unwrap();
        let key = SigningKey::from_bytes(&seed);
        assert_eq!(
            hex::encode(key.verifying_key().to_bytes()),
            "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a"
        );
        assert_eq!(
            hex::encode(key.sign(b"").to_bytes()),
            "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b"
        );
    }

    #[test]
    fn create_fills_derived_fields() {
        let key = signing_key(1);
        let pin = test_pin(&key);
        assert_eq!(pin.header.v, 1);
        assert_eq!(
            pin.header.source_hash.as_str(),
            "sha256:9f86d081884c7d659a2feaa0c55ad015a3bf4f1b2b0b822cd15d6c15b0f00a08"
        );
        assert_eq!(pin.header.vec_dim, 4);
        assert_eq!(pin.header.vec_dtype, Dtype::F32);
    }

    #[test]
    fn create_is_deterministic() {
        let key = signing_key(1);
        assert_eq!(test_pin(&key), test_pin(&key));
        assert_eq!(test_pin(&key).to_json(false), test_pin(&key).to_json(false));
    }

    #[test]
    fn verify_full_match_is_ok() {
        let key = signing_key(1);
        let pin = test_pin(&key);
        let registry = registry_with("kid-a", &key);
        assert_eq!(
            verify(&pin, &registry, Some("test"), Some(&test_vec()), Some("text-embedding-3-large")),
            VerifyOutcome::Ok
        );
    }

    #[test]
    fn any_noise_flags_vector_tampered() {
        let key = signing_key(1);
        let pin = test_pin(&key);
        let registry = registry_with("kid-a", &key);
        for sigma in [1e-6f32, 0.005, 0.5] {
            let mut values: Vec<f32> = vec![0.5, -0.25, 1.0, 0.0];
            values[2] += sigma;
            let tampered = EmbeddingVector::from_f32(&values).unwrap();
            assert_eq!(
                verify(&pin, &registry, None, Some(&tampered), None),
                VerifyOutcome::VectorTampered
            );
        }
    }

    #[test]
    fn unknown_kid_and_resigned_pin() {
        let key = signing_key(1);
        let attacker = signing_key(9);
        let registry = registry_with("kid-a", &key);

        // attacker re-signs under a kid the registry does not know
        let resigned = create_pin(
            "test",
            &test_vec(),
            &PinOptions::new("text-embedding-3-large", "2026-05-05T12:00:00Z"),
            "kid-attacker",
            &attacker,
        )
        .unwrap();
        assert_eq!(verify(&resigned, &registry, None, None, None), VerifyOutcome::UnknownKey);

        // attacker re-signs under the victim's kid; signature fails
        let mut forged = test_pin(&attacker);
        forged.kid = "kid-a".into();
        assert_eq!(
            verify(&forged, &registry, None, None, None),
            VerifyOutcome::SignatureInvalid
        );
    }

    #[test]
    fn unsupported_version_wins_over_everything() {
        let key = signing_key(1);
        let mut pin = test_pin(&key);
        pin.header.v = 2;
        pin.kid = "kid-nowhere".into(); // also-bad kid must not mask the version check
        let registry = registry_with("kid-a", &key);
        assert_eq!(
            verify(&pin, &registry, None, None, None),
            VerifyOutcome::UnsupportedVersion
        );
    }

    #[test]
    fn check_order_is_observable() {
        let key = signing_key(1);
        let pin = test_pin(&key);
        let registry = registry_with("kid-a", &key);

        // bad kid + bad sig: kid first
        let mut p = pin.clone();
        p.kid = "kid-x".into();
        p.sig[0] ^= 1;
        assert_eq!(verify(&p, &registry, None, None, None), VerifyOutcome::UnknownKey);

        // wrong source + wrong vector: source (step 4) before vector (step 5)
        let wrong_vec = EmbeddingVector::from_f32(&[9.0, 9.0, 9.0, 9.0]).unwrap();
        assert_eq!(
            verify(&pin, &registry, Some("other"), Some(&wrong_vec), None),
            VerifyOutcome::SourceMismatch
        );

        // wrong shape + wrong content: shape before hash
        let short = EmbeddingVector::from_f32(&[9.0]).unwrap();
        assert_eq!(
            verify(&pin, &registry, None, Some(&short), None),
            VerifyOutcome::ShapeMismatch
        );

        // wrong vector + wrong model: vector (step 5) before model (step 6)
        assert_eq!(
            verify(&pin, &registry, None, Some(&wrong_vec), Some("other-model")),
            VerifyOutcome::VectorTampered
        );
    }

    #[test]
    fn partial_verification_only_checks_whats_supplied() {
        let key = signing_key(1);
        let pin = test_pin(&key);
        let registry = registry_with("kid-a", &key);
        // signature-only call can never return a mismatch code
        assert_eq!(verify(&pin, &registry, None, None, None), VerifyOutcome::Ok);
    }

    #[test]
    fn replay_onto_other_inputs() {
        let key = signing_key(1);
        let pin = test_pin(&key);
        let registry = registry_with("kid-a", &key);
        let other_vec = EmbeddingVector::from_f32(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(
            verify(&pin, &registry, Some("test"), Some(&other_vec), None),
            VerifyOutcome::VectorTampered
        );
        assert_eq!(
            verify(&pin, &registry, Some("different source"), Some(&test_vec()), None),
            VerifyOutcome::SourceMismatch
        );
    }

    #[test]
    fn every_sig_bit_flip_is_detected() {
        let key = signing_key(1);
        let pin = test_pin(&key);
        let registry = registry_with("kid-a", &key);
        for bit in 0..512 {
            let mut p = pin.clone();
            p.sig[bit / 8] ^= 1 << (bit % 8);
            assert_eq!(
                verify(&p, &registry, None, None, None),
                VerifyOutcome::SignatureInvalid,
                "bit {bit}"
            );
        }
    }

    #[test]
    fn every_header_field_is_covered_by_the_signature() {
        let key = signing_key(1);
        let registry = registry_with("kid-a", &key);
        let base = {
            let mut extra = BTreeMap::new();
            extra.insert("vectorpin.record_id".to_string(), "doc-1".to_string());
            create_pin(
                "test",
                &test_vec(),
                &PinOptions::new("m", "2026-05-05T12:00:00Z")
                    .with_extra(extra)
                    .with_model_hash(hash_text("weights")),
                "kid-a",
                &key,
            )
            .unwrap()
        };
        assert_eq!(verify(&base, &registry, None, None, None), VerifyOutcome::Ok);

        let mut mutations: Vec<Pin> = Vec::new();
        let mut p = base.clone();
        p.header.model = "other".into();
        mutations.push(p);
        let mut p = base.clone();
        p.header.model_hash = None;
        mutations.push(p);
        let mut p = base.clone();
        p.header.source_hash = hash_text("other");
        mutations.push(p);
        let mut p = base.clone();
        p.header.vec_hash = hash_text("other");
        mutations.push(p);
        let mut p = base.clone();
        p.header.vec_dtype = Dtype::F64;
        mutations.push(p);
        let mut p = base.clone();
        p.header.vec_dim = 5;
        mutations.push(p);
        let mut p = base.clone();
        p.header.ts = "2026-05-05T12:00:01Z".into();
        mutations.push(p);
        let mut p = base.clone();
        p.header.extra.as_mut().unwrap().insert("x".into(), "y".into());
        mutations.push(p);
        let mut p = base.clone();
        p.header.extra = None;
        mutations.push(p);

        for (i, p) in mutations.iter().enumerate() {
            assert_eq!(
                verify(p, &registry, None, None, None),
                VerifyOutcome::SignatureInvalid,
                "mutation {i}"
            );
        }
    }

    #[test]
    fn verify_casts_supplied_vector_to_header_dtype() {
        let key = signing_key(1);
        let pin = test_pin(&key); // committed as f32
        let registry = registry_with("kid-a", &key);
        // caller hands in f64 working copies of the same values
        let wide = EmbeddingVector::from_f64(vec![0.5, -0.25, 1.0, 0.0]).unwrap();
        assert_eq!(verify(&pin, &registry, None, Some(&wide), None), VerifyOutcome::Ok);
    }

    #[test]
    fn rotation_overlap_window() {
        let key_a = signing_key(1);
        let key_b = signing_key(2);
        let pin = test_pin(&key_a);

        let registry_a = registry_with("kid-a", &key_a);
        assert_eq!(verify(&pin, &registry_a, None, None, None), VerifyOutcome::Ok);

        let registry_ab = registry_a.with_key("kid-b", key_b.verifying_key()).unwrap();
        assert_eq!(registry_ab.len(), 2);
        assert_eq!(verify(&pin, &registry_ab, None, None, None), VerifyOutcome::Ok);

        let registry_b = registry_ab.without_key("kid-a").unwrap();
        assert_eq!(verify(&pin, &registry_b, None, None, None), VerifyOutcome::UnknownKey);

        assert_eq!(
            registry_a.with_key("kid-a", key_b.verifying_key()).unwrap_err(),
            RegistryError::DuplicateKid("kid-a".into())
        );
    }

    #[test]
    fn wire_round_trip() {
        let key = signing_key(1);
        let mut extra = BTreeMap::new();
        extra.insert("vectorpin.record_id".to_string(), "doc-12345-chunk-7".to_string());
        let pin = create_pin(
            "test",
            &test_vec(),
            &PinOptions::new("m", "2026-05-05T12:00:00Z").with_extra(extra),
            "kid-a",
            &key,
        )
        .unwrap();
        for pretty in [false, true] {
            let json = pin.to_json(pretty);
            assert_eq!(Pin::from_json(&json).unwrap(), pin);
        }
    }

    #[test]
    fn wire_rejects_malformed_pins() {
        let key = signing_key(1);
        let pin = test_pin(&key);
        let json = pin.to_json(false);

        let with_empty_extra = json.replacen("{\"v\":1", "{\"extra\":{},\"v\":1", 1);
        assert!(matches!(
            Pin::from_json(&with_empty_extra),
            Err(PinParseError::EmptyExtra)
        ));

        let bad_b64 = json.replace(&pin.sig_base64(), "!!notbase64!!");
        assert!(matches!(
            Pin::from_json(&bad_b64),
            Err(PinParseError::BadSignatureEncoding)
        ));

        let short_sig = json.replace(&pin.sig_base64(), &URL_SAFE_NO_PAD.encode([0u8; 63]));
        assert!(matches!(
            Pin::from_json(&short_sig),
            Err(PinParseError::BadSignatureLength(63))
        ));

        // standard base64 padding is not the URL-safe no-pad alphabet
        let padded = json.replace(&pin.sig_base64(), &format!("{}==", pin.sig_base64()));
        assert!(Pin::from_json(&padded).is_err());

        // non-string extra values must not parse
        let non_string_extra =
            json.replacen("{\"v\":1", "{\"extra\":{\"k\":5},\"v\":1", 1);
        assert!(matches!(
            Pin::from_json(&non_string_extra),
            Err(PinParseError::Json(_))
        ));
    }

    #[test]
    fn key_and_registry_files_round_trip() {
        let key_file = KeyFile::new("kid-a", [3u8; 32]);
        let parsed = KeyFile::from_json(&key_file.to_json()).unwrap();
        let sk = parsed.signing_key().unwrap();
        assert_eq!(sk.to_bytes(), [3u8; 32]);

        let registry = KeyRegistry::new()
            .with_key("kid-a", sk.verifying_key())
            .unwrap()
            .with_key("kid-b", signing_key(4).verifying_key())
            .unwrap();
        let reparsed = KeyRegistry::from_json(&registry.to_json()).unwrap();
        assert_eq!(reparsed.len(), 2);
        assert_eq!(reparsed.get("kid-a"), Some(&sk.verifying_key()));
    }
}
