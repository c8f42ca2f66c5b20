//! VectorPin: cryptographic provenance pins for embedding vectors.
//!
//! A *pin* binds an embedding to the SHA-256 hash of its source text, the
//! identifier of the model that produced it, and the issuer's Ed25519
//! signing key. Any post-pinning modification of the vector, the source, or
//! the attestation itself is detectable by anyone holding the issuer's
//! public key.
//!
//! The crate is organised in three layers:
//!
//! * [`canonical`] — deterministic byte representations: NFC-normalised
//!   text hashing, little-endian vector packing, and the canonical JSON
//!   form of a pin header. Every implementation of protocol v1 must agree
//!   with these bytes exactly; they are what gets signed.
//! * [`pin`] — pin creation, the key registry, and structured verification
//!   returning one of eight distinct outcomes.
//! * [`fixtures`] — generation and checking of the shared
//!   `testvectors/v1.json` fixture file that locks the canonical-byte and
//!   signature behaviour across implementations.
//!
//! # Example
//!
//! ```
//! use vectorpin::canonical::{Dtype, EmbeddingVector};
//! use vectorpin::pin::{create_pin, verify, KeyRegistry, PinOptions, VerifyOutcome};
//!
//! let key = ed25519_dalek::SigningKey::from_bytes(&[7u8; 32]);
//! let vec = EmbeddingVector::from_f32(&[0.25, -1.0, 3.5]).unwrap();
//! let pin = create_pin(
//!     "the quick brown fox",
//!     &vec,
//!     &PinOptions::new("text-embedding-3-large", "2026-05-05T12:00:00Z"),
//!     "prod-2026-05",
//!     &key,
//! )
//! .unwrap();
//!
//! let registry = KeyRegistry::new()
//!     .with_key("prod-2026-05", key.verifying_key())
//!     .unwrap();
//! let outcome = verify(&pin, &registry, Some("the quick brown fox"), Some(&vec), None);
//! assert_eq!(outcome, VerifyOutcome::Ok);
//! ```

pub mod canonical;
pub mod fixtures;
pub mod pin;

pub use canonical::{Dtype, EmbeddingVector, HashString};
pub use pin::{create_pin, verify, KeyRegistry, Pin, PinHeader, PinOptions, VerifyOutcome};
