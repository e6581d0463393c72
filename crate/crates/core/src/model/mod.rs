//! Core domain types shared by every pipeline stage.
//!
//! All types here are immutable after construction and safe to share across
//! threads; behavior is limited to construction, validation and
//! canonicalization.

mod instance;
mod params;
mod path;
mod quintuple;
mod value;

pub use instance::{DecodedCall, LogEntry, Side, TransactionInstance, TxHash};
pub use params::{FeeRate, PairingParams, ParamsError, NATIVE_SYMBOL};
pub use path::{FieldPath, PathError, PathRoot, PathSegment, META_TIMESTAMP};
pub use quintuple::{Candidate, CandidateQuintuple, Quintuple, Role};
pub use value::{Address, CanonicalValue, ModelError, Record, Value, U256};

use alloc::string::String;
use alloc::vec::Vec;

/// Stable identity of a category: SHA-256 over the newline-joined sorted
/// rendered field paths.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategoryKey(pub [u8; 32]);

impl CategoryKey {
    pub fn from_fields<S: AsRef<str>>(sorted_fields: &[S]) -> Self {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for (i, f) in sorted_fields.iter().enumerate() {
            if i > 0 {
                hasher.update(b"\n");
            }
            hasher.update(f.as_ref().as_bytes());
        }
        CategoryKey(hasher.finalize().into())
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let bytes = hex::decode(s).ok()?;
        let arr: [u8; 32] = bytes.try_into().ok()?;
        Some(CategoryKey(arr))
    }
}

impl core::fmt::Debug for CategoryKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "CategoryKey({})", self.to_hex())
    }
}

impl core::fmt::Display for CategoryKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// A diagnostic note emitted by a stage instead of failing the run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub context: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(context: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            context: context.into(),
            message: message.into(),
        }
    }
}

pub type Diagnostics = Vec<Diagnostic>;
