//! EVM ABI schema types, codec, and the instance decoder.
//!
//! Contract ABIs serve as the schema for raw calldata and event logs; this
//! module turns bytes into [`Record`](crate::model::Record) trees and back.
//! Decoding is lenient by default (real chain data contains non-standard
//! encoders) and strict for simulator fixtures.

mod codec;
mod registry;
mod types;

pub use codec::{
    decode_call, decode_event_data, decode_log, encode_call, encode_log, DecodeMode, Decoded,
};
pub use registry::{decode_instance, decode_instance_with, AbiRegistry, RawLog, RawTransaction};
pub use types::{
    canonical_signature, keccak256, selector, topic0, AbiType, EventDescriptor,
    FunctionDescriptor, Param,
};

use alloc::string::String;

/// Errors from ABI parsing, encoding and decoding.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AbiError {
    #[error("unsupported type `{0}`")]
    UnsupportedType(String),
    #[error("selector mismatch: expected {expected}, got {got}")]
    SelectorMismatch { expected: String, got: String },
    #[error("input truncated at offset {0}")]
    Truncated(usize),
    #[error("offset {offset} out of bounds (len {len})")]
    OffsetOutOfBounds { offset: u64, len: usize },
    #[error("declared length {0} exceeds the buffer")]
    LengthOverflow(u64),
    #[error("non-canonical encoding: {0}")]
    NonCanonical(String),
    #[error("invalid utf-8 in string value")]
    InvalidUtf8,
    #[error("topic count mismatch: expected {expected}, got {got}")]
    TopicCountMismatch { expected: usize, got: usize },
    #[error("value does not fit type `{ty}`: {reason}")]
    ValueMismatch { ty: String, reason: String },
    #[error("duplicate component name `{0}`")]
    DuplicateComponent(String),
    #[error("invalid identifier `{0}`")]
    BadIdentifier(String),
}
