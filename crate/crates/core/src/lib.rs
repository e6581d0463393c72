//! Core engine for reconstructing hidden cross-chain transaction pairs.
//!
//! The pipeline mirrors how a bridge transfer actually surfaces on chain:
//! raw calldata and event logs are decoded against contract ABIs into
//! field/value trees ([`abi`]), instances sharing an identical field set are
//! grouped into categories ([`categorize`]), candidate field assignments for
//! the five-role semantic identifier are proposed per category ([`infer`]),
//! validated against asset flows and cross-chain value evidence ([`examine`]),
//! and finally used to match source/destination transactions under formal
//! pairing rules ([`pair`]). A deterministic synthetic bridge ([`sim`]) and an
//! evaluation harness ([`harness`]) make the whole thing testable offline.
//!
//! The crate is `no_std`-compatible (alloc required); IO, file formats and the
//! CLI live in the companion `xbridge` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod abi;
pub mod categorize;
pub mod examine;
pub mod harness;
pub mod infer;
pub mod model;
pub mod pair;
pub mod sim;

pub use model::{
    Address, CategoryKey, FieldPath, PairingParams, Quintuple, Record, Role, Side,
    TransactionInstance, TxHash, Value, U256,
};
