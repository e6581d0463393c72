//! Selector/topic registry and whole-instance decoding.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::codec::{decode_call, decode_log, DecodeMode};
use super::types::{selector, topic0, EventDescriptor, FunctionDescriptor};
use crate::model::{
    Address, DecodedCall, Diagnostic, Diagnostics, LogEntry, Record, Side, TransactionInstance,
    TxHash, Value, U256,
};

/// A raw event log as collected from a node: emitting contract, topics, data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLog {
    pub emitter: Address,
    pub topics: Vec<[u8; 32]>,
    pub data: Vec<u8>,
}

/// A raw transaction plus its logs, before ABI decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTransaction {
    pub chain: u64,
    pub tx_hash: TxHash,
    pub block_number: u64,
    pub timestamp: u64,
    pub sender: Address,
    pub contract: Address,
    pub native_value: U256,
    pub input: Vec<u8>,
    pub logs: Vec<RawLog>,
    pub side: Side,
}

/// Maps selectors to function descriptors and topic0 hashes to event
/// descriptors. Loaded from standard Solidity JSON ABI files by the CLI.
#[derive(Debug, Clone, Default)]
pub struct AbiRegistry {
    functions: BTreeMap<[u8; 4], FunctionDescriptor>,
    events: BTreeMap<[u8; 32], EventDescriptor>,
}

impl AbiRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_function(&mut self, fd: FunctionDescriptor) {
        self.functions.insert(selector(&fd), fd);
    }

    pub fn add_event(&mut self, ed: EventDescriptor) {
        self.events.insert(topic0(&ed), ed);
    }

    pub fn function_by_selector(&self, sel: &[u8; 4]) -> Option<&FunctionDescriptor> {
        self.functions.get(sel)
    }

    pub fn event_by_topic0(&self, t0: &[u8; 32]) -> Option<&EventDescriptor> {
        self.events.get(t0)
    }

    pub fn functions(&self) -> impl Iterator<Item = &FunctionDescriptor> {
        self.functions.values()
    }

    pub fn events(&self) -> impl Iterator<Item = &EventDescriptor> {
        self.events.values()
    }
}

// 4 bytes of selector/topic0 keep distinct unknown shapes in distinct
// categories without blowing up the name space.
fn unknown_name(id: &[u8]) -> String {
    format!("unknown_0x{}", hex::encode(&id[..4.min(id.len())]))
}

fn placeholder_call(input: &[u8]) -> (DecodedCall, Diagnostic) {
    let name = if input.len() >= 4 {
        unknown_name(&input[..4])
    } else {
        "unknown_empty".into()
    };
    let mut args = Record::new();
    if input.len() >= 4 {
        args.insert("selector", Value::Bytes(input[..4].to_vec()))
            .expect("fresh record");
        args.insert("data", Value::Bytes(input[4..].to_vec()))
            .expect("fresh record");
    } else {
        args.insert("data", Value::Bytes(input.to_vec()))
            .expect("fresh record");
    }
    let diag = Diagnostic::new("call", format!("unknown selector, kept as `{name}` placeholder"));
    (DecodedCall { function: name, args }, diag)
}

fn placeholder_log(raw: &RawLog) -> (LogEntry, Diagnostic) {
    let name = match raw.topics.first() {
        Some(t0) => unknown_name(t0),
        None => "unknown_anonymous".into(),
    };
    let mut rec = Record::new();
    rec.insert(
        "topics",
        Value::List(raw.topics.iter().map(|t| Value::Bytes(t.to_vec())).collect()),
    )
    .expect("fresh record");
    rec.insert("data", Value::Bytes(raw.data.clone()))
        .expect("fresh record");
    let diag = Diagnostic::new("log", format!("unknown topic0, kept as `{name}` placeholder"));
    (
        LogEntry {
            event: name,
            emitter: raw.emitter,
            record: rec,
        },
        diag,
    )
}

/// Decodes a raw transaction into an instance. Unknown selectors/topics (and
/// decode failures in lenient mode) produce placeholder nodes rather than
/// failures; diagnostics list every undecodable item.
pub fn decode_instance(
    raw: &RawTransaction,
    registry: &AbiRegistry,
    mode: DecodeMode,
) -> Result<(TransactionInstance, Diagnostics), super::AbiError> {
    decode_instance_with(raw, registry, mode, false)
}

/// Like [`decode_instance`], with the option to drop unknown logs entirely
/// instead of keeping placeholder nodes. Placeholders keep field sets
/// reflecting log count (the default); dropping collapses categories that
/// differ only in undecodable logs.
pub fn decode_instance_with(
    raw: &RawTransaction,
    registry: &AbiRegistry,
    mode: DecodeMode,
    drop_unknown: bool,
) -> Result<(TransactionInstance, Diagnostics), super::AbiError> {
    let mut diags = Diagnostics::new();

    let call = if raw.input.len() >= 4 {
        let sel: [u8; 4] = raw.input[..4].try_into().expect("4 bytes");
        match registry.function_by_selector(&sel) {
            Some(fd) => match decode_call(fd, &raw.input, mode) {
                Ok(decoded) => {
                    diags.extend(decoded.diags);
                    DecodedCall {
                        function: fd.name.clone(),
                        args: decoded.record,
                    }
                }
                Err(e) => {
                    if matches!(mode, DecodeMode::Strict) {
                        return Err(e);
                    }
                    let (call, diag) = placeholder_call(&raw.input);
                    diags.push(Diagnostic::new("call", format!("decode failed: {e}")));
                    diags.push(diag);
                    call
                }
            },
            None => {
                let (call, diag) = placeholder_call(&raw.input);
                diags.push(diag);
                call
            }
        }
    } else {
        let (call, diag) = placeholder_call(&raw.input);
        diags.push(diag);
        call
    };

    let mut logs = Vec::with_capacity(raw.logs.len());
    for (i, raw_log) in raw.logs.iter().enumerate() {
        let known = raw_log
            .topics
            .first()
            .and_then(|t0| registry.event_by_topic0(t0));
        match known {
            Some(ed) => match decode_log(ed, &raw_log.topics, &raw_log.data, mode) {
                Ok((event, decoded)) => {
                    diags.extend(decoded.diags);
                    logs.push(LogEntry {
                        event,
                        emitter: raw_log.emitter,
                        record: decoded.record,
                    });
                }
                Err(e) => {
                    if matches!(mode, DecodeMode::Strict) {
                        return Err(e);
                    }
                    diags.push(Diagnostic::new(
                        format!("log#{i}"),
                        format!("decode failed: {e}"),
                    ));
                    if drop_unknown {
                        diags.push(Diagnostic::new(format!("log#{i}"), "dropped"));
                    } else {
                        let (entry, diag) = placeholder_log(raw_log);
                        diags.push(diag);
                        logs.push(entry);
                    }
                }
            },
            None => {
                if drop_unknown {
                    diags.push(Diagnostic::new(
                        format!("log#{i}"),
                        "unknown topic0, dropped",
                    ));
                } else {
                    let (entry, diag) = placeholder_log(raw_log);
                    diags.push(diag);
                    logs.push(entry);
                }
            }
        }
    }

    let instance = TransactionInstance::new(
        raw.chain,
        raw.tx_hash,
        raw.block_number,
        raw.timestamp,
        raw.sender,
        raw.contract,
        raw.native_value.clone(),
        call,
        logs,
        raw.side,
    )
    .map_err(|e| super::AbiError::NonCanonical(format!("instance: {e}")))?;
    Ok((instance, diags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abi::codec::{encode_call, encode_log};
    use crate::abi::types::{AbiType, Param};
    use alloc::vec;

    fn known_event() -> EventDescriptor {
        EventDescriptor::new(
            "Ping",
            vec![Param::new("n", AbiType::Uint(256))],
        )
        .unwrap()
    }

    fn known_function() -> FunctionDescriptor {
        FunctionDescriptor::new("f", vec![Param::new("a", AbiType::Uint(256))]).unwrap()
    }

    fn raw_with(input: Vec<u8>, logs: Vec<RawLog>) -> RawTransaction {
        RawTransaction {
            chain: 1,
            tx_hash: TxHash([9u8; 32]),
            block_number: 3,
            timestamp: 1000,
            sender: Address([1u8; 20]),
            contract: Address([2u8; 20]),
            native_value: U256::zero(),
            input,
            logs,
            side: Side::Source,
        }
    }

    #[test]
    fn unknown_topics_become_placeholders_known_ones_decode() {
        let ev = known_event();
        let fd = known_function();
        let mut registry = AbiRegistry::new();
        registry.add_function(fd.clone());
        registry.add_event(ev.clone());

        let rec = Record::from_pairs([("n", Value::uint_u64(7))]).unwrap();
        let (topics, data) = encode_log(&ev, &rec).unwrap();
        let known_log = RawLog {
            emitter: Address([3u8; 20]),
            topics: topics.clone(),
            data,
        };
        let unknown_log = RawLog {
            emitter: Address([4u8; 20]),
            topics: vec![[0xddu8; 32]],
            data: vec![1, 2, 3],
        };
        let args = Record::from_pairs([("a", Value::uint_u64(1))]).unwrap();
        let raw = raw_with(
            encode_call(&fd, &args).unwrap(),
            vec![known_log.clone(), known_log, unknown_log],
        );
        let (tx, diags) = decode_instance(&raw, &registry, DecodeMode::Lenient).unwrap();
        assert_eq!(tx.logs.len(), 3);
        assert_eq!(tx.logs[0].event, "Ping");
        assert_eq!(tx.logs[1].event, "Ping");
        assert_eq!(tx.logs[2].event, "unknown_0xdddddddd");
        assert!(tx.logs[2].record.get("topics").is_some());
        assert!(tx.logs[2].record.get("data").is_some());
        assert_eq!(diags.len(), 1, "one diagnostic for the unknown topic");
    }

    #[test]
    fn unknown_selector_becomes_placeholder_call() {
        let registry = AbiRegistry::new();
        let raw = raw_with(vec![0xde, 0xad, 0xbe, 0xef, 0x01], vec![]);
        let (tx, diags) = decode_instance(&raw, &registry, DecodeMode::Lenient).unwrap();
        assert_eq!(tx.call.function, "unknown_0xdeadbeef");
        assert_eq!(
            tx.call.args.get("selector"),
            Some(&Value::Bytes(vec![0xde, 0xad, 0xbe, 0xef]))
        );
        assert_eq!(tx.call.args.get("data"), Some(&Value::Bytes(vec![0x01])));
        assert_eq!(diags.len(), 1);
        // Two distinct unknown selectors shape two distinct field sets.
        let raw2 = raw_with(vec![0xca, 0xfe, 0xba, 0xbe], vec![]);
        let (tx2, _) = decode_instance(&raw2, &registry, DecodeMode::Lenient).unwrap();
        assert_ne!(
            crate::categorize::fields_of(&tx),
            crate::categorize::fields_of(&tx2)
        );
    }

    #[test]
    fn corrupt_body_for_known_selector_keeps_placeholder_in_lenient() {
        let fd = known_function();
        let mut registry = AbiRegistry::new();
        registry.add_function(fd.clone());
        // Valid selector, truncated body.
        let mut input = crate::abi::selector(&fd).to_vec();
        input.extend_from_slice(&[0u8; 5]);
        let raw = raw_with(input, vec![]);
        let (tx, diags) = decode_instance(&raw, &registry, DecodeMode::Lenient).unwrap();
        assert!(tx.call.function.starts_with("unknown_0x"));
        assert!(diags.iter().any(|d| d.message.contains("decode failed")));
        // Strict mode refuses instead.
        assert!(decode_instance(&raw, &registry, DecodeMode::Strict).is_err());
    }
}
