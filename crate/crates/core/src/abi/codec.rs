//! Head/tail ABI codec: static types in place, dynamic types via 32-byte
//! offsets, strings/bytes length-prefixed, arrays recursive.
//!
//! Lenient mode tolerates non-canonical padding and offsets with a
//! diagnostic; strict mode (simulator fixtures) rejects them. In both modes
//! the decoder never reads outside the input buffer.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::types::{keccak256, selector, topic0, AbiType, EventDescriptor, FunctionDescriptor};
use super::AbiError;
use crate::model::{Address, Diagnostic, Diagnostics, Record, Value, U256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeMode {
    Strict,
    #[default]
    Lenient,
}

/// A decoded record plus any leniency diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub record: Record,
    pub diags: Diagnostics,
}

struct Dec {
    mode: DecodeMode,
    diags: Diagnostics,
}

impl Dec {
    fn flag(&mut self, context: &str, message: String) -> Result<(), AbiError> {
        match self.mode {
            DecodeMode::Strict => Err(AbiError::NonCanonical(format!("{context}: {message}"))),
            DecodeMode::Lenient => {
                self.diags.push(Diagnostic::new(context.to_owned(), message));
                Ok(())
            }
        }
    }
}

fn word(block: &[u8], at: usize) -> Result<[u8; 32], AbiError> {
    let end = at.checked_add(32).ok_or(AbiError::Truncated(at))?;
    if end > block.len() {
        return Err(AbiError::Truncated(at));
    }
    let mut w = [0u8; 32];
    w.copy_from_slice(&block[at..end]);
    Ok(w)
}

fn word_to_usize(w: &[u8; 32], block_len: usize) -> Result<usize, AbiError> {
    if w[..24].iter().any(|b| *b != 0) {
        return Err(AbiError::LengthOverflow(u64::MAX));
    }
    let v = u64::from_be_bytes(w[24..].try_into().expect("8 bytes"));
    if v > block_len as u64 {
        return Err(AbiError::OffsetOutOfBounds {
            offset: v,
            len: block_len,
        });
    }
    Ok(v as usize)
}

fn padded_len(n: usize) -> usize {
    n.div_ceil(32) * 32
}

/// True for types whose indexed event inputs are stored verbatim in a topic.
fn is_elementary(ty: &AbiType) -> bool {
    matches!(
        ty,
        AbiType::Uint(_) | AbiType::Int(_) | AbiType::Address | AbiType::Bool | AbiType::FixedBytes(_)
    )
}

impl Dec {
    /// Decodes one static value laid out at `at`; returns the value and its
    /// end offset.
    fn decode_static(
        &mut self,
        block: &[u8],
        at: usize,
        ty: &AbiType,
        ctx: &str,
    ) -> Result<(Value, usize), AbiError> {
        match ty {
            AbiType::Uint(n) => {
                let w = word(block, at)?;
                let unused_bits = 256 - *n as usize;
                let unused_bytes = unused_bits / 8;
                if w[..unused_bytes].iter().any(|b| *b != 0) {
                    self.flag(ctx, format!("uint{n} padding bytes are not zero"))?;
                }
                Ok((Value::Uint(U256::from_be_word(&w)), at + 32))
            }
            AbiType::Int(n) => {
                let w = word(block, at)?;
                // Canonical form sign-extends bit n-1 through bit 255.
                let sign_byte_index = 32 - (*n as usize) / 8;
                if sign_byte_index > 0 {
                    let sign = if w[sign_byte_index] & 0x80 != 0 { 0xff } else { 0x00 };
                    if w[..sign_byte_index].iter().any(|b| *b != sign) {
                        self.flag(ctx, format!("int{n} is not sign-extended"))?;
                    }
                }
                Ok((Value::Uint(U256::from_be_word(&w)), at + 32))
            }
            AbiType::Address => {
                let w = word(block, at)?;
                if w[..12].iter().any(|b| *b != 0) {
                    self.flag(ctx, "address padding bytes are not zero".into())?;
                }
                Ok((
                    Value::Address(Address::from_slice(&w[12..]).expect("20 bytes")),
                    at + 32,
                ))
            }
            AbiType::Bool => {
                let w = word(block, at)?;
                if w[..31].iter().any(|b| *b != 0) || w[31] > 1 {
                    self.flag(ctx, "bool word is not 0 or 1".into())?;
                }
                Ok((Value::Bool(w[31] != 0), at + 32))
            }
            AbiType::FixedBytes(k) => {
                let w = word(block, at)?;
                if w[*k as usize..].iter().any(|b| *b != 0) {
                    self.flag(ctx, format!("bytes{k} tail bytes are not zero"))?;
                }
                Ok((Value::Bytes(w[..*k as usize].to_vec()), at + 32))
            }
            AbiType::Array(elem, Some(n)) => {
                let mut items = Vec::with_capacity(*n);
                let mut pos = at;
                for i in 0..*n {
                    let (v, end) =
                        self.decode_static(block, pos, elem, &format!("{ctx}[{i}]"))?;
                    items.push(v);
                    pos = end;
                }
                Ok((Value::List(items), pos))
            }
            AbiType::Tuple(comps) => {
                let mut rec = Record::new();
                let mut pos = at;
                for (name, t) in comps {
                    let (v, end) =
                        self.decode_static(block, pos, t, &format!("{ctx}.{name}"))?;
                    rec.insert(name.clone(), v)
                        .map_err(|_| AbiError::DuplicateComponent(name.clone()))?;
                    pos = end;
                }
                Ok((Value::Record(rec), pos))
            }
            AbiType::Bytes | AbiType::String | AbiType::Array(_, None) => Err(
                AbiError::UnsupportedType(format!("dynamic {} decoded as static", ty.canonical())),
            ),
        }
    }

    /// Decodes a sequence with its own head block starting at `block[0]`.
    /// Offsets inside are relative to the block. Returns values plus the
    /// total extent consumed within the block.
    fn decode_seq(
        &mut self,
        block: &[u8],
        types: &[&AbiType],
        ctx: &str,
    ) -> Result<(Vec<Value>, usize), AbiError> {
        let head_total: usize = types.iter().map(|t| t.head_size()).sum();
        if head_total > block.len() {
            return Err(AbiError::Truncated(block.len()));
        }
        let mut values = Vec::with_capacity(types.len());
        let mut head_pos = 0usize;
        let mut expected_tail = head_total;
        let mut extent = head_total;
        for (i, ty) in types.iter().enumerate() {
            let ictx = format!("{ctx}#{i}");
            if ty.is_dynamic() {
                let off_word = word(block, head_pos)?;
                let off = word_to_usize(&off_word, block.len())?;
                if off != expected_tail {
                    self.flag(&ictx, format!("offset {off}, canonical {expected_tail}"))?;
                }
                let (v, consumed) = self.decode_dynamic(&block[off..], ty, &ictx)?;
                values.push(v);
                let end = off + consumed;
                expected_tail = expected_tail.max(end);
                extent = extent.max(end);
                head_pos += 32;
            } else {
                let (v, end) = self.decode_static(block, head_pos, ty, &ictx)?;
                values.push(v);
                head_pos = end;
            }
        }
        Ok((values, extent))
    }

    /// Decodes a dynamic value whose tail starts at `block[0]`.
    fn decode_dynamic(
        &mut self,
        block: &[u8],
        ty: &AbiType,
        ctx: &str,
    ) -> Result<(Value, usize), AbiError> {
        match ty {
            AbiType::Bytes | AbiType::String => {
                let len_word = word(block, 0)?;
                let len = word_to_usize(&len_word, block.len())?;
                let end = 32usize
                    .checked_add(len)
                    .ok_or(AbiError::LengthOverflow(len as u64))?;
                if end > block.len() {
                    return Err(AbiError::LengthOverflow(len as u64));
                }
                let content = &block[32..end];
                let padded_end = 32 + padded_len(len);
                if padded_end <= block.len() && block[end..padded_end].iter().any(|b| *b != 0) {
                    self.flag(ctx, "padding after content is not zero".into())?;
                }
                if padded_end > block.len() {
                    self.flag(ctx, "content is not padded to a word boundary".into())?;
                }
                let consumed = padded_end.min(block.len());
                if matches!(ty, AbiType::String) {
                    match core::str::from_utf8(content) {
                        Ok(s) => Ok((Value::Text(s.into()), consumed)),
                        Err(_) => match self.mode {
                            DecodeMode::Strict => Err(AbiError::InvalidUtf8),
                            DecodeMode::Lenient => {
                                self.diags.push(Diagnostic::new(
                                    ctx.to_owned(),
                                    "invalid utf-8 replaced lossily".to_owned(),
                                ));
                                Ok((
                                    Value::Text(String::from_utf8_lossy(content).into_owned()),
                                    consumed,
                                ))
                            }
                        },
                    }
                } else {
                    Ok((Value::Bytes(content.to_vec()), consumed))
                }
            }
            AbiType::Array(elem, None) => {
                let len_word = word(block, 0)?;
                let len = word_to_usize(&len_word, block.len())?;
                let min_total = len
                    .checked_mul(elem.head_size())
                    .and_then(|t| t.checked_add(32))
                    .ok_or(AbiError::LengthOverflow(len as u64))?;
                if min_total > block.len() && len > 0 {
                    return Err(AbiError::LengthOverflow(len as u64));
                }
                let types: Vec<&AbiType> = core::iter::repeat_n(&**elem, len).collect();
                let (items, consumed) = self.decode_seq(&block[32..], &types, ctx)?;
                Ok((Value::List(items), 32 + consumed))
            }
            AbiType::Array(elem, Some(n)) => {
                let types: Vec<&AbiType> = core::iter::repeat_n(&**elem, *n).collect();
                let (items, consumed) = self.decode_seq(block, &types, ctx)?;
                Ok((Value::List(items), consumed))
            }
            AbiType::Tuple(comps) => {
                let types: Vec<&AbiType> = comps.iter().map(|(_, t)| t).collect();
                let (vals, consumed) = self.decode_seq(block, &types, ctx)?;
                let mut rec = Record::new();
                for ((name, _), v) in comps.iter().zip(vals) {
                    rec.insert(name.clone(), v)
                        .map_err(|_| AbiError::DuplicateComponent(name.clone()))?;
                }
                Ok((Value::Record(rec), consumed))
            }
            _ => self.decode_static(block, 0, ty, ctx),
        }
    }
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

fn encode_static(value: &Value, ty: &AbiType, out: &mut Vec<u8>) -> Result<(), AbiError> {
    let mismatch = |reason: &str| AbiError::ValueMismatch {
        ty: ty.canonical(),
        reason: reason.into(),
    };
    match ty {
        AbiType::Uint(n) => {
            let u = value.as_uint().ok_or_else(|| mismatch("expected uint"))?;
            if u.bits() > *n as u64 {
                return Err(mismatch("value exceeds bit width"));
            }
            out.extend_from_slice(&u.to_be_word());
        }
        AbiType::Int(n) => {
            let u = value.as_uint().ok_or_else(|| mismatch("expected int pattern"))?;
            let w = u.to_be_word();
            let sign_byte_index = 32 - (*n as usize) / 8;
            if sign_byte_index > 0 {
                let sign = if w[sign_byte_index] & 0x80 != 0 { 0xff } else { 0x00 };
                if w[..sign_byte_index].iter().any(|b| *b != sign) {
                    return Err(mismatch("pattern is not sign-extended for width"));
                }
            }
            out.extend_from_slice(&w);
        }
        AbiType::Address => {
            let a = value.as_address().ok_or_else(|| mismatch("expected address"))?;
            out.extend_from_slice(&[0u8; 12]);
            out.extend_from_slice(&a.0);
        }
        AbiType::Bool => match value {
            Value::Bool(b) => {
                let mut w = [0u8; 32];
                w[31] = *b as u8;
                out.extend_from_slice(&w);
            }
            _ => return Err(mismatch("expected bool")),
        },
        AbiType::FixedBytes(k) => match value {
            Value::Bytes(b) if b.len() == *k as usize => {
                let mut w = [0u8; 32];
                w[..b.len()].copy_from_slice(b);
                out.extend_from_slice(&w);
            }
            _ => return Err(mismatch("expected exactly-sized bytes")),
        },
        AbiType::Array(elem, Some(n)) => match value {
            Value::List(items) if items.len() == *n => {
                for v in items {
                    encode_static(v, elem, out)?;
                }
            }
            _ => return Err(mismatch("expected fixed-length list")),
        },
        AbiType::Tuple(comps) => match value {
            Value::Record(rec) => {
                check_record_shape(rec, comps, ty)?;
                for ((_, t), (_, v)) in comps.iter().zip(rec.iter()) {
                    encode_static(v, t, out)?;
                }
            }
            _ => return Err(mismatch("expected record")),
        },
        _ => return Err(mismatch("dynamic type in static position")),
    }
    Ok(())
}

fn check_record_shape(
    rec: &Record,
    comps: &[(String, AbiType)],
    ty: &AbiType,
) -> Result<(), AbiError> {
    if rec.len() != comps.len()
        || !rec
            .iter()
            .zip(comps.iter())
            .all(|((rn, _), (cn, _))| rn == cn)
    {
        return Err(AbiError::ValueMismatch {
            ty: ty.canonical(),
            reason: "record keys do not match tuple components".into(),
        });
    }
    Ok(())
}

fn encode_dynamic(value: &Value, ty: &AbiType) -> Result<Vec<u8>, AbiError> {
    let mismatch = |reason: &str| AbiError::ValueMismatch {
        ty: ty.canonical(),
        reason: reason.into(),
    };
    let mut out = Vec::new();
    match ty {
        AbiType::Bytes | AbiType::String => {
            let content: &[u8] = match (ty, value) {
                (AbiType::Bytes, Value::Bytes(b)) => b,
                (AbiType::String, Value::Text(t)) => t.as_bytes(),
                _ => return Err(mismatch("expected bytes/text")),
            };
            let mut len_word = [0u8; 32];
            len_word[24..].copy_from_slice(&(content.len() as u64).to_be_bytes());
            out.extend_from_slice(&len_word);
            out.extend_from_slice(content);
            out.resize(32 + padded_len(content.len()), 0);
        }
        AbiType::Array(elem, None) => match value {
            Value::List(items) => {
                let mut len_word = [0u8; 32];
                len_word[24..].copy_from_slice(&(items.len() as u64).to_be_bytes());
                out.extend_from_slice(&len_word);
                let types: Vec<&AbiType> = core::iter::repeat_n(&**elem, items.len()).collect();
                let refs: Vec<&Value> = items.iter().collect();
                out.extend_from_slice(&encode_seq(&refs, &types)?);
            }
            _ => return Err(mismatch("expected list")),
        },
        AbiType::Array(elem, Some(n)) => match value {
            Value::List(items) if items.len() == *n => {
                let types: Vec<&AbiType> = core::iter::repeat_n(&**elem, *n).collect();
                let refs: Vec<&Value> = items.iter().collect();
                out.extend_from_slice(&encode_seq(&refs, &types)?);
            }
            _ => return Err(mismatch("expected fixed-length list")),
        },
        AbiType::Tuple(comps) => match value {
            Value::Record(rec) => {
                check_record_shape(rec, comps, ty)?;
                let types: Vec<&AbiType> = comps.iter().map(|(_, t)| t).collect();
                let refs: Vec<&Value> = rec.iter().map(|(_, v)| v).collect();
                out.extend_from_slice(&encode_seq(&refs, &types)?);
            }
            _ => return Err(mismatch("expected record")),
        },
        _ => {
            encode_static(value, ty, &mut out)?;
        }
    }
    Ok(out)
}

/// Encodes a head/tail sequence (canonical layout).
fn encode_seq(values: &[&Value], types: &[&AbiType]) -> Result<Vec<u8>, AbiError> {
    debug_assert_eq!(values.len(), types.len());
    let head_total: usize = types.iter().map(|t| t.head_size()).sum();
    let mut head = Vec::with_capacity(head_total);
    let mut tail: Vec<u8> = Vec::new();
    for (v, ty) in values.iter().zip(types.iter()) {
        if ty.is_dynamic() {
            let mut off_word = [0u8; 32];
            off_word[24..].copy_from_slice(&((head_total + tail.len()) as u64).to_be_bytes());
            head.extend_from_slice(&off_word);
            tail.extend_from_slice(&encode_dynamic(v, ty)?);
        } else {
            encode_static(v, ty, &mut head)?;
        }
    }
    head.extend_from_slice(&tail);
    Ok(head)
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Encodes a function call: selector followed by the canonical argument
/// encoding. The record must carry exactly the declared inputs, in order.
pub fn encode_call(fd: &FunctionDescriptor, args: &Record) -> Result<Vec<u8>, AbiError> {
    let comps: Vec<(String, AbiType)> = fd
        .inputs
        .iter()
        .map(|p| (p.name.clone(), p.ty.clone()))
        .collect();
    check_record_shape(args, &comps, &AbiType::Tuple(comps.clone()))?;
    let mut out = Vec::new();
    out.extend_from_slice(&selector(fd));
    let types: Vec<&AbiType> = fd.inputs.iter().map(|p| &p.ty).collect();
    let refs: Vec<&Value> = args.iter().map(|(_, v)| v).collect();
    out.extend_from_slice(&encode_seq(&refs, &types)?);
    Ok(out)
}

/// Decodes calldata against a function descriptor. The input must start with
/// the function's selector.
pub fn decode_call(
    fd: &FunctionDescriptor,
    input: &[u8],
    mode: DecodeMode,
) -> Result<Decoded, AbiError> {
    if input.len() < 4 {
        return Err(AbiError::Truncated(input.len()));
    }
    let expect = selector(fd);
    if input[..4] != expect {
        return Err(AbiError::SelectorMismatch {
            expected: hex::encode(expect),
            got: hex::encode(&input[..4]),
        });
    }
    let mut dec = Dec {
        mode,
        diags: Vec::new(),
    };
    let types: Vec<&AbiType> = fd.inputs.iter().map(|p| &p.ty).collect();
    let (values, consumed) = dec.decode_seq(&input[4..], &types, &fd.name)?;
    if consumed < input.len() - 4 {
        dec.flag(&fd.name, format!("{} trailing bytes", input.len() - 4 - consumed))?;
    }
    let mut record = Record::new();
    for (p, v) in fd.inputs.iter().zip(values) {
        record
            .insert(p.name.clone(), v)
            .map_err(|_| AbiError::DuplicateComponent(p.name.clone()))?;
    }
    Ok(Decoded {
        record,
        diags: dec.diags,
    })
}

/// Encodes an event: topics (topic0 plus one per indexed input) and the data
/// section holding the non-indexed inputs. Indexed non-elementary values are
/// stored as the keccak-256 of their encoding, which is non-recoverable.
pub fn encode_log(
    ed: &EventDescriptor,
    values: &Record,
) -> Result<(Vec<[u8; 32]>, Vec<u8>), AbiError> {
    let comps: Vec<(String, AbiType)> = ed
        .inputs
        .iter()
        .map(|p| (p.name.clone(), p.ty.clone()))
        .collect();
    check_record_shape(values, &comps, &AbiType::Tuple(comps.clone()))?;
    let mut topics = Vec::new();
    topics.push(topic0(ed));
    let mut data_types: Vec<&AbiType> = Vec::new();
    let mut data_values: Vec<&Value> = Vec::new();
    for (p, (_, v)) in ed.inputs.iter().zip(values.iter()) {
        if p.indexed {
            if is_elementary(&p.ty) {
                let mut w = Vec::with_capacity(32);
                encode_static(v, &p.ty, &mut w)?;
                topics.push(w.as_slice().try_into().expect("one word"));
            } else {
                let enc = encode_dynamic(v, &p.ty)?;
                topics.push(keccak256(&enc));
            }
        } else {
            data_types.push(&p.ty);
            data_values.push(v);
        }
    }
    let data = encode_seq(&data_values, &data_types)?;
    Ok((topics, data))
}

/// Decodes an event log against its descriptor. Indexed static inputs are
/// read from topics; indexed dynamic inputs yield their 32-byte hash as
/// bytes, flagged non-recoverable; non-indexed inputs decode from the data
/// section.
pub fn decode_log(
    ed: &EventDescriptor,
    topics: &[[u8; 32]],
    data: &[u8],
    mode: DecodeMode,
) -> Result<(String, Decoded), AbiError> {
    let expect = topic0(ed);
    match topics.first() {
        Some(t0) if *t0 == expect => {}
        Some(t0) => {
            return Err(AbiError::SelectorMismatch {
                expected: hex::encode(expect),
                got: hex::encode(t0),
            })
        }
        None => {
            return Err(AbiError::TopicCountMismatch {
                expected: ed.indexed_inputs().count() + 1,
                got: 0,
            })
        }
    }
    let n_indexed = ed.indexed_inputs().count();
    if topics.len() != n_indexed + 1 {
        return Err(AbiError::TopicCountMismatch {
            expected: n_indexed + 1,
            got: topics.len(),
        });
    }
    let mut dec = Dec {
        mode,
        diags: Vec::new(),
    };
    let data_types: Vec<&AbiType> = ed.unindexed_inputs().map(|p| &p.ty).collect();
    let (data_values, consumed) = dec.decode_seq(data, &data_types, &ed.name)?;
    if consumed < data.len() {
        dec.flag(&ed.name, format!("{} trailing bytes", data.len() - consumed))?;
    }
    let mut record = Record::new();
    let mut topic_iter = topics[1..].iter();
    let mut data_iter = data_values.into_iter();
    for p in &ed.inputs {
        let value = if p.indexed {
            let t = topic_iter.next().expect("count checked");
            if is_elementary(&p.ty) {
                let (v, _) = dec.decode_static(t, 0, &p.ty, &p.name)?;
                v
            } else {
                dec.diags.push(Diagnostic::new(
                    p.name.clone(),
                    "indexed dynamic input: only its hash is recoverable",
                ));
                Value::Bytes(t.to_vec())
            }
        } else {
            data_iter.next().expect("count checked")
        };
        record
            .insert(p.name.clone(), value)
            .map_err(|_| AbiError::DuplicateComponent(p.name.clone()))?;
    }
    Ok((
        ed.name.clone(),
        Decoded {
            record,
            diags: dec.diags,
        },
    ))
}

/// Decodes only the data section of an event (all inputs treated as
/// non-indexed); used by tests and tooling.
pub fn decode_event_data(
    types: &[&AbiType],
    data: &[u8],
    mode: DecodeMode,
) -> Result<(Vec<Value>, Diagnostics), AbiError> {
    let mut dec = Dec {
        mode,
        diags: Vec::new(),
    };
    let (values, _) = dec.decode_seq(data, types, "data")?;
    Ok((values, dec.diags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abi::types::Param;
    use alloc::vec;

    fn fd(name: &str, params: Vec<Param>) -> FunctionDescriptor {
        FunctionDescriptor::new(name, params).unwrap()
    }

    #[test]
    fn decode_single_static_word() {
        let f = fd("f", vec![Param::new("a", AbiType::Uint(256))]);
        let mut input = selector(&f).to_vec();
        let mut word = [0u8; 32];
        word[31] = 1;
        input.extend_from_slice(&word);
        let decoded = decode_call(&f, &input, DecodeMode::Strict).unwrap();
        assert_eq!(decoded.record.get("a"), Some(&Value::uint_u64(1)));
    }

    #[test]
    fn decode_string_against_frozen_bytes() {
        // offset word 0x20, length word 2, "hi" padded to 32 bytes.
        let f = fd("f", vec![Param::new("s", AbiType::String)]);
        let mut input = selector(&f).to_vec();
        let mut offset = [0u8; 32];
        offset[31] = 0x20;
        input.extend_from_slice(&offset);
        let mut len = [0u8; 32];
        len[31] = 2;
        input.extend_from_slice(&len);
        let mut payload = [0u8; 32];
        payload[..2].copy_from_slice(b"hi");
        input.extend_from_slice(&payload);
        let decoded = decode_call(&f, &input, DecodeMode::Strict).unwrap();
        assert_eq!(decoded.record.get("s"), Some(&Value::Text("hi".into())));
        // And the encoder produces exactly these bytes back.
        let encoded = encode_call(&f, &decoded.record).unwrap();
        assert_eq!(encoded, input);
    }

    #[test]
    fn decode_empty_dynamic_array_of_tuples() {
        let elem = AbiType::Tuple(vec![
            ("x".into(), AbiType::Uint(256)),
            ("y".into(), AbiType::Address),
        ]);
        let f = fd("f", vec![Param::new("xs", AbiType::Array(Box::new(elem), None))]);
        let args = Record::from_pairs([("xs", Value::List(vec![]))]).unwrap();
        let encoded = encode_call(&f, &args).unwrap();
        let decoded = decode_call(&f, &encoded, DecodeMode::Strict).unwrap();
        assert_eq!(decoded.record.get("xs"), Some(&Value::List(vec![])));
    }

    #[test]
    fn decode_erc20_transfer_log() {
        let ed = EventDescriptor::new(
            "Transfer",
            vec![
                Param::indexed("from", AbiType::Address),
                Param::indexed("to", AbiType::Address),
                Param::new("value", AbiType::Uint(256)),
            ],
        )
        .unwrap();
        let from = Address::from_hex("0x0101010101010101010101010101010101010101").unwrap();
        let to = Address::from_hex("0x0202020202020202020202020202020202020202").unwrap();
        let mut t1 = [0u8; 32];
        t1[12..].copy_from_slice(&from.0);
        let mut t2 = [0u8; 32];
        t2[12..].copy_from_slice(&to.0);
        let mut data = [0u8; 32];
        data[24..].copy_from_slice(&42u64.to_be_bytes());
        let (name, decoded) =
            decode_log(&ed, &[topic0(&ed), t1, t2], &data, DecodeMode::Strict).unwrap();
        assert_eq!(name, "Transfer");
        assert_eq!(decoded.record.get("from"), Some(&Value::Address(from)));
        assert_eq!(decoded.record.get("to"), Some(&Value::Address(to)));
        assert_eq!(decoded.record.get("value"), Some(&Value::uint_u64(42)));
    }

    #[test]
    fn decode_event_with_zero_inputs() {
        let ed = EventDescriptor::new("Ping", vec![]).unwrap();
        let (name, decoded) = decode_log(&ed, &[topic0(&ed)], &[], DecodeMode::Strict).unwrap();
        assert_eq!(name, "Ping");
        assert!(decoded.record.is_empty());
    }

    #[test]
    fn indexed_dynamic_input_yields_hash_placeholder() {
        let ed = EventDescriptor::new(
            "Named",
            vec![
                Param::indexed("name", AbiType::String),
                Param::new("v", AbiType::Uint(8)),
            ],
        )
        .unwrap();
        let args = Record::from_pairs([
            ("name", Value::Text("alice".into())),
            ("v", Value::uint_u64(7)),
        ])
        .unwrap();
        let (topics, data) = encode_log(&ed, &args).unwrap();
        let (_, decoded) = decode_log(&ed, &topics, &data, DecodeMode::Strict).unwrap();
        // Only the 32-byte hash of the string is recoverable.
        assert_eq!(
            decoded.record.get("name"),
            Some(&Value::Bytes(topics[1].to_vec()))
        );
        assert!(decoded
            .diags
            .iter()
            .any(|d| d.message.contains("non-recoverable") || d.message.contains("hash")));
        assert_eq!(decoded.record.get("v"), Some(&Value::uint_u64(7)));
    }

    #[test]
    fn topic_count_mismatch_is_an_error() {
        let ed = EventDescriptor::new(
            "Moved",
            vec![Param::indexed("who", AbiType::Address)],
        )
        .unwrap();
        let err = decode_log(&ed, &[topic0(&ed)], &[], DecodeMode::Lenient).unwrap_err();
        assert!(matches!(err, AbiError::TopicCountMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn encode_uint8_left_pads() {
        let f = fd("f", vec![Param::new("a", AbiType::Uint(8))]);
        let args = Record::from_pairs([("a", Value::uint_u64(250))]).unwrap();
        let encoded = encode_call(&f, &args).unwrap();
        assert_eq!(encoded.len(), 4 + 32);
        assert_eq!(&encoded[4..35], &[0u8; 31]);
        assert_eq!(encoded[35], 0xfa);
        // Out of range for the width.
        let too_big = Record::from_pairs([("a", Value::uint_u64(256))]).unwrap();
        assert!(matches!(
            encode_call(&f, &too_big),
            Err(AbiError::ValueMismatch { .. })
        ));
    }

    #[test]
    fn selector_mismatch_is_an_error() {
        let f = fd("f", vec![Param::new("a", AbiType::Uint(256))]);
        let g = fd("g", vec![Param::new("a", AbiType::Uint(256))]);
        let mut input = selector(&g).to_vec();
        input.extend_from_slice(&[0u8; 32]);
        assert!(matches!(
            decode_call(&f, &input, DecodeMode::Lenient),
            Err(AbiError::SelectorMismatch { .. })
        ));
        assert!(matches!(
            decode_call(&f, &[0x01, 0x02], DecodeMode::Lenient),
            Err(AbiError::Truncated(2))
        ));
    }

    #[test]
    fn lenient_mode_flags_noncanonical_padding_strict_rejects() {
        let f = fd("f", vec![Param::new("a", AbiType::Address)]);
        let mut input = selector(&f).to_vec();
        let mut word = [0u8; 32];
        word[0] = 0xff; // garbage in the padding
        word[31] = 0x01;
        input.extend_from_slice(&word);
        let lenient = decode_call(&f, &input, DecodeMode::Lenient).unwrap();
        assert_eq!(lenient.diags.len(), 1);
        assert!(lenient.diags[0].message.contains("padding"));
        assert!(matches!(
            decode_call(&f, &input, DecodeMode::Strict),
            Err(AbiError::NonCanonical(_))
        ));
    }

    #[test]
    fn lenient_mode_flags_trailing_bytes() {
        let f = fd("f", vec![Param::new("a", AbiType::Bool)]);
        let args = Record::from_pairs([("a", Value::Bool(true))]).unwrap();
        let mut encoded = encode_call(&f, &args).unwrap();
        encoded.extend_from_slice(&[0xde, 0xad]);
        let lenient = decode_call(&f, &encoded, DecodeMode::Lenient).unwrap();
        assert!(lenient.diags.iter().any(|d| d.message.contains("trailing")));
        assert!(decode_call(&f, &encoded, DecodeMode::Strict).is_err());
    }

    #[test]
    fn offsets_out_of_bounds_are_errors_not_panics() {
        let f = fd("f", vec![Param::new("s", AbiType::String)]);
        let mut input = selector(&f).to_vec();
        let mut offset = [0xffu8; 32];
        offset[0] = 0; // huge but representable offset
        input.extend_from_slice(&offset);
        let err = decode_call(&f, &input, DecodeMode::Lenient).unwrap_err();
        assert!(matches!(
            err,
            AbiError::OffsetOutOfBounds { .. } | AbiError::LengthOverflow(_)
        ));
    }

    #[test]
    fn nested_dynamic_tuple_round_trip() {
        let inner = AbiType::Tuple(vec![
            ("s".into(), AbiType::String),
            ("n".into(), AbiType::Uint(64)),
        ]);
        let f = fd(
            "f",
            vec![
                Param::new("pre", AbiType::Bool),
                Param::new("t", AbiType::Array(Box::new(inner), None)),
                Param::new("post", AbiType::FixedBytes(4)),
            ],
        );
        let mk = |s: &str, n: u64| {
            Value::Record(
                Record::from_pairs([("s", Value::Text(s.into())), ("n", Value::uint_u64(n))])
                    .unwrap(),
            )
        };
        let args = Record::from_pairs([
            ("pre", Value::Bool(false)),
            ("t", Value::List(vec![mk("one", 1), mk("two", 2)])),
            ("post", Value::Bytes(vec![1, 2, 3, 4])),
        ])
        .unwrap();
        let encoded = encode_call(&f, &args).unwrap();
        let decoded = decode_call(&f, &encoded, DecodeMode::Strict).unwrap();
        assert_eq!(decoded.record, args);
    }
}
