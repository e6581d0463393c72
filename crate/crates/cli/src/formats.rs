//! File formats: the canonical instance JSON interchange, raw-transaction
//! sidecars, standard Solidity JSON ABI files, lexicon/params config files,
//! per-stage artifacts (category manifests, candidates, examination reports,
//! pairs) and ground-truth CSV.
//!
//! Value encoding inside instance documents mirrors the nested record
//! structure: unsigned integers render as decimal strings (256-bit safety),
//! addresses and byte strings as 0x-hex. On read, `0x` + 40 hex digits is an
//! address, other even-length `0x` hex is bytes, all-digit strings are
//! integers, everything else is text. Plain JSON integers are accepted as
//! unsigned values for hand-written fixtures.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value as Json};

use xbridge_core::abi::{AbiType, EventDescriptor, FunctionDescriptor, Param, RawLog, RawTransaction};
use xbridge_core::categorize::Category;
use xbridge_core::examine::{CategoryExam, ExaminationReport, PhaseCounts, RejectReason};
use xbridge_core::infer::{InferenceOutcome, RoleLexicon};
use xbridge_core::model::{
    Address, CandidateQuintuple, CategoryKey, DecodedCall, FeeRate, FieldPath, LogEntry,
    PairingParams, Quintuple, Record, Role, Side, TransactionInstance, TxHash, Value, U256,
};
use xbridge_core::pair::{Metrics, Pair};

/// A malformed input file or row.
#[derive(Debug, thiserror::Error)]
#[error("{context}: {message}")]
pub struct FormatError {
    pub context: String,
    pub message: String,
}

impl FormatError {
    pub fn new(context: impl Into<String>, message: impl std::fmt::Display) -> Self {
        FormatError {
            context: context.into(),
            message: message.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, FormatError>;

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Uint(u) => Json::String(u.to_decimal()),
        Value::Address(a) => Json::String(a.to_hex()),
        Value::Bool(b) => Json::Bool(*b),
        Value::Bytes(b) => Json::String(format!("0x{}", hex::encode(b))),
        Value::Text(t) => Json::String(t.clone()),
        Value::List(items) => Json::Array(items.iter().map(value_to_json).collect()),
        Value::Record(rec) => Json::Object(
            rec.iter()
                .map(|(n, v)| (n.to_owned(), value_to_json(v)))
                .collect(),
        ),
    }
}

pub fn value_from_json(j: &Json) -> Result<Value> {
    let err = |m: &str| FormatError::new("value", m);
    match j {
        Json::Bool(b) => Ok(Value::Bool(*b)),
        Json::Number(n) => {
            let u = n
                .as_u64()
                .ok_or_else(|| err("numbers must be unsigned integers"))?;
            Ok(Value::uint_u64(u))
        }
        Json::String(s) => Ok(parse_scalar_string(s)),
        Json::Array(items) => Ok(Value::List(
            items.iter().map(value_from_json).collect::<Result<_>>()?,
        )),
        Json::Object(obj) => {
            let mut rec = Record::new();
            for (k, v) in obj {
                rec.insert(k.clone(), value_from_json(v)?)
                    .map_err(|e| err(&e.to_string()))?;
            }
            Ok(Value::Record(rec))
        }
        Json::Null => Err(err("null is not a value")),
    }
}

fn parse_scalar_string(s: &str) -> Value {
    if let Some(body) = s.strip_prefix("0x") {
        if body.len() == 40 {
            if let Ok(a) = Address::from_hex(s) {
                return Value::Address(a);
            }
        }
        if body.len() % 2 == 0 {
            if let Ok(bytes) = hex::decode(body) {
                return Value::Bytes(bytes);
            }
        }
    }
    if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
        if let Ok(u) = U256::from_decimal(s) {
            return Value::Uint(u);
        }
    }
    Value::Text(s.into())
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

fn side_str(side: Side) -> &'static str {
    side.as_str()
}

fn side_from(s: &str) -> Result<Side> {
    match s {
        "source" => Ok(Side::Source),
        "destination" => Ok(Side::Destination),
        other => Err(FormatError::new("side", format!("unknown side `{other}`"))),
    }
}

pub fn instance_to_json(tx: &TransactionInstance) -> Json {
    json!({
        "chain": tx.chain,
        "tx_hash": tx.tx_hash.to_hex(),
        "block_number": tx.block_number,
        "timestamp": tx.timestamp,
        "sender": tx.sender.to_hex(),
        "contract": tx.contract.to_hex(),
        "native_value": tx.native_value.to_decimal(),
        "side": side_str(tx.side),
        "call": {
            "function": tx.call.function,
            "args": value_to_json(&Value::Record(tx.call.args.clone())),
        },
        "logs": tx.logs.iter().map(|log| json!({
            "event": log.event,
            "emitter": log.emitter.to_hex(),
            "record": value_to_json(&Value::Record(log.record.clone())),
        })).collect::<Vec<_>>(),
    })
}

fn get<'a>(obj: &'a Map<String, Json>, key: &str, ctx: &str) -> Result<&'a Json> {
    obj.get(key)
        .ok_or_else(|| FormatError::new(ctx, format!("missing field `{key}`")))
}

fn as_u64(j: &Json, ctx: &str) -> Result<u64> {
    j.as_u64()
        .ok_or_else(|| FormatError::new(ctx, "expected an unsigned integer"))
}

fn as_str<'a>(j: &'a Json, ctx: &str) -> Result<&'a str> {
    j.as_str()
        .ok_or_else(|| FormatError::new(ctx, "expected a string"))
}

fn as_record(j: &Json, ctx: &str) -> Result<Record> {
    match value_from_json(j)? {
        Value::Record(rec) => Ok(rec),
        _ => Err(FormatError::new(ctx, "expected an object")),
    }
}

fn address_from(j: &Json, ctx: &str) -> Result<Address> {
    Address::from_hex(as_str(j, ctx)?).map_err(|e| FormatError::new(ctx, e))
}

fn hash_from(j: &Json, ctx: &str) -> Result<TxHash> {
    TxHash::from_hex(as_str(j, ctx)?).map_err(|e| FormatError::new(ctx, e))
}

fn uint_from(j: &Json, ctx: &str) -> Result<U256> {
    match j {
        Json::Number(_) => Ok(U256::from_u64(as_u64(j, ctx)?)),
        Json::String(s) => U256::from_decimal(s).map_err(|e| FormatError::new(ctx, e)),
        _ => Err(FormatError::new(ctx, "expected an integer or decimal string")),
    }
}

pub fn instance_from_json(j: &Json) -> Result<TransactionInstance> {
    let ctx = "instance";
    let obj = j
        .as_object()
        .ok_or_else(|| FormatError::new(ctx, "expected an object"))?;
    let call_obj = get(obj, "call", ctx)?
        .as_object()
        .ok_or_else(|| FormatError::new(ctx, "call must be an object"))?;
    let call = DecodedCall {
        function: as_str(get(call_obj, "function", "call")?, "call.function")?.into(),
        args: as_record(get(call_obj, "args", "call")?, "call.args")?,
    };
    let mut logs = Vec::new();
    for (i, log_j) in get(obj, "logs", ctx)?
        .as_array()
        .ok_or_else(|| FormatError::new(ctx, "logs must be an array"))?
        .iter()
        .enumerate()
    {
        let lctx = format!("logs[{i}]");
        let log_obj = log_j
            .as_object()
            .ok_or_else(|| FormatError::new(&lctx, "expected an object"))?;
        logs.push(LogEntry {
            event: as_str(get(log_obj, "event", &lctx)?, &lctx)?.into(),
            emitter: address_from(get(log_obj, "emitter", &lctx)?, &lctx)?,
            record: as_record(get(log_obj, "record", &lctx)?, &lctx)?,
        });
    }
    TransactionInstance::new(
        as_u64(get(obj, "chain", ctx)?, "chain")?,
        hash_from(get(obj, "tx_hash", ctx)?, "tx_hash")?,
        as_u64(get(obj, "block_number", ctx)?, "block_number")?,
        as_u64(get(obj, "timestamp", ctx)?, "timestamp")?,
        address_from(get(obj, "sender", ctx)?, "sender")?,
        address_from(get(obj, "contract", ctx)?, "contract")?,
        uint_from(get(obj, "native_value", ctx)?, "native_value")?,
        call,
        logs,
        side_from(as_str(get(obj, "side", ctx)?, "side")?)?,
    )
    .map_err(|e| FormatError::new(ctx, e))
}

// ---------------------------------------------------------------------------
// Raw transactions
// ---------------------------------------------------------------------------

fn bytes_to_hex(b: &[u8]) -> String {
    format!("0x{}", hex::encode(b))
}

fn bytes_from_hex(s: &str, ctx: &str) -> Result<Vec<u8>> {
    let body = s
        .strip_prefix("0x")
        .ok_or_else(|| FormatError::new(ctx, "hex must start with 0x"))?;
    hex::decode(body).map_err(|e| FormatError::new(ctx, e))
}

pub fn raw_to_json(raw: &RawTransaction) -> Json {
    json!({
        "chain": raw.chain,
        "tx_hash": raw.tx_hash.to_hex(),
        "block_number": raw.block_number,
        "timestamp": raw.timestamp,
        "sender": raw.sender.to_hex(),
        "contract": raw.contract.to_hex(),
        "native_value": raw.native_value.to_decimal(),
        "side": side_str(raw.side),
        "input": bytes_to_hex(&raw.input),
        "logs": raw.logs.iter().map(|log| json!({
            "emitter": log.emitter.to_hex(),
            "topics": log.topics.iter().map(|t| bytes_to_hex(t)).collect::<Vec<_>>(),
            "data": bytes_to_hex(&log.data),
        })).collect::<Vec<_>>(),
    })
}

pub fn raw_from_json(j: &Json) -> Result<RawTransaction> {
    let ctx = "raw transaction";
    let obj = j
        .as_object()
        .ok_or_else(|| FormatError::new(ctx, "expected an object"))?;
    let mut logs = Vec::new();
    for (i, log_j) in get(obj, "logs", ctx)?
        .as_array()
        .ok_or_else(|| FormatError::new(ctx, "logs must be an array"))?
        .iter()
        .enumerate()
    {
        let lctx = format!("logs[{i}]");
        let log_obj = log_j
            .as_object()
            .ok_or_else(|| FormatError::new(&lctx, "expected an object"))?;
        let mut topics = Vec::new();
        for t in get(log_obj, "topics", &lctx)?
            .as_array()
            .ok_or_else(|| FormatError::new(&lctx, "topics must be an array"))?
        {
            let bytes = bytes_from_hex(as_str(t, &lctx)?, &lctx)?;
            let arr: [u8; 32] = bytes
                .try_into()
                .map_err(|_| FormatError::new(&lctx, "topics must be 32 bytes"))?;
            topics.push(arr);
        }
        logs.push(RawLog {
            emitter: address_from(get(log_obj, "emitter", &lctx)?, &lctx)?,
            topics,
            data: bytes_from_hex(as_str(get(log_obj, "data", &lctx)?, &lctx)?, &lctx)?,
        });
    }
    Ok(RawTransaction {
        chain: as_u64(get(obj, "chain", ctx)?, "chain")?,
        tx_hash: hash_from(get(obj, "tx_hash", ctx)?, "tx_hash")?,
        block_number: as_u64(get(obj, "block_number", ctx)?, "block_number")?,
        timestamp: as_u64(get(obj, "timestamp", ctx)?, "timestamp")?,
        sender: address_from(get(obj, "sender", ctx)?, "sender")?,
        contract: address_from(get(obj, "contract", ctx)?, "contract")?,
        native_value: uint_from(get(obj, "native_value", ctx)?, "native_value")?,
        input: bytes_from_hex(as_str(get(obj, "input", ctx)?, "input")?, "input")?,
        logs,
        side: side_from(as_str(get(obj, "side", ctx)?, "side")?)?,
    })
}

// ---------------------------------------------------------------------------
// Solidity JSON ABI
// ---------------------------------------------------------------------------

fn type_to_abi_string(ty: &AbiType) -> (String, Option<Vec<Json>>) {
    match ty {
        AbiType::Tuple(comps) => {
            let components = comps
                .iter()
                .map(|(name, t)| {
                    let (ts, inner) = type_to_abi_string(t);
                    let mut obj = json!({"name": name, "type": ts});
                    if let Some(inner) = inner {
                        obj["components"] = Json::Array(inner);
                    }
                    obj
                })
                .collect();
            ("tuple".into(), Some(components))
        }
        AbiType::Array(elem, len) => {
            let (base, comps) = type_to_abi_string(elem);
            let suffix = match len {
                None => "[]".to_string(),
                Some(n) => format!("[{n}]"),
            };
            (format!("{base}{suffix}"), comps)
        }
        other => (other.canonical(), None),
    }
}

fn param_to_json(p: &Param, with_indexed: bool) -> Json {
    let (ts, comps) = type_to_abi_string(&p.ty);
    let mut obj = json!({"name": p.name, "type": ts});
    if with_indexed {
        obj["indexed"] = Json::Bool(p.indexed);
    }
    if let Some(comps) = comps {
        obj["components"] = Json::Array(comps);
    }
    obj
}

pub fn abi_to_json(items: &[xbridge_core::sim::AbiItem]) -> Json {
    use xbridge_core::sim::AbiItem;
    Json::Array(
        items
            .iter()
            .map(|item| match item {
                AbiItem::Function(fd) => json!({
                    "type": "function",
                    "name": fd.name,
                    "stateMutability": "nonpayable",
                    "inputs": fd.inputs.iter().map(|p| param_to_json(p, false)).collect::<Vec<_>>(),
                    "outputs": [],
                }),
                AbiItem::Event(ed) => json!({
                    "type": "event",
                    "name": ed.name,
                    "anonymous": false,
                    "inputs": ed.inputs.iter().map(|p| param_to_json(p, true)).collect::<Vec<_>>(),
                }),
            })
            .collect(),
    )
}

/// Parses one type string (with optional components for tuples), peeling
/// array suffixes from the right.
fn parse_abi_type(type_str: &str, components: Option<&Json>, ctx: &str) -> Result<AbiType> {
    if let Some(base) = type_str.strip_suffix("[]") {
        return Ok(AbiType::Array(
            Box::new(parse_abi_type(base, components, ctx)?),
            None,
        ));
    }
    if type_str.ends_with(']') {
        let open = type_str
            .rfind('[')
            .ok_or_else(|| FormatError::new(ctx, format!("malformed type `{type_str}`")))?;
        let n: usize = type_str[open + 1..type_str.len() - 1]
            .parse()
            .map_err(|_| FormatError::new(ctx, format!("bad array length in `{type_str}`")))?;
        return Ok(AbiType::Array(
            Box::new(parse_abi_type(&type_str[..open], components, ctx)?),
            Some(n),
        ));
    }
    let ty = match type_str {
        "address" => AbiType::Address,
        "bool" => AbiType::Bool,
        "bytes" => AbiType::Bytes,
        "string" => AbiType::String,
        "uint" => AbiType::Uint(256),
        "int" => AbiType::Int(256),
        "tuple" => {
            let comps = components
                .and_then(|c| c.as_array())
                .ok_or_else(|| FormatError::new(ctx, "tuple without components"))?;
            let mut fields = Vec::new();
            for c in comps {
                let cobj = c
                    .as_object()
                    .ok_or_else(|| FormatError::new(ctx, "component must be an object"))?;
                let name = as_str(get(cobj, "name", ctx)?, ctx)?;
                let ts = as_str(get(cobj, "type", ctx)?, ctx)?;
                fields.push((
                    name.to_string(),
                    parse_abi_type(ts, cobj.get("components"), ctx)?,
                ));
            }
            AbiType::Tuple(fields)
        }
        other => {
            if let Some(n) = other.strip_prefix("uint") {
                AbiType::Uint(n.parse().map_err(|_| {
                    FormatError::new(ctx, format!("bad uint width `{other}`"))
                })?)
            } else if let Some(n) = other.strip_prefix("int") {
                AbiType::Int(n.parse().map_err(|_| {
                    FormatError::new(ctx, format!("bad int width `{other}`"))
                })?)
            } else if let Some(n) = other.strip_prefix("bytes") {
                AbiType::FixedBytes(n.parse().map_err(|_| {
                    FormatError::new(ctx, format!("bad bytes width `{other}`"))
                })?)
            } else {
                return Err(FormatError::new(
                    ctx,
                    format!("unsupported type `{other}`"),
                ));
            }
        }
    };
    ty.validate()
        .map_err(|e| FormatError::new(ctx, e))?;
    Ok(ty)
}

/// Loads one standard Solidity JSON ABI array into descriptors. Entries other
/// than functions and events (constructors, errors) are skipped.
pub fn abi_from_json(
    j: &Json,
) -> Result<(Vec<FunctionDescriptor>, Vec<EventDescriptor>)> {
    let ctx = "abi";
    let arr = j
        .as_array()
        .ok_or_else(|| FormatError::new(ctx, "expected a JSON array"))?;
    let mut functions = Vec::new();
    let mut events = Vec::new();
    for entry in arr {
        let obj = entry
            .as_object()
            .ok_or_else(|| FormatError::new(ctx, "entry must be an object"))?;
        let kind = as_str(get(obj, "type", ctx)?, ctx)?;
        if kind != "function" && kind != "event" {
            continue;
        }
        let name = as_str(get(obj, "name", ctx)?, ctx)?;
        let mut params = Vec::new();
        for input in get(obj, "inputs", ctx)?
            .as_array()
            .ok_or_else(|| FormatError::new(ctx, "inputs must be an array"))?
        {
            let iobj = input
                .as_object()
                .ok_or_else(|| FormatError::new(ctx, "input must be an object"))?;
            let pname = as_str(get(iobj, "name", ctx)?, ctx)?;
            let ts = as_str(get(iobj, "type", ctx)?, ctx)?;
            let ty = parse_abi_type(ts, iobj.get("components"), name)?;
            let indexed = iobj.get("indexed").and_then(Json::as_bool).unwrap_or(false);
            params.push(Param {
                name: pname.into(),
                ty,
                indexed,
            });
        }
        if kind == "function" {
            functions.push(
                FunctionDescriptor::new(name, params).map_err(|e| FormatError::new(ctx, e))?,
            );
        } else {
            events
                .push(EventDescriptor::new(name, params).map_err(|e| FormatError::new(ctx, e))?);
        }
    }
    Ok((functions, events))
}

// ---------------------------------------------------------------------------
// Lexicon and params
// ---------------------------------------------------------------------------

pub fn lexicon_from_json(j: &Json) -> Result<RoleLexicon> {
    let ctx = "lexicon";
    let obj = j
        .as_object()
        .ok_or_else(|| FormatError::new(ctx, "expected an object"))?;
    let mut lex = RoleLexicon::new();
    for (role_name, terms) in obj {
        let role = Role::from_str(role_name)
            .ok_or_else(|| FormatError::new(ctx, format!("unknown role `{role_name}`")))?;
        for t in terms
            .as_array()
            .ok_or_else(|| FormatError::new(ctx, "terms must be an array"))?
        {
            let pair = t
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| FormatError::new(ctx, "each term must be [term, weight]"))?;
            let term = as_str(&pair[0], ctx)?;
            let weight = pair[1]
                .as_f64()
                .ok_or_else(|| FormatError::new(ctx, "weight must be a number"))?;
            lex.add(role, term, weight)
                .map_err(|e| FormatError::new(ctx, e))?;
        }
    }
    Ok(lex)
}

pub fn lexicon_to_json(lex: &RoleLexicon) -> Json {
    let mut obj = Map::new();
    for role in Role::ALL {
        obj.insert(
            role.as_str().into(),
            Json::Array(
                lex.terms(role)
                    .iter()
                    .map(|(t, w)| json!([t, w]))
                    .collect(),
            ),
        );
    }
    Json::Object(obj)
}

pub fn params_to_json(p: &PairingParams) -> Json {
    json!({
        "timewindow": p.timewindow,
        "fee_rate": p.fee_rate.as_fraction(),
        "chain_alias": p.chain_alias.iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect::<Map<String, Json>>(),
        "token_alias": p.token_alias.iter().map(|((chain, addr), symbol)| json!({
            "chain": chain,
            "address": addr.to_hex(),
            "symbol": symbol,
        })).collect::<Vec<_>>(),
    })
}

pub fn params_from_json(j: &Json) -> Result<PairingParams> {
    let ctx = "params";
    let obj = j
        .as_object()
        .ok_or_else(|| FormatError::new(ctx, "expected an object"))?;
    let mut params = PairingParams::default();
    if let Some(tw) = obj.get("timewindow") {
        params.timewindow = as_u64(tw, "timewindow")?;
    }
    if let Some(fr) = obj.get("fee_rate") {
        let f = fr
            .as_f64()
            .ok_or_else(|| FormatError::new(ctx, "fee_rate must be a number"))?;
        params.fee_rate = FeeRate::from_fraction(f).map_err(|e| FormatError::new(ctx, e))?;
    }
    if let Some(aliases) = obj.get("chain_alias") {
        let amap = aliases
            .as_object()
            .ok_or_else(|| FormatError::new(ctx, "chain_alias must be an object"))?;
        for (k, v) in amap {
            let key: u64 = k
                .parse()
                .map_err(|_| FormatError::new(ctx, format!("bad chain id `{k}`")))?;
            if params.chain_alias.insert(key, as_u64(v, ctx)?).is_some() {
                return Err(FormatError::new(ctx, format!("duplicate chain alias `{k}`")));
            }
        }
    }
    if let Some(aliases) = obj.get("token_alias") {
        for entry in aliases
            .as_array()
            .ok_or_else(|| FormatError::new(ctx, "token_alias must be an array"))?
        {
            let eobj = entry
                .as_object()
                .ok_or_else(|| FormatError::new(ctx, "token_alias entry must be an object"))?;
            let chain = as_u64(get(eobj, "chain", ctx)?, ctx)?;
            let addr = address_from(get(eobj, "address", ctx)?, ctx)?;
            let symbol = as_str(get(eobj, "symbol", ctx)?, ctx)?;
            if params
                .token_alias
                .insert((chain, addr), symbol.into())
                .is_some()
            {
                return Err(FormatError::new(
                    ctx,
                    format!("duplicate token alias for {}", addr.to_hex()),
                ));
            }
        }
    }
    params.validate().map_err(|e| FormatError::new(ctx, e))?;
    Ok(params)
}

// ---------------------------------------------------------------------------
// Stage artifacts
// ---------------------------------------------------------------------------

pub fn category_to_json(cat: &Category) -> Json {
    json!({
        "key": cat.key.to_hex(),
        "size": cat.members.len(),
        "fields": cat.fields,
        "members": cat.members,
    })
}

pub fn category_from_json(j: &Json) -> Result<Category> {
    let ctx = "category";
    let obj = j
        .as_object()
        .ok_or_else(|| FormatError::new(ctx, "expected an object"))?;
    let key = CategoryKey::from_hex(as_str(get(obj, "key", ctx)?, ctx)?)
        .ok_or_else(|| FormatError::new(ctx, "bad category key"))?;
    let fields = get(obj, "fields", ctx)?
        .as_array()
        .ok_or_else(|| FormatError::new(ctx, "fields must be an array"))?
        .iter()
        .map(|f| as_str(f, ctx).map(String::from))
        .collect::<Result<Vec<_>>>()?;
    let members = get(obj, "members", ctx)?
        .as_array()
        .ok_or_else(|| FormatError::new(ctx, "members must be an array"))?
        .iter()
        .map(|m| as_u64(m, ctx).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    Ok(Category {
        key,
        fields,
        members,
    })
}

pub fn candidates_to_json(outcome: &InferenceOutcome) -> Json {
    json!({
        "categories": outcome.candidates.iter().map(|(key, cq)| {
            let mut roles = Map::new();
            for role in Role::ALL {
                roles.insert(role.as_str().into(), Json::Array(
                    cq.get(role).iter().map(|c| json!({
                        "field": c.path.rendered(),
                        "confidence": c.confidence,
                    })).collect(),
                ));
            }
            json!({"key": key.to_hex(), "roles": roles})
        }).collect::<Vec<_>>(),
        "uninferable": outcome.uninferable.iter().map(|(key, why)| json!({
            "key": key.to_hex(),
            "reason": why.to_string(),
        })).collect::<Vec<_>>(),
        "diagnostics": outcome.diagnostics.iter().map(|d| json!({
            "context": d.context,
            "message": d.message,
        })).collect::<Vec<_>>(),
    })
}

pub fn candidates_from_json(j: &Json) -> Result<BTreeMap<CategoryKey, CandidateQuintuple>> {
    let ctx = "candidates";
    let obj = j
        .as_object()
        .ok_or_else(|| FormatError::new(ctx, "expected an object"))?;
    let mut out = BTreeMap::new();
    for entry in get(obj, "categories", ctx)?
        .as_array()
        .ok_or_else(|| FormatError::new(ctx, "categories must be an array"))?
    {
        let eobj = entry
            .as_object()
            .ok_or_else(|| FormatError::new(ctx, "entry must be an object"))?;
        let key = CategoryKey::from_hex(as_str(get(eobj, "key", ctx)?, ctx)?)
            .ok_or_else(|| FormatError::new(ctx, "bad category key"))?;
        let mut cq = CandidateQuintuple::new();
        let roles = get(eobj, "roles", ctx)?
            .as_object()
            .ok_or_else(|| FormatError::new(ctx, "roles must be an object"))?;
        for (role_name, list) in roles {
            let role = Role::from_str(role_name)
                .ok_or_else(|| FormatError::new(ctx, format!("unknown role `{role_name}`")))?;
            let mut cands = Vec::new();
            for c in list
                .as_array()
                .ok_or_else(|| FormatError::new(ctx, "role list must be an array"))?
            {
                let cobj = c
                    .as_object()
                    .ok_or_else(|| FormatError::new(ctx, "candidate must be an object"))?;
                let field = as_str(get(cobj, "field", ctx)?, ctx)?;
                let confidence = cobj
                    .get("confidence")
                    .and_then(Json::as_f64)
                    .unwrap_or(0.0);
                cands.push(xbridge_core::model::Candidate {
                    path: FieldPath::parse(field).map_err(|e| FormatError::new(ctx, e))?,
                    confidence,
                });
            }
            cq.set(role, cands);
        }
        out.insert(key, cq);
    }
    Ok(out)
}

fn quintuple_to_json(qt: &Quintuple) -> Json {
    let mut obj = Map::new();
    for (role, path) in qt.iter() {
        obj.insert(role.as_str().into(), Json::String(path.rendered().into()));
    }
    Json::Object(obj)
}

fn quintuple_from_json(j: &Json, ctx: &str) -> Result<Quintuple> {
    let obj = j
        .as_object()
        .ok_or_else(|| FormatError::new(ctx, "expected an object"))?;
    let mut map = BTreeMap::new();
    for (role_name, path) in obj {
        let role = Role::from_str(role_name)
            .ok_or_else(|| FormatError::new(ctx, format!("unknown role `{role_name}`")))?;
        map.insert(
            role,
            FieldPath::parse(as_str(path, ctx)?).map_err(|e| FormatError::new(ctx, e))?,
        );
    }
    Quintuple::from_map(map).ok_or_else(|| FormatError::new(ctx, "all five roles required"))
}

fn phase_counts_to_json(c: &PhaseCounts) -> Json {
    let role_map = |m: &BTreeMap<Role, usize>| {
        m.iter()
            .map(|(r, n)| (r.as_str().to_string(), json!(n)))
            .collect::<Map<String, Json>>()
    };
    json!({
        "phase1_in": c.phase1_in,
        "phase1_out": c.phase1_out,
        "phase2_in": c.phase2_in,
        "phase2_out": c.phase2_out,
        "phase3_in": role_map(&c.phase3_in),
        "phase3_out": role_map(&c.phase3_out),
    })
}

pub fn examination_to_json(report: &ExaminationReport) -> Json {
    json!({
        "side": side_str(report.side),
        "survivors": report.survivor_count(),
        "categories": report.categories.iter().map(|exam: &CategoryExam| {
            json!({
                "key": exam.key.to_hex(),
                "members": exam.members,
                "quintuple": exam.result.as_ref().ok().map(quintuple_to_json),
                "rejection": exam.result.as_ref().err().map(|r: &RejectReason| r.to_string()),
                "counts": phase_counts_to_json(&exam.counts),
                "notes": exam.notes.iter().map(|d| json!({
                    "context": d.context,
                    "message": d.message,
                })).collect::<Vec<_>>(),
            })
        }).collect::<Vec<_>>(),
    })
}

/// Reads back only the validated quintuples from an examination report.
pub fn quintuples_from_examination(j: &Json) -> Result<BTreeMap<CategoryKey, Quintuple>> {
    let ctx = "examination";
    let obj = j
        .as_object()
        .ok_or_else(|| FormatError::new(ctx, "expected an object"))?;
    let mut out = BTreeMap::new();
    for entry in get(obj, "categories", ctx)?
        .as_array()
        .ok_or_else(|| FormatError::new(ctx, "categories must be an array"))?
    {
        let eobj = entry
            .as_object()
            .ok_or_else(|| FormatError::new(ctx, "entry must be an object"))?;
        let key = CategoryKey::from_hex(as_str(get(eobj, "key", ctx)?, ctx)?)
            .ok_or_else(|| FormatError::new(ctx, "bad category key"))?;
        if let Some(qt) = eobj.get("quintuple").filter(|q| !q.is_null()) {
            out.insert(key, quintuple_from_json(qt, ctx)?);
        }
    }
    Ok(out)
}

pub fn truth_quintuples_to_json(
    truth: &BTreeMap<(Side, CategoryKey), Quintuple>,
) -> Json {
    Json::Array(
        truth
            .iter()
            .map(|((side, key), qt)| {
                json!({
                    "side": side_str(*side),
                    "category": key.to_hex(),
                    "roles": quintuple_to_json(qt),
                })
            })
            .collect(),
    )
}

pub fn pair_to_json(pair: &Pair) -> Json {
    json!({
        "src_chain": pair.src.own_chain,
        "src_hash": pair.src.tx_hash.to_hex(),
        "dst_chain": pair.dst.own_chain,
        "dst_hash": pair.dst.tx_hash.to_hex(),
        "values": {
            "D": pair.src.destination,
            "C": pair.src.counterpart_chain,
            "T": pair.src.token,
            "A_s": pair.src.amount.to_decimal(),
            "A_d": pair.dst.amount.to_decimal(),
            "Ts_s": pair.src.timestamp,
            "Ts_d": pair.dst.timestamp,
        },
        "rules": pair.trace.checks.iter().map(|c| json!({
            "rule": c.rule,
            "passed": c.passed,
            "detail": c.detail,
        })).collect::<Vec<_>>(),
    })
}

pub fn metrics_to_json(m: &Metrics) -> Json {
    json!({
        "precision": m.precision,
        "recall": m.recall,
        "f1": m.f1,
        "true_positives": m.true_positives,
        "false_positives": m.false_positives,
        "false_negatives": m.false_negatives,
    })
}

// ---------------------------------------------------------------------------
// Ground-truth CSV
// ---------------------------------------------------------------------------

pub const TRUTH_CSV_HEADER: &str = "src_hash,dst_hash";

pub fn truth_pairs_to_csv(pairs: &[(TxHash, TxHash)]) -> String {
    let mut out = String::from(TRUTH_CSV_HEADER);
    out.push('\n');
    for (s, d) in pairs {
        out.push_str(&s.to_hex());
        out.push(',');
        out.push_str(&d.to_hex());
        out.push('\n');
    }
    out
}

pub fn truth_pairs_from_csv(text: &str) -> Result<BTreeSet<(TxHash, TxHash)>> {
    let mut out = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == TRUTH_CSV_HEADER) {
            continue;
        }
        let ctx = format!("truth csv line {}", i + 1);
        let (s, d) = line
            .split_once(',')
            .ok_or_else(|| FormatError::new(&ctx, "expected two comma-separated hashes"))?;
        out.insert((
            TxHash::from_hex(s.trim()).map_err(|e| FormatError::new(&ctx, e))?,
            TxHash::from_hex(d.trim()).map_err(|e| FormatError::new(&ctx, e))?,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use xbridge_core::sim::{generate, ScenarioConfig};

    #[test]
    fn instance_json_round_trip_over_generated_data() {
        let scenario = generate(&ScenarioConfig::decoy(21, 20)).unwrap();
        for tx in scenario.truth_src.iter().chain(&scenario.truth_dst) {
            let j = instance_to_json(tx);
            let back = instance_from_json(&j).unwrap();
            assert_eq!(&back, tx);
            // Serialization is stable.
            assert_eq!(instance_to_json(&back), j);
        }
    }

    #[test]
    fn raw_json_round_trip_over_generated_data() {
        let scenario = generate(&ScenarioConfig::clean(22, 10)).unwrap();
        for raw in scenario.raw_src.iter().chain(&scenario.raw_dst) {
            let j = raw_to_json(raw);
            assert_eq!(&raw_from_json(&j).unwrap(), raw);
        }
    }

    #[test]
    fn abi_json_round_trip_over_generated_descriptors() {
        let scenario = generate(&ScenarioConfig::decoy(23, 5)).unwrap();
        for items in [
            &scenario.abis.src_router,
            &scenario.abis.dst_router,
            &scenario.abis.erc20,
        ] {
            let j = abi_to_json(items);
            let (functions, events) = abi_from_json(&j).unwrap();
            let n_fns = items
                .iter()
                .filter(|i| matches!(i, xbridge_core::sim::AbiItem::Function(_)))
                .count();
            assert_eq!(functions.len(), n_fns);
            assert_eq!(events.len(), items.len() - n_fns);
            for (item, fd) in items
                .iter()
                .filter_map(|i| match i {
                    xbridge_core::sim::AbiItem::Function(fd) => Some(fd),
                    _ => None,
                })
                .zip(&functions)
            {
                assert_eq!(item, fd);
            }
        }
    }

    #[test]
    fn abi_parses_standard_erc20_fragment() {
        let j: Json = serde_json::from_str(
            r#"[{"type":"event","name":"Transfer","anonymous":false,"inputs":[
                {"name":"from","type":"address","indexed":true},
                {"name":"to","type":"address","indexed":true},
                {"name":"value","type":"uint256","indexed":false}]},
               {"type":"function","name":"transfer","stateMutability":"nonpayable",
                "inputs":[{"name":"to","type":"address"},{"name":"value","type":"uint256"}],
                "outputs":[{"name":"","type":"bool"}]}]"#,
        )
        .unwrap();
        let (functions, events) = abi_from_json(&j).unwrap();
        assert_eq!(functions.len(), 1);
        assert_eq!(events.len(), 1);
        assert_eq!(
            hex::encode(xbridge_core::abi::topic0(&events[0])),
            "ddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef"
        );
    }

    #[test]
    fn abi_rejects_fixed_point_types() {
        let j: Json = serde_json::from_str(
            r#"[{"type":"function","name":"f","inputs":[{"name":"x","type":"fixed128x18"}]}]"#,
        )
        .unwrap();
        assert!(abi_from_json(&j).is_err());
    }

    #[test]
    fn value_parse_rules() {
        assert_eq!(
            parse_scalar_string("123"),
            Value::Uint(U256::from_u64(123))
        );
        assert!(matches!(
            parse_scalar_string("0xab5801a7d398351b8be11c439e05c5b3259aec9b"),
            Value::Address(_)
        ));
        assert_eq!(
            parse_scalar_string("0x0102"),
            Value::Bytes(vec![1, 2])
        );
        assert_eq!(parse_scalar_string("hello"), Value::Text("hello".into()));
        // Odd-length hex falls back to text.
        assert_eq!(parse_scalar_string("0x123"), Value::Text("0x123".into()));
    }

    #[test]
    fn truth_csv_round_trip() {
        let pairs = vec![
            (TxHash([1u8; 32]), TxHash([2u8; 32])),
            (TxHash([3u8; 32]), TxHash([4u8; 32])),
        ];
        let csv = truth_pairs_to_csv(&pairs);
        assert!(csv.starts_with(TRUTH_CSV_HEADER));
        let back = truth_pairs_from_csv(&csv).unwrap();
        assert_eq!(back, pairs.into_iter().collect::<BTreeSet<_>>());
        assert!(truth_pairs_from_csv("not,a,hash\n").is_err());
    }

    #[test]
    fn params_round_trip_and_duplicate_aliases_rejected() {
        let scenario = generate(&ScenarioConfig::clean(24, 1)).unwrap();
        let j = params_to_json(&scenario.params);
        let back = params_from_json(&j).unwrap();
        assert_eq!(back, scenario.params);

        let dup = json!({
            "token_alias": [
                {"chain": 1, "address": "0x0000000000000000000000000000000000000001", "symbol": "A"},
                {"chain": 1, "address": "0x0000000000000000000000000000000000000001", "symbol": "B"},
            ]
        });
        assert!(params_from_json(&dup).is_err());
    }

    #[test]
    fn lexicon_round_trip_matches_starter() {
        let starter = RoleLexicon::starter();
        let j = lexicon_to_json(&starter);
        let back = lexicon_from_json(&j).unwrap();
        assert_eq!(back, starter);
    }

    #[test]
    fn examination_report_quintuples_round_trip() {
        use xbridge_core::categorize::categorize;
        use xbridge_core::examine::{examine, ExamineOptions, SideData};
        use xbridge_core::infer::{infer_categories, InferOptions, LexicalProvider};

        let scenario = generate(&ScenarioConfig::clean(25, 40)).unwrap();
        let provider = LexicalProvider::new(RoleLexicon::starter());
        let cats_src = categorize(&scenario.truth_src);
        let cats_dst = categorize(&scenario.truth_dst);
        let opts = InferOptions::default();
        let cand_src =
            infer_categories(&scenario.truth_src, &cats_src, &provider, &provider, &opts);
        let cand_dst =
            infer_categories(&scenario.truth_dst, &cats_dst, &provider, &provider, &opts);
        let report = examine(
            &SideData {
                txs: &scenario.truth_src,
                categories: &cats_src,
                candidates: &cand_src.candidates,
            },
            &SideData {
                txs: &scenario.truth_dst,
                categories: &cats_dst,
                candidates: &cand_dst.candidates,
            },
            &scenario.params,
            &ExamineOptions::default(),
        );
        let j = examination_to_json(&report);
        let back = quintuples_from_examination(&j).unwrap();
        assert_eq!(back, report.validated());
    }
}
