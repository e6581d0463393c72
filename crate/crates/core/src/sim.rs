//! Deterministic two-chain synthetic bridge: generates ABI descriptors,
//! byte-encoded transactions and logs, ground-truth pairs and quintuples.
//!
//! The bridge model: a user calls the source router, which records the
//! transfer intent (destination address, counterpart chain, token, amount)
//! in its call/log fields and moves the asset (an ERC-20 transfer from the
//! user, or attached native value). A relayer later settles on the
//! destination chain, paying the recipient out of its own balance, with a
//! fee withheld and a delay. Decoy fields draw terms from the same role
//! lexicon as the truths, so name similarity alone is provably insufficient
//! and the examiner's contribution is measurable.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::abi::{encode_call, encode_log, AbiType, EventDescriptor, FunctionDescriptor, Param};
use crate::abi::{AbiRegistry, RawLog, RawTransaction};
use crate::categorize::fields_of;
use crate::model::{
    Address, CategoryKey, FeeRate, FieldPath, PairingParams, Quintuple, Record, Side,
    TransactionInstance, TxHash, Value, U256,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("scenario config contradiction: {0}")]
    Config(String),
}

/// One chain as the scenario sees it: canonical id plus the bridge-internal
/// id written into chain fields (exercises alias resolution downstream).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSpec {
    pub canonical_id: u64,
    pub internal_id: u64,
}

/// Synthetic scenario shape. All rates are fractions in [0,1]; decoy rates
/// apply as deterministic quotas so identical seeds reproduce identical
/// datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub n_transfers: usize,
    pub src_chain: ChainSpec,
    pub dst_chain: ChainSpec,
    /// Categories per side.
    pub n_categories: usize,
    /// Inclusive range of leaf-field counts per category.
    pub fields_per_category: (usize, usize),
    /// Inclusive range of event logs per category.
    pub logs_per_category: (usize, usize),
    /// Fraction of categories that receive misleading same-lexicon fields.
    pub decoy_field_rate: f64,
    /// Unpaired noise transactions per side, as a fraction of transfers.
    pub decoy_tx_rate: f64,
    /// Fees drawn uniformly from [0, max_fee_ppm] parts-per-million of the
    /// source amount.
    pub max_fee_ppm: u32,
    /// Settlement delay drawn uniformly from this inclusive range (seconds).
    pub delay_range: (u64, u64),
    pub n_tokens: usize,
    /// Fraction of categories that move the native asset.
    pub native_rate: f64,
    /// First source timestamp.
    pub start_timestamp: u64,
    /// Source timestamps spread uniformly over this many seconds.
    pub duration: u64,
    /// Plant a value-mirrored destination field alongside the truth.
    pub mirror_field: bool,
    /// Pairing tolerances the scenario is built against (delays and fees
    /// beyond them make transfers legitimately unpairable).
    pub timewindow: u64,
    pub fee_rate_ppm: u32,
}

impl ScenarioConfig {
    /// No decoys, modest delays and fees: a pipeline run must pair all of it.
    pub fn clean(seed: u64, n_transfers: usize) -> Self {
        ScenarioConfig {
            seed,
            n_transfers,
            src_chain: ChainSpec {
                canonical_id: 1,
                internal_id: 101,
            },
            dst_chain: ChainSpec {
                canonical_id: 56,
                internal_id: 102,
            },
            n_categories: 4,
            fields_per_category: (18, 28),
            logs_per_category: (2, 4),
            decoy_field_rate: 0.0,
            decoy_tx_rate: 0.0,
            max_fee_ppm: 100_000,
            delay_range: (60, 1800),
            n_tokens: 4,
            native_rate: 0.25,
            start_timestamp: 1_700_000_000,
            duration: 30 * 24 * 3600,
            mirror_field: false,
            timewindow: 7200,
            fee_rate_ppm: 200_000,
        }
    }

    /// Half the categories carry misleading fields and a fifth of each side
    /// is unpaired noise.
    pub fn decoy(seed: u64, n_transfers: usize) -> Self {
        ScenarioConfig {
            decoy_field_rate: 0.5,
            decoy_tx_rate: 0.2,
            fields_per_category: (34, 44),
            logs_per_category: (5, 7),
            ..ScenarioConfig::clean(seed, n_transfers)
        }
    }

    /// One category with nine logs flattening to exactly 144 leaf fields,
    /// refund-recipient decoy included.
    pub fn motivating(seed: u64) -> Self {
        ScenarioConfig {
            n_categories: 1,
            fields_per_category: (144, 144),
            logs_per_category: (9, 9),
            decoy_field_rate: 1.0,
            decoy_tx_rate: 0.0,
            native_rate: 0.0,
            ..ScenarioConfig::clean(seed, 50)
        }
    }

    /// Delays may exceed the timewindow; some transfers become legitimately
    /// unpairable.
    pub fn stress(seed: u64, n_transfers: usize) -> Self {
        ScenarioConfig {
            delay_range: (60, 12 * 3600),
            ..ScenarioConfig::clean(seed, n_transfers)
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let frac = |name: &str, v: f64| {
            if !(0.0..=1.0).contains(&v) {
                Err(SimError::Config(format!("{name} must be in [0,1], got {v}")))
            } else {
                Ok(())
            }
        };
        frac("decoy_field_rate", self.decoy_field_rate)?;
        frac("decoy_tx_rate", self.decoy_tx_rate)?;
        frac("native_rate", self.native_rate)?;
        if self.n_categories == 0 {
            return Err(SimError::Config("n_categories must be at least 1".into()));
        }
        if self.n_tokens == 0 {
            return Err(SimError::Config("n_tokens must be at least 1".into()));
        }
        if self.fields_per_category.0 > self.fields_per_category.1
            || self.logs_per_category.0 > self.logs_per_category.1
            || self.delay_range.0 > self.delay_range.1
        {
            return Err(SimError::Config("range lower bound exceeds upper bound".into()));
        }
        if self.fields_per_category.0 < 5 {
            return Err(SimError::Config(
                "fields_per_category below 5: a quintuple cannot exist".into(),
            ));
        }
        if self.max_fee_ppm as u64 > FeeRate::DENOM {
            return Err(SimError::Config("max_fee_ppm above one million".into()));
        }
        if self.duration == 0 || self.timewindow == 0 {
            return Err(SimError::Config("duration and timewindow must be > 0".into()));
        }
        Ok(())
    }

    fn decoy_categories(&self) -> usize {
        quota(self.decoy_field_rate, self.n_categories)
    }

    fn native_categories(&self) -> usize {
        quota(self.native_rate, self.n_categories)
    }
}

fn quota(rate: f64, n: usize) -> usize {
    ((rate * n as f64) + 0.5) as usize
}

/// One transfer's ground-truth values, sufficient to replay the pairing
/// rules without touching bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferTruth {
    pub src_hash: TxHash,
    pub dst_hash: TxHash,
    pub destination: Address,
    pub token_symbol: String,
    pub amount_src: U256,
    pub amount_dst: U256,
    pub ts_src: u64,
    pub ts_dst: u64,
    pub src_chain: u64,
    pub dst_chain: u64,
}

/// ABI export: the two router interfaces plus the shared token interface.
#[derive(Debug, Clone)]
pub struct GeneratedAbis {
    pub src_router: Vec<AbiItem>,
    pub dst_router: Vec<AbiItem>,
    pub erc20: Vec<AbiItem>,
}

#[derive(Debug, Clone)]
pub enum AbiItem {
    Function(FunctionDescriptor),
    Event(EventDescriptor),
}

/// A generated scenario: raw byte datasets, decoded truth, ABIs, truth files
/// and the pairing parameters (alias tables included) it was built against.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub params: PairingParams,
    pub raw_src: Vec<RawTransaction>,
    pub raw_dst: Vec<RawTransaction>,
    pub truth_src: Vec<TransactionInstance>,
    pub truth_dst: Vec<TransactionInstance>,
    pub abis: GeneratedAbis,
    pub truth_pairs: Vec<(TxHash, TxHash)>,
    pub truth_transfers: Vec<TransferTruth>,
    pub truth_quintuples: BTreeMap<(Side, CategoryKey), Quintuple>,
}

impl Scenario {
    /// Registry over every generated ABI.
    pub fn registry(&self) -> AbiRegistry {
        let mut reg = AbiRegistry::new();
        for item in self
            .abis
            .src_router
            .iter()
            .chain(&self.abis.dst_router)
            .chain(&self.abis.erc20)
        {
            match item {
                AbiItem::Function(fd) => reg.add_function(fd.clone()),
                AbiItem::Event(ed) => reg.add_event(ed.clone()),
            }
        }
        reg
    }
}

/// Applies the pairing rules analytically to truth values, yielding the
/// maximal expected pair set. Separates pipeline error from scenario-induced
/// unpairability (delays beyond the timewindow, fees beyond the rate).
pub fn replay_truth(
    transfers: &[TransferTruth],
    params: &PairingParams,
) -> BTreeSet<(TxHash, TxHash)> {
    use num_bigint::BigUint;
    transfers
        .iter()
        .filter(|t| {
            let a_s = t.amount_src.as_biguint();
            let a_d = t.amount_dst.as_biguint();
            if a_s == &BigUint::ZERO {
                return false;
            }
            let diff = if a_s >= a_d { a_s - a_d } else { a_d - a_s };
            let fee_ok =
                diff * BigUint::from(FeeRate::DENOM) <= BigUint::from(params.fee_rate.ppm()) * a_s;
            let ts_ok = t.ts_src.abs_diff(t.ts_dst) <= params.timewindow;
            fee_ok && ts_ok
        })
        .map(|t| (t.src_hash, t.dst_hash))
        .collect()
}

// ---------------------------------------------------------------------------
// Schema plans
// ---------------------------------------------------------------------------

/// How one leaf of a schema gets its per-transaction value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gen {
    TruthDestination,
    TruthChain,
    TruthToken,
    TruthAmount,
    /// Mirrors the destination value exactly (consistency scenario).
    MirrorDestination,
    /// Constant fee-collector address, identical on both chains.
    DecoyConstDestination,
    /// Fresh random address per transaction.
    DecoyVarDestination,
    /// Constant far-future deadline, identical on both chains.
    DecoyConstTimestamp,
    /// Fee-sized amount that never equals a flow amount.
    DecoyFeeAmount,
    /// Constant protocol-token address, never aliased.
    DecoyFeeToken,
    TransferFrom,
    TransferTo,
    TransferValue,
    FillerUint,
    FillerAddress,
    FillerBool,
    FillerBytes32,
    FillerText,
}

#[derive(Debug, Clone)]
struct SlotPlan {
    name: String,
    ty: AbiType,
    node: PlanNode,
    indexed: bool,
}

#[derive(Debug, Clone)]
enum PlanNode {
    Leaf(Gen),
    Tuple(Vec<SlotPlan>),
    /// Dynamic array; runtime length drawn per transaction from 1..=3 so the
    /// rendered field set stays stable.
    Array(alloc::boxed::Box<SlotPlan>),
}

impl SlotPlan {
    fn leaf(name: &str, ty: AbiType, gen: Gen) -> Self {
        SlotPlan {
            name: name.into(),
            ty,
            node: PlanNode::Leaf(gen),
            indexed: false,
        }
    }

    fn param(&self) -> Param {
        Param {
            name: self.name.clone(),
            ty: self.ty.clone(),
            indexed: self.indexed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Emitter {
    Token,
    Router,
}

#[derive(Debug, Clone)]
struct EventPlan {
    name: String,
    emitter: Emitter,
    slots: Vec<SlotPlan>,
}

impl EventPlan {
    fn descriptor(&self) -> EventDescriptor {
        EventDescriptor::new(&self.name, self.slots.iter().map(|s| s.param()).collect())
            .expect("generated names are valid identifiers")
    }
}

#[derive(Debug, Clone)]
struct SchemaPlan {
    function: String,
    call_slots: Vec<SlotPlan>,
    events: Vec<EventPlan>,
    native: bool,
    quintuple: Quintuple,
}

impl SchemaPlan {
    fn descriptor(&self) -> FunctionDescriptor {
        FunctionDescriptor::new(
            &self.function,
            self.call_slots.iter().map(|s| s.param()).collect(),
        )
        .expect("generated names are valid identifiers")
    }
}

const FUNCTION_POOL: &[&str] = &[
    "createOrder",
    "bridgeOut",
    "initiate",
    "dispatchPacket",
    "submitOrder",
    "openTransfer",
    "commitLeg",
    "settleOut",
    "relayRequest",
    "processOutbound",
];

const EVENT_POOL: &[&str] = &[
    "StateSync",
    "OracleUpdate",
    "Checkpoint",
    "RelayerPing",
    "PoolSync",
    "ConfigChanged",
    "Snapshot",
    "MetricsMark",
    "Heartbeat",
    "JournalAppend",
    "AnchorSet",
    "QuorumSeal",
];

const FILLER_NAMES: &[&str] = &[
    "nonce", "flagBits", "salt", "mode", "kindCode", "version", "extraData", "memoBlob", "tagWord",
    "slotRef", "rawPayload", "widthHint", "padWord", "seqno", "cursor", "epochMark", "roundRef",
    "shardRef", "laneRef", "quorumBps", "digestWord", "vaultRef", "bucketRef", "gasHint",
    "calldataRef", "proofWord", "routeMask", "hopBudget", "relayFloor", "relayCeil", "spanWord",
    "mixWord", "auxWord", "parkWord", "gridRef", "knobWord", "dialWord", "trimWord", "stubWord",
    "wrapWord",
];

const TEXT_POOL: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "omega", "sigma", "kappa", "lambda", "theta", "zeta",
];

struct NamePool {
    used: BTreeSet<String>,
}

impl NamePool {
    fn new() -> Self {
        NamePool {
            used: BTreeSet::new(),
        }
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> String {
        loop {
            let base = FILLER_NAMES[rng.random_range(0..FILLER_NAMES.len())];
            let candidate = if self.used.contains(base) {
                format!("{base}{}", rng.random_range(2..1000u32))
            } else {
                base.into()
            };
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}

/// Containers a filler leaf can land in.
#[derive(Clone, Copy, PartialEq, Eq)]
enum FillerTarget {
    Call,
    Event(usize),
    OrderTuple,
}

fn filler_slot(name: String, rng: &mut ChaCha8Rng) -> SlotPlan {
    match rng.random_range(0..10u32) {
        0..=3 => SlotPlan::leaf(&name, AbiType::Uint(256), Gen::FillerUint),
        4..=5 => SlotPlan::leaf(&name, AbiType::Address, Gen::FillerAddress),
        6 => SlotPlan::leaf(&name, AbiType::Bool, Gen::FillerBool),
        7 => SlotPlan::leaf(&name, AbiType::FixedBytes(32), Gen::FillerBytes32),
        8 => SlotPlan::leaf(&name, AbiType::String, Gen::FillerText),
        _ => SlotPlan {
            // Dynamic array of words: one rendered field regardless of length.
            name: name.clone(),
            ty: AbiType::Array(alloc::boxed::Box::new(AbiType::Uint(256)), None),
            node: PlanNode::Array(alloc::boxed::Box::new(SlotPlan::leaf(
                &name,
                AbiType::Uint(256),
                Gen::FillerUint,
            ))),
            indexed: false,
        },
    }
}

fn build_schema(
    side: Side,
    cat_index: usize,
    cfg: &ScenarioConfig,
    rng: &mut ChaCha8Rng,
) -> Result<SchemaPlan, SimError> {
    let native = cat_index < cfg.native_categories();
    let decoy = cat_index < cfg.decoy_categories();
    let truth_in_log = cat_index.is_multiple_of(2);
    let target_fields =
        rng.random_range(cfg.fields_per_category.0..=cfg.fields_per_category.1);
    let n_logs = rng.random_range(cfg.logs_per_category.0..=cfg.logs_per_category.1);

    let side_tag = match side {
        Side::Source => "",
        Side::Destination => "Fill",
    };
    let function = format!(
        "{}{side_tag}",
        FUNCTION_POOL[cat_index % FUNCTION_POOL.len()]
    );

    // The truth container: four role fields inside an `order` tuple.
    let mut order_fields = alloc::vec![
        SlotPlan::leaf("receiverDst", AbiType::Address, Gen::TruthDestination),
        SlotPlan::leaf("takeChainId", AbiType::Uint(256), Gen::TruthChain),
        SlotPlan::leaf("tokenAsset", AbiType::Address, Gen::TruthToken),
        SlotPlan::leaf("amountValue", AbiType::Uint(256), Gen::TruthAmount),
    ];
    if cfg.mirror_field {
        order_fields.push(SlotPlan::leaf(
            "receiverCopy",
            AbiType::Address,
            Gen::MirrorDestination,
        ));
    }

    let transfer_event = if native {
        EventPlan {
            name: "TransferNative".into(),
            emitter: Emitter::Router,
            slots: alloc::vec![
                SlotPlan::leaf("to", AbiType::Address, Gen::TransferTo),
                SlotPlan::leaf("value", AbiType::Uint(256), Gen::TransferValue),
            ],
        }
    } else {
        EventPlan {
            name: "Transfer".into(),
            emitter: Emitter::Token,
            slots: alloc::vec![
                SlotPlan {
                    indexed: true,
                    ..SlotPlan::leaf("from", AbiType::Address, Gen::TransferFrom)
                },
                SlotPlan {
                    indexed: true,
                    ..SlotPlan::leaf("to", AbiType::Address, Gen::TransferTo)
                },
                SlotPlan::leaf("value", AbiType::Uint(256), Gen::TransferValue),
            ],
        }
    };
    let transfer_leaves = transfer_event.slots.len();

    let mut events: Vec<EventPlan> = Vec::new();
    let mut call_slots: Vec<SlotPlan> = Vec::new();
    let order_tuple_leaves = order_fields.len();
    let order_slot = |fields: Vec<SlotPlan>| SlotPlan {
        name: "order".into(),
        ty: AbiType::Tuple(fields.iter().map(|s| (s.name.clone(), s.ty.clone())).collect()),
        node: PlanNode::Tuple(fields),
        indexed: false,
    };
    if truth_in_log {
        events.push(EventPlan {
            name: "CreatedOrder".into(),
            emitter: Emitter::Router,
            slots: alloc::vec![order_slot(order_fields.clone())],
        });
    } else {
        call_slots.push(order_slot(order_fields.clone()));
    }
    if decoy {
        events.push(EventPlan {
            name: "Send".into(),
            emitter: Emitter::Router,
            slots: alloc::vec![
                SlotPlan::leaf("toReceiver", AbiType::Address, Gen::DecoyConstDestination),
                SlotPlan::leaf(
                    "deadlineTimestamp",
                    AbiType::Uint(256),
                    Gen::DecoyConstTimestamp
                ),
            ],
        });
        events.push(EventPlan {
            name: "Refund".into(),
            emitter: Emitter::Router,
            slots: alloc::vec![
                SlotPlan::leaf("recipient", AbiType::Address, Gen::DecoyVarDestination),
                SlotPlan::leaf("refundAmount", AbiType::Uint(256), Gen::DecoyFeeAmount),
                SlotPlan::leaf("feeToken", AbiType::Address, Gen::DecoyFeeToken),
            ],
        });
    }

    let fixed_events = 1 + events.len(); // transfer event joins later
    if n_logs < fixed_events {
        return Err(SimError::Config(format!(
            "category {cat_index}: needs at least {fixed_events} logs, config allows {n_logs}"
        )));
    }
    let n_filler_events = n_logs - fixed_events;

    let fixed_leaves = 1 // timestamp pseudo-field
        + transfer_leaves
        + order_tuple_leaves
        + if decoy { 5 } else { 0 };
    // One leaf is reserved per filler event, plus one call argument when the
    // order tuple lives in a log (so the function is never zero-argument).
    let call_reserve = usize::from(truth_in_log);
    let base = fixed_leaves + n_filler_events + call_reserve;
    if target_fields < base {
        return Err(SimError::Config(format!(
            "category {cat_index}: {target_fields} fields cannot host the schema minimum of {base}"
        )));
    }
    let mut budget = target_fields - base;

    let mut pool = NamePool::new();
    for reserved_name in ["order", "receiverDst", "takeChainId", "tokenAsset", "amountValue"] {
        pool.used.insert(reserved_name.into());
    }

    let mut filler_events: Vec<EventPlan> = (0..n_filler_events)
        .map(|i| EventPlan {
            name: format!(
                "{}{}",
                EVENT_POOL[(cat_index + i) % EVENT_POOL.len()],
                if i >= EVENT_POOL.len() { "X" } else { "" }
            ),
            emitter: Emitter::Router,
            slots: alloc::vec![filler_slot(pool.next(rng), rng)],
        })
        .collect();
    if truth_in_log {
        call_slots.push(filler_slot(pool.next(rng), rng));
    }

    // Spread the remaining leaf budget across the call, the order tuple and
    // the filler events.
    while budget > 0 {
        let mut targets: Vec<FillerTarget> = alloc::vec![FillerTarget::Call, FillerTarget::OrderTuple];
        for i in 0..filler_events.len() {
            targets.push(FillerTarget::Event(i));
        }
        let target = targets[rng.random_range(0..targets.len())];
        let slot = filler_slot(pool.next(rng), rng);
        match target {
            FillerTarget::Call => call_slots.push(slot),
            FillerTarget::Event(i) => filler_events[i].slots.push(slot),
            FillerTarget::OrderTuple => {
                // Grow the tuple in place, wherever it lives.
                let order = if truth_in_log {
                    events
                        .iter_mut()
                        .find(|e| e.name == "CreatedOrder")
                        .and_then(|e| e.slots.first_mut())
                } else {
                    call_slots.first_mut()
                };
                if let Some(order) = order {
                    if let PlanNode::Tuple(fields) = &mut order.node {
                        fields.push(slot);
                        order.ty = AbiType::Tuple(
                            fields.iter().map(|s| (s.name.clone(), s.ty.clone())).collect(),
                        );
                    }
                } else {
                    call_slots.push(slot);
                }
            }
        }
        budget -= 1;
    }

    events.push(transfer_event);
    events.extend(filler_events);

    let truth_root = |keys: &[&str]| -> FieldPath {
        if truth_in_log {
            FieldPath::log("CreatedOrder", keys).expect("static truth path")
        } else {
            FieldPath::transaction(&function, keys).expect("static truth path")
        }
    };
    let quintuple = Quintuple {
        destination: truth_root(&["order", "receiverDst"]),
        chain: truth_root(&["order", "takeChainId"]),
        token: truth_root(&["order", "tokenAsset"]),
        amount: truth_root(&["order", "amountValue"]),
        timestamp: FieldPath::meta_timestamp(),
    };

    Ok(SchemaPlan {
        function,
        call_slots,
        events,
        native,
        quintuple,
    })
}

// ---------------------------------------------------------------------------
// Value generation
// ---------------------------------------------------------------------------

struct TokenSpec {
    symbol: String,
    src_address: Address,
    dst_address: Address,
}

struct World {
    tokens: Vec<TokenSpec>,
    native_sentinel: Address,
    fee_collector: Address,
    protocol_token_src: Address,
    protocol_token_dst: Address,
    relayer: Address,
    pool_src: Address,
    router_src: Address,
    router_dst: Address,
    token_contract_src: Vec<Address>,
    token_contract_dst: Vec<Address>,
    deadline_constant: u64,
}

fn random_address(rng: &mut ChaCha8Rng) -> Address {
    let mut bytes = [0u8; 20];
    rng.fill(&mut bytes);
    Address(bytes)
}

fn random_hash(rng: &mut ChaCha8Rng, used: &mut BTreeSet<TxHash>) -> TxHash {
    loop {
        let mut bytes = [0u8; 32];
        rng.fill(&mut bytes);
        let h = TxHash(bytes);
        if used.insert(h) {
            return h;
        }
    }
}

const AMOUNT_PALETTE: &[u64] = &[
    1_000_000,
    2_000_000,
    5_000_000,
    10_000_000,
    20_000_000,
    50_000_000,
    100_000_000,
    200_000_000,
    500_000_000,
    1_000_000_000,
    2_000_000_000,
    5_000_000_000,
    10_000_000_000,
    20_000_000_000,
    50_000_000_000,
];

/// Per-transaction values the generators read from.
struct TxValues {
    destination: Address,
    counterpart_internal: u64,
    token_address: Address,
    amount: u64,
    sender: Address,
    transfer_from: Address,
    transfer_to: Address,
    side: Side,
}

fn leaf_value(gen: Gen, tx: &TxValues, world: &World, rng: &mut ChaCha8Rng) -> Value {
    match gen {
        Gen::TruthDestination | Gen::MirrorDestination => Value::Address(tx.destination),
        Gen::TruthChain => Value::uint_u64(tx.counterpart_internal),
        Gen::TruthToken => Value::Address(tx.token_address),
        Gen::TruthAmount => Value::uint_u64(tx.amount),
        Gen::DecoyConstDestination => Value::Address(world.fee_collector),
        Gen::DecoyVarDestination => Value::Address(random_address(rng)),
        Gen::DecoyConstTimestamp => Value::uint_u64(world.deadline_constant),
        // Strictly below any palette amount and any post-fee amount.
        Gen::DecoyFeeAmount => Value::uint_u64(tx.amount / 1000 + 1),
        Gen::DecoyFeeToken => Value::Address(match tx.side {
            Side::Source => world.protocol_token_src,
            Side::Destination => world.protocol_token_dst,
        }),
        Gen::TransferFrom => Value::Address(tx.transfer_from),
        Gen::TransferTo => Value::Address(tx.transfer_to),
        Gen::TransferValue => Value::uint_u64(tx.amount),
        Gen::FillerUint => Value::uint_u64(rng.random::<u64>() >> 1),
        Gen::FillerAddress => Value::Address(random_address(rng)),
        Gen::FillerBool => Value::Bool(rng.random()),
        Gen::FillerBytes32 => {
            let mut b = [0u8; 32];
            rng.fill(&mut b);
            Value::Bytes(b.to_vec())
        }
        Gen::FillerText => Value::Text(TEXT_POOL[rng.random_range(0..TEXT_POOL.len())].into()),
    }
}

fn build_slot_value(slot: &SlotPlan, tx: &TxValues, world: &World, rng: &mut ChaCha8Rng) -> Value {
    match &slot.node {
        PlanNode::Leaf(gen) => leaf_value(*gen, tx, world, rng),
        PlanNode::Tuple(fields) => {
            let mut rec = Record::new();
            for f in fields {
                rec.insert(f.name.clone(), build_slot_value(f, tx, world, rng))
                    .expect("schema names are unique");
            }
            Value::Record(rec)
        }
        PlanNode::Array(elem) => {
            let len = rng.random_range(1..=3usize);
            Value::List(
                (0..len)
                    .map(|_| build_slot_value(elem, tx, world, rng))
                    .collect(),
            )
        }
    }
}

fn build_record(slots: &[SlotPlan], tx: &TxValues, world: &World, rng: &mut ChaCha8Rng) -> Record {
    let mut rec = Record::new();
    for slot in slots {
        rec.insert(slot.name.clone(), build_slot_value(slot, tx, world, rng))
            .expect("schema names are unique");
    }
    rec
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct TxDraft {
    timestamp: u64,
    hash: TxHash,
    schema_index: usize,
    values: TxValues,
    native_value: u64,
}

/// Generates the full scenario; identical seed and config yield
/// byte-identical datasets.
pub fn generate(cfg: &ScenarioConfig) -> Result<Scenario, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // World constants first, then schemas, then transfers: a fixed draw
    // order keeps generation reproducible.
    let native_sentinel = Address([0xee; 20]);
    let world = World {
        tokens: (0..cfg.n_tokens)
            .map(|i| TokenSpec {
                symbol: format!("TK{i}"),
                src_address: random_address(&mut rng),
                dst_address: random_address(&mut rng),
            })
            .collect(),
        native_sentinel,
        fee_collector: random_address(&mut rng),
        protocol_token_src: random_address(&mut rng),
        protocol_token_dst: random_address(&mut rng),
        relayer: random_address(&mut rng),
        pool_src: random_address(&mut rng),
        router_src: random_address(&mut rng),
        router_dst: random_address(&mut rng),
        token_contract_src: Vec::new(),
        token_contract_dst: Vec::new(),
        deadline_constant: cfg.start_timestamp + cfg.duration + 10 * cfg.timewindow,
    };
    let mut world = world;
    world.token_contract_src = world.tokens.iter().map(|t| t.src_address).collect();
    world.token_contract_dst = world.tokens.iter().map(|t| t.dst_address).collect();

    let schemas_src: Vec<SchemaPlan> = (0..cfg.n_categories)
        .map(|i| build_schema(Side::Source, i, cfg, &mut rng))
        .collect::<Result<_, _>>()?;
    let schemas_dst: Vec<SchemaPlan> = (0..cfg.n_categories)
        .map(|i| build_schema(Side::Destination, i, cfg, &mut rng))
        .collect::<Result<_, _>>()?;

    let mut params = PairingParams {
        timewindow: cfg.timewindow,
        fee_rate: FeeRate::from_ppm(cfg.fee_rate_ppm)
            .map_err(|e| SimError::Config(format!("fee_rate: {e}")))?,
        chain_alias: BTreeMap::new(),
        token_alias: BTreeMap::new(),
    };
    params
        .chain_alias
        .insert(cfg.src_chain.internal_id, cfg.src_chain.canonical_id);
    params
        .chain_alias
        .insert(cfg.dst_chain.internal_id, cfg.dst_chain.canonical_id);
    for t in &world.tokens {
        params
            .token_alias
            .insert((cfg.src_chain.canonical_id, t.src_address), t.symbol.clone());
        params
            .token_alias
            .insert((cfg.dst_chain.canonical_id, t.dst_address), t.symbol.clone());
    }
    params.token_alias.insert(
        (cfg.src_chain.canonical_id, world.native_sentinel),
        crate::model::NATIVE_SYMBOL.into(),
    );
    params.token_alias.insert(
        (cfg.dst_chain.canonical_id, world.native_sentinel),
        crate::model::NATIVE_SYMBOL.into(),
    );

    let mut used_hashes = BTreeSet::new();
    let mut src_drafts: Vec<TxDraft> = Vec::new();
    let mut dst_drafts: Vec<TxDraft> = Vec::new();
    let mut truth_transfers: Vec<TransferTruth> = Vec::new();

    for i in 0..cfg.n_transfers {
        let schema_index = i % cfg.n_categories;
        let schema = &schemas_src[schema_index];
        let ts_src = cfg.start_timestamp + rng.random_range(0..cfg.duration);
        let delay = rng.random_range(cfg.delay_range.0..=cfg.delay_range.1);
        let fee_ppm = rng.random_range(0..=cfg.max_fee_ppm) as u64;
        let amount = AMOUNT_PALETTE[rng.random_range(0..AMOUNT_PALETTE.len())];
        let fee = amount * fee_ppm / FeeRate::DENOM;
        let amount_dst = amount - fee;
        let user = random_address(&mut rng);
        let recipient = random_address(&mut rng);
        let token_index = rng.random_range(0..world.tokens.len());
        let (token_src_addr, token_dst_addr, symbol) = if schema.native {
            (
                world.native_sentinel,
                world.native_sentinel,
                crate::model::NATIVE_SYMBOL.into(),
            )
        } else {
            let t = &world.tokens[token_index];
            (t.src_address, t.dst_address, t.symbol.clone())
        };
        let src_hash = random_hash(&mut rng, &mut used_hashes);
        let dst_hash = random_hash(&mut rng, &mut used_hashes);

        src_drafts.push(TxDraft {
            timestamp: ts_src,
            hash: src_hash,
            schema_index,
            values: TxValues {
                destination: recipient,
                counterpart_internal: cfg.dst_chain.internal_id,
                token_address: token_src_addr,
                amount,
                sender: user,
                transfer_from: user,
                transfer_to: world.pool_src,
                side: Side::Source,
            },
            native_value: if schema.native { amount } else { 0 },
        });
        dst_drafts.push(TxDraft {
            timestamp: ts_src + delay,
            hash: dst_hash,
            schema_index,
            values: TxValues {
                destination: recipient,
                counterpart_internal: cfg.src_chain.internal_id,
                token_address: token_dst_addr,
                amount: amount_dst,
                sender: world.relayer,
                transfer_from: world.relayer,
                transfer_to: recipient,
                side: Side::Destination,
            },
            native_value: if schemas_dst[schema_index].native {
                amount_dst
            } else {
                0
            },
        });
        truth_transfers.push(TransferTruth {
            src_hash,
            dst_hash,
            destination: recipient,
            token_symbol: symbol,
            amount_src: U256::from_u64(amount),
            amount_dst: U256::from_u64(amount_dst),
            ts_src,
            ts_dst: ts_src + delay,
            src_chain: cfg.src_chain.canonical_id,
            dst_chain: cfg.dst_chain.canonical_id,
        });
    }

    // Unpaired noise legs. Collection volumes are never symmetric across
    // chains: the destination side carries twice the source-side noise, so
    // positional alignment between the two sides drifts apart immediately
    // instead of re-synchronizing.
    let n_noise_src = quota(cfg.decoy_tx_rate, cfg.n_transfers);
    let n_noise_dst = 2 * n_noise_src;
    for i in 0..n_noise_dst {
        let schema_index = i % cfg.n_categories;
        for side in [Side::Source, Side::Destination] {
            if side == Side::Source && i >= n_noise_src {
                continue;
            }
            let schema = match side {
                Side::Source => &schemas_src[schema_index],
                Side::Destination => &schemas_dst[schema_index],
            };
            let ts = cfg.start_timestamp + rng.random_range(0..cfg.duration);
            let amount = AMOUNT_PALETTE[rng.random_range(0..AMOUNT_PALETTE.len())];
            let token_index = rng.random_range(0..world.tokens.len());
            let recipient = random_address(&mut rng);
            let user = random_address(&mut rng);
            let hash = random_hash(&mut rng, &mut used_hashes);
            let (token_addr, counterpart, sender, from, to) = match side {
                Side::Source => (
                    if schema.native {
                        world.native_sentinel
                    } else {
                        world.tokens[token_index].src_address
                    },
                    cfg.dst_chain.internal_id,
                    user,
                    user,
                    world.pool_src,
                ),
                Side::Destination => (
                    if schema.native {
                        world.native_sentinel
                    } else {
                        world.tokens[token_index].dst_address
                    },
                    cfg.src_chain.internal_id,
                    world.relayer,
                    world.relayer,
                    recipient,
                ),
            };
            let draft = TxDraft {
                timestamp: ts,
                hash,
                schema_index,
                values: TxValues {
                    destination: recipient,
                    counterpart_internal: counterpart,
                    token_address: token_addr,
                    amount,
                    sender,
                    transfer_from: from,
                    transfer_to: to,
                    side,
                },
                native_value: if schema.native { amount } else { 0 },
            };
            match side {
                Side::Source => src_drafts.push(draft),
                Side::Destination => dst_drafts.push(draft),
            }
        }
    }

    src_drafts.sort_by_key(|d| (d.timestamp, d.hash));
    dst_drafts.sort_by_key(|d| (d.timestamp, d.hash));

    let mut scenario = Scenario {
        config: cfg.clone(),
        params,
        raw_src: Vec::with_capacity(src_drafts.len()),
        raw_dst: Vec::with_capacity(dst_drafts.len()),
        truth_src: Vec::with_capacity(src_drafts.len()),
        truth_dst: Vec::with_capacity(dst_drafts.len()),
        abis: GeneratedAbis {
            src_router: schemas_to_abi(&schemas_src),
            dst_router: schemas_to_abi(&schemas_dst),
            erc20: alloc::vec![AbiItem::Event(
                EventDescriptor::new(
                    "Transfer",
                    alloc::vec![
                        Param::indexed("from", AbiType::Address),
                        Param::indexed("to", AbiType::Address),
                        Param::new("value", AbiType::Uint(256)),
                    ],
                )
                .expect("static descriptor")
            )],
        },
        truth_pairs: truth_transfers
            .iter()
            .map(|t| (t.src_hash, t.dst_hash))
            .collect(),
        truth_transfers,
        truth_quintuples: BTreeMap::new(),
    };

    for (side, drafts, schemas, chain, router) in [
        (
            Side::Source,
            &src_drafts,
            &schemas_src,
            cfg.src_chain.canonical_id,
            world.router_src,
        ),
        (
            Side::Destination,
            &dst_drafts,
            &schemas_dst,
            cfg.dst_chain.canonical_id,
            world.router_dst,
        ),
    ] {
        for (block, draft) in drafts.iter().enumerate() {
            let schema = &schemas[draft.schema_index];
            let (raw, truth) = materialize(
                draft,
                schema,
                &world,
                chain,
                router,
                block as u64 + 1,
                &mut rng,
            )?;
            match side {
                Side::Source => {
                    scenario.raw_src.push(raw);
                    scenario.truth_src.push(truth);
                }
                Side::Destination => {
                    scenario.raw_dst.push(raw);
                    scenario.truth_dst.push(truth);
                }
            }
        }
    }

    // Category keys are derived from a probe instance per schema so the
    // truth quintuples can be joined against categorize() output.
    for (side, schemas, txs) in [
        (Side::Source, &schemas_src, &scenario.truth_src),
        (Side::Destination, &schemas_dst, &scenario.truth_dst),
    ] {
        for (si, schema) in schemas.iter().enumerate() {
            let probe = txs
                .iter()
                .zip(match side {
                    Side::Source => src_drafts.iter(),
                    Side::Destination => dst_drafts.iter(),
                })
                .find(|(_, d)| d.schema_index == si)
                .map(|(t, _)| t);
            if let Some(tx) = probe {
                let key = CategoryKey::from_fields(&fields_of(tx));
                scenario
                    .truth_quintuples
                    .insert((side, key), schema.quintuple.clone());
            }
        }
    }

    Ok(scenario)
}

fn schemas_to_abi(schemas: &[SchemaPlan]) -> Vec<AbiItem> {
    let mut items = Vec::new();
    let mut seen_events: BTreeSet<[u8; 32]> = BTreeSet::new();
    for s in schemas {
        items.push(AbiItem::Function(s.descriptor()));
        for e in &s.events {
            let ed = e.descriptor();
            if e.name == "Transfer" {
                continue; // lives in the shared token ABI
            }
            if seen_events.insert(crate::abi::topic0(&ed)) {
                items.push(AbiItem::Event(ed));
            }
        }
    }
    items
}

fn materialize(
    draft: &TxDraft,
    schema: &SchemaPlan,
    world: &World,
    chain: u64,
    router: Address,
    block_number: u64,
    rng: &mut ChaCha8Rng,
) -> Result<(RawTransaction, TransactionInstance), SimError> {
    let call_record = build_record(&schema.call_slots, &draft.values, world, rng);
    let fd = schema.descriptor();
    let input = encode_call(&fd, &call_record)
        .map_err(|e| SimError::Config(format!("encode_call: {e}")))?;

    let mut raw_logs = Vec::with_capacity(schema.events.len());
    let mut log_entries = Vec::with_capacity(schema.events.len());
    for event in &schema.events {
        let record = build_record(&event.slots, &draft.values, world, rng);
        let ed = event.descriptor();
        let (topics, data) =
            encode_log(&ed, &record).map_err(|e| SimError::Config(format!("encode_log: {e}")))?;
        let emitter = match event.emitter {
            Emitter::Token => draft.values.token_address,
            Emitter::Router => router,
        };
        raw_logs.push(RawLog {
            emitter,
            topics,
            data,
        });
        log_entries.push(crate::model::LogEntry {
            event: event.name.clone(),
            emitter,
            record,
        });
    }

    let raw = RawTransaction {
        chain,
        tx_hash: draft.hash,
        block_number,
        timestamp: draft.timestamp,
        sender: draft.values.sender,
        contract: router,
        native_value: U256::from_u64(draft.native_value),
        input,
        logs: raw_logs,
        side: draft.values.side,
    };
    let truth = TransactionInstance::new(
        chain,
        draft.hash,
        block_number,
        draft.timestamp,
        draft.values.sender,
        router,
        U256::from_u64(draft.native_value),
        crate::model::DecodedCall {
            function: schema.function.clone(),
            args: call_record,
        },
        log_entries,
        draft.values.side,
    )
    .map_err(|e| SimError::Config(format!("instance: {e}")))?;
    Ok((raw, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abi::{decode_instance, DecodeMode};
    use crate::categorize::categorize;

    #[test]
    fn zero_transfers_yield_empty_datasets() {
        let scenario = generate(&ScenarioConfig::clean(1, 0)).unwrap();
        assert!(scenario.raw_src.is_empty());
        assert!(scenario.raw_dst.is_empty());
        assert!(scenario.truth_pairs.is_empty());
    }

    #[test]
    fn config_contradictions_are_rejected() {
        let mut cfg = ScenarioConfig::clean(1, 10);
        cfg.fields_per_category = (3, 3);
        assert!(matches!(generate(&cfg), Err(SimError::Config(_))));
        let mut cfg = ScenarioConfig::clean(1, 10);
        cfg.decoy_tx_rate = 1.5;
        assert!(generate(&cfg).is_err());
        let mut cfg = ScenarioConfig::clean(1, 10);
        cfg.logs_per_category = (1, 1);
        cfg.decoy_field_rate = 1.0; // needs 4 fixed events, only 1 allowed
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&ScenarioConfig::clean(7, 40)).unwrap();
        let b = generate(&ScenarioConfig::clean(7, 40)).unwrap();
        assert_eq!(a.raw_src, b.raw_src);
        assert_eq!(a.raw_dst, b.raw_dst);
        assert_eq!(a.truth_pairs, b.truth_pairs);
        let c = generate(&ScenarioConfig::clean(8, 40)).unwrap();
        assert_ne!(a.raw_src, c.raw_src);
    }

    #[test]
    fn decode_fidelity_over_generated_bytes() {
        let scenario = generate(&ScenarioConfig::decoy(3, 30)).unwrap();
        let registry = scenario.registry();
        for (raw, truth) in scenario
            .raw_src
            .iter()
            .zip(&scenario.truth_src)
            .chain(scenario.raw_dst.iter().zip(&scenario.truth_dst))
        {
            let (decoded, diags) = decode_instance(raw, &registry, DecodeMode::Strict).unwrap();
            assert!(diags.is_empty(), "unexpected diagnostics: {diags:?}");
            assert_eq!(&decoded, truth);
        }
    }

    #[test]
    fn truth_paths_resolve_to_planted_values() {
        let scenario = generate(&ScenarioConfig::clean(5, 30)).unwrap();
        let cats = categorize(&scenario.truth_src);
        for cat in &cats {
            let qt = scenario
                .truth_quintuples
                .get(&(Side::Source, cat.key))
                .expect("every category has a truth quintuple");
            for &m in &cat.members {
                let tx = &scenario.truth_src[m];
                for (role, path) in qt.iter() {
                    assert!(
                        path.resolve(tx).is_some(),
                        "{role} path {path} must resolve"
                    );
                }
                // The planted amount round-trips exactly.
                let truth = scenario
                    .truth_transfers
                    .iter()
                    .find(|t| t.src_hash == tx.tx_hash);
                if let Some(truth) = truth {
                    assert_eq!(
                        qt.amount.resolve(tx),
                        Some(Value::Uint(truth.amount_src.clone()))
                    );
                    assert_eq!(
                        qt.destination.resolve(tx),
                        Some(Value::Address(truth.destination))
                    );
                }
            }
        }
    }

    #[test]
    fn category_count_matches_configured_schemas() {
        let scenario = generate(&ScenarioConfig::clean(11, 60)).unwrap();
        let cats_src = categorize(&scenario.truth_src);
        let cats_dst = categorize(&scenario.truth_dst);
        assert_eq!(cats_src.len(), scenario.config.n_categories);
        assert_eq!(cats_dst.len(), scenario.config.n_categories);
    }

    #[test]
    fn motivating_shape_has_nine_logs_and_144_fields() {
        let scenario = generate(&ScenarioConfig::motivating(2)).unwrap();
        let tx = &scenario.truth_src[0];
        assert_eq!(tx.logs.len(), 9);
        assert_eq!(fields_of(tx).len(), 144);
        // The refund-recipient decoy is present.
        assert!(fields_of(tx).iter().any(|f| f == "log[Refund].recipient"));
    }

    #[test]
    fn replay_truth_equals_truth_pairs_on_clean_scenarios() {
        let scenario = generate(&ScenarioConfig::clean(9, 50)).unwrap();
        let expected = replay_truth(&scenario.truth_transfers, &scenario.params);
        let truth: BTreeSet<_> = scenario.truth_pairs.iter().copied().collect();
        assert_eq!(expected, truth);
    }

    #[test]
    fn replay_truth_drops_late_and_overpriced_transfers() {
        let scenario = generate(&ScenarioConfig::stress(4, 200)).unwrap();
        let expected = replay_truth(&scenario.truth_transfers, &scenario.params);
        let late = scenario
            .truth_transfers
            .iter()
            .filter(|t| t.ts_dst - t.ts_src > scenario.params.timewindow)
            .count();
        assert!(late > 0, "stress scenario must include late settlements");
        assert_eq!(expected.len(), scenario.truth_transfers.len() - late);

        // Fee beyond the rate excludes a transfer.
        let mut transfers = scenario.truth_transfers.clone();
        transfers[0].amount_dst = U256::from_u64(1);
        let expected = replay_truth(&transfers, &scenario.params);
        assert!(!expected.contains(&(transfers[0].src_hash, transfers[0].dst_hash)));
    }
}
