//! Candidate quintuple examination: validate against asset flows and
//! cross-chain value evidence, then refine by consistency and uniqueness
//! until at most one quintuple survives per category.
//!
//! Phase 1 narrows amount/token candidates to those whose extracted values
//! realize an observed asset flow. Phase 2 narrows destination/chain/
//! timestamp candidates to those whose values locate a counterpart
//! transaction carrying the same destination address. Phase 3 collapses
//! remaining ambiguity: consistent (value-equivalent) fields are
//! interchangeable, and fields whose value never varies cannot identify
//! anything and are removed.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::categorize::Category;
use crate::infer::type_prefilter;
use crate::model::{
    CandidateQuintuple, CanonicalValue, CategoryKey, Diagnostic, Diagnostics, FieldPath,
    PairingParams, Quintuple, Role, Side, TransactionInstance, Value, NATIVE_SYMBOL, U256,
};

/// Direction of an asset movement relative to the transaction sender.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FlowDirection {
    Inflow,
    Outflow,
}

/// The token moved by a flow, prior to canonicalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FlowToken {
    Native,
    /// ERC-20 style: the emitting contract is the token.
    Contract(crate::model::Address),
}

/// One asset movement within a transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetFlow {
    pub direction: FlowDirection,
    pub token: FlowToken,
    pub amount: U256,
}

/// Asset flows of one transaction relative to its sender: an outflow per
/// ERC-20 `Transfer` whose `from` equals the sender, an inflow per `Transfer`
/// whose `to` equals the sender, plus a native outflow when value was
/// attached. Zero-amount transfers are dropped.
pub fn analyze_asset_flow(tx: &TransactionInstance) -> Vec<AssetFlow> {
    let mut flows = Vec::new();
    if !tx.native_value.is_zero() {
        flows.push(AssetFlow {
            direction: FlowDirection::Outflow,
            token: FlowToken::Native,
            amount: tx.native_value.clone(),
        });
    }
    for log in &tx.logs {
        if log.event != "Transfer" {
            continue;
        }
        let (Some(from), Some(to), Some(amount)) = (
            log.record.get("from").and_then(Value::as_address),
            log.record.get("to").and_then(Value::as_address),
            log.record.get("value").and_then(Value::as_uint),
        ) else {
            continue;
        };
        if amount.is_zero() {
            continue;
        }
        let direction = if *from == tx.sender {
            FlowDirection::Outflow
        } else if *to == tx.sender {
            FlowDirection::Inflow
        } else {
            continue;
        };
        flows.push(AssetFlow {
            direction,
            token: FlowToken::Contract(log.emitter),
            amount: amount.clone(),
        });
    }
    flows
}

fn canonical_flow_token(params: &PairingParams, chain: u64, token: &FlowToken) -> String {
    match token {
        FlowToken::Native => NATIVE_SYMBOL.into(),
        FlowToken::Contract(addr) => params.canonical_token_addr(chain, addr),
    }
}

/// True when some flow moves exactly `amount` of a token equivalent to the
/// extracted token value (address equality after canonicalization, alias
/// equivalence, or a wrapped-native alias against a native flow).
pub fn flow_match(
    flows: &[AssetFlow],
    amount: &U256,
    token_value: &Value,
    params: &PairingParams,
    own_chain: u64,
) -> bool {
    let Some(wanted) = params.canonical_token_value(own_chain, token_value) else {
        return false;
    };
    flows.iter().any(|f| {
        f.amount == *amount && canonical_flow_token(params, own_chain, &f.token) == wanted
    })
}

/// Time-sorted per-chain index over one side's instances.
pub struct ChainTimeIndex {
    by_chain: BTreeMap<u64, Vec<(u64, usize)>>,
}

impl ChainTimeIndex {
    pub fn build(txs: &[TransactionInstance]) -> Self {
        let mut by_chain: BTreeMap<u64, Vec<(u64, usize)>> = BTreeMap::new();
        for (i, tx) in txs.iter().enumerate() {
            by_chain.entry(tx.chain).or_default().push((tx.timestamp, i));
        }
        for list in by_chain.values_mut() {
            list.sort_unstable();
        }
        ChainTimeIndex { by_chain }
    }

    /// Instances on `chain` within the window around `ts`: forward-only
    /// keeps `ts ≤ t ≤ ts+timewindow`; symmetric keeps `|t−ts| ≤ timewindow`.
    pub fn lookup(&self, chain: u64, ts: u64, timewindow: u64, window: SearchWindow) -> &[(u64, usize)] {
        let Some(list) = self.by_chain.get(&chain) else {
            return &[];
        };
        let (lo, hi) = match window {
            SearchWindow::Forward => (ts, ts.saturating_add(timewindow)),
            SearchWindow::Backward => (ts.saturating_sub(timewindow), ts),
            SearchWindow::Symmetric => (
                ts.saturating_sub(timewindow),
                ts.saturating_add(timewindow),
            ),
        };
        let start = list.partition_point(|(t, _)| *t < lo);
        let end = list.partition_point(|(t, _)| *t <= hi);
        &list[start..end]
    }
}

/// Direction the counterpart lookup scans, relative to the examined side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchWindow {
    Forward,
    Backward,
    Symmetric,
}

/// Candidate destination instances on the aliased chain within the window.
pub fn find_by_chain_timestamp<'a>(
    index: &'a ChainTimeIndex,
    chain_value: &U256,
    ts_value: &U256,
    timewindow: u64,
    params: &PairingParams,
    window: SearchWindow,
) -> Option<&'a [(u64, usize)]> {
    let raw_chain = chain_value.to_u64()?;
    let chain = params.resolve_chain(raw_chain);
    let ts = ts_value.to_u64()?;
    Some(index.lookup(chain, ts, timewindow, window))
}

/// Whether all candidate fields for one role extract identical values across
/// every given transaction.
pub fn check_consistency(txs: &[&TransactionInstance], fields: &[&FieldPath]) -> bool {
    if fields.len() < 2 {
        return true;
    }
    for tx in txs {
        let mut values = fields.iter().map(|f| f.resolve(tx).map(|v| v.canonical()));
        let Some(first) = values.next() else {
            return true;
        };
        if first.is_none() || values.any(|v| v != first) {
            return false;
        }
    }
    true
}

/// Whether a field's extracted value varies across the given transactions.
/// A constant value cannot differentiate one transfer from another, so the
/// field fails as an identifier. Note a single transaction always yields a
/// one-element value set, hence `false`.
pub fn is_unique(txs: &[&TransactionInstance], field: &FieldPath) -> bool {
    let mut seen: BTreeSet<Option<CanonicalValue>> = BTreeSet::new();
    for tx in txs {
        seen.insert(field.resolve(tx).map(|v| v.canonical()));
        if seen.len() > 1 {
            return true;
        }
    }
    false
}

/// Why a category produced no validated quintuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    /// No candidate quintuple was available (uninferable category).
    NoCandidates,
    /// No amount/token combination matched any asset flow.
    Phase1Empty,
    /// No destination/chain/timestamp combination located a matching
    /// counterpart transaction.
    Phase2Empty,
    /// Refinement removed every field of the named role.
    Phase3Empty(Role),
}

impl core::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RejectReason::NoCandidates => f.write_str("no-candidates"),
            RejectReason::Phase1Empty => f.write_str("phase1-empty"),
            RejectReason::Phase2Empty => f.write_str("phase2-empty"),
            RejectReason::Phase3Empty(role) => write!(f, "phase3-empty:{role}"),
        }
    }
}

/// Per-phase survivor accounting for one category.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhaseCounts {
    /// Amount×token combinations before and after phase 1.
    pub phase1_in: usize,
    pub phase1_out: usize,
    /// Destination×chain×timestamp combinations before and after phase 2.
    pub phase2_in: usize,
    pub phase2_out: usize,
    /// Per-role survivor counts entering and leaving phase 3.
    pub phase3_in: BTreeMap<Role, usize>,
    pub phase3_out: BTreeMap<Role, usize>,
}

/// Examination result for one category.
#[derive(Debug, Clone)]
pub struct CategoryExam {
    pub key: CategoryKey,
    pub members: usize,
    pub result: Result<Quintuple, RejectReason>,
    pub counts: PhaseCounts,
    pub notes: Diagnostics,
}

/// Whole-side examination report.
#[derive(Debug, Clone)]
pub struct ExaminationReport {
    pub side: Side,
    pub categories: Vec<CategoryExam>,
}

impl ExaminationReport {
    pub fn validated(&self) -> BTreeMap<CategoryKey, Quintuple> {
        self.categories
            .iter()
            .filter_map(|c| c.result.as_ref().ok().map(|q| (c.key, q.clone())))
            .collect()
    }

    pub fn survivor_count(&self) -> usize {
        self.categories.iter().filter(|c| c.result.is_ok()).count()
    }
}

/// Examination options. The per-transaction loop is bounded by a validation
/// sample (members sorted by timestamp then hash, so permuting the dataset
/// cannot change the outcome); a final full-membership pass confirms the
/// chosen quintuple resolves everywhere.
#[derive(Debug, Clone, Copy)]
pub struct ExamineOptions {
    pub validation_sample: usize,
    /// Counterpart settlements strictly follow initiations when true;
    /// symmetric window otherwise.
    pub forward_only: bool,
}

impl Default for ExamineOptions {
    fn default() -> Self {
        ExamineOptions {
            validation_sample: 200,
            forward_only: true,
        }
    }
}

/// Everything the examiner needs to know about one side of the bridge.
pub struct SideData<'a> {
    pub txs: &'a [TransactionInstance],
    pub categories: &'a [Category],
    pub candidates: &'a BTreeMap<CategoryKey, CandidateQuintuple>,
}

struct CounterpartView<'a> {
    txs: &'a [TransactionInstance],
    index: ChainTimeIndex,
    /// tx index → category position.
    category_of: Vec<Option<usize>>,
    /// Per-category destination fields: candidate role-D paths, or every
    /// type-consistent address-like field when the category was never
    /// inferred (breaks the chicken-and-egg between sides).
    dst_fields: Vec<Vec<FieldPath>>,
}

impl<'a> CounterpartView<'a> {
    fn build(side: &SideData<'a>) -> Self {
        let mut category_of = alloc::vec![None; side.txs.len()];
        for (ci, cat) in side.categories.iter().enumerate() {
            for &m in &cat.members {
                category_of[m] = Some(ci);
            }
        }
        let dst_fields = side
            .categories
            .iter()
            .map(|cat| {
                if let Some(cq) = side.candidates.get(&cat.key) {
                    let paths: Vec<FieldPath> =
                        cq.get(Role::Destination).iter().map(|c| c.path.clone()).collect();
                    if !paths.is_empty() {
                        return paths;
                    }
                }
                let sample: Vec<&TransactionInstance> =
                    cat.members.iter().take(3).map(|&m| &side.txs[m]).collect();
                let pf = type_prefilter(cat, &sample);
                pf.get(&Role::Destination)
                    .map(|fields| {
                        fields
                            .iter()
                            .filter_map(|f| FieldPath::parse(f).ok())
                            .collect()
                    })
                    .unwrap_or_default()
            })
            .collect();
        CounterpartView {
            txs: side.txs,
            index: ChainTimeIndex::build(side.txs),
            category_of,
            dst_fields,
        }
    }

    /// Destination-role fields to compare against for a counterpart tx.
    fn destination_fields(&self, tx_index: usize) -> &[FieldPath] {
        match self.category_of[tx_index] {
            Some(ci) => &self.dst_fields[ci],
            None => &[],
        }
    }
}

/// Runs the three examination phases for every category of the examined side
/// against the counterpart side, yielding at most one quintuple per category.
pub fn examine(
    examined: &SideData<'_>,
    counterpart: &SideData<'_>,
    params: &PairingParams,
    opts: &ExamineOptions,
) -> ExaminationReport {
    let side = examined
        .txs
        .first()
        .map(|t| t.side)
        .unwrap_or(Side::Source);
    let window = if opts.forward_only {
        match side {
            Side::Source => SearchWindow::Forward,
            Side::Destination => SearchWindow::Backward,
        }
    } else {
        SearchWindow::Symmetric
    };
    let view = CounterpartView::build(counterpart);
    let mut report = ExaminationReport {
        side,
        categories: Vec::new(),
    };
    for cat in examined.categories {
        report
            .categories
            .push(examine_category(cat, examined, &view, params, opts, window));
    }
    report
}

fn validation_sample<'a>(
    cat: &Category,
    txs: &'a [TransactionInstance],
    cap: usize,
) -> Vec<&'a TransactionInstance> {
    let mut refs: Vec<&TransactionInstance> = cat.members.iter().map(|&m| &txs[m]).collect();
    refs.sort_by_key(|tx| (tx.timestamp, tx.tx_hash));
    refs.truncate(cap.max(1));
    refs
}

fn examine_category(
    cat: &Category,
    examined: &SideData<'_>,
    counterpart: &CounterpartView<'_>,
    params: &PairingParams,
    opts: &ExamineOptions,
    window: SearchWindow,
) -> CategoryExam {
    let mut exam = CategoryExam {
        key: cat.key,
        members: cat.members.len(),
        result: Err(RejectReason::NoCandidates),
        counts: PhaseCounts::default(),
        notes: Diagnostics::new(),
    };
    let Some(cdd) = examined.candidates.get(&cat.key) else {
        return exam;
    };
    if !cdd.is_complete() {
        return exam;
    }
    let sample = validation_sample(cat, examined.txs, opts.validation_sample);
    if sample.len() == 1 {
        exam.notes.push(Diagnostic::new(
            format!("category {}", cat.key),
            "singleton category: the uniqueness criterion cannot hold on one transaction",
        ));
    }

    // Phase 1: filter amount/token candidates against asset flows. A pair
    // survives when it realizes a flow in at least one sampled transaction;
    // support counts how many transactions vouch for it.
    let a_paths = cdd.paths(Role::Amount);
    let t_paths = cdd.paths(Role::Token);
    exam.counts.phase1_in = a_paths.len() * t_paths.len();
    let mut at_support: BTreeMap<(&FieldPath, &FieldPath), usize> = BTreeMap::new();
    for tx in &sample {
        let flows = analyze_asset_flow(tx);
        if flows.is_empty() {
            continue;
        }
        for fa in &a_paths {
            let Some(Value::Uint(va)) = fa.resolve(tx) else {
                continue;
            };
            for ft in &t_paths {
                let Some(vt) = ft.resolve(tx) else {
                    continue;
                };
                if flow_match(&flows, &va, &vt, params, tx.chain) {
                    *at_support.entry((fa, ft)).or_insert(0) += 1;
                }
            }
        }
    }
    exam.counts.phase1_out = at_support.len();
    if at_support.is_empty() {
        exam.result = Err(RejectReason::Phase1Empty);
        return exam;
    }

    // Phase 2: locate counterpart transactions by chain and timestamp, then
    // match the extracted destination address against the counterpart's own
    // destination-candidate fields.
    let d_paths = cdd.paths(Role::Destination);
    let c_paths = cdd.paths(Role::Chain);
    let ts_paths = cdd.paths(Role::Timestamp);
    exam.counts.phase2_in = d_paths.len() * c_paths.len() * ts_paths.len();
    let mut dct_support: BTreeMap<(&FieldPath, &FieldPath, &FieldPath), usize> = BTreeMap::new();
    for tx in &sample {
        for fd in &d_paths {
            let Some(vd) = fd.resolve(tx).map(|v| v.canonical()) else {
                continue;
            };
            for fc in &c_paths {
                let Some(Value::Uint(vc)) = fc.resolve(tx) else {
                    continue;
                };
                for fts in &ts_paths {
                    let Some(Value::Uint(vts)) = fts.resolve(tx) else {
                        continue;
                    };
                    let Some(located) = find_by_chain_timestamp(
                        &counterpart.index,
                        &vc,
                        &vts,
                        params.timewindow,
                        params,
                        window,
                    ) else {
                        exam.notes.push(Diagnostic::new(
                            format!("category {}", cat.key),
                            format!("chain value in `{fc}` is not a u64; combination skipped"),
                        ));
                        continue;
                    };
                    let matched = located.iter().any(|&(_, di)| {
                        let dst_tx = &counterpart.txs[di];
                        counterpart
                            .destination_fields(di)
                            .iter()
                            .any(|df| df.resolve(dst_tx).map(|v| v.canonical()) == Some(vd.clone()))
                    });
                    if matched {
                        *dct_support.entry((fd, fc, fts)).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    exam.counts.phase2_out = dct_support.len();
    if dct_support.is_empty() {
        exam.result = Err(RejectReason::Phase2Empty);
        return exam;
    }

    // Collapse combination support onto per-role field support.
    let mut role_support: BTreeMap<Role, BTreeMap<&FieldPath, usize>> = BTreeMap::new();
    for ((fa, ft), n) in &at_support {
        *role_support.entry(Role::Amount).or_default().entry(fa).or_insert(0) += n;
        *role_support.entry(Role::Token).or_default().entry(ft).or_insert(0) += n;
    }
    for ((fd, fc, fts), n) in &dct_support {
        *role_support.entry(Role::Destination).or_default().entry(fd).or_insert(0) += n;
        *role_support.entry(Role::Chain).or_default().entry(fc).or_insert(0) += n;
        *role_support.entry(Role::Timestamp).or_default().entry(fts).or_insert(0) += n;
    }

    // Phase 3: refine roles that still carry more than one field. Consistent
    // fields are equivalent (any may be selected); otherwise constant-valued
    // fields are removed.
    let mut chosen: BTreeMap<Role, FieldPath> = BTreeMap::new();
    for role in Role::ALL {
        let support = role_support.get(&role).expect("all roles populated");
        let mut fields: Vec<&FieldPath> = support.keys().copied().collect();
        exam.counts.phase3_in.insert(role, fields.len());
        if fields.len() > 1 && !check_consistency(&sample, &fields) {
            fields.retain(|f| is_unique(&sample, f));
            if fields.is_empty() {
                exam.counts.phase3_out.insert(role, 0);
                exam.result = Err(RejectReason::Phase3Empty(role));
                return exam;
            }
        }
        exam.counts.phase3_out.insert(role, fields.len());
        // Highest validation support wins; ties go to the lexicographically
        // smallest rendered path (which is the whole rule for consistent
        // fields, whose supports are interchangeable).
        let best = fields
            .iter()
            .min_by(|a, b| {
                support[*b]
                    .cmp(&support[*a])
                    .then_with(|| a.rendered().cmp(b.rendered()))
            })
            .expect("non-empty");
        chosen.insert(role, (*best).clone());
    }

    let quintuple = Quintuple::from_map(chosen).expect("all roles chosen");
    // Final full-membership pass: the chosen paths must resolve in every
    // member instance, not just the validation sample.
    for &m in &cat.members {
        let tx = &examined.txs[m];
        for (role, path) in quintuple.iter() {
            if path.resolve(tx).is_none() {
                exam.notes.push(Diagnostic::new(
                    format!("category {}", cat.key),
                    format!(
                        "chosen {role} field `{path}` does not resolve in member {}",
                        tx.tx_hash
                    ),
                ));
            }
        }
    }
    exam.result = Ok(quintuple);
    exam
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Address, DecodedCall, LogEntry, Record, TxHash};
    use alloc::vec;

    fn addr(b: u8) -> Address {
        Address([b; 20])
    }

    fn transfer_log(token: Address, from: Address, to: Address, amount: u64) -> LogEntry {
        LogEntry {
            event: "Transfer".into(),
            emitter: token,
            record: Record::from_pairs([
                ("from", Value::Address(from)),
                ("to", Value::Address(to)),
                ("value", Value::uint_u64(amount)),
            ])
            .unwrap(),
        }
    }

    fn tx(
        sender: Address,
        native: u64,
        logs: Vec<LogEntry>,
        args: Record,
        ts: u64,
        hash: u8,
    ) -> TransactionInstance {
        TransactionInstance::new(
            1,
            TxHash([hash; 32]),
            1,
            ts,
            sender,
            addr(0xaa),
            U256::from_u64(native),
            DecodedCall {
                function: "f".into(),
                args,
            },
            logs,
            Side::Source,
        )
        .unwrap()
    }

    #[test]
    fn native_value_yields_native_outflow() {
        let t = tx(addr(1), 1_000_000_000_000_000_000, vec![], Record::new(), 100, 1);
        assert_eq!(
            analyze_asset_flow(&t),
            vec![AssetFlow {
                direction: FlowDirection::Outflow,
                token: FlowToken::Native,
                amount: U256::from_u64(1_000_000_000_000_000_000),
            }]
        );
    }

    #[test]
    fn sender_transfer_yields_token_outflow() {
        let user = addr(1);
        let pool = addr(2);
        let token = addr(9);
        let t = tx(
            user,
            0,
            vec![transfer_log(token, user, pool, 500)],
            Record::new(),
            100,
            1,
        );
        assert_eq!(
            analyze_asset_flow(&t),
            vec![AssetFlow {
                direction: FlowDirection::Outflow,
                token: FlowToken::Contract(token),
                amount: U256::from_u64(500),
            }]
        );
        // Transfer toward the sender is an inflow; zero amounts are dropped;
        // third-party transfers are ignored.
        let t = tx(
            user,
            0,
            vec![
                transfer_log(token, pool, user, 300),
                transfer_log(token, user, pool, 0),
                transfer_log(token, addr(5), addr(6), 77),
            ],
            Record::new(),
            100,
            2,
        );
        assert_eq!(
            analyze_asset_flow(&t),
            vec![AssetFlow {
                direction: FlowDirection::Inflow,
                token: FlowToken::Contract(token),
                amount: U256::from_u64(300),
            }]
        );
    }

    #[test]
    fn flow_match_requires_exact_amount() {
        let token = addr(9);
        let flows = vec![AssetFlow {
            direction: FlowDirection::Outflow,
            token: FlowToken::Contract(token),
            amount: U256::from_u64(500),
        }];
        let params = PairingParams::default();
        let vt = Value::Address(token);
        assert!(flow_match(&flows, &U256::from_u64(500), &vt, &params, 1));
        // Exact match in phase 1: one off fails.
        assert!(!flow_match(&flows, &U256::from_u64(499), &vt, &params, 1));
        // Different token fails even with the right amount.
        assert!(!flow_match(
            &flows,
            &U256::from_u64(500),
            &Value::Address(addr(8)),
            &params,
            1
        ));
    }

    #[test]
    fn flow_match_honors_aliases_and_native() {
        let mut params = PairingParams::default();
        let weth = addr(0xee);
        params.token_alias.insert((1, weth), "NATIVE".into());
        let flows = vec![AssetFlow {
            direction: FlowDirection::Outflow,
            token: FlowToken::Native,
            amount: U256::from_u64(10),
        }];
        // A wrapped-native alias matches a native flow.
        assert!(flow_match(
            &flows,
            &U256::from_u64(10),
            &Value::Address(weth),
            &params,
            1
        ));
        // Symbol equivalence through the alias table.
        let usdc = addr(0x11);
        params.token_alias.insert((1, usdc), "USDC".into());
        let flows = vec![AssetFlow {
            direction: FlowDirection::Outflow,
            token: FlowToken::Contract(usdc),
            amount: U256::from_u64(7),
        }];
        assert!(flow_match(
            &flows,
            &U256::from_u64(7),
            &Value::Text("USDC".into()),
            &params,
            1
        ));
    }

    fn dst_instance(chain: u64, ts: u64, hash: u8) -> TransactionInstance {
        TransactionInstance::new(
            chain,
            TxHash([hash; 32]),
            1,
            ts,
            addr(7),
            addr(8),
            U256::zero(),
            DecodedCall {
                function: "g".into(),
                args: Record::new(),
            },
            vec![],
            Side::Destination,
        )
        .unwrap()
    }

    #[test]
    fn window_lookup_includes_and_excludes() {
        let txs = vec![
            dst_instance(56, 1180, 1),
            dst_instance(56, 8300, 2),
            dst_instance(56, 1000, 3),
        ];
        let index = ChainTimeIndex::build(&txs);
        let params = PairingParams::default();
        // timewindow 7200, V_Ts 1000 forward: 1180 in, 8300 out (7300 > 7200).
        let hits = find_by_chain_timestamp(
            &index,
            &U256::from_u64(56),
            &U256::from_u64(1000),
            7200,
            &params,
            SearchWindow::Forward,
        )
        .unwrap();
        let hashes: Vec<u8> = hits.iter().map(|(_, i)| txs[*i].tx_hash.0[0]).collect();
        assert_eq!(hashes, vec![3, 1]);
        // Boundary is inclusive.
        let hits = find_by_chain_timestamp(
            &index,
            &U256::from_u64(56),
            &U256::from_u64(1100),
            7200,
            &params,
            SearchWindow::Forward,
        )
        .unwrap();
        assert!(hits.iter().any(|(t, _)| *t == 8300));
    }

    #[test]
    fn window_lookup_resolves_bridge_internal_chain_ids() {
        let txs = vec![dst_instance(56, 1180, 1)];
        let index = ChainTimeIndex::build(&txs);
        let mut params = PairingParams::default();
        params.chain_alias.insert(102, 56);
        let hits = find_by_chain_timestamp(
            &index,
            &U256::from_u64(102),
            &U256::from_u64(1000),
            7200,
            &params,
            SearchWindow::Forward,
        )
        .unwrap();
        assert_eq!(hits.len(), 1);
        // An unknown chain value finds nothing.
        let hits = find_by_chain_timestamp(
            &index,
            &U256::from_u64(999),
            &U256::from_u64(1000),
            7200,
            &params,
            SearchWindow::Forward,
        )
        .unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn backward_window_selects_earlier_counterparts() {
        let txs = vec![dst_instance(1, 500, 1), dst_instance(1, 2000, 2)];
        let index = ChainTimeIndex::build(&txs);
        let hits = index.lookup(1, 1000, 600, SearchWindow::Backward);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0, 500);
        let hits = index.lookup(1, 1000, 600, SearchWindow::Symmetric);
        assert_eq!(hits.len(), 1);
    }

    #[test]
    fn consistency_over_mirrored_and_diverging_fields() {
        let mk = |a: u8, b: u8, hash: u8| {
            tx(
                addr(1),
                0,
                vec![],
                Record::from_pairs([
                    ("x", Value::Address(addr(a))),
                    ("y", Value::Address(addr(b))),
                ])
                .unwrap(),
                100,
                hash,
            )
        };
        let p_x = FieldPath::parse("transaction[f].x").unwrap();
        let p_y = FieldPath::parse("transaction[f].y").unwrap();
        let mirrored = [mk(3, 3, 1), mk(4, 4, 2)];
        let refs: Vec<&TransactionInstance> = mirrored.iter().collect();
        assert!(check_consistency(&refs, &[&p_x, &p_y]));
        let diverging = [mk(3, 3, 1), mk(4, 5, 2)];
        let refs: Vec<&TransactionInstance> = diverging.iter().collect();
        assert!(!check_consistency(&refs, &[&p_x, &p_y]));
    }

    #[test]
    fn uniqueness_rejects_constants_and_singletons() {
        let mk = |a: u8, hash: u8| {
            tx(
                addr(1),
                0,
                vec![],
                Record::from_pairs([("x", Value::Address(addr(a)))]).unwrap(),
                100,
                hash,
            )
        };
        let p = FieldPath::parse("transaction[f].x").unwrap();
        let constant: Vec<_> = (0..100).map(|i| mk(9, i)).collect();
        let refs: Vec<&TransactionInstance> = constant.iter().collect();
        assert!(!is_unique(&refs, &p));
        let varying = [mk(1, 1), mk(2, 2)];
        let refs: Vec<&TransactionInstance> = varying.iter().collect();
        assert!(is_unique(&refs, &p));
        // A single transaction always yields a one-element value set.
        let single = [mk(1, 1)];
        let refs: Vec<&TransactionInstance> = single.iter().collect();
        assert!(!is_unique(&refs, &p));
    }

    #[test]
    fn checksummed_and_lowercase_addresses_compare_equal() {
        // Address-as-text values canonicalize before comparison.
        let as_text = Value::Text("0xAB5801a7D398351b8bE11C439e05C5B3259aeC9B".into());
        let as_addr = Value::Address(
            Address::from_hex("0xab5801a7d398351b8be11c439e05c5b3259aec9b").unwrap(),
        );
        assert_eq!(as_text.canonical(), as_addr.canonical());
    }
}
