//! Cross-chain pairing: extract identifier values through validated
//! quintuples, match source/destination instances under the formal rules,
//! and score against ground truth.
//!
//! Rule set per candidate pair (all six must hold):
//!   1. role        — one side initiates, the other settles
//!   2. destination — equal after address canonicalization
//!   3. token       — equivalent under the token alias table
//!   4. amount      — |A_s − A_d| / A_s ≤ fee_rate (the denominator is the
//!      source amount, by definition; inclusive boundary)
//!   5. chain       — each side's counterpart chain is the other's own chain
//!   6. timestamp   — |Ts_s − Ts_d| ≤ timewindow (inclusive)
//!
//! A source matching several destinations takes the earliest settlement;
//! each destination settles exactly one transfer (greedy in ascending
//! source-timestamp order).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::model::{
    CanonicalValue, CategoryKey, Diagnostic, Diagnostics, FeeRate, PairingParams, Quintuple, Role,
    Side, TransactionInstance, TxHash, Value, U256,
};

/// The five extracted identifier values of one instance, canonicalized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identifier {
    /// Canonical destination: lowercase hex address or verbatim text.
    pub destination: String,
    /// Counterpart chain, resolved through the chain alias table.
    pub counterpart_chain: u64,
    /// Canonical token identity (alias symbol or `<chain>:<address>`).
    pub token: String,
    pub amount: U256,
    pub timestamp: u64,
    pub side: Side,
    pub own_chain: u64,
    pub tx_hash: TxHash,
    /// Position in the dataset the identifier was extracted from.
    pub tx_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("role `{role}` path `{path}` does not resolve")]
    Unresolvable { role: Role, path: String },
    #[error("role `{role}` value has an unusable kind")]
    BadKind { role: Role },
}

fn canonical_destination(v: &Value) -> Option<String> {
    match v.canonical() {
        CanonicalValue::Addr(a) => Some(a.to_hex()),
        CanonicalValue::Text(t) => Some(t),
        CanonicalValue::Bytes(b) => Some(format!("0x{}", hex::encode(b))),
        _ => None,
    }
}

/// Resolves the five quintuple paths in one instance and canonicalizes the
/// values. The timestamp falls back to the instance timestamp through the
/// pseudo-field, which resolves like any other path.
pub fn extract_identifier(
    tx: &TransactionInstance,
    tx_index: usize,
    qt: &Quintuple,
    params: &PairingParams,
) -> Result<Identifier, ExtractError> {
    let resolve = |role: Role| -> Result<Value, ExtractError> {
        let path = qt.get(role);
        path.resolve(tx).ok_or_else(|| ExtractError::Unresolvable {
            role,
            path: path.rendered().into(),
        })
    };
    let destination = canonical_destination(&resolve(Role::Destination)?)
        .ok_or(ExtractError::BadKind { role: Role::Destination })?;
    let counterpart_chain = match resolve(Role::Chain)?.canonical() {
        CanonicalValue::Num(u) => u
            .to_u64()
            .map(|c| params.resolve_chain(c))
            .ok_or(ExtractError::BadKind { role: Role::Chain })?,
        _ => return Err(ExtractError::BadKind { role: Role::Chain }),
    };
    let token_value = resolve(Role::Token)?;
    let token = params
        .canonical_token_value(tx.chain, &token_value)
        .ok_or(ExtractError::BadKind { role: Role::Token })?;
    let amount = match resolve(Role::Amount)? {
        Value::Uint(u) => u,
        _ => return Err(ExtractError::BadKind { role: Role::Amount }),
    };
    let timestamp = match resolve(Role::Timestamp)? {
        Value::Uint(u) => u.to_u64().ok_or(ExtractError::BadKind { role: Role::Timestamp })?,
        _ => return Err(ExtractError::BadKind { role: Role::Timestamp }),
    };
    Ok(Identifier {
        destination,
        counterpart_chain,
        token,
        amount,
        timestamp,
        side: tx.side,
        own_chain: tx.chain,
        tx_hash: tx.tx_hash,
        tx_index,
    })
}

/// Extracts identifiers for every instance whose category has a validated
/// quintuple; instances with unresolvable paths are excluded with a
/// diagnostic.
pub fn extract_all(
    txs: &[TransactionInstance],
    categories: &[crate::categorize::Category],
    quintuples: &BTreeMap<CategoryKey, Quintuple>,
    params: &PairingParams,
) -> (Vec<Identifier>, Diagnostics) {
    let mut out = Vec::new();
    let mut diags = Diagnostics::new();
    for cat in categories {
        let Some(qt) = quintuples.get(&cat.key) else {
            continue;
        };
        for &i in &cat.members {
            match extract_identifier(&txs[i], i, qt, params) {
                Ok(id) => out.push(id),
                Err(e) => diags.push(Diagnostic::new(
                    format!("tx {}", txs[i].tx_hash),
                    format!("excluded from pairing: {e}"),
                )),
            }
        }
    }
    (out, diags)
}

/// Outcome of one rule evaluation, kept for the pair trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleCheck {
    pub rule: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Full six-rule trace for one candidate pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTrace {
    pub checks: Vec<RuleCheck>,
    pub matched: bool,
}

/// Evaluates the six pairing rules over two identifiers, recording operands
/// and verdicts. Rule 4 divides by the source amount; a zero source amount
/// makes the rule undefined and fails the match with a flag.
pub fn match_pair(src: &Identifier, dst: &Identifier, params: &PairingParams) -> RuleTrace {
    let mut checks = Vec::with_capacity(6);

    let role_ok = src.side == Side::Source && dst.side == Side::Destination;
    checks.push(RuleCheck {
        rule: "role",
        passed: role_ok,
        detail: format!("{} / {}", src.side.as_str(), dst.side.as_str()),
    });

    let dest_ok = src.destination == dst.destination;
    checks.push(RuleCheck {
        rule: "destination",
        passed: dest_ok,
        detail: format!("{} = {}", src.destination, dst.destination),
    });

    let token_ok = src.token == dst.token;
    checks.push(RuleCheck {
        rule: "token",
        passed: token_ok,
        detail: format!("{} = {}", src.token, dst.token),
    });

    // |A_s − A_d| · 1e6 ≤ ppm · A_s, exact in big integers.
    let a_s = src.amount.as_biguint();
    let a_d = dst.amount.as_biguint();
    let amount_ok = if a_s == &BigUint::ZERO {
        false
    } else {
        let diff = if a_s >= a_d { a_s - a_d } else { a_d - a_s };
        diff * BigUint::from(FeeRate::DENOM)
            <= BigUint::from(params.fee_rate.ppm()) * a_s
    };
    checks.push(RuleCheck {
        rule: "amount",
        passed: amount_ok,
        detail: if src.amount.is_zero() {
            "source amount is zero: rule undefined".into()
        } else {
            format!(
                "|{} - {}| / {} vs fee_rate {}",
                src.amount,
                dst.amount,
                src.amount,
                params.fee_rate.as_fraction()
            )
        },
    });

    let chain_ok =
        dst.own_chain == src.counterpart_chain && src.own_chain == dst.counterpart_chain;
    checks.push(RuleCheck {
        rule: "chain",
        passed: chain_ok,
        detail: format!(
            "{}→{} / {}→{}",
            src.own_chain, src.counterpart_chain, dst.own_chain, dst.counterpart_chain
        ),
    });

    let gap = src.timestamp.abs_diff(dst.timestamp);
    let ts_ok = gap <= params.timewindow;
    checks.push(RuleCheck {
        rule: "timestamp",
        passed: ts_ok,
        detail: format!("|Δ| = {gap} vs timewindow {}", params.timewindow),
    });

    let matched = checks.iter().all(|c| c.passed);
    RuleTrace { checks, matched }
}

/// A matched (source, destination) pair with the values and rule trace that
/// justified it.
#[derive(Debug, Clone)]
pub struct Pair {
    pub src: Identifier,
    pub dst: Identifier,
    pub trace: RuleTrace,
}

fn bucket_of(ts: u64, width: u64) -> u64 {
    ts / width.max(1)
}

/// Matches every source identifier against an index of destination
/// identifiers keyed by (token, destination, chain) and time-bucketed with
/// bucket width = timewindow (three adjacent buckets cover the window).
/// Sources are processed in ascending (timestamp, hash) order; each
/// destination is consumed at most once; among rule-satisfying candidates
/// the earliest destination timestamp wins, ties by hash.
pub fn pair_all(
    src_ids: &[Identifier],
    dst_ids: &[Identifier],
    params: &PairingParams,
) -> Vec<Pair> {
    let mut index: BTreeMap<(&str, &str, u64, u64), Vec<usize>> = BTreeMap::new();
    for (i, d) in dst_ids.iter().enumerate() {
        let key = (
            d.token.as_str(),
            d.destination.as_str(),
            d.own_chain,
            bucket_of(d.timestamp, params.timewindow),
        );
        index.entry(key).or_default().push(i);
    }
    let mut order: Vec<usize> = (0..src_ids.len()).collect();
    order.sort_by_key(|&i| (src_ids[i].timestamp, src_ids[i].tx_hash));

    let mut consumed: BTreeSet<usize> = BTreeSet::new();
    let mut pairs = Vec::new();
    for si in order {
        let s = &src_ids[si];
        let center = bucket_of(s.timestamp, params.timewindow);
        let mut best: Option<(u64, TxHash, usize, RuleTrace)> = None;
        for bucket in center.saturating_sub(1)..=center.saturating_add(1) {
            let key = (
                s.token.as_str(),
                s.destination.as_str(),
                s.counterpart_chain,
                bucket,
            );
            let Some(candidates) = index.get(&key) else {
                continue;
            };
            for &di in candidates {
                if consumed.contains(&di) {
                    continue;
                }
                let d = &dst_ids[di];
                let trace = match_pair(s, d, params);
                if !trace.matched {
                    continue;
                }
                let rank = (d.timestamp, d.tx_hash);
                if best
                    .as_ref()
                    .map(|(bt, bh, _, _)| rank < (*bt, *bh))
                    .unwrap_or(true)
                {
                    best = Some((d.timestamp, d.tx_hash, di, trace));
                }
            }
        }
        if let Some((_, _, di, trace)) = best {
            consumed.insert(di);
            pairs.push(Pair {
                src: s.clone(),
                dst: dst_ids[di].clone(),
                trace,
            });
        }
    }
    pairs
}

/// Precision/recall/F1 against a ground-truth pair set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Standard definitions; empty output scores zero precision by convention,
/// and F1 is zero when precision + recall is.
pub fn score(pairs: &[Pair], truth: &BTreeSet<(TxHash, TxHash)>) -> Metrics {
    let tp = pairs
        .iter()
        .filter(|p| truth.contains(&(p.src.tx_hash, p.dst.tx_hash)))
        .count();
    let fp = pairs.len() - tp;
    let fn_ = truth.len().saturating_sub(tp);
    let precision = if pairs.is_empty() {
        0.0
    } else {
        tp as f64 / pairs.len() as f64
    };
    let recall = if truth.is_empty() {
        0.0
    } else {
        tp as f64 / truth.len() as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Metrics {
        precision,
        recall,
        f1,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn ident(
        side: Side,
        own_chain: u64,
        counterpart: u64,
        dest: &str,
        token: &str,
        amount: u64,
        ts: u64,
        hash_byte: u8,
    ) -> Identifier {
        Identifier {
            destination: dest.into(),
            counterpart_chain: counterpart,
            token: token.into(),
            amount: U256::from_u64(amount),
            timestamp: ts,
            side,
            own_chain,
            tx_hash: TxHash([hash_byte; 32]),
            tx_index: hash_byte as usize,
        }
    }

    fn params() -> PairingParams {
        PairingParams::default()
    }

    #[test]
    fn amount_rule_inclusive_boundaries() {
        let p = params();
        let s = ident(Side::Source, 1, 56, "0xd", "USDC", 100, 1000, 1);
        // 15% discrepancy within 20%.
        let d = ident(Side::Destination, 56, 1, "0xd", "USDC", 85, 1500, 2);
        assert!(match_pair(&s, &d, &p).matched);
        // 21% discrepancy fails.
        let d = ident(Side::Destination, 56, 1, "0xd", "USDC", 79, 1500, 2);
        assert!(!match_pair(&s, &d, &p).matched);
        // Exactly 20% passes (inclusive).
        let d = ident(Side::Destination, 56, 1, "0xd", "USDC", 80, 1500, 2);
        assert!(match_pair(&s, &d, &p).matched);
    }

    #[test]
    fn timestamp_rule_inclusive_boundary() {
        let p = params();
        let s = ident(Side::Source, 1, 56, "0xd", "USDC", 100, 1000, 1);
        let d = ident(Side::Destination, 56, 1, "0xd", "USDC", 100, 1000 + 7200, 2);
        assert!(match_pair(&s, &d, &p).matched);
        let d = ident(Side::Destination, 56, 1, "0xd", "USDC", 100, 1000 + 7201, 2);
        let trace = match_pair(&s, &d, &p);
        assert!(!trace.matched);
        assert!(!trace.checks.iter().find(|c| c.rule == "timestamp").unwrap().passed);
    }

    #[test]
    fn amount_rule_denominator_is_source_amount() {
        let p = params();
        // |125-100|/125 = 0.2 passes; |100-125|/100 = 0.25 fails.
        let s_big = ident(Side::Source, 1, 56, "0xd", "USDC", 125, 1000, 1);
        let d_small = ident(Side::Destination, 56, 1, "0xd", "USDC", 100, 1000, 2);
        assert!(match_pair(&s_big, &d_small, &p).matched);
        let s_small = ident(Side::Source, 1, 56, "0xd", "USDC", 100, 1000, 1);
        let d_big = ident(Side::Destination, 56, 1, "0xd", "USDC", 125, 1000, 2);
        assert!(!match_pair(&s_small, &d_big, &p).matched);
    }

    #[test]
    fn zero_source_amount_is_flagged_no_match() {
        let p = params();
        let s = ident(Side::Source, 1, 56, "0xd", "USDC", 0, 1000, 1);
        let d = ident(Side::Destination, 56, 1, "0xd", "USDC", 0, 1000, 2);
        let trace = match_pair(&s, &d, &p);
        assert!(!trace.matched);
        let amount = trace.checks.iter().find(|c| c.rule == "amount").unwrap();
        assert!(amount.detail.contains("undefined"));
    }

    #[test]
    fn chain_rule_requires_both_directions() {
        let p = params();
        let s = ident(Side::Source, 1, 56, "0xd", "USDC", 100, 1000, 1);
        // Destination lives on chain 56 but points back at chain 7: no match.
        let d = ident(Side::Destination, 56, 7, "0xd", "USDC", 100, 1000, 2);
        assert!(!match_pair(&s, &d, &p).matched);
    }

    #[test]
    fn earliest_destination_wins() {
        let p = params();
        let s = ident(Side::Source, 1, 56, "0xd", "USDC", 100, 50, 1);
        let d_late = ident(Side::Destination, 56, 1, "0xd", "USDC", 100, 150, 2);
        let d_early = ident(Side::Destination, 56, 1, "0xd", "USDC", 100, 100, 3);
        let pairs = pair_all(&[s], &[d_late, d_early], &p);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].dst.timestamp, 100);
    }

    #[test]
    fn unmatched_source_counts_toward_recall_loss() {
        let p = params();
        let s = ident(Side::Source, 1, 56, "0xd", "USDC", 100, 50, 1);
        let pairs = pair_all(std::slice::from_ref(&s), &[], &p);
        assert!(pairs.is_empty());
        let mut truth = BTreeSet::new();
        truth.insert((s.tx_hash, TxHash([9u8; 32])));
        let m = score(&pairs, &truth);
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f1, 0.0);
        assert_eq!(m.false_negatives, 1);
    }

    #[test]
    fn perfect_pairing_scores_ones() {
        let p = params();
        let s = ident(Side::Source, 1, 56, "0xd", "USDC", 100, 50, 1);
        let d = ident(Side::Destination, 56, 1, "0xd", "USDC", 95, 120, 2);
        let pairs = pair_all(std::slice::from_ref(&s), std::slice::from_ref(&d), &p);
        let mut truth = BTreeSet::new();
        truth.insert((s.tx_hash, d.tx_hash));
        let m = score(&pairs, &truth);
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn destination_consumed_at_most_once() {
        let p = params();
        let s1 = ident(Side::Source, 1, 56, "0xd", "USDC", 100, 50, 1);
        let s2 = ident(Side::Source, 1, 56, "0xd", "USDC", 100, 60, 2);
        let d = ident(Side::Destination, 56, 1, "0xd", "USDC", 100, 120, 3);
        let pairs = pair_all(&[s1, s2], &[d], &p);
        assert_eq!(pairs.len(), 1);
        // Greedy ascending source order: the earlier source takes it.
        assert_eq!(pairs[0].src.timestamp, 50);
    }
}
