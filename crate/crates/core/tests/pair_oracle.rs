//! The indexed pairer against a brute-force all-pairs oracle with the same
//! tie-break and consumption policy, plus the tolerance-monotonicity
//! property (checked with consumption disabled).

use std::collections::BTreeSet;

use proptest::prelude::*;

use xbridge_core::model::{FeeRate, PairingParams, Side, TxHash, U256};
use xbridge_core::pair::{match_pair, pair_all, Identifier, Pair};

/// Brute force: evaluate the rules over every (source, destination) pair,
/// then apply the identical consumption policy (ascending source timestamp,
/// earliest destination, ties by hash).
fn pair_all_bruteforce(
    src: &[Identifier],
    dst: &[Identifier],
    params: &PairingParams,
) -> Vec<(TxHash, TxHash)> {
    let mut order: Vec<usize> = (0..src.len()).collect();
    order.sort_by_key(|&i| (src[i].timestamp, src[i].tx_hash));
    let mut consumed: BTreeSet<usize> = BTreeSet::new();
    let mut out = Vec::new();
    for si in order {
        let s = &src[si];
        let mut best: Option<(u64, TxHash, usize)> = None;
        for (di, d) in dst.iter().enumerate() {
            if consumed.contains(&di) {
                continue;
            }
            if !match_pair(s, d, params).matched {
                continue;
            }
            let rank = (d.timestamp, d.tx_hash);
            if best.map(|(t, h, _)| rank < (t, h)).unwrap_or(true) {
                best = Some((d.timestamp, d.tx_hash, di));
            }
        }
        if let Some((_, _, di)) = best {
            consumed.insert(di);
            out.push((s.tx_hash, dst[di].tx_hash));
        }
    }
    out
}

/// Every rule-satisfying (source, destination) combination, no selection and
/// no consumption: the monotone core of the pairing relation.
fn all_matching_pairs(
    src: &[Identifier],
    dst: &[Identifier],
    params: &PairingParams,
) -> BTreeSet<(TxHash, TxHash)> {
    let mut out = BTreeSet::new();
    for s in src {
        for d in dst {
            if match_pair(s, d, params).matched {
                out.insert((s.tx_hash, d.tx_hash));
            }
        }
    }
    out
}

fn hash_of(n: u64) -> TxHash {
    let mut b = [0u8; 32];
    b[..8].copy_from_slice(&n.to_be_bytes());
    TxHash(b)
}

#[derive(Debug, Clone)]
struct RawId {
    dest: u8,
    token: u8,
    amount: u64,
    ts: u64,
    hash: u64,
}

fn ident(raw: &RawId, side: Side) -> Identifier {
    let (own, counterpart) = match side {
        Side::Source => (1, 56),
        Side::Destination => (56, 1),
    };
    Identifier {
        destination: format!("0xd{}", raw.dest % 6),
        counterpart_chain: counterpart,
        token: format!("TK{}", raw.token % 3),
        amount: U256::from_u64(raw.amount),
        timestamp: raw.ts,
        side,
        own_chain: own,
        tx_hash: hash_of(raw.hash),
        tx_index: 0,
    }
}

fn raw_id_strategy(max_n: usize) -> impl Strategy<Value = Vec<RawId>> {
    proptest::collection::vec(
        (0u8..6, 0u8..3, 50u64..150, 0u64..20_000, any::<u64>()).prop_map(
            |(dest, token, amount, ts, hash)| RawId {
                dest,
                token,
                amount,
                ts,
                hash,
            },
        ),
        0..max_n,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Index/oracle equivalence: exact set and order equality on randomized
    /// instances dense enough to force multi-matches and consumption races.
    #[test]
    fn indexed_pairer_equals_bruteforce(
        src_raw in raw_id_strategy(120),
        dst_raw in raw_id_strategy(120),
        tw in 1u64..5_000,
        ppm in 0u32..=400_000,
    ) {
        let params = PairingParams {
            timewindow: tw,
            fee_rate: FeeRate::from_ppm(ppm).unwrap(),
            ..Default::default()
        };
        let src: Vec<Identifier> = src_raw.iter().map(|r| ident(r, Side::Source)).collect();
        let dst: Vec<Identifier> = dst_raw.iter().map(|r| ident(r, Side::Destination)).collect();
        let fast: Vec<(TxHash, TxHash)> = pair_all(&src, &dst, &params)
            .iter()
            .map(|p: &Pair| (p.src.tx_hash, p.dst.tx_hash))
            .collect();
        let slow = pair_all_bruteforce(&src, &dst, &params);
        prop_assert_eq!(fast, slow);
    }

    /// Enlarging timewindow or fee_rate never removes a pair once the
    /// consumption constraint is lifted.
    #[test]
    fn tolerances_are_monotone_without_consumption(
        src_raw in raw_id_strategy(60),
        dst_raw in raw_id_strategy(60),
        tw in 1u64..3_000,
        ppm in 0u32..=300_000,
        tw_extra in 0u64..3_000,
        ppm_extra in 0u32..=300_000,
    ) {
        let narrow = PairingParams {
            timewindow: tw,
            fee_rate: FeeRate::from_ppm(ppm).unwrap(),
            ..Default::default()
        };
        let wide = PairingParams {
            timewindow: tw + tw_extra,
            fee_rate: FeeRate::from_ppm(ppm + ppm_extra).unwrap(),
            ..narrow.clone()
        };
        let src: Vec<Identifier> = src_raw.iter().map(|r| ident(r, Side::Source)).collect();
        let dst: Vec<Identifier> = dst_raw.iter().map(|r| ident(r, Side::Destination)).collect();
        let narrow_pairs = all_matching_pairs(&src, &dst, &narrow);
        let wide_pairs = all_matching_pairs(&src, &dst, &wide);
        prop_assert!(narrow_pairs.is_subset(&wide_pairs));
    }

    /// No destination appears twice; no source appears twice.
    #[test]
    fn pairing_is_one_to_one(
        src_raw in raw_id_strategy(100),
        dst_raw in raw_id_strategy(100),
    ) {
        let params = PairingParams::default();
        let src: Vec<Identifier> = src_raw.iter().map(|r| ident(r, Side::Source)).collect();
        let dst: Vec<Identifier> = dst_raw.iter().map(|r| ident(r, Side::Destination)).collect();
        let pairs = pair_all(&src, &dst, &params);
        let mut seen_src = BTreeSet::new();
        let mut seen_dst = BTreeSet::new();
        for p in &pairs {
            prop_assert!(seen_src.insert(p.src.tx_hash));
            prop_assert!(seen_dst.insert(p.dst.tx_hash));
        }
    }

    /// Rule-4 asymmetry: reversing operands changes the verdict whenever the
    /// discrepancy ratio straddles the rate from the two denominators.
    #[test]
    fn rule4_asymmetry_holds(base in 100u64..10_000) {
        let params = PairingParams::default(); // 20%
        let big = base * 5 / 4; // |big-base|/big = 0.2, |big-base|/base = 0.25
        let s_big = ident(&RawId { dest: 0, token: 0, amount: big, ts: 0, hash: 1 }, Side::Source);
        let d_small = ident(&RawId { dest: 0, token: 0, amount: base, ts: 0, hash: 2 }, Side::Destination);
        prop_assert!(match_pair(&s_big, &d_small, &params).matched);
        let s_small = ident(&RawId { dest: 0, token: 0, amount: base, ts: 0, hash: 1 }, Side::Source);
        let d_big = ident(&RawId { dest: 0, token: 0, amount: big, ts: 0, hash: 2 }, Side::Destination);
        prop_assert!(!match_pair(&s_small, &d_big, &params).matched);
    }
}

#[test]
fn thousand_tx_scenario_matches_bruteforce() {
    use xbridge_core::categorize::categorize;
    use xbridge_core::model::Quintuple;
    use xbridge_core::pair::extract_all;
    use xbridge_core::sim::{generate, ScenarioConfig};

    let scenario = generate(&ScenarioConfig::decoy(42, 500)).unwrap();
    let cats_src = categorize(&scenario.truth_src);
    let cats_dst = categorize(&scenario.truth_dst);
    let qt = |side| -> std::collections::BTreeMap<_, Quintuple> {
        scenario
            .truth_quintuples
            .iter()
            .filter(|((s, _), _)| *s == side)
            .map(|((_, k), q)| (*k, q.clone()))
            .collect()
    };
    let (src_ids, _) = extract_all(
        &scenario.truth_src,
        &cats_src,
        &qt(Side::Source),
        &scenario.params,
    );
    let (dst_ids, _) = extract_all(
        &scenario.truth_dst,
        &cats_dst,
        &qt(Side::Destination),
        &scenario.params,
    );
    assert!(src_ids.len() + dst_ids.len() >= 1000);
    let fast: Vec<_> = pair_all(&src_ids, &dst_ids, &scenario.params)
        .iter()
        .map(|p| (p.src.tx_hash, p.dst.tx_hash))
        .collect();
    let slow = pair_all_bruteforce(&src_ids, &dst_ids, &scenario.params);
    assert_eq!(fast, slow);
}
