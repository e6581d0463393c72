//! Evaluation harness: baselines, search-space ablation, hyperparameter
//! sweep. All baselines and the main pipeline consume identical decoded
//! inputs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::categorize::{candidate_space_size, combination_count, Category};
use crate::examine::ExaminationReport;
use crate::infer::{
    infer_categories, InferOptions, LexicalProvider,
};
use crate::model::{
    CandidateQuintuple, CategoryKey, PairingParams, Quintuple, Role, TransactionInstance, TxHash,
};
use crate::pair::{extract_all, pair_all, score, Identifier, Metrics, Pair};

/// Pairs the two sides positionally by timestamp order starting from one
/// known true pair. Fragile by construction: any inserted or missing
/// transaction shifts every subsequent pair.
pub fn baseline_chronological(
    src: &[TransactionInstance],
    dst: &[TransactionInstance],
    anchor: (TxHash, TxHash),
) -> Vec<(TxHash, TxHash)> {
    let sorted = |txs: &[TransactionInstance]| {
        let mut order: Vec<usize> = (0..txs.len()).collect();
        order.sort_by_key(|&i| (txs[i].timestamp, txs[i].tx_hash));
        order
    };
    let src_order = sorted(src);
    let dst_order = sorted(dst);
    let src_pos = src_order.iter().position(|&i| src[i].tx_hash == anchor.0);
    let dst_pos = dst_order.iter().position(|&i| dst[i].tx_hash == anchor.1);
    let (Some(src_pos), Some(dst_pos)) = (src_pos, dst_pos) else {
        return Vec::new();
    };
    src_order[src_pos..]
        .iter()
        .zip(&dst_order[dst_pos..])
        .map(|(&si, &di)| (src[si].tx_hash, dst[di].tx_hash))
        .collect()
}

/// Quintuples taken directly from a provider's top-1 per role, bypassing
/// examination. `with_examiner` instead forwards the provider's top-k to the
/// full examination pipeline.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimilarityOptions {
    pub with_examiner: bool,
    /// Apply the type prefilter before similarity (the hybrid variant).
    pub prefilter: bool,
}

/// One side's decoded dataset plus its categories.
pub struct DatasetSide<'a> {
    pub txs: &'a [TransactionInstance],
    pub categories: &'a [Category],
}

fn top1_quintuples(
    side: &DatasetSide<'_>,
    provider: &LexicalProvider,
    prefilter: bool,
    opts: &InferOptions,
) -> BTreeMap<CategoryKey, Quintuple> {
    let infer_opts = InferOptions {
        prefilter,
        ..*opts
    };
    let outcome = infer_categories(side.txs, side.categories, provider, provider, &infer_opts);
    let mut out = BTreeMap::new();
    for (key, cq) in outcome.candidates {
        let mut map = BTreeMap::new();
        for role in Role::ALL {
            if let Some(best) = cq.get(role).first() {
                map.insert(role, best.path.clone());
            }
        }
        if let Some(qt) = Quintuple::from_map(map) {
            out.insert(key, qt);
        }
    }
    out
}

/// Similarity-based pairing: lexical top candidates per role, then the
/// pairing rules. Default takes top-1 per role with no examination.
pub fn baseline_similarity(
    src: &DatasetSide<'_>,
    dst: &DatasetSide<'_>,
    provider: &LexicalProvider,
    params: &PairingParams,
    infer_opts: &InferOptions,
    opts: SimilarityOptions,
) -> Vec<Pair> {
    if opts.with_examiner {
        let exam_opts = crate::examine::ExamineOptions::default();
        let io = InferOptions {
            prefilter: opts.prefilter,
            ..*infer_opts
        };
        let src_cand = infer_categories(src.txs, src.categories, provider, provider, &io);
        let dst_cand = infer_categories(dst.txs, dst.categories, provider, provider, &io);
        let src_side = crate::examine::SideData {
            txs: src.txs,
            categories: src.categories,
            candidates: &src_cand.candidates,
        };
        let dst_side = crate::examine::SideData {
            txs: dst.txs,
            categories: dst.categories,
            candidates: &dst_cand.candidates,
        };
        let src_report = crate::examine::examine(&src_side, &dst_side, params, &exam_opts);
        let dst_report = crate::examine::examine(&dst_side, &src_side, params, &exam_opts);
        let (src_ids, _) = extract_all(src.txs, src.categories, &src_report.validated(), params);
        let (dst_ids, _) = extract_all(dst.txs, dst.categories, &dst_report.validated(), params);
        return pair_all(&src_ids, &dst_ids, params);
    }
    let src_qt = top1_quintuples(src, provider, opts.prefilter, infer_opts);
    let dst_qt = top1_quintuples(dst, provider, opts.prefilter, infer_opts);
    let (src_ids, _) = extract_all(src.txs, src.categories, &src_qt, params);
    let (dst_ids, _) = extract_all(dst.txs, dst.categories, &dst_qt, params);
    pair_all(&src_ids, &dst_ids, params)
}

/// Type prefilter first, then the similarity baseline.
pub fn baseline_hybrid(
    src: &DatasetSide<'_>,
    dst: &DatasetSide<'_>,
    provider: &LexicalProvider,
    params: &PairingParams,
    infer_opts: &InferOptions,
) -> Vec<Pair> {
    baseline_similarity(
        src,
        dst,
        provider,
        params,
        infer_opts,
        SimilarityOptions {
            with_examiner: false,
            prefilter: true,
        },
    )
}

/// Search-space numbers for one side: X after categorization, Y after
/// inference, M categories, survivors after examination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AblationSide {
    pub combinations_after_categorize: BigUint,
    pub combinations_after_infer: BigUint,
    pub categories: usize,
    pub survivors: usize,
}

pub fn ablation_side(
    categories: &[Category],
    candidates: &BTreeMap<CategoryKey, CandidateQuintuple>,
    report: &ExaminationReport,
) -> AblationSide {
    AblationSide {
        combinations_after_categorize: combination_count(categories),
        combinations_after_infer: candidate_space_size(candidates.values()),
        categories: categories.len(),
        survivors: report.survivor_count(),
    }
}

/// One sweep cell: the grid point plus its pairing metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub timewindow: u64,
    pub fee_rate_ppm: u32,
    pub metrics: Metrics,
}

/// Re-runs pairing (quintuples held fixed) across a timewindow × fee_rate
/// grid. Each cell is deterministic; identifiers are extracted once.
pub fn sweep(
    src_ids: &[Identifier],
    dst_ids: &[Identifier],
    base: &PairingParams,
    timewindows: &[u64],
    fee_rates_ppm: &[u32],
    truth: &BTreeSet<(TxHash, TxHash)>,
) -> Vec<SweepCell> {
    let mut cells = Vec::with_capacity(timewindows.len() * fee_rates_ppm.len());
    for &tw in timewindows {
        for &ppm in fee_rates_ppm {
            let mut params = base.clone();
            params.timewindow = tw;
            params.fee_rate = crate::model::FeeRate::from_ppm(ppm).unwrap_or(base.fee_rate);
            let pairs = pair_all(src_ids, dst_ids, &params);
            cells.push(SweepCell {
                timewindow: tw,
                fee_rate_ppm: ppm,
                metrics: score(&pairs, truth),
            });
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    
    use crate::model::{Address, DecodedCall, Record, Side, Value, U256};
    use alloc::vec;

    fn tx(ts: u64, hash_byte: u8, side: Side) -> TransactionInstance {
        TransactionInstance::new(
            1,
            TxHash([hash_byte; 32]),
            1,
            ts,
            Address::ZERO,
            Address::ZERO,
            U256::zero(),
            DecodedCall {
                function: "f".into(),
                args: Record::from_pairs([("a", Value::uint_u64(1))]).unwrap(),
            },
            vec![],
            side,
        )
        .unwrap()
    }

    #[test]
    fn chronological_is_exact_on_aligned_clean_data() {
        let src: Vec<_> = (0..5).map(|i| tx(100 + i, i as u8, Side::Source)).collect();
        let dst: Vec<_> = (0..5)
            .map(|i| tx(200 + i, 100 + i as u8, Side::Destination))
            .collect();
        let pairs = baseline_chronological(&src, &dst, (src[0].tx_hash, dst[0].tx_hash));
        assert_eq!(pairs.len(), 5);
        for (i, (s, d)) in pairs.iter().enumerate() {
            assert_eq!(s.0[0], i as u8);
            assert_eq!(d.0[0], 100 + i as u8);
        }
    }

    #[test]
    fn chronological_shifts_after_an_inserted_decoy() {
        let src: Vec<_> = (0..5).map(|i| tx(100 + i, i as u8, Side::Source)).collect();
        let mut dst: Vec<_> = (0..5)
            .map(|i| tx(200 + 2 * i, 100 + i as u8, Side::Destination))
            .collect();
        // A decoy destination lands between the first and second settlement.
        dst.push(tx(201, 200, Side::Destination));
        let pairs = baseline_chronological(&src, &dst, (src[0].tx_hash, dst[0].tx_hash));
        // Anchor pair still correct, everything after it shifted.
        assert_eq!(pairs[0], (src[0].tx_hash, dst[0].tx_hash));
        for (s, d) in &pairs[1..] {
            let si = s.0[0] as u64;
            let truth = 100 + si as u8;
            assert_ne!(d.0[0], truth, "pair after the decoy must be shifted");
        }
    }

    #[test]
    fn sweep_grid_shape_and_determinism() {
        let params = PairingParams::default();
        let cells = sweep(&[], &[], &params, &[10, 7200], &[10_000, 200_000], &BTreeSet::new());
        assert_eq!(cells.len(), 4);
        assert!(cells.iter().all(|c| c.metrics.f1 == 0.0));
    }
}
