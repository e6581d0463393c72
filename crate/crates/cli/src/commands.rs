//! Subcommand implementations. Every stage reads and writes files under the
//! output directory using fixed names, so stages chain without extra flags:
//!
//!   raw_{src,dst}.jsonl        raw transaction sidecars (hex)
//!   abis/*.json                standard Solidity JSON ABI files
//!   instances_{src,dst}.jsonl  canonical decoded instances
//!   categories_{src,dst}.jsonl category manifests
//!   candidates_{src,dst}.json  inferred candidate quintuples
//!   examination_{src,dst}.json validated quintuples + phase counts
//!   pairs.jsonl                matched pairs with rule traces
//!   truth_pairs.csv            ground truth (simulator output)
//!   metrics.json, sweep.csv    evaluation artifacts

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use serde_json::{json, Value as Json};

use xbridge_core::abi::{decode_instance_with, AbiRegistry, DecodeMode};
use xbridge_core::categorize::{categorize, Category};
use xbridge_core::examine::{examine, ExaminationReport, SideData};
use xbridge_core::harness::{
    ablation_side, baseline_chronological, baseline_similarity, sweep as run_sweep, DatasetSide,
    SimilarityOptions,
};
use xbridge_core::infer::{
    infer_categories, CandidateProvider, InferOptions, LexicalProvider, RoleLexicon,
};
use xbridge_core::model::{
    CandidateQuintuple, CategoryKey, FeeRate, PairingParams, Quintuple, Side, TransactionInstance,
    TxHash,
};
use xbridge_core::pair::{extract_all, pair_all, score, Pair};
use xbridge_core::sim::{generate, ScenarioConfig};

use crate::config::{config_err, data_err, Config, ProviderConfig};
use crate::formats;
use crate::llm::{LlmProvider, LlmSettings};

pub struct Stage<'a> {
    pub config: &'a Config,
    pub dir: PathBuf,
}

impl<'a> Stage<'a> {
    pub fn new(config: &'a Config, out: Option<PathBuf>) -> Self {
        let dir = out
            .or_else(|| config.data_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        Stage { config, dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn side_name(base: &str, side: Side, ext: &str) -> String {
        let tag = match side {
            Side::Source => "src",
            Side::Destination => "dst",
        };
        format!("{base}_{tag}.{ext}")
    }

    fn write_text(&self, name: &str, text: &str) -> anyhow::Result<()> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    fn write_json(&self, name: &str, j: &Json) -> anyhow::Result<()> {
        self.write_text(name, &format!("{}\n", serde_json::to_string_pretty(j)?))
    }

    fn write_jsonl<I: IntoIterator<Item = Json>>(&self, name: &str, rows: I) -> anyhow::Result<()> {
        let mut text = String::new();
        for row in rows {
            text.push_str(&row.to_string());
            text.push('\n');
        }
        self.write_text(name, &text)
    }

    fn read_text(&self, name: &str) -> anyhow::Result<String> {
        let path = self.path(name);
        fs::read_to_string(&path).map_err(|e| data_err(format!("{}: {e}", path.display())))
    }

    fn read_json(&self, name: &str) -> anyhow::Result<Json> {
        let text = self.read_text(name)?;
        serde_json::from_str(&text).map_err(|e| data_err(format!("{name}: {e}")))
    }

    fn read_jsonl(&self, name: &str) -> anyhow::Result<Vec<Json>> {
        let text = self.read_text(name)?;
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| data_err(format!("{name} line {}: {e}", i + 1)))
            })
            .collect()
    }

    fn read_instances(&self, side: Side) -> anyhow::Result<Vec<TransactionInstance>> {
        self.read_jsonl(&Self::side_name("instances", side, "jsonl"))?
            .iter()
            .map(|j| formats::instance_from_json(j).map_err(data_err))
            .collect()
    }

    fn read_categories(&self, side: Side) -> anyhow::Result<Vec<Category>> {
        self.read_jsonl(&Self::side_name("categories", side, "jsonl"))?
            .iter()
            .map(|j| formats::category_from_json(j).map_err(data_err))
            .collect()
    }

    fn read_candidates(
        &self,
        side: Side,
    ) -> anyhow::Result<BTreeMap<CategoryKey, CandidateQuintuple>> {
        let j = self.read_json(&Self::side_name("candidates", side, "json"))?;
        formats::candidates_from_json(&j).map_err(data_err)
    }

    fn read_quintuples(&self, side: Side) -> anyhow::Result<BTreeMap<CategoryKey, Quintuple>> {
        let j = self.read_json(&Self::side_name("examination", side, "json"))?;
        formats::quintuples_from_examination(&j).map_err(data_err)
    }

    fn params(&self) -> anyhow::Result<PairingParams> {
        self.config.pairing_params(&self.dir)
    }

    fn lexicon(&self) -> anyhow::Result<RoleLexicon> {
        match &self.config.lexicon {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| config_err(format!("lexicon {}: {e}", path.display())))?;
                let j: Json = serde_json::from_str(&text)
                    .map_err(|e| config_err(format!("lexicon {}: {e}", path.display())))?;
                formats::lexicon_from_json(&j).map_err(config_err)
            }
            None => Ok(RoleLexicon::starter()),
        }
    }

    fn infer_options(&self) -> InferOptions {
        self.config
            .inference
            .map(|c| c.to_options())
            .unwrap_or_default()
    }

    fn provider(&self) -> anyhow::Result<Box<dyn CandidateProvider>> {
        match &self.config.provider {
            None | Some(ProviderConfig::Lexical) => {
                Ok(Box::new(LexicalProvider::new(self.lexicon()?)))
            }
            Some(ProviderConfig::Llm {
                endpoint,
                model,
                max_tokens,
                prompt_template,
                fewshot,
            }) => {
                let settings = LlmSettings::from_files(
                    endpoint,
                    model,
                    *max_tokens,
                    prompt_template,
                    fewshot,
                )
                .map_err(|e| config_err(format!("provider files: {e}")))?;
                Ok(Box::new(LlmProvider::new(settings)))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub fn cmd_simulate(stage: &Stage<'_>) -> anyhow::Result<()> {
    let scenario_cfg: ScenarioConfig = stage
        .config
        .scenario
        .as_ref()
        .ok_or_else(|| config_err("simulate needs a `scenario` config block"))?
        .to_scenario()?;
    let scenario = generate(&scenario_cfg).map_err(config_err)?;

    for (side, raws, truths) in [
        (Side::Source, &scenario.raw_src, &scenario.truth_src),
        (Side::Destination, &scenario.raw_dst, &scenario.truth_dst),
    ] {
        stage.write_jsonl(
            &Stage::side_name("raw", side, "jsonl"),
            raws.iter().map(formats::raw_to_json),
        )?;
        stage.write_jsonl(
            &Stage::side_name("instances", side, "jsonl"),
            truths.iter().map(formats::instance_to_json),
        )?;
    }
    stage.write_json("abis/src_router.json", &formats::abi_to_json(&scenario.abis.src_router))?;
    stage.write_json("abis/dst_router.json", &formats::abi_to_json(&scenario.abis.dst_router))?;
    stage.write_json("abis/erc20.json", &formats::abi_to_json(&scenario.abis.erc20))?;
    stage.write_text(
        "truth_pairs.csv",
        &formats::truth_pairs_to_csv(&scenario.truth_pairs),
    )?;
    stage.write_json(
        "truth_quintuples.json",
        &formats::truth_quintuples_to_json(&scenario.truth_quintuples),
    )?;
    stage.write_json("params.json", &formats::params_to_json(&scenario.params))?;
    eprintln!(
        "simulate: {} transfers, {} src txs, {} dst txs into {}",
        scenario.truth_pairs.len(),
        scenario.raw_src.len(),
        scenario.raw_dst.len(),
        stage.dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// decode
// ---------------------------------------------------------------------------

fn load_registry(stage: &Stage<'_>) -> anyhow::Result<AbiRegistry> {
    let paths: Vec<PathBuf> = match &stage.config.abis {
        Some(paths) => paths.clone(),
        None => {
            let abi_dir = stage.path("abis");
            let entries = fs::read_dir(&abi_dir)
                .map_err(|e| data_err(format!("{}: {e}", abi_dir.display())))?;
            let mut paths: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
                .collect();
            paths.sort();
            paths
        }
    };
    if paths.is_empty() {
        return Err(data_err("no ABI files configured or found under abis/"));
    }
    let mut registry = AbiRegistry::new();
    for path in &paths {
        let text =
            fs::read_to_string(path).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        let j: Json = serde_json::from_str(&text)
            .map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        let (functions, events) = formats::abi_from_json(&j)
            .map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        for fd in functions {
            registry.add_function(fd);
        }
        for ed in events {
            registry.add_event(ed);
        }
    }
    Ok(registry)
}

pub fn cmd_decode(stage: &Stage<'_>, strict: bool, drop_unknown: bool) -> anyhow::Result<()> {
    let registry = load_registry(stage)?;
    let mode = if strict {
        DecodeMode::Strict
    } else {
        DecodeMode::Lenient
    };
    let mut all_diags = Vec::new();
    for side in [Side::Source, Side::Destination] {
        let raws: Vec<_> = stage
            .read_jsonl(&Stage::side_name("raw", side, "jsonl"))?
            .iter()
            .map(|j| formats::raw_from_json(j).map_err(data_err))
            .collect::<anyhow::Result<_>>()?;
        let mut instances = Vec::with_capacity(raws.len());
        for raw in &raws {
            let (tx, diags) = decode_instance_with(raw, &registry, mode, drop_unknown)
                .map_err(data_err)?;
            for d in diags {
                all_diags.push(json!({
                    "tx": raw.tx_hash.to_hex(),
                    "context": d.context,
                    "message": d.message,
                }));
            }
            instances.push(tx);
        }
        stage.write_jsonl(
            &Stage::side_name("instances", side, "jsonl"),
            instances.iter().map(formats::instance_to_json),
        )?;
        eprintln!("decode: {} {} instances", instances.len(), side.as_str());
    }
    stage.write_json("decode_diagnostics.json", &Json::Array(all_diags))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// categorize
// ---------------------------------------------------------------------------

pub fn cmd_categorize(stage: &Stage<'_>) -> anyhow::Result<()> {
    for side in [Side::Source, Side::Destination] {
        let instances = stage.read_instances(side)?;
        let cats = categorize(&instances);
        stage.write_jsonl(
            &Stage::side_name("categories", side, "jsonl"),
            cats.iter().map(formats::category_to_json),
        )?;
        eprintln!(
            "categorize: {} {} instances into {} categories",
            instances.len(),
            side.as_str(),
            cats.len()
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// infer
// ---------------------------------------------------------------------------

pub fn cmd_infer(stage: &Stage<'_>) -> anyhow::Result<()> {
    let provider = stage.provider()?;
    let fallback = LexicalProvider::new(stage.lexicon()?);
    let opts = stage.infer_options();
    for side in [Side::Source, Side::Destination] {
        let instances = stage.read_instances(side)?;
        let cats = stage.read_categories(side)?;
        let outcome = infer_categories(&instances, &cats, provider.as_ref(), &fallback, &opts);
        eprintln!(
            "infer: {} {} categories inferred, {} uninferable, {} diagnostics",
            outcome.candidates.len(),
            side.as_str(),
            outcome.uninferable.len(),
            outcome.diagnostics.len()
        );
        stage.write_json(
            &Stage::side_name("candidates", side, "json"),
            &formats::candidates_to_json(&outcome),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// examine
// ---------------------------------------------------------------------------

pub fn cmd_examine(stage: &Stage<'_>) -> anyhow::Result<()> {
    let params = stage.params()?;
    let opts = stage
        .config
        .examiner
        .map(|c| c.to_options())
        .unwrap_or_default();
    let src_txs = stage.read_instances(Side::Source)?;
    let dst_txs = stage.read_instances(Side::Destination)?;
    let src_cats = stage.read_categories(Side::Source)?;
    let dst_cats = stage.read_categories(Side::Destination)?;
    let src_cands = stage.read_candidates(Side::Source)?;
    let dst_cands = stage.read_candidates(Side::Destination)?;
    let src_side = SideData {
        txs: &src_txs,
        categories: &src_cats,
        candidates: &src_cands,
    };
    let dst_side = SideData {
        txs: &dst_txs,
        categories: &dst_cats,
        candidates: &dst_cands,
    };
    let report_src = examine(&src_side, &dst_side, &params, &opts);
    let report_dst = examine(&dst_side, &src_side, &params, &opts);
    report_summary(&report_src);
    report_summary(&report_dst);
    stage.write_json(
        &Stage::side_name("examination", Side::Source, "json"),
        &formats::examination_to_json(&report_src),
    )?;
    stage.write_json(
        &Stage::side_name("examination", Side::Destination, "json"),
        &formats::examination_to_json(&report_dst),
    )?;
    Ok(())
}

fn report_summary(report: &ExaminationReport) {
    eprintln!(
        "examine: {} side, {}/{} categories validated",
        report.side.as_str(),
        report.survivor_count(),
        report.categories.len()
    );
}

// ---------------------------------------------------------------------------
// pair
// ---------------------------------------------------------------------------

fn extract_side_identifiers(
    stage: &Stage<'_>,
    side: Side,
    params: &PairingParams,
) -> anyhow::Result<(Vec<xbridge_core::pair::Identifier>, usize)> {
    let txs = stage.read_instances(side)?;
    let cats = stage.read_categories(side)?;
    let quintuples = stage.read_quintuples(side)?;
    let (ids, diags) = extract_all(&txs, &cats, &quintuples, params);
    Ok((ids, diags.len()))
}

pub fn cmd_pair(stage: &Stage<'_>) -> anyhow::Result<()> {
    let params = stage.params()?;
    let (src_ids, src_skipped) = extract_side_identifiers(stage, Side::Source, &params)?;
    let (dst_ids, dst_skipped) = extract_side_identifiers(stage, Side::Destination, &params)?;
    let pairs = pair_all(&src_ids, &dst_ids, &params);
    eprintln!(
        "pair: {} pairs from {} source / {} destination identifiers ({} skipped)",
        pairs.len(),
        src_ids.len(),
        dst_ids.len(),
        src_skipped + dst_skipped
    );
    stage.write_jsonl("pairs.jsonl", pairs.iter().map(formats::pair_to_json))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

fn read_emitted_pairs(stage: &Stage<'_>) -> anyhow::Result<Vec<(TxHash, TxHash)>> {
    stage
        .read_jsonl("pairs.jsonl")?
        .iter()
        .map(|j| {
            let obj = j
                .as_object()
                .ok_or_else(|| data_err("pairs.jsonl: row must be an object"))?;
            let s = obj
                .get("src_hash")
                .and_then(Json::as_str)
                .ok_or_else(|| data_err("pairs.jsonl: missing src_hash"))?;
            let d = obj
                .get("dst_hash")
                .and_then(Json::as_str)
                .ok_or_else(|| data_err("pairs.jsonl: missing dst_hash"))?;
            Ok((
                TxHash::from_hex(s).map_err(data_err)?,
                TxHash::from_hex(d).map_err(data_err)?,
            ))
        })
        .collect()
}

fn score_hashes(
    pairs: &[(TxHash, TxHash)],
    truth: &std::collections::BTreeSet<(TxHash, TxHash)>,
) -> xbridge_core::pair::Metrics {
    // Scoring needs only the hash pairs; reuse the library scorer by mapping
    // through minimal identifiers is unnecessary.
    let tp = pairs.iter().filter(|p| truth.contains(p)).count();
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
    xbridge_core::pair::Metrics {
        precision,
        recall,
        f1,
        true_positives: tp,
        false_positives: pairs.len() - tp,
        false_negatives: truth.len().saturating_sub(tp),
    }
}

pub fn cmd_evaluate(stage: &Stage<'_>) -> anyhow::Result<()> {
    let params = stage.params()?;
    let truth = formats::truth_pairs_from_csv(&stage.read_text("truth_pairs.csv")?)
        .map_err(data_err)?;
    let emitted = read_emitted_pairs(stage)?;
    let pipeline = score_hashes(&emitted, &truth);

    let mut out = json!({
        "pipeline": formats::metrics_to_json(&pipeline),
        "pairs": emitted.len(),
        "truth_pairs": truth.len(),
    });

    let eval_cfg = stage.config.evaluate.clone().unwrap_or_default();
    let wanted: Vec<String> = eval_cfg.baselines.clone().unwrap_or_default();
    if !wanted.is_empty() {
        let src_txs = stage.read_instances(Side::Source)?;
        let dst_txs = stage.read_instances(Side::Destination)?;
        let src_cats = stage.read_categories(Side::Source)?;
        let dst_cats = stage.read_categories(Side::Destination)?;
        let provider = LexicalProvider::new(stage.lexicon()?);
        let src_side = DatasetSide {
            txs: &src_txs,
            categories: &src_cats,
        };
        let dst_side = DatasetSide {
            txs: &dst_txs,
            categories: &dst_cats,
        };
        let mut baselines = serde_json::Map::new();
        for name in &wanted {
            let metrics = match name.as_str() {
                "chronological" => {
                    // The anchor is the earliest known true pair.
                    let anchor = truth
                        .iter()
                        .min_by_key(|(s, _)| {
                            src_txs
                                .iter()
                                .find(|tx| tx.tx_hash == *s)
                                .map(|tx| tx.timestamp)
                                .unwrap_or(u64::MAX)
                        })
                        .copied()
                        .ok_or_else(|| data_err("chronological baseline needs ground truth"))?;
                    let pairs = baseline_chronological(&src_txs, &dst_txs, anchor);
                    score_hashes(&pairs, &truth)
                }
                "similarity" => {
                    let pairs = baseline_similarity(
                        &src_side,
                        &dst_side,
                        &provider,
                        &params,
                        &stage.infer_options(),
                        SimilarityOptions {
                            with_examiner: eval_cfg.similarity_with_examiner.unwrap_or(false),
                            prefilter: false,
                        },
                    );
                    score(&pairs, &truth)
                }
                "hybrid" => {
                    let pairs = xbridge_core::harness::baseline_hybrid(
                        &src_side,
                        &dst_side,
                        &provider,
                        &params,
                        &stage.infer_options(),
                    );
                    score(&pairs, &truth)
                }
                other => return Err(config_err(format!("unknown baseline `{other}`"))),
            };
            baselines.insert(name.clone(), formats::metrics_to_json(&metrics));
        }
        out["baselines"] = Json::Object(baselines);
    }

    // Ablation: search-space numbers per side when the artifacts exist.
    let mut ablation = serde_json::Map::new();
    for side in [Side::Source, Side::Destination] {
        let cats = stage.read_categories(side);
        let cands = stage.read_candidates(side);
        let exam = stage.read_json(&Stage::side_name("examination", side, "json"));
        if let (Ok(cats), Ok(cands), Ok(exam_json)) = (cats, cands, exam) {
            let survivors = exam_json
                .get("survivors")
                .and_then(Json::as_u64)
                .unwrap_or(0) as usize;
            let x = xbridge_core::categorize::combination_count(&cats);
            let y = xbridge_core::categorize::candidate_space_size(cands.values());
            ablation.insert(
                side.as_str().into(),
                json!({
                    "categories": cats.len(),
                    "after_categorize": x.to_string(),
                    "after_infer": y.to_string(),
                    "survivors": survivors,
                }),
            );
        }
    }
    if !ablation.is_empty() {
        out["ablation"] = Json::Object(ablation);
    }

    println!("{}", serde_json::to_string_pretty(&out)?);
    stage.write_json("metrics.json", &out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

pub fn cmd_sweep(stage: &Stage<'_>) -> anyhow::Result<()> {
    let sweep_cfg = stage
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| config_err("sweep needs a `sweep` config block"))?;
    let params = stage.params()?;
    let truth = formats::truth_pairs_from_csv(&stage.read_text("truth_pairs.csv")?)
        .map_err(data_err)?;
    let (src_ids, _) = extract_side_identifiers(stage, Side::Source, &params)?;
    let (dst_ids, _) = extract_side_identifiers(stage, Side::Destination, &params)?;
    let fee_ppms: Vec<u32> = sweep_cfg
        .fee_rates
        .iter()
        .map(|f| {
            FeeRate::from_fraction(*f)
                .map(|r| r.ppm())
                .map_err(|e| config_err(format!("sweep fee_rate {f}: {e}")))
        })
        .collect::<anyhow::Result<_>>()?;
    let cells = run_sweep(
        &src_ids,
        &dst_ids,
        &params,
        &sweep_cfg.timewindows,
        &fee_ppms,
        &truth,
    );
    let mut csv = String::from("timewindow,fee_rate,precision,recall,f1\n");
    for cell in &cells {
        csv.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6}\n",
            cell.timewindow,
            cell.fee_rate_ppm as f64 / FeeRate::DENOM as f64,
            cell.metrics.precision,
            cell.metrics.recall,
            cell.metrics.f1
        ));
    }
    stage.write_text("sweep.csv", &csv)?;
    eprintln!("sweep: {} cells into sweep.csv", cells.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// shared helpers for tests
// ---------------------------------------------------------------------------

/// Ablation numbers straight from in-memory artifacts (used by tests; the
/// CLI path goes through files).
pub fn ablation_from_artifacts(
    categories: &[Category],
    candidates: &BTreeMap<CategoryKey, CandidateQuintuple>,
    report: &ExaminationReport,
) -> xbridge_core::harness::AblationSide {
    ablation_side(categories, candidates, report)
}

/// Scores already-extracted pairs against a truth set (hash pairs only).
pub fn score_pairs_against(
    pairs: &[Pair],
    truth: &std::collections::BTreeSet<(TxHash, TxHash)>,
) -> xbridge_core::pair::Metrics {
    score(pairs, truth)
}
