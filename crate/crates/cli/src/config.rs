//! Run configuration: one JSON file driving every subcommand, plus the
//! error/exit-code taxonomy (0 success, 2 config error, 3 data error).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use xbridge_core::examine::ExamineOptions;
use xbridge_core::infer::InferOptions;
use xbridge_core::model::PairingParams;
use xbridge_core::sim::{ChainSpec, ScenarioConfig};

use crate::formats;

/// Anything that should terminate the run with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("config: {0}")]
pub struct ConfigError(pub String);

/// Anything that should terminate the run with exit code 3.
#[derive(Debug, thiserror::Error)]
#[error("data: {0}")]
pub struct DataError(pub String);

pub fn config_err(msg: impl std::fmt::Display) -> anyhow::Error {
    ConfigError(msg.to_string()).into()
}

pub fn data_err(msg: impl std::fmt::Display) -> anyhow::Error {
    DataError(msg.to_string()).into()
}

/// Exit code for an error chain: config errors dominate data errors.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
    }
    for cause in err.chain() {
        if cause.is::<DataError>() {
            return 3;
        }
    }
    // IO and serialization failures while reading inputs count as data
    // errors; everything has been mapped before this point.
    3
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Directory stage artifacts are read from and written to; the `--out`
    /// flag overrides it.
    pub data_dir: Option<PathBuf>,
    /// Inline pairing parameters; when absent, `<data_dir>/params.json` is
    /// used if present, else defaults.
    pub params: Option<serde_json::Value>,
    /// Path to the role lexicon file.
    pub lexicon: Option<PathBuf>,
    /// Explicit ABI file paths (one standard Solidity JSON ABI array per
    /// contract). When absent, every `*.json` under `<data_dir>/abis/` loads.
    pub abis: Option<Vec<PathBuf>>,
    pub provider: Option<ProviderConfig>,
    pub inference: Option<InferenceConfig>,
    pub examiner: Option<ExaminerConfig>,
    pub scenario: Option<ScenarioConfigFile>,
    pub sweep: Option<SweepConfig>,
    pub evaluate: Option<EvaluateConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProviderConfig {
    Lexical,
    Llm {
        endpoint: String,
        model: String,
        #[serde(default = "default_max_tokens")]
        max_tokens: u32,
        prompt_template: PathBuf,
        fewshot: PathBuf,
    },
}

fn default_max_tokens() -> u32 {
    1024
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceConfig {
    pub sample_n: Option<usize>,
    pub top_k: Option<usize>,
    pub prefilter: Option<bool>,
    pub seed: Option<u64>,
}

impl InferenceConfig {
    pub fn to_options(self) -> InferOptions {
        let d = InferOptions::default();
        InferOptions {
            sample_n: self.sample_n.unwrap_or(d.sample_n),
            top_k: self.top_k.unwrap_or(d.top_k),
            prefilter: self.prefilter.unwrap_or(d.prefilter),
            seed: self.seed.unwrap_or(d.seed),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExaminerConfig {
    pub validation_sample: Option<usize>,
    pub forward_only: Option<bool>,
}

impl ExaminerConfig {
    pub fn to_options(self) -> ExamineOptions {
        let d = ExamineOptions::default();
        ExamineOptions {
            validation_sample: self.validation_sample.unwrap_or(d.validation_sample),
            forward_only: self.forward_only.unwrap_or(d.forward_only),
        }
    }
}

/// Scenario block: a preset name plus field-level overrides.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfigFile {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub n_transfers: Option<usize>,
    pub n_categories: Option<usize>,
    pub fields_per_category: Option<(usize, usize)>,
    pub logs_per_category: Option<(usize, usize)>,
    pub decoy_field_rate: Option<f64>,
    pub decoy_tx_rate: Option<f64>,
    pub max_fee_ppm: Option<u32>,
    pub delay_range: Option<(u64, u64)>,
    pub n_tokens: Option<usize>,
    pub native_rate: Option<f64>,
    pub start_timestamp: Option<u64>,
    pub duration: Option<u64>,
    pub mirror_field: Option<bool>,
    pub timewindow: Option<u64>,
    pub fee_rate_ppm: Option<u32>,
    pub src_chain: Option<ChainSpecFile>,
    pub dst_chain: Option<ChainSpecFile>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpecFile {
    pub canonical_id: u64,
    pub internal_id: u64,
}

impl ScenarioConfigFile {
    pub fn to_scenario(&self) -> Result<ScenarioConfig, anyhow::Error> {
        let seed = self.seed.unwrap_or(1);
        let n = self.n_transfers.unwrap_or(1000);
        let mut cfg = match self.preset.as_deref() {
            None | Some("clean") => ScenarioConfig::clean(seed, n),
            Some("decoy") => ScenarioConfig::decoy(seed, n),
            Some("stress") => ScenarioConfig::stress(seed, n),
            Some("motivating") => ScenarioConfig::motivating(seed),
            Some(other) => return Err(config_err(format!("unknown scenario preset `{other}`"))),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        apply!(
            n_categories,
            fields_per_category,
            logs_per_category,
            decoy_field_rate,
            decoy_tx_rate,
            max_fee_ppm,
            delay_range,
            n_tokens,
            native_rate,
            start_timestamp,
            duration,
            mirror_field,
            timewindow,
            fee_rate_ppm
        );
        if let Some(c) = self.src_chain {
            cfg.src_chain = ChainSpec {
                canonical_id: c.canonical_id,
                internal_id: c.internal_id,
            };
        }
        if let Some(c) = self.dst_chain {
            cfg.dst_chain = ChainSpec {
                canonical_id: c.canonical_id,
                internal_id: c.internal_id,
            };
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub timewindows: Vec<u64>,
    pub fee_rates: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    /// Baselines to run alongside the pipeline score: "chronological",
    /// "similarity", "hybrid".
    pub baselines: Option<Vec<String>>,
    /// Run the similarity baseline through the examiner instead of top-1.
    pub similarity_with_examiner: Option<bool>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, anyhow::Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Config = serde_json::from_str(&text)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Pairing parameters: inline config wins, then `<dir>/params.json`,
    /// then defaults.
    pub fn pairing_params(&self, dir: &Path) -> Result<PairingParams, anyhow::Error> {
        if let Some(inline) = &self.params {
            return formats::params_from_json(inline).map_err(config_err);
        }
        let candidate = dir.join("params.json");
        if candidate.exists() {
            let text = std::fs::read_to_string(&candidate)
                .map_err(|e| data_err(format!("{}: {e}", candidate.display())))?;
            let j: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| data_err(format!("{}: {e}", candidate.display())))?;
            return formats::params_from_json(&j).map_err(data_err);
        }
        Ok(PairingParams::default())
    }
}
