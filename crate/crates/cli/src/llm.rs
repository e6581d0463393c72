//! External-provider client for semantic inference.
//!
//! Wire contract: HTTP POST with body `{"model", "prompt", "max_tokens"}`;
//! the response body must contain a single JSON object mapping role names to
//! candidate lists: `{"to": [{"field": "...", "confidence": 0.9}], ...}`.
//! Candidates naming paths outside the category's field set are dropped with
//! a diagnostic. One retry on malformed output or transport failure, after
//! which the pipeline falls back to the lexical provider.
//!
//! The prompt is assembled from a plain-text template with three named
//! placeholders: `{{FEWSHOT}}` (a curated worked example with its reasoning),
//! `{{SCHEMA}}` (the output-schema instruction) and `{{SAMPLE}}` (the
//! category's field list plus sampled instances).

use std::path::Path;
use std::time::Duration;

use serde_json::{json, Value as Json};

use xbridge_core::infer::{CandidateProvider, InferenceContext, ProviderError, ProviderResponse};
use xbridge_core::model::Role;

use crate::formats::instance_to_json;

/// The output-schema instruction embedded at `{{SCHEMA}}`. This is the
/// authoritative description of the expected response.
pub const SCHEMA_INSTRUCTION: &str = r#"Respond with a single JSON object and nothing else. The object must map each of the five keys "to", "chain", "token", "amount", "timestamp" to an array of candidate objects {"field": "<rendered field path>", "confidence": <number in [0,1]>}, ordered from most to least likely. Use only field paths that appear in the provided field list."#;

#[derive(Debug, Clone)]
pub struct LlmSettings {
    pub endpoint: String,
    pub model: String,
    pub max_tokens: u32,
    pub template: String,
    pub fewshot: String,
    /// Attempts per category: 1 + retries. The wire contract retries once.
    pub attempts: u32,
    pub timeout: Duration,
}

impl LlmSettings {
    pub fn from_files(
        endpoint: &str,
        model: &str,
        max_tokens: u32,
        template_path: &Path,
        fewshot_path: &Path,
    ) -> std::io::Result<Self> {
        Ok(LlmSettings {
            endpoint: endpoint.into(),
            model: model.into(),
            max_tokens,
            template: std::fs::read_to_string(template_path)?,
            fewshot: std::fs::read_to_string(fewshot_path)?,
            attempts: 2,
            timeout: Duration::from_secs(60),
        })
    }
}

pub struct LlmProvider {
    settings: LlmSettings,
    agent: ureq::Agent,
}

impl LlmProvider {
    pub fn new(settings: LlmSettings) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(settings.timeout))
            .build();
        LlmProvider {
            settings,
            agent: config.into(),
        }
    }

    pub fn build_prompt(&self, ctx: &InferenceContext<'_>) -> String {
        let mut sample = String::new();
        sample.push_str(&format!(
            "Field list ({} fields):\n",
            ctx.category.fields.len()
        ));
        for f in &ctx.category.fields {
            sample.push_str("  ");
            sample.push_str(f);
            sample.push('\n');
        }
        sample.push_str(&format!(
            "\n{} sampled transaction instances:\n",
            ctx.sample.len()
        ));
        for tx in &ctx.sample {
            sample.push_str(&instance_to_json(tx).to_string());
            sample.push('\n');
        }
        self.settings
            .template
            .replace("{{FEWSHOT}}", &self.settings.fewshot)
            .replace("{{SCHEMA}}", SCHEMA_INSTRUCTION)
            .replace("{{SAMPLE}}", &sample)
    }

    fn request_once(&self, prompt: &str) -> Result<String, ProviderError> {
        let body = json!({
            "model": self.settings.model,
            "prompt": prompt,
            "max_tokens": self.settings.max_tokens,
        });
        let mut response = self
            .agent
            .post(&self.settings.endpoint)
            .send_json(&body)
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        response
            .body_mut()
            .read_to_string()
            .map_err(|e| ProviderError::Transport(e.to_string()))
    }
}

/// Extracts the single JSON object the contract requires from a body that
/// may carry surrounding text.
pub fn extract_response_object(body: &str) -> Result<Json, ProviderError> {
    if let Ok(j) = serde_json::from_str::<Json>(body) {
        if j.is_object() {
            return Ok(j);
        }
    }
    let start = body
        .find('{')
        .ok_or_else(|| ProviderError::Malformed("no JSON object in body".into()))?;
    let end = body
        .rfind('}')
        .ok_or_else(|| ProviderError::Malformed("no JSON object in body".into()))?;
    if end <= start {
        return Err(ProviderError::Malformed("no JSON object in body".into()));
    }
    serde_json::from_str::<Json>(&body[start..=end])
        .map_err(|e| ProviderError::Malformed(e.to_string()))
        .and_then(|j| {
            j.is_object()
                .then_some(j)
                .ok_or_else(|| ProviderError::Malformed("body is not a JSON object".into()))
        })
}

/// Parses the role→candidates object. Unknown roles are ignored; candidate
/// entries must be `{"field": string, "confidence": number}`.
pub fn parse_response(j: &Json) -> Result<ProviderResponse, ProviderError> {
    let obj = j
        .as_object()
        .ok_or_else(|| ProviderError::Malformed("response is not an object".into()))?;
    let mut response = ProviderResponse::default();
    let mut any_role = false;
    for (key, list) in obj {
        let Some(role) = Role::from_str(key) else {
            continue;
        };
        any_role = true;
        let arr = list
            .as_array()
            .ok_or_else(|| ProviderError::Malformed(format!("role `{key}` is not an array")))?;
        let mut candidates = Vec::with_capacity(arr.len());
        for entry in arr {
            let eobj = entry.as_object().ok_or_else(|| {
                ProviderError::Malformed(format!("candidate under `{key}` is not an object"))
            })?;
            let field = eobj
                .get("field")
                .and_then(Json::as_str)
                .ok_or_else(|| ProviderError::Malformed("candidate without `field`".into()))?;
            let confidence = eobj
                .get("confidence")
                .and_then(Json::as_f64)
                .unwrap_or(0.0)
                .clamp(0.0, 1.0);
            candidates.push((field.to_string(), confidence));
        }
        response.roles.insert(role, candidates);
    }
    if !any_role {
        return Err(ProviderError::Malformed(
            "no role keys in response object".into(),
        ));
    }
    Ok(response)
}

impl CandidateProvider for LlmProvider {
    fn propose(&self, ctx: &InferenceContext<'_>) -> Result<ProviderResponse, ProviderError> {
        let prompt = self.build_prompt(ctx);
        let mut last_err = ProviderError::Malformed("no attempts made".into());
        for _ in 0..self.settings.attempts.max(1) {
            match self
                .request_once(&prompt)
                .and_then(|body| extract_response_object(&body))
                .and_then(|j| parse_response(&j))
            {
                Ok(response) => return Ok(response),
                Err(e) => last_err = e,
            }
        }
        Err(last_err)
    }

    fn name(&self) -> &str {
        "llm"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_object_from_noisy_body() {
        let body = "Sure! Here is the answer:\n{\"to\": []}\nHope that helps.";
        let j = extract_response_object(body).unwrap();
        assert!(j.get("to").is_some());
        assert!(extract_response_object("no json here").is_err());
        assert!(extract_response_object("{broken").is_err());
    }

    #[test]
    fn parses_role_lists_and_clamps_confidence() {
        let j: Json = serde_json::from_str(
            r#"{"to":[{"field":"log[E].x","confidence":1.7}],
                "amount":[{"field":"log[E].y","confidence":-0.2}],
                "extra":"ignored"}"#,
        )
        .unwrap();
        let r = parse_response(&j).unwrap();
        assert_eq!(r.roles[&Role::Destination][0].1, 1.0);
        assert_eq!(r.roles[&Role::Amount][0].1, 0.0);
        assert!(!r.roles.contains_key(&Role::Chain));
    }

    #[test]
    fn rejects_objects_without_role_keys() {
        let j: Json = serde_json::from_str(r#"{"message":"hi"}"#).unwrap();
        assert!(matches!(
            parse_response(&j),
            Err(ProviderError::Malformed(_))
        ));
    }
}
