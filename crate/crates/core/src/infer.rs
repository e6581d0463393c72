//! Candidate quintuple inference: pluggable providers over categorized data.
//!
//! The built-in lexical provider scores fields by weighted term overlap with
//! a role lexicon (cosine over term-frequency vectors); the type prefilter
//! keeps only fields whose sampled value kinds fit a role. An external
//! provider (the HTTP client lives in the companion crate) plugs in through
//! [`CandidateProvider`]; the pipeline falls back to the lexical provider on
//! provider failure, so a run never hard-fails on inference.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index::sample as rand_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::categorize::Category;
use crate::model::{
    Candidate, CandidateQuintuple, CategoryKey, Diagnostic, Diagnostics, FieldPath, Role,
    TransactionInstance, Value,
};

/// Per-role weighted term lists. Loaded from configuration; weights in (0,1].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoleLexicon {
    terms: BTreeMap<Role, Vec<(String, f64)>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LexiconError {
    #[error("weight {weight} for term `{term}` outside (0,1]")]
    BadWeight { term: String, weight: f64 },
    #[error("duplicate term `{0}` in role lexicon")]
    DuplicateTerm(String),
}

impl RoleLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starter term set. Operators extend or replace it through the lexicon
    /// config file; this is only the out-of-the-box baseline.
    pub fn starter() -> Self {
        let mut lex = RoleLexicon::new();
        let entries: [(Role, &[(&str, f64)]); 5] = [
            (
                Role::Destination,
                &[
                    ("receiver", 0.95),
                    ("recipient", 0.9),
                    ("destination", 0.85),
                    ("to", 0.8),
                    ("dst", 0.75),
                    ("beneficiary", 0.6),
                    ("target", 0.5),
                ],
            ),
            (
                Role::Chain,
                &[
                    ("chain", 0.95),
                    ("network", 0.7),
                    ("id", 0.45),
                    ("domain", 0.4),
                ],
            ),
            (
                Role::Token,
                &[
                    ("token", 0.95),
                    ("asset", 0.8),
                    ("currency", 0.6),
                    ("coin", 0.5),
                ],
            ),
            (
                Role::Amount,
                &[
                    ("amount", 0.95),
                    ("value", 0.85),
                    ("qty", 0.6),
                    ("sum", 0.5),
                    ("total", 0.4),
                ],
            ),
            (
                Role::Timestamp,
                &[
                    ("timestamp", 0.95),
                    ("time", 0.7),
                    ("deadline", 0.6),
                    ("expiry", 0.5),
                    ("date", 0.4),
                ],
            ),
        ];
        for (role, terms) in entries {
            for (t, w) in terms {
                lex.add(role, t, *w).expect("starter terms are valid");
            }
        }
        lex
    }

    pub fn add(&mut self, role: Role, term: &str, weight: f64) -> Result<(), LexiconError> {
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(LexiconError::BadWeight {
                term: term.into(),
                weight,
            });
        }
        let list = self.terms.entry(role).or_default();
        if list.iter().any(|(t, _)| t == term) {
            return Err(LexiconError::DuplicateTerm(term.into()));
        }
        list.push((term.to_lowercase(), weight));
        Ok(())
    }

    pub fn terms(&self, role: Role) -> &[(String, f64)] {
        self.terms.get(&role).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Splits a rendered path into lowercase terms: brackets and dots separate
/// components, camelCase and snake_case split within them, letter/digit
/// boundaries split too.
pub fn tokenize_path(rendered: &str) -> Vec<String> {
    let mut words: Vec<String> = Vec::new();
    for chunk in rendered.split(['[', ']', '.', '_', '$']) {
        if chunk.is_empty() {
            continue;
        }
        split_camel(chunk, &mut words);
    }
    words
}

fn split_camel(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut start = 0;
    for i in 1..chars.len() {
        let prev = chars[i - 1];
        let cur = chars[i];
        let boundary =
            // aB
            (prev.is_lowercase() && cur.is_uppercase())
            // ABc -> A|Bc (acronym run followed by a lowercase tail)
            || (i + 1 < chars.len() && prev.is_uppercase() && cur.is_uppercase() && chars[i + 1].is_lowercase())
            // letter/digit boundaries
            || (prev.is_ascii_digit() != cur.is_ascii_digit());
        if boundary {
            out.push(chars[start..i].iter().collect::<String>().to_lowercase());
            start = i;
        }
    }
    if start < chars.len() {
        out.push(chars[start..].iter().collect::<String>().to_lowercase());
    }
}

/// Deterministic sample of category members: `min(n, |members|)` dataset
/// indices, stable for a given seed.
pub fn sample_category(cat: &Category, n: usize, seed: u64) -> Vec<usize> {
    let take = n.min(cat.members.len());
    if take == 0 {
        return Vec::new();
    }
    let key_word = u64::from_be_bytes(cat.key.0[..8].try_into().expect("8 bytes"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ key_word);
    let mut picked: Vec<usize> = rand_sample(&mut rng, cat.members.len(), take)
        .into_iter()
        .map(|i| cat.members[i])
        .collect();
    picked.sort_unstable();
    picked
}

/// What a provider proposes: per role, rendered paths with confidences.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProviderResponse {
    pub roles: BTreeMap<Role, Vec<(String, f64)>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProviderError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("malformed provider output: {0}")]
    Malformed(String),
}

/// Inference context handed to providers: the category plus sampled member
/// instances serving as contextual examples.
pub struct InferenceContext<'a> {
    pub category: &'a Category,
    pub sample: Vec<&'a TransactionInstance>,
    pub top_k: usize,
}

/// A source of candidate quintuples for one category.
pub trait CandidateProvider {
    fn propose(&self, ctx: &InferenceContext<'_>) -> Result<ProviderResponse, ProviderError>;

    /// Human-readable provider name for diagnostics.
    fn name(&self) -> &str;
}

/// Scores every field of a category against the role lexicon and returns the
/// top-k per role: cosine similarity between the field's term-frequency
/// vector and the lexicon's weight vector, zero-score fields dropped,
/// confidences normalized so the best candidate gets 1.0. Deterministic;
/// ties break by rendered-path byte order.
pub struct LexicalProvider {
    lexicon: RoleLexicon,
}

impl LexicalProvider {
    pub fn new(lexicon: RoleLexicon) -> Self {
        LexicalProvider { lexicon }
    }

    pub fn lexicon(&self) -> &RoleLexicon {
        &self.lexicon
    }

    fn score(&self, role: Role, tokens: &BTreeMap<String, f64>, doc_norm: f64) -> f64 {
        let terms = self.lexicon.terms(role);
        if terms.is_empty() || doc_norm == 0.0 {
            return 0.0;
        }
        let mut dot = 0.0;
        let mut q_norm_sq = 0.0;
        for (term, weight) in terms {
            q_norm_sq += weight * weight;
            if let Some(tf) = tokens.get(term) {
                dot += tf * weight;
            }
        }
        if dot == 0.0 {
            return 0.0;
        }
        dot / (doc_norm * libm::sqrt(q_norm_sq))
    }
}

impl CandidateProvider for LexicalProvider {
    fn propose(&self, ctx: &InferenceContext<'_>) -> Result<ProviderResponse, ProviderError> {
        let mut response = ProviderResponse::default();
        // Term-frequency vectors are per field, shared across roles.
        let docs: Vec<(&String, BTreeMap<String, f64>, f64)> = ctx
            .category
            .fields
            .iter()
            .map(|f| {
                let mut tf: BTreeMap<String, f64> = BTreeMap::new();
                for tok in tokenize_path(f) {
                    *tf.entry(tok).or_insert(0.0) += 1.0;
                }
                let norm = libm::sqrt(tf.values().map(|v| v * v).sum());
                (f, tf, norm)
            })
            .collect();
        for role in Role::ALL {
            let mut scored: Vec<(&String, f64)> = docs
                .iter()
                .filter_map(|(f, tf, norm)| {
                    let s = self.score(role, tf, *norm);
                    (s > 0.0).then_some((*f, s))
                })
                .collect();
            scored.sort_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .unwrap_or(core::cmp::Ordering::Equal)
                    .then_with(|| a.0.cmp(b.0))
            });
            scored.truncate(ctx.top_k);
            let best = scored.first().map(|(_, s)| *s).unwrap_or(1.0);
            response.roles.insert(
                role,
                scored
                    .into_iter()
                    .map(|(f, s)| (f.clone(), s / best))
                    .collect(),
            );
        }
        Ok(response)
    }

    fn name(&self) -> &str {
        "lexical"
    }
}

/// Kinds a sampled value can take, for role typing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ValueKind {
    Uint,
    AddressLike,
    Text,
    Other,
}

fn kind_of(v: &Value) -> ValueKind {
    match v {
        Value::Uint(_) => ValueKind::Uint,
        Value::Address(_) => ValueKind::AddressLike,
        Value::Text(_) => ValueKind::Text,
        _ => ValueKind::Other,
    }
}

/// Heuristic role typing over sampled values: destination and token keep
/// address- or text-valued fields, amount/chain/timestamp keep
/// integer-valued fields. A field qualifies only when every sampled instance
/// agrees on the kind; mixed or absent fields are excluded everywhere.
pub fn type_prefilter(
    cat: &Category,
    sample: &[&TransactionInstance],
) -> BTreeMap<Role, BTreeSet<String>> {
    let mut allowed: BTreeMap<Role, BTreeSet<String>> = Role::ALL
        .into_iter()
        .map(|r| (r, BTreeSet::new()))
        .collect();
    if sample.is_empty() {
        return allowed;
    }
    for field in &cat.fields {
        let Ok(path) = FieldPath::parse(field) else {
            continue;
        };
        let mut kinds = sample.iter().map(|tx| path.resolve(tx).map(|v| kind_of(&v)));
        let first = match kinds.next() {
            Some(Some(k)) => k,
            _ => continue,
        };
        if !kinds.all(|k| k == Some(first)) {
            continue;
        }
        let roles: &[Role] = match first {
            ValueKind::AddressLike | ValueKind::Text => &[Role::Destination, Role::Token],
            ValueKind::Uint => &[Role::Amount, Role::Chain, Role::Timestamp],
            ValueKind::Other => &[],
        };
        for role in roles {
            allowed
                .get_mut(role)
                .expect("all roles present")
                .insert(field.clone());
        }
    }
    allowed
}

/// Why a category could not be inferred.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InferReject {
    #[error("no candidates for role `{0}` after composition")]
    EmptyRole(Role),
    #[error("category has no members")]
    Empty,
    #[error("fewer than five fields")]
    TooFewFields,
}

/// Intersects provider output with the type prefilter (when enabled) and
/// builds the candidate quintuple. An emptied role widens to the prefilter
/// set alone with uniform confidence; if still empty the category is marked
/// uninferable.
pub fn compose_candidates(
    cat: &Category,
    prefilter: Option<&BTreeMap<Role, BTreeSet<String>>>,
    response: &ProviderResponse,
    top_k: usize,
    diags: &mut Diagnostics,
) -> Result<CandidateQuintuple, InferReject> {
    let field_set: BTreeSet<&str> = cat.fields.iter().map(|s| s.as_str()).collect();
    let mut out = CandidateQuintuple::new();
    for role in Role::ALL {
        let proposed = response.roles.get(&role).map(|v| v.as_slice()).unwrap_or(&[]);
        let mut list: Vec<Candidate> = Vec::new();
        for (field, confidence) in proposed.iter().take(top_k) {
            if !field_set.contains(field.as_str()) {
                diags.push(Diagnostic::new(
                    format!("category {} role {role}", cat.key),
                    format!("proposed path `{field}` is not in the category field set; dropped"),
                ));
                continue;
            }
            if let Some(pf) = prefilter {
                if !pf.get(&role).map(|s| s.contains(field)).unwrap_or(false) {
                    continue;
                }
            }
            let path = FieldPath::parse(field).expect("validated against field set");
            list.push(Candidate {
                path,
                confidence: confidence.clamp(0.0, 1.0),
            });
        }
        if list.is_empty() {
            if let Some(pf) = prefilter {
                if let Some(fields) = pf.get(&role) {
                    list = fields
                        .iter()
                        .map(|f| Candidate {
                            path: FieldPath::parse(f).expect("prefilter paths are valid"),
                            confidence: 0.5,
                        })
                        .collect();
                    if !list.is_empty() {
                        diags.push(Diagnostic::new(
                            format!("category {} role {role}", cat.key),
                            "provider produced nothing usable; widened to the type prefilter set",
                        ));
                    }
                }
            }
        }
        if list.is_empty() {
            return Err(InferReject::EmptyRole(role));
        }
        out.set(role, list);
    }
    Ok(out)
}

/// Per-category inference outcome for a whole dataset side.
#[derive(Debug, Default)]
pub struct InferenceOutcome {
    pub candidates: BTreeMap<CategoryKey, CandidateQuintuple>,
    pub uninferable: BTreeMap<CategoryKey, InferReject>,
    pub diagnostics: Diagnostics,
}

/// Inference options; defaults: sample 3 instances, top-5 per role,
/// prefilter on.
#[derive(Debug, Clone, Copy)]
pub struct InferOptions {
    pub sample_n: usize,
    pub top_k: usize,
    pub prefilter: bool,
    pub seed: u64,
}

impl Default for InferOptions {
    fn default() -> Self {
        InferOptions {
            sample_n: 3,
            top_k: 5,
            prefilter: true,
            seed: 0,
        }
    }
}

/// Runs a provider over every category, composing candidates per category.
/// Provider failures fall back to the lexical provider with a warning; the
/// pipeline never hard-fails on inference.
pub fn infer_categories(
    txs: &[TransactionInstance],
    categories: &[Category],
    provider: &dyn CandidateProvider,
    fallback: &LexicalProvider,
    opts: &InferOptions,
) -> InferenceOutcome {
    let mut outcome = InferenceOutcome::default();
    for cat in categories {
        if cat.members.is_empty() {
            outcome.uninferable.insert(cat.key, InferReject::Empty);
            continue;
        }
        if !cat.is_pairable() {
            outcome.uninferable.insert(cat.key, InferReject::TooFewFields);
            outcome.diagnostics.push(Diagnostic::new(
                format!("category {}", cat.key),
                format!(
                    "only {} fields: a quintuple cannot exist; skipped",
                    cat.fields.len()
                ),
            ));
            continue;
        }
        let sample_idx = sample_category(cat, opts.sample_n, opts.seed);
        let sample: Vec<&TransactionInstance> = sample_idx.iter().map(|i| &txs[*i]).collect();
        let ctx = InferenceContext {
            category: cat,
            sample: sample.clone(),
            top_k: opts.top_k,
        };
        let response = match provider.propose(&ctx) {
            Ok(r) => r,
            Err(e) => {
                outcome.diagnostics.push(Diagnostic::new(
                    format!("category {}", cat.key),
                    format!(
                        "provider `{}` failed ({e}); falling back to `{}`",
                        provider.name(),
                        fallback.name()
                    ),
                ));
                fallback.propose(&ctx).expect("lexical provider is total")
            }
        };
        let prefilter = opts.prefilter.then(|| type_prefilter(cat, &sample));
        match compose_candidates(
            cat,
            prefilter.as_ref(),
            &response,
            opts.top_k,
            &mut outcome.diagnostics,
        ) {
            Ok(cq) => {
                outcome.candidates.insert(cat.key, cq);
            }
            Err(reject) => {
                outcome.diagnostics.push(Diagnostic::new(
                    format!("category {}", cat.key),
                    format!("uninferable: {reject}"),
                ));
                outcome.uninferable.insert(cat.key, reject);
            }
        }
    }
    outcome
}
