//! Deterministic in-process backends for tests, examples and offline runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use serde::Deserialize;

use super::{
    BackendError, GenerationBackend, GenerationRequest, GenerationResult, NerBackend, NerEntity,
    TranslationBackend, TranslationRequest, TranslationResult,
};
use crate::ces::mask_occurrences;
use crate::seed::{derive_seed, rng_from_seed, sha256_hex};
use rand::Rng;

fn fixture_error(path: &Path, err: impl std::fmt::Display) -> BackendError {
    BackendError::InvalidRequest(format!("fixture {}: {err}", path.display()))
}

/// Prefixes every non-mask token with a marker and copies mask tokens
/// verbatim. With an empty prefix it is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockTranslator {
    pub prefix: String,
}

impl Default for MockTranslator {
    fn default() -> Self {
        MockTranslator { prefix: "t:".into() }
    }
}

impl MockTranslator {
    pub fn with_prefix(prefix: impl Into<String>) -> Self {
        MockTranslator { prefix: prefix.into() }
    }

    pub fn identity() -> Self {
        MockTranslator::with_prefix("")
    }

    /// Translates one text. Mask tokens glued to other characters are split
    /// off into their own tokens.
    pub fn translate_text(&self, text: &str) -> String {
        let mut parts = Vec::new();
        for token in text.split_whitespace() {
            let mut last = 0;
            for (range, category) in mask_occurrences(token) {
                if range.start > last {
                    parts.push(format!("{}{}", self.prefix, &token[last..range.start]));
                }
                parts.push(category.mask_token().to_string());
                last = range.end;
            }
            if last < token.len() {
                parts.push(format!("{}{}", self.prefix, &token[last..]));
            }
        }
        parts.join(" ")
    }

    /// Inverse of [`translate_text`](Self::translate_text) for whitespace-normalized input.
    pub fn untranslate_text(&self, text: &str) -> String {
        text.split_whitespace()
            .map(|t| t.strip_prefix(self.prefix.as_str()).unwrap_or(t))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl TranslationBackend for MockTranslator {
    fn translate(&self, request: &TranslationRequest) -> Result<TranslationResult, BackendError> {
        Ok(TranslationResult {
            translations: request.texts.iter().map(|t| self.translate_text(t)).collect(),
        })
    }
}

/// What a [`MutatingTranslator`] does to a text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Lower-cases the first mask token and pads it with inner whitespace.
    CaseWhitespace,
    /// Deletes the first mask token.
    Delete,
}

/// Wraps another translator and damages mask tokens at fixed rates. Whether
/// a text is damaged depends only on the seed and the text itself.
pub struct MutatingTranslator<B> {
    pub inner: B,
    pub seed: u64,
    pub case_rate: f64,
    pub delete_rate: f64,
}

impl<B> MutatingTranslator<B> {
    pub fn new(inner: B, seed: u64, case_rate: f64, delete_rate: f64) -> Self {
        MutatingTranslator { inner, seed, case_rate, delete_rate }
    }

    /// The mutation applied to `source` (the text sent for translation).
    pub fn mutation_for(&self, source: &str) -> Option<Mutation> {
        if mask_occurrences(source).is_empty() {
            return None;
        }
        let mut rng = rng_from_seed(derive_seed(self.seed, &["mutate", source]));
        let roll: f64 = rng.gen();
        if roll < self.delete_rate {
            Some(Mutation::Delete)
        } else if roll < self.delete_rate + self.case_rate {
            Some(Mutation::CaseWhitespace)
        } else {
            None
        }
    }
}

impl<B: TranslationBackend> TranslationBackend for MutatingTranslator<B> {
    fn translate(&self, request: &TranslationRequest) -> Result<TranslationResult, BackendError> {
        let mut result = self.inner.translate(request)?;
        for (source, translated) in request.texts.iter().zip(result.translations.iter_mut()) {
            let Some(mutation) = self.mutation_for(source) else { continue };
            let Some((range, category)) = mask_occurrences(translated).into_iter().next() else { continue };
            let replacement = match mutation {
                Mutation::Delete => String::new(),
                Mutation::CaseWhitespace => format!("<mask-{} >", category.code().to_lowercase()),
            };
            translated.replace_range(range, &replacement);
        }
        Ok(result)
    }
}

#[derive(Debug, Default, Deserialize)]
struct GenerationFixture {
    #[serde(default)]
    responses: Vec<String>,
}

enum GenerationMode {
    Scripted(Mutex<std::vec::IntoIter<String>>),
    Derived,
    Echo,
}

/// Mock text generator.
///
/// * `scripted` returns canned responses in order, then fails.
/// * `derived` splices the first half of the first example with the second
///   half of the second example in the prompt, plus a short digest of the
///   prompt so outputs of distinct prompts differ.
/// * `echo` returns the first example of the prompt verbatim.
pub struct MockGenerator {
    mode: GenerationMode,
}

impl MockGenerator {
    pub fn scripted<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let responses: Vec<String> = responses.into_iter().map(Into::into).collect();
        MockGenerator { mode: GenerationMode::Scripted(Mutex::new(responses.into_iter())) }
    }

    pub fn derived() -> Self {
        MockGenerator { mode: GenerationMode::Derived }
    }

    pub fn echo() -> Self {
        MockGenerator { mode: GenerationMode::Echo }
    }

    /// Loads `{"responses": [...]}` as a scripted generator.
    pub fn from_fixture_file(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| fixture_error(path, e))?;
        let fixture: GenerationFixture = serde_json::from_str(&raw).map_err(|e| fixture_error(path, e))?;
        Ok(MockGenerator::scripted(fixture.responses))
    }
}

/// Example texts in a few-shot prompt, in order.
fn prompt_examples(prompt: &str) -> Vec<&str> {
    prompt
        .lines()
        .filter_map(|line| line.split_once("Post:").map(|(_, rest)| rest.trim()))
        .filter(|t| !t.is_empty())
        .collect()
}

impl GenerationBackend for MockGenerator {
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult, BackendError> {
        let text = match &self.mode {
            GenerationMode::Scripted(queue) => queue
                .lock()
                .expect("mock generator lock")
                .next()
                .ok_or_else(|| BackendError::InvalidRequest("scripted responses exhausted".into()))?,
            GenerationMode::Echo => prompt_examples(&request.prompt).first().copied().unwrap_or("").to_string(),
            GenerationMode::Derived => {
                let examples = prompt_examples(&request.prompt);
                let first: Vec<&str> = examples.first().map(|e| e.split_whitespace().collect()).unwrap_or_default();
                let second: Vec<&str> = examples.get(1).map(|e| e.split_whitespace().collect()).unwrap_or_default();
                let mut words: Vec<&str> = first[..first.len().div_ceil(2)].to_vec();
                words.extend_from_slice(&second[second.len() / 2..]);
                let digest = sha256_hex(request.prompt.as_bytes());
                format!("{} {}", words.join(" "), &digest[..8])
            }
        };
        Ok(GenerationResult { text })
    }
}

#[derive(Debug, Default, Deserialize)]
struct NerFixture {
    #[serde(default)]
    surfaces: BTreeMap<String, String>,
}

/// Mock NER: tags every occurrence of known surfaces, or returns fixed spans.
pub enum MockNer {
    Surfaces(Vec<(String, String)>),
    Spans(Vec<NerEntity>),
    Failing,
}

impl MockNer {
    pub fn from_surfaces<I, S, L>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, L)>,
        S: Into<String>,
        L: Into<String>,
    {
        MockNer::Surfaces(pairs.into_iter().map(|(s, l)| (s.into(), l.into())).collect())
    }

    pub fn with_spans(spans: Vec<NerEntity>) -> Self {
        MockNer::Spans(spans)
    }

    pub fn failing() -> Self {
        MockNer::Failing
    }

    /// Loads `{"surfaces": {"Bhagat Singh": "PERSON"}}`.
    pub fn from_fixture_file(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| fixture_error(path, e))?;
        let fixture: NerFixture = serde_json::from_str(&raw).map_err(|e| fixture_error(path, e))?;
        Ok(MockNer::from_surfaces(fixture.surfaces))
    }
}

impl NerBackend for MockNer {
    fn entities(&self, text: &str) -> Result<Vec<NerEntity>, BackendError> {
        match self {
            MockNer::Failing => Err(BackendError::Status { status: 400, message: "mock NER failure".into() }),
            MockNer::Spans(spans) => Ok(spans.clone()),
            MockNer::Surfaces(pairs) => {
                let mut found = Vec::new();
                for (surface, label) in pairs {
                    for (byte_start, _) in text.match_indices(surface.as_str()) {
                        let start = text[..byte_start].chars().count();
                        found.push(NerEntity {
                            start,
                            end: start + surface.chars().count(),
                            label: label.clone(),
                        });
                    }
                }
                found.sort_by_key(|e| (e.start, e.end));
                Ok(found)
            }
        }
    }
}
