//! Clients for translation, text-generation and NER services, the
//! in-process mocks used for tests and offline runs, and the mask audit that
//! guards masked translation.

pub mod audit;
pub mod http;
pub mod mock;
mod translate;

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use audit::{audit_translation, AuditVerdict, MaskAudit};
pub use translate::{apply_to_masked, mt_posts, translate_batch, BatchOptions, TranslateError, TranslatedText, TranslationItem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("backend returned status {status}: {message}")]
    Status { status: u16, message: String },
    #[error("backend returned {got} results for {expected} inputs")]
    LengthMismatch { expected: usize, got: usize },
    #[error("backend produced an empty generation")]
    EmptyGeneration,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("span {start}..{end} is outside text of {len} characters")]
    MalformedSpan { start: usize, end: usize, len: usize },
    #[error("missing credentials: environment variable {0} is not set")]
    MissingToken(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: Box<BackendError> },
}

impl BackendError {
    /// Transport failures, rate limiting and server errors are worth retrying.
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Transport(_) => true,
            BackendError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    #[serde(with = "millis")]
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 3, base_delay: Duration::from_secs(1) }
    }
}

impl RetryPolicy {
    pub fn immediate(max_attempts: u32) -> Self {
        RetryPolicy { max_attempts, base_delay: Duration::ZERO }
    }

    /// Runs `call`, retrying retryable errors with exponential backoff.
    pub fn run<T>(&self, mut call: impl FnMut() -> Result<T, BackendError>) -> Result<T, BackendError> {
        let attempts = self.max_attempts.max(1);
        let mut attempt = 0;
        loop {
            attempt += 1;
            match call() {
                Ok(value) => return Ok(value),
                Err(err) if err.is_retryable() && attempt < attempts => {
                    let delay = self.base_delay * 2u32.saturating_pow(attempt - 1);
                    log::warn!("attempt {attempt}/{attempts} failed ({err}); retrying in {delay:?}");
                    thread::sleep(delay);
                }
                Err(err) if err.is_retryable() => {
                    return Err(BackendError::Exhausted { attempts, last: Box::new(err) })
                }
                Err(err) => return Err(err),
            }
        }
    }
}

mod millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

/// Wire body of a translation call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationRequest {
    pub texts: Vec<String>,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationResult {
    pub translations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub max_new_tokens: u32,
    pub repetition_penalty: f64,
    pub sample: bool,
    #[serde(rename = "stop")]
    pub stop_sequences: Vec<String>,
}

impl GenerationRequest {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.max_new_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_new_tokens must be positive".into()));
        }
        if !(self.repetition_penalty >= 1.0) {
            return Err(BackendError::InvalidRequest(format!(
                "repetition_penalty must be >= 1, got {}",
                self.repetition_penalty
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub text: String,
}

/// Entity returned by an NER service; offsets are in characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NerEntity {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NerResponse {
    pub entities: Vec<NerEntity>,
}

pub trait TranslationBackend: Send + Sync {
    fn translate(&self, request: &TranslationRequest) -> Result<TranslationResult, BackendError>;
}

pub trait GenerationBackend: Send + Sync {
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResult, BackendError>;
}

pub trait NerBackend: Send + Sync {
    fn entities(&self, text: &str) -> Result<Vec<NerEntity>, BackendError>;
}

/// Calls the generator and cuts the continuation at the first stop sequence.
pub fn generate_text(
    request: &GenerationRequest,
    backend: &dyn GenerationBackend,
    retry: &RetryPolicy,
) -> Result<GenerationResult, BackendError> {
    request.validate()?;
    let raw = retry.run(|| backend.generate(request))?;
    let cut = request
        .stop_sequences
        .iter()
        .filter(|s| !s.is_empty())
        .filter_map(|s| raw.text.find(s.as_str()))
        .min()
        .unwrap_or(raw.text.len());
    let text = raw.text[..cut].trim().to_string();
    if text.is_empty() {
        return Err(BackendError::EmptyGeneration);
    }
    Ok(GenerationResult { text })
}

/// Character span of a PERSON entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PersonSpan {
    pub start: usize,
    pub end: usize,
}

/// PERSON entities in `text`, sorted and non-overlapping. Out-of-bounds
/// spans from the backend are an error.
pub fn ner_persons(text: &str, backend: &dyn NerBackend) -> Result<Vec<PersonSpan>, BackendError> {
    let len = text.chars().count();
    let mut spans = Vec::new();
    for entity in backend.entities(text)? {
        if entity.start >= entity.end || entity.end > len {
            return Err(BackendError::MalformedSpan { start: entity.start, end: entity.end, len });
        }
        if entity.label == "PERSON" {
            spans.push(PersonSpan { start: entity.start, end: entity.end });
        }
    }
    spans.sort_by_key(|s| (s.start, std::cmp::Reverse(s.end)));
    let mut kept: Vec<PersonSpan> = Vec::new();
    for span in spans {
        if kept.last().map_or(true, |k| k.end <= span.start) {
            kept.push(span);
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::mock::{MockGenerator, MockNer};
    use super::*;
    use std::cell::Cell;

    fn request(stop: &[&str]) -> GenerationRequest {
        GenerationRequest {
            prompt: "Post: a b c\nPost:".into(),
            max_new_tokens: 100,
            repetition_penalty: 2.0,
            sample: true,
            stop_sequences: stop.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn mock_fixture_is_returned_verbatim() {
        let backend = MockGenerator::scripted(["the canned continuation"]);
        let out = generate_text(&request(&[]), &backend, &RetryPolicy::immediate(1)).unwrap();
        assert_eq!(out.text, "the canned continuation");
    }

    #[test]
    fn truncates_at_stop_sequence() {
        let backend = MockGenerator::scripted([" first post here\nPost: second one"]);
        let out = generate_text(&request(&["Post:"]), &backend, &RetryPolicy::immediate(1)).unwrap();
        assert_eq!(out.text, "first post here");
    }

    #[test]
    fn zero_tokens_is_rejected_before_calling() {
        let backend = MockGenerator::scripted(Vec::<String>::new());
        let mut req = request(&[]);
        req.max_new_tokens = 0;
        assert!(matches!(
            generate_text(&req, &backend, &RetryPolicy::immediate(1)),
            Err(BackendError::InvalidRequest(_))
        ));
    }

    #[test]
    fn empty_generation_is_distinct() {
        let backend = MockGenerator::scripted(["Post: only a cue"]);
        let err = generate_text(&request(&["Post:"]), &backend, &RetryPolicy::immediate(1)).unwrap_err();
        assert_eq!(err, BackendError::EmptyGeneration);
        assert!(!err.is_retryable());
    }

    #[test]
    fn retry_gives_up_after_max_attempts() {
        let calls = Cell::new(0);
        let result: Result<(), _> = RetryPolicy::immediate(3).run(|| {
            calls.set(calls.get() + 1);
            Err(BackendError::Transport("down".into()))
        });
        assert_eq!(calls.get(), 3);
        assert!(matches!(result, Err(BackendError::Exhausted { attempts: 3, .. })));
    }

    #[test]
    fn retry_stops_on_client_errors() {
        let calls = Cell::new(0);
        let result: Result<(), _> = RetryPolicy::immediate(3).run(|| {
            calls.set(calls.get() + 1);
            Err(BackendError::Status { status: 400, message: "bad".into() })
        });
        assert_eq!(calls.get(), 1);
        assert!(matches!(result, Err(BackendError::Status { status: 400, .. })));
    }

    #[test]
    fn retry_recovers() {
        let calls = Cell::new(0);
        let result = RetryPolicy::immediate(3).run(|| {
            calls.set(calls.get() + 1);
            if calls.get() < 3 {
                Err(BackendError::Status { status: 503, message: "busy".into() })
            } else {
                Ok(calls.get())
            }
        });
        assert_eq!(result.unwrap(), 3);
    }

    #[test]
    fn ner_person_spans() {
        let ner = MockNer::from_surfaces([("Bhagat Singh", "PERSON"), ("Delhi", "GPE")]);
        let spans = ner_persons("salute Bhagat Singh from Delhi", &ner).unwrap();
        assert_eq!(spans, vec![PersonSpan { start: 7, end: 19 }]);
        assert!(ner_persons("nobody here", &ner).unwrap().is_empty());
    }

    #[test]
    fn ner_out_of_bounds_is_malformed() {
        let ner = MockNer::with_spans(vec![NerEntity { start: 2, end: 40, label: "PERSON".into() }]);
        assert!(matches!(
            ner_persons("short", &ner),
            Err(BackendError::MalformedSpan { end: 40, len: 5, .. })
        ));
    }

    #[test]
    fn generation_wire_format() {
        let json = serde_json::to_value(request(&["Post:"])).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "prompt": "Post: a b c\nPost:",
                "max_new_tokens": 100,
                "repetition_penalty": 2.0,
                "sample": true,
                "stop": ["Post:"]
            })
        );
    }
}
