use std::collections::HashMap;
use std::thread;

use thiserror::Error;

use super::audit::{audit_translation, AuditVerdict, MaskAudit};
use super::{BackendError, RetryPolicy, TranslationBackend, TranslationRequest};
use crate::ces::MaskedPost;
use crate::corpus::{Lineage, Method, Post};
use crate::seed::sha256_hex;

/// Anything with an id and a text that can be sent for translation.
pub trait TranslationItem {
    fn item_id(&self) -> &str;
    fn item_text(&self) -> &str;
}

impl TranslationItem for Post {
    fn item_id(&self) -> &str {
        &self.id
    }
    fn item_text(&self) -> &str {
        &self.text
    }
}

impl TranslationItem for MaskedPost {
    fn item_id(&self) -> &str {
        &self.origin_id
    }
    fn item_text(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchOptions {
    pub batch_size: usize,
    /// Maximum batches in flight at once.
    pub concurrency: usize,
    pub retry: RetryPolicy,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions { batch_size: 16, concurrency: 4, retry: RetryPolicy::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslatedText {
    pub origin_id: String,
    /// Translation, with mask tokens canonicalized when the audit repaired them.
    pub text: String,
    pub audit: MaskAudit,
}

impl TranslatedText {
    /// Whether the post may continue downstream.
    pub fn is_usable(&self) -> bool {
        self.audit.verdict != AuditVerdict::Dropped
    }
}

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("batch_size must be at least 1")]
    InvalidBatchSize,
    #[error("translation failed for posts [{}]: {source}", post_ids.join(", "))]
    Batch {
        post_ids: Vec<String>,
        #[source]
        source: BackendError,
    },
}

/// Translates items in batches, preserving input order, and audits the mask
/// tokens of every item.
///
/// Batches are keyed by a digest of their content; a batch whose content was
/// already translated in this call is not sent again.
pub fn translate_batch<T: TranslationItem + Sync>(
    items: &[T],
    backend: &dyn TranslationBackend,
    from_lang: &str,
    to_lang: &str,
    options: &BatchOptions,
) -> Result<Vec<TranslatedText>, TranslateError> {
    if options.batch_size == 0 {
        return Err(TranslateError::InvalidBatchSize);
    }
    let batches: Vec<&[T]> = items.chunks(options.batch_size).collect();
    let keys: Vec<String> = batches.iter().map(|b| batch_key(b, from_lang, to_lang)).collect();

    let mut done: HashMap<&str, Vec<String>> = HashMap::new();
    let pending: Vec<usize> = {
        let mut seen = std::collections::HashSet::new();
        (0..batches.len()).filter(|&i| seen.insert(keys[i].as_str())).collect()
    };

    for wave in pending.chunks(options.concurrency.max(1)) {
        let results: Vec<(usize, Result<Vec<String>, BackendError>)> = thread::scope(|scope| {
            let handles: Vec<_> = wave
                .iter()
                .map(|&i| {
                    let batch = batches[i];
                    scope.spawn(move || (i, send(batch, backend, from_lang, to_lang, &options.retry)))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("translation worker panicked")).collect()
        });
        for (i, result) in results {
            match result {
                Ok(translations) => {
                    done.insert(keys[i].as_str(), translations);
                }
                Err(source) => {
                    return Err(TranslateError::Batch {
                        post_ids: batches[i].iter().map(|t| t.item_id().to_string()).collect(),
                        source,
                    })
                }
            }
        }
    }

    let mut out = Vec::with_capacity(items.len());
    for (batch, key) in batches.iter().zip(&keys) {
        for (item, translated) in batch.iter().zip(&done[key.as_str()]) {
            let (audit, text) = audit_translation(item.item_id(), item.item_text(), translated);
            if audit.verdict == AuditVerdict::Dropped {
                log::warn!("post {} dropped: mask tokens lost in translation", item.item_id());
            }
            out.push(TranslatedText { origin_id: item.item_id().to_string(), text, audit });
        }
    }
    Ok(out)
}

fn send<T: TranslationItem>(
    batch: &[T],
    backend: &dyn TranslationBackend,
    from_lang: &str,
    to_lang: &str,
    retry: &RetryPolicy,
) -> Result<Vec<String>, BackendError> {
    let request = TranslationRequest {
        texts: batch.iter().map(|t| t.item_text().to_string()).collect(),
        from: from_lang.to_string(),
        to: to_lang.to_string(),
    };
    let result = retry.run(|| backend.translate(&request))?;
    if result.translations.len() != request.texts.len() {
        return Err(BackendError::LengthMismatch {
            expected: request.texts.len(),
            got: result.translations.len(),
        });
    }
    Ok(result.translations)
}

fn batch_key<T: TranslationItem>(batch: &[T], from_lang: &str, to_lang: &str) -> String {
    let mut buf = Vec::new();
    for part in [from_lang, to_lang].into_iter().chain(batch.iter().map(|t| t.item_text())) {
        buf.extend_from_slice(&(part.len() as u64).to_le_bytes());
        buf.extend_from_slice(part.as_bytes());
    }
    sha256_hex(&buf)
}

/// Applies translations to masked posts, keeping only the usable ones.
pub fn apply_to_masked(masked: &[MaskedPost], translated: &[TranslatedText], to_lang: &str) -> Vec<MaskedPost> {
    masked
        .iter()
        .zip(translated)
        .filter(|(_, t)| t.is_usable())
        .map(|(m, t)| MaskedPost {
            origin_id: m.origin_id.clone(),
            text: t.text.clone(),
            spans: m.spans.clone(),
            lang: to_lang.to_string(),
        })
        .collect()
}

/// Turns translated source posts into machine-translated synthetic posts
/// (`<id>-mt`), skipping any whose audit dropped them.
pub fn mt_posts(posts: &[Post], translated: &[TranslatedText], to_lang: &str) -> Vec<Post> {
    posts
        .iter()
        .zip(translated)
        .filter(|(_, t)| t.is_usable())
        .map(|(p, t)| {
            let mut post = Post::new(format!("{}-mt", p.id), t.text.clone(), p.label, to_lang);
            post.method = Method::Mt;
            post.source = p.source.clone();
            post.lineage = Some(Lineage { origin_id: Some(p.id.clone()), ..Default::default() });
            post
        })
        .collect()
}
