use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::matching::{MaskingConfig, MatchSpan, Matcher, NerFallback};
use crate::backends::{ner_persons, BackendError, NerBackend};
use crate::entity_table::{EntityTable, MaskCategory};
use crate::corpus::{tokens, Post};

/// A post whose matched entity spans were replaced by mask tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskedPost {
    pub origin_id: String,
    pub text: String,
    pub spans: Vec<MatchSpan>,
    pub lang: String,
}

impl MaskedPost {
    /// Mask tokens appearing in the text, in order.
    pub fn mask_categories(&self) -> Vec<MaskCategory> {
        super::mask_occurrences(&self.text)
            .into_iter()
            .map(|(_, category)| category)
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("NER lookup failed for post {post_id}: {source}")]
    Ner {
        post_id: String,
        #[source]
        source: BackendError,
    },
    #[error("NER fallback is enabled but no NER backend was supplied")]
    MissingNer,
}

pub fn mask_post(
    post: &Post,
    table: &EntityTable,
    config: &MaskingConfig,
    ner: Option<&dyn NerBackend>,
) -> Result<MaskedPost, MaskError> {
    mask_with(post, &Matcher::new(table, config), config, ner)
}

/// Masks a batch of posts with one prepared matcher.
pub fn mask_posts(
    posts: &[Post],
    table: &EntityTable,
    config: &MaskingConfig,
    ner: Option<&dyn NerBackend>,
) -> Result<Vec<MaskedPost>, MaskError> {
    let matcher = Matcher::new(table, config);
    posts
        .iter()
        .map(|post| mask_with(post, &matcher, config, ner))
        .collect()
}

fn mask_with(
    post: &Post,
    matcher: &Matcher<'_>,
    config: &MaskingConfig,
    ner: Option<&dyn NerBackend>,
) -> Result<MaskedPost, MaskError> {
    let toks = tokens(&post.text);
    let mut spans = matcher.find(&toks);

    if config.ner_fallback == NerFallback::External {
        let ner = ner.ok_or(MaskError::MissingNer)?;
        let persons = ner_persons(&post.text, ner).map_err(|source| MaskError::Ner {
            post_id: post.id.clone(),
            source,
        })?;
        let offsets = token_char_offsets(&post.text);
        let chars: Vec<char> = post.text.chars().collect();
        for person in persons {
            let covered: Vec<usize> = offsets
                .iter()
                .enumerate()
                .filter(|(_, &(s, e))| s < person.end && person.start < e)
                .map(|(i, _)| i)
                .collect();
            let (Some(&first), Some(&last)) = (covered.first(), covered.last()) else {
                continue;
            };
            if spans.iter().any(|s| s.overlaps(first, last + 1)) {
                continue;
            }
            spans.push(MatchSpan {
                token_start: first,
                token_end: last + 1,
                category: MaskCategory::I,
                surface_matched: chars[person.start..person.end].iter().collect(),
                similarity: 1.0,
                ner_origin: true,
            });
        }
        spans.sort_by_key(|s| s.token_start);
    }

    Ok(MaskedPost {
        origin_id: post.id.clone(),
        text: render(&toks, &spans),
        spans,
        lang: post.lang.clone(),
    })
}

/// Char offsets `[start, end)` of each whitespace token.
fn token_char_offsets(text: &str) -> Vec<(usize, usize)> {
    let mut offsets = Vec::new();
    let mut start = None;
    let mut idx = 0;
    for (i, c) in text.chars().enumerate() {
        idx = i + 1;
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                offsets.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        offsets.push((s, idx));
    }
    offsets
}

fn render(toks: &[&str], spans: &[MatchSpan]) -> String {
    let mut out: Vec<&str> = Vec::with_capacity(toks.len());
    let mut i = 0;
    let mut spans = spans.iter().peekable();
    while i < toks.len() {
        match spans.peek() {
            Some(span) if span.token_start == i => {
                out.push(span.category.mask_token());
                i = span.token_end;
                spans.next();
            }
            _ => {
                out.push(toks[i]);
                i += 1;
            }
        }
    }
    out.join(" ")
}

/// Puts the original tokens back in place of each mask, returning the
/// whitespace-normalized original text.
pub fn reconstruct(masked: &MaskedPost, original_text: &str) -> String {
    let toks = tokens(original_text);
    let mut out: Vec<&str> = Vec::new();
    let mut spans = masked.spans.iter();
    for token in masked.text.split_whitespace() {
        if MaskCategory::from_mask_token(token).is_some() {
            if let Some(span) = spans.next() {
                out.extend_from_slice(&toks[span.token_start..span.token_end]);
                continue;
            }
        }
        out.push(token);
    }
    out.join(" ")
}

#[derive(Debug, Error)]
pub enum MaskedFileError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
}

pub fn load_masked(path: impl AsRef<Path>) -> Result<Vec<MaskedPost>, MaskedFileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MaskedFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| MaskedFileError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn save_masked(posts: &[MaskedPost], path: impl AsRef<Path>) -> Result<(), MaskedFileError> {
    let path = path.as_ref();
    let io_err = |source| MaskedFileError::Io { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    for post in posts {
        let line = serde_json::to_string(post).expect("masked post serialization is infallible");
        writeln!(file, "{line}").map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::mock::MockNer;
    use crate::corpus::Label;

    fn hate_table() -> EntityTable {
        EntityTable::from_entries(
            "en",
            [(MaskCategory::HT, "kike"), (MaskCategory::HT, "cunt"), (MaskCategory::HT, "dyke")],
        )
        .unwrap()
    }

    fn post(text: &str) -> Post {
        Post::new("p1", text, Label::Hateful, "en")
    }

    #[test]
    fn masks_adjacent_hate_terms() {
        let p = post("this ugly kike cunt keeps showing up on my timeline");
        let masked = mask_post(&p, &hate_table(), &MaskingConfig::default(), None).unwrap();
        assert_eq!(masked.text, "this ugly <MASK-HT> <MASK-HT> keeps showing up on my timeline");
        assert_eq!(masked.spans.len(), 2);
        assert_eq!(reconstruct(&masked, &p.text), p.text);
    }

    #[test]
    fn masks_single_term() {
        let masked = mask_post(&post("angry bald dyke"), &hate_table(), &MaskingConfig::default(), None).unwrap();
        assert_eq!(masked.text, "angry bald <MASK-HT>");
        assert_eq!(masked.mask_categories(), vec![MaskCategory::HT]);
    }

    #[test]
    fn no_hits_leaves_text_alone() {
        let p = post("nothing to see here");
        let masked = mask_post(&p, &hate_table(), &MaskingConfig::default(), None).unwrap();
        assert_eq!(masked.text, p.text);
        assert!(masked.spans.is_empty());
    }

    #[test]
    fn ner_fallback_masks_unlisted_people() {
        let p = post("the kike friend of Bhagat Singh spoke");
        let ner = MockNer::from_surfaces([("Bhagat Singh", "PERSON"), ("kike", "PERSON")]);
        let config = MaskingConfig { ner_fallback: NerFallback::External, ..Default::default() };
        let masked = mask_post(&p, &hate_table(), &config, Some(&ner)).unwrap();
        assert_eq!(masked.text, "the <MASK-HT> friend of <MASK-I> spoke");
        assert!(masked.spans[1].ner_origin);
        assert_eq!(masked.spans[1].surface_matched, "Bhagat Singh");
        assert_eq!(reconstruct(&masked, &p.text), p.text);
    }

    #[test]
    fn ner_failure_names_post() {
        let config = MaskingConfig { ner_fallback: NerFallback::External, ..Default::default() };
        let ner = MockNer::failing();
        let err = mask_post(&post("a b c"), &hate_table(), &config, Some(&ner)).unwrap_err();
        assert!(err.to_string().contains("p1"));
        assert!(matches!(
            mask_post(&post("a b c"), &hate_table(), &config, None),
            Err(MaskError::MissingNer)
        ));
    }

    #[test]
    fn token_offsets_are_char_based() {
        assert_eq!(token_char_offsets(" अब  b "), vec![(1, 3), (5, 6)]);
    }

    #[test]
    fn masked_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let masked = vec![mask_post(&post("angry bald dyke"), &hate_table(), &MaskingConfig::default(), None).unwrap()];
        save_masked(&masked, &path).unwrap();
        let raw = fs::read_to_string(&path).unwrap();
        assert_eq!(
            raw,
            "{\"origin_id\":\"p1\",\"text\":\"angry bald <MASK-HT>\",\"spans\":[{\"start\":2,\"end\":3,\"category\":\"HT\",\"surface\":\"dyke\",\"similarity\":1.0}],\"lang\":\"en\"}\n"
        );
        assert_eq!(load_masked(&path).unwrap(), masked);
    }
}
