//! Labeled post collections: the JSON-Lines corpus format, cleaning and
//! seeded sampling.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Hateful,
    NonHateful,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Hateful => "hateful",
            Label::NonHateful => "non_hateful",
        }
    }
}

/// How a post came to exist.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Original,
    Mt,
    Ces,
    Lm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Original => "original",
            Method::Mt => "mt",
            Method::Ces => "ces",
            Method::Lm => "lm",
        }
    }
}

/// Provenance of a synthetic post.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub example_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_digest: Option<String>,
}

/// A single labeled text item. Field order is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub text: String,
    pub label: Label,
    pub lang: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default)]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lineage: Option<Lineage>,
}

impl Post {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Label, lang: impl Into<String>) -> Self {
        Post {
            id: id.into(),
            text: text.into(),
            label,
            lang: lang.into(),
            source: None,
            method: Method::Original,
            lineage: None,
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }
}

/// A synthetic post is an ordinary post whose method is not `original` and
/// which carries lineage.
pub type SyntheticPost = Post;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub non_hateful: usize,
    pub hateful: usize,
}

impl LabelCounts {
    pub fn total(&self) -> usize {
        self.non_hateful + self.hateful
    }
}

/// Ordered collection of posts. Counts are always recomputed from the posts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub posts: Vec<Post>,
}

impl Dataset {
    pub fn new(posts: Vec<Post>) -> Self {
        Dataset { posts }
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn counts(&self) -> LabelCounts {
        let mut counts = LabelCounts::default();
        for post in &self.posts {
            match post.label {
                Label::Hateful => counts.hateful += 1,
                Label::NonHateful => counts.non_hateful += 1,
            }
        }
        counts
    }

    pub fn hateful(&self) -> impl Iterator<Item = &Post> {
        self.posts.iter().filter(|p| p.label == Label::Hateful)
    }

    pub fn with_label(&self, label: Label) -> Dataset {
        Dataset::new(self.posts.iter().filter(|p| p.label == label).cloned().collect())
    }

    /// Serializes to the corpus JSON-Lines format.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for post in &self.posts {
            out.push_str(&serde_json::to_string(post).expect("post serialization is infallible"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("{path}:{line}: duplicate id {id:?}")]
    DuplicateId { path: PathBuf, line: usize, id: String },
    #[error("requested {requested}, available {available}")]
    NotEnoughHateful { requested: usize, available: usize },
}

/// Loads a corpus JSON-Lines file. Blank lines are skipped; the first bad
/// record fails the whole load with its line number.
pub fn load_corpus(path: impl AsRef<Path>, expected_lang: Option<&str>) -> Result<Dataset, CorpusError> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::Io { path: path.to_path_buf(), source };
    let file = fs::File::open(path).map_err(io_err)?;
    let reader = BufReader::new(file);

    let mut posts = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| CorpusError::Malformed {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let post: Post = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if post.id.is_empty() {
            return Err(malformed("empty id".into()));
        }
        if post.text.trim().is_empty() {
            return Err(malformed(format!("post {:?} has empty text", post.id)));
        }
        if let Some(lang) = expected_lang {
            if post.lang != lang {
                return Err(malformed(format!(
                    "post {:?} has lang {:?}, expected {:?}",
                    post.id, post.lang, lang
                )));
            }
        }
        if !seen.insert(post.id.clone()) {
            return Err(CorpusError::DuplicateId {
                path: path.to_path_buf(),
                line: line_no,
                id: post.id,
            });
        }
        posts.push(post);
    }
    Ok(Dataset::new(posts))
}

pub fn save_corpus(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::Io { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(dataset.to_jsonl().as_bytes()).map_err(io_err)?;
    Ok(())
}

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:[a-z][a-z0-9+.\-]*://|www\.)\S*").unwrap())
}

fn tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[@#]\w+").unwrap())
}

/// Emoji and pictograph blocks, dingbats, flags, skin tones, variation
/// selectors and the zero-width joiner used in emoji sequences.
fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F300..=0x1F5FF   // misc symbols and pictographs
        | 0x1F600..=0x1F64F // emoticons
        | 0x1F680..=0x1F6FF // transport and map
        | 0x1F700..=0x1F7FF // alchemical, geometric shapes extended
        | 0x1F800..=0x1F8FF // supplemental arrows-c
        | 0x1F900..=0x1F9FF // supplemental symbols and pictographs
        | 0x1FA00..=0x1FAFF // chess, symbols and pictographs extended-a
        | 0x1F1E6..=0x1F1FF // regional indicators
        | 0x2600..=0x26FF   // misc symbols
        | 0x2700..=0x27BF   // dingbats
        | 0x2B50 | 0x2B55 | 0x2B1B | 0x2B1C
        | 0xFE00..=0xFE0F   // variation selectors
        | 0x200D
        | 0x20E3)
}

/// Removes emoji, URLs, @-mentions and #-hashtags, then collapses
/// whitespace. Posts with two or fewer tokens left are filtered out.
pub fn clean_text(text: &str) -> String {
    let no_emoji: String = text.chars().filter(|&c| !is_emoji(c)).collect();
    let no_urls = url_re().replace_all(&no_emoji, " ");
    let no_tags = tag_re().replace_all(&no_urls, " ");
    no_tags.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Whitespace-delimited tokens.
pub fn tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

pub const MIN_TOKENS_EXCLUSIVE: usize = 2;

pub fn preprocess(post: &Post) -> Option<Post> {
    let text = clean_text(&post.text);
    if text.split_whitespace().count() <= MIN_TOKENS_EXCLUSIVE {
        return None;
    }
    Some(Post { text, ..post.clone() })
}

pub fn preprocess_dataset(dataset: &Dataset) -> Dataset {
    Dataset::new(dataset.posts.iter().filter_map(preprocess).collect())
}

/// Seeded uniform draw of `n` hateful posts without replacement, in draw order.
pub fn sample_hateful(dataset: &Dataset, n: usize, rng_seed: u64) -> Result<Dataset, CorpusError> {
    let hateful: Vec<&Post> = dataset.hateful().collect();
    if n > hateful.len() {
        return Err(CorpusError::NotEnoughHateful {
            requested: n,
            available: hateful.len(),
        });
    }
    let mut rng = seed::rng_from_seed(rng_seed);
    let picks = seed::sample_indices(&mut rng, hateful.len(), n);
    Ok(Dataset::new(picks.into_iter().map(|i| hateful[i].clone()).collect()))
}
