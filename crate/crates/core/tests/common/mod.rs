//! Corpus builders shared by the integration tests.
#![allow(dead_code)]

use hatesynth::ces::{find_matches, MaskingConfig};
use hatesynth::corpus::{Dataset, Label, Post};
use hatesynth::entity_table::{EntityTable, MaskCategory};
use hatesynth::seed::rng_from_seed;
use rand::seq::SliceRandom;
use rand::Rng;

const ENGLISH: &[&str] = &[
    "yesterday", "really", "always", "never", "weather", "coffee", "morning", "evening", "street", "window",
    "bicycle", "kitchen", "garden", "letter", "answer", "simple", "orange", "yellow", "number", "ticket",
    "minute", "around", "before", "after", "should", "could", "would", "maybe", "quite", "rather",
    "honest", "dinner", "market", "silver", "forest", "pocket", "basket", "button", "castle", "engine",
];

const HINDI: &[&str] = &[
    "aaj", "kal", "ghar", "paani", "khana", "subah", "shaam", "bazaar", "kitaab", "sadak",
    "mausam", "chai", "dost", "gaadi", "kaam", "raat", "din", "accha", "bahut", "thoda",
    "sheher", "gaon", "khet", "nadi", "pahad", "baarish", "dhoop", "rasta", "darwaza", "kamra",
];

/// A table of distinct pseudo-words, `per_category` in each of HT, G and I.
pub fn pseudo_table(lang: &str, per_category: usize, seed: u64) -> EntityTable {
    const SYLLABLES: &[&str] = &["ka", "ro", "vi", "ta", "mu", "le", "sha", "pi", "no", "dra", "gu", "ze", "bo", "fen", "yal"];
    let mut rng = rng_from_seed(seed);
    let mut seen = std::collections::HashSet::new();
    let mut entries = Vec::new();
    for category in [MaskCategory::HT, MaskCategory::G, MaskCategory::I] {
        let mut made = 0;
        while made < per_category {
            let word: String = (0..3).map(|_| *SYLLABLES.choose(&mut rng).unwrap()).collect();
            if seen.insert(word.clone()) {
                let mut chars = word.chars();
                let word = match category {
                    MaskCategory::I => chars.next().unwrap().to_uppercase().chain(chars).collect(),
                    _ => word,
                };
                entries.push((category, word));
                made += 1;
            }
        }
    }
    EntityTable::from_entries(lang, entries).unwrap()
}

/// Romanized Hindi insults that are not table entities.
pub const HINDI_CUES: &[&str] = &["ghatiya", "nafrat", "gandagi", "bekaar", "kameena", "jaahil"];

/// Words that do not fuzzily match any surface of `table`.
pub fn filler(words: &[&'static str], table: &EntityTable) -> Vec<&'static str> {
    let config = MaskingConfig::default();
    words
        .iter()
        .copied()
        .filter(|w| find_matches(&[w], table, &config).is_empty())
        .collect()
}

pub fn english_filler(table: &EntityTable) -> Vec<&'static str> {
    filler(ENGLISH, table)
}

pub fn hindi_filler(table: &EntityTable) -> Vec<&'static str> {
    filler(HINDI, table)
}

pub fn words<R: Rng>(rng: &mut R, vocab: &[&str], n: usize) -> Vec<String> {
    (0..n).map(|_| vocab.choose(rng).unwrap().to_string()).collect()
}

/// Posts of filler words, hateful ones carrying one surface of `categories`
/// drawn from `table`.
pub fn entity_corpus(
    prefix: &str,
    lang: &str,
    table: &EntityTable,
    vocab: &[&str],
    categories: &[MaskCategory],
    hateful: usize,
    non_hateful: usize,
    seed: u64,
) -> Dataset {
    cued_corpus(prefix, lang, table, vocab, &[], categories, hateful, non_hateful, seed)
}

/// Like [`entity_corpus`], with one word of `cues` also added to every
/// hateful post when `cues` is non-empty.
#[allow(clippy::too_many_arguments)]
pub fn cued_corpus(
    prefix: &str,
    lang: &str,
    table: &EntityTable,
    vocab: &[&str],
    cues: &[&str],
    categories: &[MaskCategory],
    hateful: usize,
    non_hateful: usize,
    seed: u64,
) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let surfaces: Vec<&String> = categories.iter().flat_map(|c| table.surfaces(*c)).collect();
    let mut posts = Vec::new();
    for i in 0..hateful {
        let len = rng.gen_range(4..8);
        let mut toks = words(&mut rng, vocab, len);
        let at = rng.gen_range(0..=toks.len());
        toks.insert(at, surfaces.choose(&mut rng).unwrap().to_string());
        if let Some(cue) = cues.choose(&mut rng) {
            let at = rng.gen_range(0..=toks.len());
            toks.insert(at, cue.to_string());
        }
        posts.push(Post::new(format!("{prefix}h{i:04}"), toks.join(" "), Label::Hateful, lang));
    }
    for i in 0..non_hateful {
        let len = rng.gen_range(4..8);
        let toks = words(&mut rng, vocab, len);
        posts.push(Post::new(format!("{prefix}n{i:04}"), toks.join(" "), Label::NonHateful, lang));
    }
    Dataset::new(posts)
}
