//! Few-shot prompting and the chunk-and-reshuffle generation loop.
//!
//! Seed posts are shuffled and cut into chunks of `shots` examples; each
//! chunk becomes one prompt and yields at most one new post. When a pass
//! over the seeds is exhausted the seeds are reshuffled with the next
//! derived seed and the loop continues until enough posts are accepted.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{generate_text, BackendError, GenerationBackend, GenerationRequest, RetryPolicy};
use crate::corpus::{Label, Lineage, Method, Post, SyntheticPost};
use crate::seed::{derive_seed, rng_from_seed, sha256_hex, shuffle};

pub const POST_CUE: &str = "Post:";
pub const TARGET_CUE: &str = "Target group:";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub shots: usize,
    pub repetition_penalty: f64,
    pub max_new_tokens: u32,
    pub sample: bool,
    pub target_group: Option<String>,
    pub rng_seed: u64,
    /// Consecutive rejected generations tolerated before giving up.
    pub max_consecutive_rejections: usize,
    pub retry: RetryPolicy,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            shots: 5,
            repetition_penalty: 2.0,
            max_new_tokens: 100,
            sample: true,
            target_group: None,
            rng_seed: 1,
            max_consecutive_rejections: 100,
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub prompt_text: String,
    pub example_ids: Vec<String>,
    pub target_group: Option<String>,
}

impl PromptRecord {
    pub fn digest(&self) -> String {
        sha256_hex(self.prompt_text.as_bytes())
    }
}

#[derive(Debug, Error)]
pub enum LmGenError {
    #[error("prompt needs {expected} examples, got {got}")]
    WrongExampleCount { expected: usize, got: usize },
    #[error("examples mix languages {0:?}")]
    MixedLanguages(Vec<String>),
    #[error("example {0} is not labeled hateful")]
    NotHateful(String),
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("need at least {needed} seed posts, have {have}")]
    NotEnoughSeeds { needed: usize, have: usize },
    #[error("n_required must be at least 1")]
    NothingRequested,
    #[error("generation backend failed after {} accepted posts: {source}", partial.len())]
    Backend {
        partial: Vec<SyntheticPost>,
        #[source]
        source: BackendError,
    },
    #[error("{cap} consecutive generations rejected after {} accepted posts", partial.len())]
    TooManyRejections { partial: Vec<SyntheticPost>, cap: usize },
}

fn line_prefix(target_group: Option<&str>) -> String {
    match target_group {
        Some(group) => format!("{TARGET_CUE} {group} {POST_CUE}"),
        None => POST_CUE.to_string(),
    }
}

/// Builds the few-shot prompt: one `Post: <text>` line per example and a
/// trailing empty cue, each optionally prefixed with `Target group: <g>`.
pub fn build_prompt(examples: &[Post], config: &GenerationConfig) -> Result<PromptRecord, LmGenError> {
    if config.shots == 0 {
        return Err(LmGenError::ZeroShots);
    }
    if examples.len() != config.shots {
        return Err(LmGenError::WrongExampleCount { expected: config.shots, got: examples.len() });
    }
    let mut langs: Vec<String> = examples.iter().map(|p| p.lang.clone()).collect();
    langs.sort();
    langs.dedup();
    if langs.len() > 1 {
        return Err(LmGenError::MixedLanguages(langs));
    }
    if let Some(post) = examples.iter().find(|p| p.label != Label::Hateful) {
        return Err(LmGenError::NotHateful(post.id.clone()));
    }

    let prefix = line_prefix(config.target_group.as_deref());
    let mut prompt = String::new();
    for post in examples {
        prompt.push_str(&prefix);
        prompt.push(' ');
        prompt.push_str(&normalize(&post.text));
        prompt.push('\n');
    }
    prompt.push_str(&prefix);
    Ok(PromptRecord {
        prompt_text: prompt,
        example_ids: examples.iter().map(|p| p.id.clone()).collect(),
        target_group: config.target_group.clone(),
    })
}

fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Result of a generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationOutcome {
    pub posts: Vec<SyntheticPost>,
    /// Passes started over the shuffled seeds.
    pub passes: usize,
    pub prompts_issued: usize,
    pub rejected: usize,
}

pub fn generate_posts(
    seed_posts: &[Post],
    n_required: usize,
    backend: &dyn GenerationBackend,
    config: &GenerationConfig,
) -> Result<GenerationOutcome, LmGenError> {
    if config.shots == 0 {
        return Err(LmGenError::ZeroShots);
    }
    if n_required == 0 {
        return Err(LmGenError::NothingRequested);
    }
    if seed_posts.len() < config.shots {
        return Err(LmGenError::NotEnoughSeeds { needed: config.shots, have: seed_posts.len() });
    }
    let lang = seed_posts[0].lang.clone();
    let mut seen: HashSet<String> = seed_posts.iter().map(|p| normalize(&p.text)).collect();
    let mut outcome = GenerationOutcome { posts: Vec::new(), passes: 0, prompts_issued: 0, rejected: 0 };
    let mut consecutive_rejections = 0;

    loop {
        let mut order: Vec<usize> = (0..seed_posts.len()).collect();
        let pass_seed = derive_seed(config.rng_seed, &["lm-pass", &outcome.passes.to_string()]);
        shuffle(&mut rng_from_seed(pass_seed), &mut order);
        outcome.passes += 1;

        for chunk in order.chunks_exact(config.shots) {
            let examples: Vec<Post> = chunk.iter().map(|&i| seed_posts[i].clone()).collect();
            let record = build_prompt(&examples, config)?;
            let request = GenerationRequest {
                prompt: record.prompt_text.clone(),
                max_new_tokens: config.max_new_tokens,
                repetition_penalty: config.repetition_penalty,
                sample: config.sample,
                stop_sequences: vec![POST_CUE.to_string(), TARGET_CUE.to_string()],
            };
            outcome.prompts_issued += 1;

            let accepted = match generate_text(&request, backend, &config.retry) {
                Ok(result) => {
                    let text = normalize(&result.text);
                    (text.split_whitespace().count() >= 3 && seen.insert(text.clone())).then_some(text)
                }
                Err(BackendError::EmptyGeneration) => None,
                Err(source) => {
                    return Err(LmGenError::Backend { partial: outcome.posts, source });
                }
            };

            match accepted {
                Some(text) => {
                    consecutive_rejections = 0;
                    let mut post = Post::new(format!("lm-{:05}", outcome.posts.len() + 1), text, Label::Hateful, lang.clone());
                    post.method = Method::Lm;
                    post.lineage = Some(Lineage {
                        example_ids: record.example_ids.clone(),
                        prompt_digest: Some(record.digest()),
                        ..Default::default()
                    });
                    outcome.posts.push(post);
                    if outcome.posts.len() == n_required {
                        return Ok(outcome);
                    }
                }
                None => {
                    outcome.rejected += 1;
                    consecutive_rejections += 1;
                    if consecutive_rejections >= config.max_consecutive_rejections {
                        return Err(LmGenError::TooManyRejections {
                            partial: outcome.posts,
                            cap: config.max_consecutive_rejections,
                        });
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::mock::MockGenerator;

    fn seeds(n: usize, lang: &str) -> Vec<Post> {
        (0..n)
            .map(|i| Post::new(format!("s{i}"), format!("seed post number {i} with words"), Label::Hateful, lang))
            .collect()
    }

    #[test]
    fn prompt_has_six_cues_and_empty_tail() {
        let record = build_prompt(&seeds(5, "hi"), &GenerationConfig::default()).unwrap();
        assert_eq!(record.prompt_text.matches("Post:").count(), 6);
        assert!(record.prompt_text.ends_with("\nPost:"));
        assert_eq!(record.example_ids, ["s0", "s1", "s2", "s3", "s4"]);
        assert!(record.prompt_text.starts_with("Post: seed post number 0 with words\n"));
    }

    #[test]
    fn target_group_prefixes_every_line() {
        let config = GenerationConfig { target_group: Some("Muslim".into()), ..Default::default() };
        let record = build_prompt(&seeds(5, "hi"), &config).unwrap();
        let lines: Vec<&str> = record.prompt_text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines.iter().all(|l| l.starts_with("Target group: Muslim Post:")));
        assert_eq!(lines[5], "Target group: Muslim Post:");
    }

    #[test]
    fn prompt_preconditions() {
        let config = GenerationConfig::default();
        assert!(matches!(
            build_prompt(&seeds(4, "hi"), &config),
            Err(LmGenError::WrongExampleCount { expected: 5, got: 4 })
        ));
        let mut mixed = seeds(5, "hi");
        mixed[2].lang = "vi".into();
        assert!(matches!(build_prompt(&mixed, &config), Err(LmGenError::MixedLanguages(_))));
        let mut benign = seeds(5, "hi");
        benign[0].label = Label::NonHateful;
        assert!(matches!(build_prompt(&benign, &config), Err(LmGenError::NotHateful(_))));
    }

    #[test]
    fn two_passes_for_forty_posts() {
        let out = generate_posts(&seeds(100, "hi"), 40, &MockGenerator::derived(), &GenerationConfig::default()).unwrap();
        assert_eq!(out.posts.len(), 40);
        assert_eq!(out.passes, 2);
        assert_eq!(out.rejected, 0);
        // passes use different shuffles
        let first: Vec<_> = out.posts[..20].iter().map(|p| p.lineage.clone().unwrap().example_ids).collect();
        let second: Vec<_> = out.posts[20..].iter().map(|p| p.lineage.clone().unwrap().example_ids).collect();
        assert_ne!(first, second);
    }

    #[test]
    fn remainder_seeds_are_dropped_within_a_pass() {
        let out = generate_posts(&seeds(12, "hi"), 3, &MockGenerator::derived(), &GenerationConfig::default()).unwrap();
        // 12 seeds give two chunks per pass
        assert_eq!(out.passes, 2);
        assert_eq!(out.prompts_issued, 3);
    }

    #[test]
    fn echoed_seeds_are_rejected_until_the_cap() {
        let config = GenerationConfig { max_consecutive_rejections: 7, ..Default::default() };
        match generate_posts(&seeds(10, "hi"), 1, &MockGenerator::echo(), &config) {
            Err(LmGenError::TooManyRejections { partial, cap: 7 }) => assert!(partial.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_empty_and_duplicate_generations_are_rejected() {
        let backend = MockGenerator::scripted([
            "too short",
            "Post: nothing before the cue",
            "a fine new post",
            "a  fine new   post",
            "seed post number 3 with words",
            "another fine post here",
        ]);
        let out = generate_posts(&seeds(10, "hi"), 2, &backend, &GenerationConfig::default()).unwrap();
        let texts: Vec<&str> = out.posts.iter().map(|p| p.text.as_str()).collect();
        assert_eq!(texts, ["a fine new post", "another fine post here"]);
        assert_eq!(out.rejected, 4);
    }

    #[test]
    fn backend_failure_returns_partial_results() {
        let backend = MockGenerator::scripted(["one good post"]);
        let config = GenerationConfig { retry: RetryPolicy::immediate(1), ..Default::default() };
        match generate_posts(&seeds(10, "hi"), 3, &backend, &config) {
            Err(LmGenError::Backend { partial, .. }) => assert_eq!(partial.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn deterministic_with_mock() {
        let config = GenerationConfig { rng_seed: 99, ..Default::default() };
        let a = generate_posts(&seeds(30, "vi"), 8, &MockGenerator::derived(), &config).unwrap();
        let b = generate_posts(&seeds(30, "vi"), 8, &MockGenerator::derived(), &config).unwrap();
        assert_eq!(a, b);
        assert!(a.posts.iter().all(|p| p.method == Method::Lm && p.lang == "vi"));
    }
}
