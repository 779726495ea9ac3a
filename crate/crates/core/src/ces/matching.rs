use serde::{Deserialize, Serialize};

use super::distance::similarity_chars;
use crate::entity_table::{EntityTable, MaskCategory};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NerFallback {
    #[default]
    Off,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaskingConfig {
    /// Spans are kept when similarity is strictly greater than this.
    pub threshold: f64,
    pub max_ngram: usize,
    pub case_fold: bool,
    pub ner_fallback: NerFallback,
    pub category_priority: Vec<MaskCategory>,
}

impl Default for MaskingConfig {
    fn default() -> Self {
        MaskingConfig {
            threshold: 0.75,
            max_ngram: 3,
            case_fold: true,
            ner_fallback: NerFallback::Off,
            category_priority: MaskCategory::DEFAULT_PRIORITY.to_vec(),
        }
    }
}

impl MaskingConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(format!("threshold must be in (0, 1], got {}", self.threshold));
        }
        if self.max_ngram == 0 {
            return Err("max_ngram must be at least 1".into());
        }
        Ok(())
    }

    fn priority_rank(&self, category: MaskCategory) -> usize {
        self.category_priority
            .iter()
            .position(|&c| c == category)
            .unwrap_or(self.category_priority.len())
    }
}

/// A run of tokens matched against a table surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchSpan {
    #[serde(rename = "start")]
    pub token_start: usize,
    #[serde(rename = "end")]
    pub token_end: usize,
    pub category: MaskCategory,
    #[serde(rename = "surface")]
    pub surface_matched: String,
    pub similarity: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ner_origin: bool,
}

impl MatchSpan {
    pub fn len(&self) -> usize {
        self.token_end - self.token_start
    }

    pub fn is_empty(&self) -> bool {
        self.token_end <= self.token_start
    }

    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.token_start < end && start < self.token_end
    }
}

struct Surface {
    category: MaskCategory,
    text: String,
    chars: Vec<char>,
}

/// A table prepared for repeated matching under one config.
pub struct Matcher<'a> {
    config: &'a MaskingConfig,
    surfaces: Vec<Surface>,
}

impl<'a> Matcher<'a> {
    pub fn new(table: &EntityTable, config: &'a MaskingConfig) -> Self {
        let surfaces = table
            .iter()
            .map(|(category, text)| Surface {
                category,
                text: text.to_string(),
                chars: fold(text, config.case_fold).chars().collect(),
            })
            .collect();
        Matcher { config, surfaces }
    }

    /// Finds non-overlapping spans, ordered by start token.
    pub fn find(&self, tokens: &[&str]) -> Vec<MatchSpan> {
        let config = self.config;
        let mut candidates = Vec::new();
        for start in 0..tokens.len() {
            for width in 1..=config.max_ngram.min(tokens.len() - start) {
                let window = fold(&tokens[start..start + width].join(" "), config.case_fold);
                let window: Vec<char> = window.chars().collect();
                if let Some(best) = self.best_surface(&window) {
                    candidates.push(MatchSpan {
                        token_start: start,
                        token_end: start + width,
                        category: best.0.category,
                        surface_matched: best.0.text.clone(),
                        similarity: best.1,
                        ner_origin: false,
                    });
                }
            }
        }

        // longest, then most similar, then category priority, then leftmost
        candidates.sort_by(|a, b| {
            b.len()
                .cmp(&a.len())
                .then(b.similarity.total_cmp(&a.similarity))
                .then(config.priority_rank(a.category).cmp(&config.priority_rank(b.category)))
                .then(a.token_start.cmp(&b.token_start))
        });
        let mut kept: Vec<MatchSpan> = Vec::new();
        for candidate in candidates {
            if kept
                .iter()
                .all(|k| !k.overlaps(candidate.token_start, candidate.token_end))
            {
                kept.push(candidate);
            }
        }
        kept.sort_by_key(|s| s.token_start);
        kept
    }

    fn best_surface(&self, window: &[char]) -> Option<(&Surface, f64)> {
        let threshold = self.config.threshold;
        let mut best: Option<(&Surface, f64)> = None;
        for surface in &self.surfaces {
            let longest = window.len().max(surface.chars.len());
            if longest == 0 {
                continue;
            }
            let len_gap = window.len().abs_diff(surface.chars.len());
            if 1.0 - len_gap as f64 / longest as f64 <= threshold {
                continue;
            }
            let sim = similarity_chars(window, &surface.chars);
            if sim <= threshold {
                continue;
            }
            let better = match best {
                None => true,
                Some((current, current_sim)) => {
                    sim > current_sim
                        || (sim == current_sim
                            && self.config.priority_rank(surface.category)
                                < self.config.priority_rank(current.category))
                }
            };
            if better {
                best = Some((surface, sim));
            }
        }
        best
    }
}

fn fold(text: &str, case_fold: bool) -> String {
    if case_fold {
        text.to_lowercase()
    } else {
        text.to_string()
    }
}

pub fn find_matches(tokens: &[&str], table: &EntityTable, config: &MaskingConfig) -> Vec<MatchSpan> {
    Matcher::new(table, config).find(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(entries: &[(MaskCategory, &str)]) -> EntityTable {
        EntityTable::from_entries("en", entries.iter().map(|&(c, s)| (c, s))).unwrap()
    }

    #[test]
    fn exact_hits_are_found() {
        let t = table(&[(MaskCategory::HT, "kike"), (MaskCategory::HT, "cunt")]);
        let tokens: Vec<&str> = "this ugly kike cunt keeps showing".split(' ').collect();
        let spans = find_matches(&tokens, &t, &MaskingConfig::default());
        assert_eq!(spans.len(), 2);
        assert_eq!((spans[0].token_start, spans[0].token_end), (2, 3));
        assert_eq!(spans[0].category, MaskCategory::HT);
        assert_eq!(spans[0].similarity, 1.0);
        assert_eq!(spans[1].surface_matched, "cunt");
    }

    #[test]
    fn empty_table_matches_nothing() {
        let spans = find_matches(&["a", "b"], &EntityTable::empty("en"), &MaskingConfig::default());
        assert!(spans.is_empty());
    }

    #[test]
    fn near_miss_above_threshold() {
        let t = table(&[(MaskCategory::HT, "kike")]);
        let spans = find_matches(&["kikes"], &t, &MaskingConfig::default());
        assert_eq!(spans.len(), 1);
        assert!((spans[0].similarity - 0.8).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_strict() {
        // "abcd" vs "abxy": similarity 0.5
        let t = table(&[(MaskCategory::G, "abcd")]);
        let config = MaskingConfig { threshold: 0.5, ..Default::default() };
        assert!(find_matches(&["abxy"], &t, &config).is_empty());
        let config = MaskingConfig { threshold: 0.49, ..Default::default() };
        assert_eq!(find_matches(&["abxy"], &t, &config).len(), 1);
    }

    #[test]
    fn longest_span_wins() {
        let t = table(&[(MaskCategory::I, "Bhagat Singh"), (MaskCategory::G, "Singh")]);
        let spans = find_matches(&["praise", "bhagat", "singh", "now"], &t, &MaskingConfig::default());
        assert_eq!(spans.len(), 1);
        assert_eq!((spans[0].token_start, spans[0].token_end), (1, 3));
        assert_eq!(spans[0].category, MaskCategory::I);
    }

    #[test]
    fn priority_breaks_ties() {
        let t = table(&[(MaskCategory::G, "owaisi"), (MaskCategory::I, "owaisi")]);
        let spans = find_matches(&["owaisi"], &t, &MaskingConfig::default());
        assert_eq!(spans[0].category, MaskCategory::I);
        let config = MaskingConfig {
            category_priority: vec![MaskCategory::G, MaskCategory::I],
            ..Default::default()
        };
        assert_eq!(find_matches(&["owaisi"], &t, &config)[0].category, MaskCategory::G);
    }

    #[test]
    fn case_sensitivity_is_configurable() {
        let t = table(&[(MaskCategory::G, "Muslim")]);
        assert_eq!(find_matches(&["muslim"], &t, &MaskingConfig::default()).len(), 1);
        let strict = MaskingConfig { case_fold: false, threshold: 0.9, ..Default::default() };
        assert!(find_matches(&["muslim"], &t, &strict).is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(MaskingConfig::default().validate().is_ok());
        assert!(MaskingConfig { threshold: 0.0, ..Default::default() }.validate().is_err());
        assert!(MaskingConfig { threshold: 1.5, ..Default::default() }.validate().is_err());
        assert!(MaskingConfig { max_ngram: 0, ..Default::default() }.validate().is_err());
    }
}
