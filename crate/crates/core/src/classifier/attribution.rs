//! Word-level attribution for the linear model.
//!
//! A post's score is a sum over its n-gram features, so the n-grams lying
//! inside a word add up to that word's exact contribution. Contributions
//! are averaged per word over the test posts containing it and ranked by
//! absolute value.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::features::{count_norm, fold_token, token_buckets};
use super::model::{ClassifierError, Model};
use crate::corpus::Dataset;
use crate::entity_table::EntityTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenContribution {
    pub token: String,
    pub mean_contribution: f64,
    pub is_entity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub top_tokens: Vec<TokenContribution>,
    /// Fraction of `top_tokens` that are entity words.
    pub entity_share: f64,
}

/// Words counted as entities: whole surfaces and the words of multi-word
/// surfaces, case-folded.
fn entity_words(table: &EntityTable) -> HashSet<String> {
    let mut words = HashSet::new();
    for (_, surface) in table.iter() {
        let folded = surface.to_lowercase();
        words.extend(folded.split_whitespace().map(str::to_string));
        words.insert(folded);
    }
    words
}

/// Per-word contributions of one post's score (bias excluded).
pub fn post_contributions(model: &Model, text: &str) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let norm = count_norm(text, &model.features);
    if norm == 0.0 {
        return out;
    }
    for token in text.split_whitespace() {
        let contribution: f64 = token_buckets(token, &model.features)
            .into_iter()
            .map(|b| model.weights[b as usize])
            .sum::<f64>()
            / norm;
        *out.entry(fold_token(token, &model.features)).or_insert(0.0) += contribution;
    }
    out
}

/// Top `k` words by absolute mean contribution; ties are broken by the word
/// in lexicographic order.
pub fn attribute(model: &Model, test_set: &Dataset, target_table: &EntityTable, k: usize) -> Result<AttributionReport, ClassifierError> {
    if test_set.is_empty() {
        return Err(ClassifierError::EmptyTestSet);
    }
    let mut totals: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for post in &test_set.posts {
        for (token, contribution) in post_contributions(model, &post.text) {
            let entry = totals.entry(token).or_insert((0.0, 0));
            entry.0 += contribution;
            entry.1 += 1;
        }
    }

    let entities = entity_words(target_table);
    let mut ranked: Vec<TokenContribution> = totals
        .into_iter()
        .map(|(token, (sum, count))| TokenContribution {
            is_entity: entities.contains(&token.to_lowercase()),
            mean_contribution: sum / count as f64,
            token,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.mean_contribution
            .abs()
            .total_cmp(&a.mean_contribution.abs())
            .then_with(|| a.token.cmp(&b.token))
    });
    ranked.truncate(k);

    let entity_share = if ranked.is_empty() {
        0.0
    } else {
        ranked.iter().filter(|t| t.is_entity).count() as f64 / ranked.len() as f64
    };
    Ok(AttributionReport { top_tokens: ranked, entity_share })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::features::{featurize, FeatureConfig};
    use crate::classifier::model::TrainConfig;
    use crate::corpus::{Label, Post};
    use crate::entity_table::MaskCategory;

    fn zero_model() -> Model {
        let features = FeatureConfig { hash_buckets: 1 << 12, ..Default::default() };
        Model {
            weights: vec![0.0; features.hash_buckets],
            features,
            bias: 0.0,
            train_config: TrainConfig::default(),
            history: vec![],
        }
    }

    fn test_set(texts: &[&str]) -> Dataset {
        Dataset::new(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| Post::new(format!("t{i}"), *t, Label::Hateful, "hi"))
                .collect(),
        )
    }

    fn table() -> EntityTable {
        EntityTable::from_entries("hi", [(MaskCategory::HT, "Heejra"), (MaskCategory::I, "Bhagat Singh")]).unwrap()
    }

    #[test]
    fn planted_signal_tops_the_ranking() {
        let mut model = zero_model();
        for b in token_buckets("heejra", &model.features) {
            model.weights[b as usize] = 1.0;
        }
        let report = attribute(&model, &test_set(&["angry bald Heejra", "the old road"]), &table(), 20).unwrap();
        assert_eq!(report.top_tokens[0].token, "heejra");
        assert!(report.top_tokens[0].is_entity);
        assert!(report.top_tokens[0].mean_contribution > 0.0);
        assert!(report.entity_share > 0.0);
    }

    #[test]
    fn zero_weights_rank_lexicographically() {
        let report = attribute(&zero_model(), &test_set(&["c b a", "b d"]), &table(), 3).unwrap();
        let tokens: Vec<&str> = report.top_tokens.iter().map(|t| t.token.as_str()).collect();
        assert_eq!(tokens, ["a", "b", "c"]);
        assert!(report.top_tokens.iter().all(|t| t.mean_contribution == 0.0));
        assert_eq!(report.entity_share, 0.0);
    }

    #[test]
    fn k_beyond_vocabulary_returns_everything() {
        let report = attribute(&zero_model(), &test_set(&["x y", "y singh"]), &table(), 50).unwrap();
        assert_eq!(report.top_tokens.len(), 3);
        // "singh" is a word of the multi-word surface
        assert!((report.entity_share - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_test_set_is_an_error() {
        assert!(matches!(
            attribute(&zero_model(), &Dataset::default(), &table(), 5),
            Err(ClassifierError::EmptyTestSet)
        ));
    }

    #[test]
    fn contributions_account_for_within_word_ngrams() {
        let mut model = zero_model();
        for (i, w) in model.weights.iter_mut().enumerate() {
            *w = (i % 7) as f64 - 3.0;
        }
        let text = "ab cd";
        let x = featurize(text, &model.features);
        let within: f64 = post_contributions(&model, text).values().sum();
        // the remaining n-grams cross the space: "b ", " c", "b c", "ab ", " cd", "ab c", "b cd"
        let cross: f64 = ["b ", " c", "b c", "ab ", " cd", "ab c", "b cd"]
            .iter()
            .flat_map(|g| token_buckets(g, &FeatureConfig { ngram_min: g.chars().count(), ngram_max: g.chars().count(), ..model.features.clone() }))
            .map(|b| model.weights[b as usize])
            .sum::<f64>()
            / count_norm(text, &model.features);
        assert!((within + cross - x.dot(&model.weights)).abs() < 1e-9);
    }
}
