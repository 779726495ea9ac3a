use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::masking::MaskedPost;
use super::mask_occurrences;
use crate::corpus::{Label, Lineage, Method, Post, SyntheticPost};
use crate::entity_table::{EntityTable, MaskCategory};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SubstitutionConfig {
    /// Variants produced per masked post.
    pub replacement_seed: u32,
    pub rng_seed: u64,
}

impl Default for SubstitutionConfig {
    fn default() -> Self {
        SubstitutionConfig { replacement_seed: 1, rng_seed: 1 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubstituteError {
    #[error("post {post_id}: target table has no entries for category {category}")]
    EmptyCategory { post_id: String, category: MaskCategory },
    #[error("replacement_seed must be at least 1")]
    ZeroVariants,
}

/// Replaces every mask token with a surface drawn uniformly from the same
/// category of the target table.
///
/// Each post draws from its own stream seeded by `(rng_seed, origin_id)`, so
/// output does not depend on the order posts are processed in.
pub fn substitute(
    masked: &MaskedPost,
    target_table: &EntityTable,
    config: &SubstitutionConfig,
) -> Result<Vec<SyntheticPost>, SubstituteError> {
    if config.replacement_seed == 0 {
        return Err(SubstituteError::ZeroVariants);
    }
    let occurrences = mask_occurrences(&masked.text);
    for (_, category) in &occurrences {
        if target_table.surfaces(*category).is_empty() {
            return Err(SubstituteError::EmptyCategory {
                post_id: masked.origin_id.clone(),
                category: *category,
            });
        }
    }

    let mut rng = seed::rng_from_seed(seed::derive_seed(config.rng_seed, &["ces", &masked.origin_id]));
    let mut variants = Vec::with_capacity(config.replacement_seed as usize);
    for variant in 0..config.replacement_seed {
        let mut text = String::with_capacity(masked.text.len());
        let mut last = 0;
        for (range, category) in &occurrences {
            let surfaces = target_table.surfaces(*category);
            text.push_str(&masked.text[last..range.start]);
            text.push_str(&surfaces[rng.gen_range(0..surfaces.len())]);
            last = range.end;
        }
        text.push_str(&masked.text[last..]);

        let mut post = Post::new(
            format!("{}-ces-{}", masked.origin_id, variant + 1),
            text,
            Label::Hateful,
            masked.lang.clone(),
        );
        post.method = Method::Ces;
        post.lineage = Some(Lineage {
            origin_id: Some(masked.origin_id.clone()),
            variant: Some(variant + 1),
            ..Default::default()
        });
        variants.push(post);
    }
    Ok(variants)
}

pub fn substitute_all(
    masked: &[MaskedPost],
    target_table: &EntityTable,
    config: &SubstitutionConfig,
) -> Result<Vec<SyntheticPost>, SubstituteError> {
    let mut out = Vec::new();
    for post in masked {
        out.extend(substitute(post, target_table, config)?);
    }
    Ok(out)
}
