//! Contextual entity substitution: fuzzy gazetteer matching, masking and
//! re-filling masks from a target-language table.

mod distance;
mod masking;
mod matching;
mod substitute;

use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;

pub use distance::{levenshtein, similarity};
pub use masking::{load_masked, mask_post, mask_posts, reconstruct, save_masked, MaskError, MaskedFileError, MaskedPost};
pub use matching::{find_matches, MaskingConfig, MatchSpan, Matcher, NerFallback};
pub use substitute::{substitute, substitute_all, SubstituteError, SubstitutionConfig};

use crate::entity_table::MaskCategory;

fn canonical_mask_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<MASK-(G|I|CT|HT|P|NT)>").unwrap())
}

/// Byte ranges and categories of the canonical mask tokens in `text`.
pub fn mask_occurrences(text: &str) -> Vec<(Range<usize>, MaskCategory)> {
    canonical_mask_re()
        .captures_iter(text)
        .map(|caps| {
            let whole = caps.get(0).unwrap();
            let category = caps[1].parse().expect("regex only admits known codes");
            (whole.range(), category)
        })
        .collect()
}
