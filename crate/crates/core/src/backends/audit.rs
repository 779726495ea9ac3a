//! Checks that mask tokens survive translation.
//!
//! Translators sometimes lower-case a mask or pad it with spaces
//! (`<mask-ht >`). Such tokens are put back in canonical form when their
//! category can still be read. Anything else that changes the per-category
//! mask counts drops the post.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ces::mask_occurrences;
use crate::entity_table::MaskCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditVerdict {
    Preserved,
    Repaired,
    Dropped,
}

pub type MaskCounts = BTreeMap<MaskCategory, usize>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskAudit {
    pub origin_id: String,
    pub masks_before: MaskCounts,
    /// Canonical mask tokens found verbatim in the raw translation.
    pub masks_after: MaskCounts,
    /// Mask-like tokens that were not in canonical form.
    pub mutated: usize,
    pub verdict: AuditVerdict,
}

fn tolerant_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)<\s*mask\s*(?:-\s*([a-z]*)\s*)?>").unwrap())
}

pub fn count_masks(text: &str) -> MaskCounts {
    let mut counts = MaskCounts::new();
    for (_, category) in mask_occurrences(text) {
        *counts.entry(category).or_default() += 1;
    }
    counts
}

/// Audits one translation. Returns the audit and the text to use downstream
/// (canonicalized when repaired).
pub fn audit_translation(origin_id: &str, before: &str, after: &str) -> (MaskAudit, String) {
    let masks_before = count_masks(before);
    let masks_after = count_masks(after);

    let mut tolerant = MaskCounts::new();
    let mut mutated = 0;
    let mut ambiguous = false;
    let repaired = tolerant_re().replace_all(after, |caps: &regex::Captures<'_>| {
        let whole = &caps[0];
        let code = caps.get(1).map(|m| m.as_str().to_ascii_uppercase());
        match code.as_deref().and_then(|c| c.parse::<MaskCategory>().ok()) {
            Some(category) => {
                *tolerant.entry(category).or_default() += 1;
                if whole != category.mask_token() {
                    mutated += 1;
                }
                category.mask_token().to_string()
            }
            None => {
                ambiguous = true;
                mutated += 1;
                whole.to_string()
            }
        }
    });

    let verdict = if ambiguous || tolerant != masks_before {
        AuditVerdict::Dropped
    } else if mutated == 0 {
        AuditVerdict::Preserved
    } else {
        AuditVerdict::Repaired
    };
    let text = match verdict {
        AuditVerdict::Repaired => repaired.into_owned(),
        _ => after.to_string(),
    };
    (
        MaskAudit {
            origin_id: origin_id.to_string(),
            masks_before,
            masks_after,
            mutated,
            verdict,
        },
        text,
    )
}
