//! Mask audits on translated text. A translator that mangles mask tokens is
//! simulated; mangled tokens are repaired when the counts still line up and
//! the post is dropped otherwise.
//!
//! ```bash
//! cargo run --example translation_audit
//! ```

use hatesynth::backends::mock::{MockTranslator, MutatingTranslator};
use hatesynth::backends::{audit_translation, translate_batch, AuditVerdict, BatchOptions};
use hatesynth::ces::{mask_posts, MaskingConfig};
use hatesynth::corpus::{Label, Post};
use hatesynth::entity_table;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (audit, repaired) = audit_translation("x", "<MASK-G> are <MASK-HT>", "<mask - g> sab <MASK-HT> hain");
    println!("single: {:?} -> {repaired}", audit.verdict);
    assert_eq!(audit.verdict, AuditVerdict::Repaired);

    let table = entity_table::builtin("en")?;
    let posts: Vec<Post> = (0..200)
        .map(|i| Post::new(format!("p{i}"), format!("the muslims and the jews again number {i}"), Label::Hateful, "en"))
        .collect();
    let masked = mask_posts(&posts, &table, &MaskingConfig::default(), None)?;

    let backend = MutatingTranslator::new(MockTranslator::identity(), 5, 0.10, 0.05);
    let translated = translate_batch(&masked, &backend, "en", "hi", &BatchOptions::default())?;
    let count = |v: AuditVerdict| translated.iter().filter(|t| t.audit.verdict == v).count();
    println!(
        "batch: preserved={} repaired={} dropped={}",
        count(AuditVerdict::Preserved),
        count(AuditVerdict::Repaired),
        count(AuditVerdict::Dropped)
    );
    let usable = translated.iter().filter(|t| t.is_usable()).count();
    assert_eq!(usable, translated.len() - count(AuditVerdict::Dropped));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
