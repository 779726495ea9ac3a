//! Contextual entity substitution: mask source-language entities, translate
//! the masked text, then fill the masks from the target-language table.
//!
//! ```bash
//! cargo run --example ces_pipeline
//! ```

use hatesynth::backends::mock::MockTranslator;
use hatesynth::backends::{apply_to_masked, translate_batch, BatchOptions};
use hatesynth::ces::{mask_posts, reconstruct, substitute_all, MaskingConfig, SubstitutionConfig};
use hatesynth::corpus::{Label, Post};
use hatesynth::entity_table::{self, EntityTable, MaskCategory};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let source_table = entity_table::builtin("en")?;
    let target_table = EntityTable::from_entries(
        "hi",
        [(MaskCategory::HT, "Heejra"), (MaskCategory::G, "Musalman"), (MaskCategory::G, "Isai")],
    )?;

    let posts = vec![
        Post::new("p1", "angry bald dyke", Label::Hateful, "en"),
        Post::new("p2", "send the muslims away", Label::Hateful, "en"),
    ];
    let masked = mask_posts(&posts, &source_table, &MaskingConfig::default(), None)?;
    for (m, post) in masked.iter().zip(&posts) {
        println!("masked  {}: {}", m.origin_id, m.text);
        assert_eq!(reconstruct(m, &post.text), post.text);
    }

    // The identity mock stands in for a real translation service.
    let translated = translate_batch(&masked, &MockTranslator::identity(), "en", "hi", &BatchOptions::default())?;
    let masked_hi = apply_to_masked(&masked, &translated, "hi");

    let config = SubstitutionConfig { replacement_seed: 2, rng_seed: 7 };
    let synthetic = substitute_all(&masked_hi, &target_table, &config)?;
    for post in &synthetic {
        println!("ces     {}: {}", post.id, post.text);
    }
    assert_eq!(synthetic[0].text, "angry bald Heejra");

    // Same seed, same output.
    assert_eq!(synthetic, substitute_all(&masked_hi, &target_table, &config)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
