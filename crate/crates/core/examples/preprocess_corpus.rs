//! Clean a JSON-Lines corpus: strip mentions, URLs and hashtags, drop posts
//! that are too short, and round-trip through disk.
//!
//! ```bash
//! cargo run --example preprocess_corpus
//! ```

use hatesynth::corpus::{self, Dataset, Label, Post};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let raw = Dataset::new(vec![
        Post::new("p1", "@someone these muslims ruin every street https://t.co/x #trending", Label::Hateful, "en"),
        Post::new("p2", "lovely    weather this morning", Label::NonHateful, "en"),
        Post::new("p3", "@bot ok", Label::NonHateful, "en"),
    ]);

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("raw.jsonl");
    corpus::save_corpus(&raw, &path)?;

    let loaded = corpus::load_corpus(&path, Some("en"))?;
    let cleaned = corpus::preprocess_dataset(&loaded);
    for post in &cleaned.posts {
        println!("{:<3} {:<12} {}", post.id, post.label.as_str(), post.text);
    }
    let counts = cleaned.counts();
    println!("kept {} of {} (hateful={}, non_hateful={})", cleaned.len(), loaded.len(), counts.hateful, counts.non_hateful);
    assert_eq!(cleaned.len(), 2);

    // A corpus with the wrong language tag is rejected on load.
    assert!(corpus::load_corpus(&path, Some("hi")).is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
