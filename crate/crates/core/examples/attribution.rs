//! Token attribution: which words drive a trained model's hateful scores,
//! and how many of the top ones are entity-table surfaces.
//!
//! ```bash
//! cargo run --example attribution
//! ```

use hatesynth::classifier::{attribute, post_contributions, train, FeatureConfig, TrainConfig};
use hatesynth::corpus::{Dataset, Label, Post};
use hatesynth::entity_table::{EntityTable, MaskCategory};
use hatesynth::seed::rng_from_seed;
use rand::seq::SliceRandom;

const FILLER: &[&str] = &["aaj", "ghar", "paani", "mausam", "kaam", "raat", "thoda", "rasta", "kamra", "nadi"];

fn corpus(prefix: &str, table: &EntityTable, n: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let entities: Vec<&str> = table.iter().map(|(_, s)| s).collect();
    let posts = (0..n)
        .map(|i| {
            let mut words: Vec<&str> = (0..5).map(|_| *FILLER.choose(&mut rng).unwrap()).collect();
            let hateful = i % 2 == 0;
            if hateful {
                words.insert(2, entities.choose(&mut rng).unwrap());
            }
            let label = if hateful { Label::Hateful } else { Label::NonHateful };
            Post::new(format!("{prefix}{i}"), words.join(" "), label, "hi")
        })
        .collect();
    Dataset::new(posts)
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let table = EntityTable::from_entries(
        "hi",
        [(MaskCategory::HT, "Heejra"), (MaskCategory::G, "Musalman"), (MaskCategory::I, "Owaisi")],
    )?;
    let train_set = corpus("tr", &table, 300, 1);
    let test_set = corpus("te", &table, 100, 2);
    let model = train(&train_set, &FeatureConfig { hash_buckets: 1 << 16, ..Default::default() }, &TrainConfig::default())?;

    let top: Vec<(String, f64)> = post_contributions(&model, "aaj Musalman ghar").into_iter().collect();
    println!("contributions: {top:?}");

    let report = attribute(&model, &test_set, &table, 5)?;
    for t in &report.top_tokens {
        println!("{:<10} {:+.3} entity={}", t.token, t.mean_contribution, t.is_entity);
    }
    println!("entity share of top {}: {:.2}", report.top_tokens.len(), report.entity_share);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
