//! Hashed character n-gram logistic regression: train, score, save, reload
//! and evaluate over several seeded runs.
//!
//! ```bash
//! cargo run --example train_and_eval
//! ```

use hatesynth::classifier::{evaluate_model, evaluate_runs, train, FeatureConfig, Model, TrainConfig};
use hatesynth::corpus::{Dataset, Label, Post};
use hatesynth::seed::rng_from_seed;
use rand::seq::SliceRandom;

const HATEFUL: &[&str] = &["ghatiya", "nafrat", "gandagi", "jaahil", "kameena"];
const NEUTRAL: &[&str] = &["chai", "baarish", "kitaab", "bazaar", "subah", "dost", "khana", "sadak"];

fn corpus(prefix: &str, n: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let posts = (0..n)
        .map(|i| {
            let hateful = i % 2 == 0;
            let mut words: Vec<&str> = (0..5).map(|_| *NEUTRAL.choose(&mut rng).unwrap()).collect();
            if hateful {
                words.push(HATEFUL.choose(&mut rng).unwrap());
            }
            let label = if hateful { Label::Hateful } else { Label::NonHateful };
            Post::new(format!("{prefix}{i}"), words.join(" "), label, "hi")
        })
        .collect();
    Dataset::new(posts)
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let train_set = corpus("tr", 400, 1);
    let test_set = corpus("te", 200, 2);
    let features = FeatureConfig { hash_buckets: 1 << 16, ..Default::default() };
    let config = TrainConfig { epochs: 8, runs: 3, ..Default::default() };

    let model = train(&train_set, &features, &config)?;
    for epoch in &model.history {
        println!("epoch {:>2} loss {:.4} val_acc {:.3}", epoch.epoch, epoch.train_loss, epoch.val_accuracy);
    }
    println!("p(hateful | 'chai ghatiya subah') = {:.3}", model.probability("chai ghatiya subah"));

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.json");
    model.save(&path)?;
    let reloaded = Model::load(&path)?;
    let f1 = evaluate_model(&reloaded, &test_set)?;
    println!("reloaded model F1: hateful {:.3}, non_hateful {:.3}", f1.hateful, f1.non_hateful);

    let report = evaluate_runs(&train_set, &test_set, &features, &config)?;
    println!("macro-F1 over {} runs: {:?}, mean {:.3}", report.macro_f1_runs.len(), report.macro_f1_runs, report.mean);
    assert!(report.mean > 0.9);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
