//! Few-shot generation: prompts are built from sampled hateful posts and
//! continuations are accepted until enough new posts exist.
//!
//! ```bash
//! cargo run --example lm_generation
//! ```

use hatesynth::backends::mock::MockGenerator;
use hatesynth::corpus::{Label, Post};
use hatesynth::lm_gen::{build_prompt, generate_posts, GenerationConfig};

fn seeds() -> Vec<Post> {
    [
        "ye log desh ke liye khatra hain",
        "inko bahar nikalo abhi",
        "ghatiya soch wale log hain ye",
        "inki wajah se sheher ganda hai",
        "nafrat ke siva kuch nahi dete",
        "in jaahil logon se door raho",
        "kal phir inhone gandagi machai",
    ]
    .iter()
    .enumerate()
    .map(|(i, t)| Post::new(format!("s{i}"), *t, Label::Hateful, "hi"))
    .collect()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let seeds = seeds();
    let config = GenerationConfig { shots: 3, rng_seed: 11, target_group: Some("Musalman".into()), ..Default::default() };

    let prompt = build_prompt(&seeds[..3], &config)?;
    println!("prompt {}:\n{}", &prompt.digest()[..12], prompt.prompt_text);

    let outcome = generate_posts(&seeds, 6, &MockGenerator::derived(), &config)?;
    for post in &outcome.posts {
        println!("{}: {}", post.id, post.text);
    }
    println!("passes={} prompts={} rejected={}", outcome.passes, outcome.prompts_issued, outcome.rejected);
    assert_eq!(outcome.posts.len(), 6);

    // A generator that only repeats its inputs never produces anything new.
    let echo = generate_posts(&seeds, 2, &MockGenerator::echo(), &GenerationConfig { max_consecutive_rejections: 5, ..config });
    println!("echo generator: {}", echo.unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
