//! Pipeline configuration in TOML. A top-level `rng_seed` reaches every stage
//! that does not set its own, and all violations are reported together.
//!
//! ```bash
//! cargo run --example pipeline_config
//! ```

use hatesynth::config::PipelineConfig;

const CONFIG: &str = r#"
rng_seed = 42

[backends.translation]
kind = "http"
url = "https://mt.example.org/translate"
token_env = "MT_TOKEN"

[training]
rng_seed = 7
epochs = 5

[schedule]
id = "pilot"
max_total_hateful = 200
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = PipelineConfig::from_toml(CONFIG)?;
    config.validate()?;
    println!(
        "seeds: substitution={} generation={} training={} schedule={}",
        config.substitution.rng_seed, config.generation.rng_seed, config.training.rng_seed, config.schedule.rng_seed
    );
    assert_eq!(config.training.rng_seed, 7);
    assert_eq!(config.schedule.rng_seed, 42);

    let bad = PipelineConfig::from_toml("[translation]\nbatch_size = 0\n\n[training]\nepochs = 0\n")?;
    let violations = bad.validate().unwrap_err().violations;
    for v in &violations {
        println!("violation: {v}");
    }
    assert_eq!(violations.len(), 2);

    // Credentials never live in the file.
    let leaked = PipelineConfig::from_toml("[backends.translation]\nkind = \"http\"\nurl = \"x\"\ntoken = \"abc\"\n");
    println!("inline token: {}", leaked.unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
