//! Entity tables: the shipped examples, CSV loading, pairing checks and
//! fuzzy matching against a table.
//!
//! ```bash
//! cargo run --example entity_tables
//! ```

use hatesynth::ces::{find_matches, levenshtein, MaskingConfig};
use hatesynth::entity_table::{self, parse_entity_table, MaskCategory};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for lang in ["en", "hi", "vi"] {
        let table = entity_table::builtin(lang)?;
        let stats = entity_table::table_stats(&table);
        let line: Vec<String> = stats.iter().map(|(c, n)| format!("{c}={n}")).collect();
        println!("{lang}: {} surfaces [{}]", table.len(), line.join(","));
    }

    let custom = parse_entity_table(
        "hi",
        "category,surface\n# a tiny target table\nHT,Heejra\nG,Musalman\nI,Owaisi\n",
    )?;
    println!("custom hi table: {}", custom.to_csv().trim_end().replace('\n', " | "));

    let en = entity_table::builtin("en")?;
    let report = entity_table::validate_pair(&en, &custom);
    println!("pairing en -> custom hi: {} errors, {} warnings", report.errors.len(), report.warnings.len());

    // One edit away from "muslims" still matches at the default threshold.
    let config = MaskingConfig::default();
    let tokens = ["those", "muslimz", "again"];
    for span in find_matches(&tokens, &en, &config) {
        println!(
            "match {:?} -> {} ({}) similarity {:.2}",
            &tokens[span.token_start..span.token_end],
            span.surface_matched,
            span.category,
            span.similarity
        );
        assert_eq!(span.category, MaskCategory::G);
    }
    println!("levenshtein(muslimz, muslims) = {}", levenshtein("muslimz", "muslims"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
