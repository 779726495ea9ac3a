//! Every example under `examples/` runs to completion.

#[path = "../examples/preprocess_corpus.rs"]
mod preprocess_corpus;

#[path = "../examples/entity_tables.rs"]
mod entity_tables;

#[path = "../examples/ces_pipeline.rs"]
mod ces_pipeline;

#[path = "../examples/translation_audit.rs"]
mod translation_audit;

#[path = "../examples/lm_generation.rs"]
mod lm_generation;

#[path = "../examples/schedule_and_materialize.rs"]
mod schedule_and_materialize;

#[path = "../examples/train_and_eval.rs"]
mod train_and_eval;

#[path = "../examples/attribution.rs"]
mod attribution;

#[path = "../examples/pipeline_config.rs"]
mod pipeline_config;

#[path = "../examples/cli_in_process.rs"]
mod cli_in_process;

#[test]
fn preprocess_corpus_example_runs() {
    preprocess_corpus::run_example().expect("preprocess_corpus example should run");
}

#[test]
fn entity_tables_example_runs() {
    entity_tables::run_example().expect("entity_tables example should run");
}

#[test]
fn ces_pipeline_example_runs() {
    ces_pipeline::run_example().expect("ces_pipeline example should run");
}

#[test]
fn translation_audit_example_runs() {
    translation_audit::run_example().expect("translation_audit example should run");
}

#[test]
fn lm_generation_example_runs() {
    lm_generation::run_example().expect("lm_generation example should run");
}

#[test]
fn schedule_and_materialize_example_runs() {
    schedule_and_materialize::run_example().expect("schedule_and_materialize example should run");
}

#[test]
fn train_and_eval_example_runs() {
    train_and_eval::run_example().expect("train_and_eval example should run");
}

#[test]
fn attribution_example_runs() {
    attribution::run_example().expect("attribution example should run");
}

#[test]
fn pipeline_config_example_runs() {
    pipeline_config::run_example().expect("pipeline_config example should run");
}

#[test]
fn cli_in_process_example_runs() {
    cli_in_process::run_example().expect("cli_in_process example should run");
}
