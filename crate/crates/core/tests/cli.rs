use std::path::Path;
use std::process::{Command, Output};

use hatesynth::corpus::{load_corpus, Dataset, Label, Method, Post};
use serde_json::Value;

fn hatesynth(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hatesynth"))
        .args(args)
        .current_dir(dir)
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Value {
    let out = hatesynth(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error(out: &Output) -> Value {
    serde_json::from_slice::<Value>(&out.stderr).unwrap()["error"].clone()
}

#[test]
fn golden_path_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("hi.csv"), "category,surface\nHT,Heejra\n").unwrap();
    std::fs::write(d.join("pipeline.toml"), "[backends.translation]\nkind = \"mock\"\nprefix = \"\"\n").unwrap();
    let input = Dataset::new(vec![Post::new("p1", "angry bald dyke", Label::Hateful, "en")]);
    std::fs::write(d.join("en.jsonl"), input.to_jsonl()).unwrap();

    let mut outputs = Vec::new();
    for _ in 0..3 {
        let cfg = ["--config", "pipeline.toml"];
        let masked = ok(d, &[&cfg[..], &["mask", "--input", "en.jsonl", "--output", "m.jsonl"]].concat());
        assert_eq!(masked["spans"], 1);
        let tr = ok(
            d,
            &[&cfg[..], &["translate", "--masked", "--input", "m.jsonl", "--output", "t.jsonl", "--from", "en", "--to", "hi"]]
                .concat(),
        );
        assert_eq!(tr["preserved"], 1);
        ok(d, &[&cfg[..], &["substitute", "--input", "t.jsonl", "--output", "ces.jsonl", "--table", "hi.csv"]].concat());
        outputs.push(std::fs::read(d.join("ces.jsonl")).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let ces = load_corpus(d.join("ces.jsonl"), Some("hi")).unwrap();
    assert_eq!(ces.posts.len(), 1);
    assert_eq!(ces.posts[0].text, "angry bald Heejra");
    assert_eq!(ces.posts[0].method, Method::Ces);
    assert_eq!(ces.posts[0].label, Label::Hateful);
}

#[test]
fn table_stats_prints_category_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = hatesynth(dir.path(), &["table", "stats", "--lang", "en"]);
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.starts_with("HT=56,G=140,I=24,"), "{line}");
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = hatesynth(dir.path(), &["mask", "--input", "nope.jsonl", "--output", "m.jsonl"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error(&out)["kind"], "data");
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_config_lists_violations() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "[translation]\nbatch_size = 0\n\n[schedule]\nstep = 0\n",
    )
    .unwrap();
    let out = hatesynth(dir.path(), &["--config", "bad.toml", "schedule"]);
    assert_eq!(out.status.code(), Some(2));
    let err = error(&out);
    assert_eq!(err["kind"], "config");
    assert!(err["details"].as_array().unwrap().len() >= 2, "{err}");
}

#[test]
fn secrets_in_config_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("leak.toml"),
        "[backends.translation]\nkind = \"http\"\nurl = \"http://localhost\"\napi_key = \"abc\"\n",
    )
    .unwrap();
    let out = hatesynth(dir.path(), &["--config", "leak.toml", "schedule"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error(&out).to_string().contains("api_key"));
}

#[test]
fn unreachable_backend_is_a_backend_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("http.toml"),
        "[backends.translation]\nkind = \"http\"\nurl = \"http://127.0.0.1:9/translate\"\ntimeout_secs = 2\n\n\
         [translation.retry]\nmax_attempts = 1\nbase_delay_ms = 0\n",
    )
    .unwrap();
    let input = Dataset::new(vec![Post::new("p1", "angry bald dyke", Label::Hateful, "en")]);
    std::fs::write(d.join("en.jsonl"), input.to_jsonl()).unwrap();
    let out = hatesynth(d, &["--config", "http.toml", "translate", "--input", "en.jsonl", "--output", "t.jsonl", "--from", "en", "--to", "hi"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error(&out)["kind"], "backend");
}

#[test]
fn schedule_defaults_under_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let summary = ok(dir.path(), &["--output-root", "o", "schedule", "--id", "s1"]);
    assert_eq!(summary["arms"], 29);
    assert!(dir.path().join("o/runs/s1/schedule.json").is_file());
}
