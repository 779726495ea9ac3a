//! The `hatesynth` command line, driven in-process. Each subcommand prints
//! a one-line JSON summary; failures print a JSON error and a nonzero code.
//!
//! ```bash
//! cargo run --example cli_in_process
//! ```

use hatesynth::cli;
use hatesynth::corpus::{Dataset, Label, Post};

fn hatesynth(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("hatesynth").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    let posts = Dataset::new(vec![
        Post::new("p1", "these muslims again, every single day", Label::Hateful, "en"),
        Post::new("p2", "the dyke from the corner shop", Label::Hateful, "en"),
    ]);
    std::fs::write(p("en.jsonl"), posts.to_jsonl())?;

    let (code, out, _) = hatesynth(&["table", "stats", "--lang", "en"]);
    println!("[{code}] table stats: {}", out.trim());

    let steps: [&[&str]; 3] = [
        &["mask", "--input", &p("en.jsonl"), "--output", &p("en.masked.jsonl")],
        &["translate", "--masked", "--input", &p("en.masked.jsonl"), "--output", &p("hi.masked.jsonl"), "--from", "en", "--to", "hi"],
        &["substitute", "--input", &p("hi.masked.jsonl"), "--output", &p("ces.jsonl")],
    ];
    for args in steps {
        let (code, out, err) = hatesynth(args);
        println!("[{code}] {}: {}", args[0], out.trim());
        assert_eq!(code, 0, "{err}");
    }
    print!("{}", std::fs::read_to_string(p("ces.jsonl"))?);

    let (code, _, err) = hatesynth(&["mask", "--input", &p("missing.jsonl"), "--output", &p("x.jsonl")]);
    println!("[{code}] missing input: {}", err.trim());
    assert_eq!(code, 4);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
