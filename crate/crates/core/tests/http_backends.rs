use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use hatesynth::backends::http::{EndpointConfig, HttpGenerator, HttpNer, HttpTranslator};
use hatesynth::backends::{
    BackendError, GenerationBackend, GenerationRequest, NerBackend, RetryPolicy, TranslationBackend, TranslationRequest,
};
use serde_json::Value;

#[derive(Debug, Clone)]
struct Seen {
    authorization: Option<String>,
    body: Value,
}

/// Serves one scripted `(status, body)` reply per connection, recording requests.
fn serve(replies: Vec<(u16, &'static str)>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for (status, reply) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0;
            let mut authorization = None;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                if let Some((name, value)) = line.split_once(':') {
                    match name.to_ascii_lowercase().as_str() {
                        "content-length" => length = value.trim().parse().unwrap(),
                        "authorization" => authorization = Some(value.trim().to_string()),
                        _ => {}
                    }
                }
            }
            let mut body = vec![0; length];
            reader.read_exact(&mut body).unwrap();
            log.lock().unwrap().push(Seen { authorization, body: serde_json::from_slice(&body).unwrap() });
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                reply.len()
            )
            .unwrap();
        }
    });
    (url, seen)
}

fn translation() -> TranslationRequest {
    TranslationRequest { texts: vec!["angry bald <HT>".into()], from: "en".into(), to: "hi".into() }
}

#[test]
fn translator_posts_json_with_bearer_token() {
    std::env::set_var("HATESYNTH_TEST_TOKEN_A", "s3cret");
    let (url, seen) = serve(vec![(200, r#"{"translations":["gussa ganja <HT>"]}"#)]);
    let mut config = EndpointConfig::new(url);
    config.token_env = Some("HATESYNTH_TEST_TOKEN_A".into());
    let out = HttpTranslator::new(config).translate(&translation()).unwrap();
    assert_eq!(out.translations, vec!["gussa ganja <HT>"]);
    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].authorization.as_deref(), Some("Bearer s3cret"));
    assert_eq!(seen[0].body["texts"][0], "angry bald <HT>");
    assert_eq!(seen[0].body["to"], "hi");
}

#[test]
fn missing_token_fails_before_sending() {
    let mut config = EndpointConfig::new("http://127.0.0.1:9/never");
    config.token_env = Some("HATESYNTH_TEST_TOKEN_UNSET".into());
    let err = HttpTranslator::new(config).translate(&translation()).unwrap_err();
    assert!(matches!(err, BackendError::MissingToken(ref v) if v == "HATESYNTH_TEST_TOKEN_UNSET"));
}

#[test]
fn server_errors_are_retried() {
    let (url, seen) = serve(vec![(503, "{}"), (429, "{}"), (200, r#"{"translations":["ok"]}"#)]);
    let backend = HttpTranslator::new(EndpointConfig::new(url));
    let out = RetryPolicy::immediate(3).run(|| backend.translate(&translation())).unwrap();
    assert_eq!(out.translations, vec!["ok"]);
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, seen) = serve(vec![(400, r#"{"detail":"bad lang"}"#)]);
    let backend = HttpTranslator::new(EndpointConfig::new(url));
    let err = RetryPolicy::immediate(3).run(|| backend.translate(&translation())).unwrap_err();
    assert!(matches!(err, BackendError::Status { status: 400, ref message } if message.contains("bad lang")));
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn retries_are_bounded() {
    let (url, _) = serve(vec![(500, "{}"), (500, "{}")]);
    let backend = HttpTranslator::new(EndpointConfig::new(url));
    let err = RetryPolicy::immediate(2).run(|| backend.translate(&translation())).unwrap_err();
    assert!(matches!(err, BackendError::Exhausted { attempts: 2, .. }));
}

#[test]
fn generator_sends_decoding_parameters() {
    let (url, seen) = serve(vec![(200, r#"{"text":"some continuation"}"#)]);
    let request = GenerationRequest {
        prompt: "<HT> log".into(),
        max_new_tokens: 40,
        repetition_penalty: 1.2,
        sample: true,
        stop_sequences: vec!["\n".into()],
    };
    let out = HttpGenerator::new(EndpointConfig::new(url)).generate(&request).unwrap();
    assert_eq!(out.text, "some continuation");
    let body = &seen.lock().unwrap()[0].body;
    assert_eq!(body["max_new_tokens"], 40);
    assert_eq!(body["stop"][0], "\n");
}

#[test]
fn ner_returns_entities() {
    let (url, seen) = serve(vec![(200, r#"{"entities":[{"start":0,"end":5,"label":"PER"}]}"#)]);
    let out = HttpNer::new(EndpointConfig::new(url)).entities("Rahul is here").unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!((out[0].start, out[0].end, out[0].label.as_str()), (0, 5, "PER"));
    assert_eq!(seen.lock().unwrap()[0].body["text"], "Rahul is here");
}

#[test]
fn malformed_reply_is_reported() {
    let (url, _) = serve(vec![(200, r#"{"nope":1}"#)]);
    let err = HttpTranslator::new(EndpointConfig::new(url)).translate(&translation()).unwrap_err();
    assert!(matches!(err, BackendError::Status { status: 200, .. }));
}
