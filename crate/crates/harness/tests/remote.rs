mod common;

use common::*;
use serde_json::{json, Value};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use vpt_core::rft::RftSet;
use vpt_core::transcript::FailureReason;
use vpt_harness::*;

/// Serves canned `(status, body)` responses in order and keeps every
/// request body and its Authorization header.
struct Mock {
    url: String,
    seen: Arc<Mutex<Vec<(String, Option<String>)>>>,
    handle: Option<JoinHandle<()>>,
}

fn mock(responses: Vec<(u16, String)>) -> Mock {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", server.server_addr().to_ip().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    let handle = std::thread::spawn(move || {
        for (status, body) in responses {
            let mut req = server.recv().unwrap();
            let mut text = String::new();
            req.as_reader().read_to_string(&mut text).unwrap();
            let auth = req.headers().iter().find(|h| h.field.equiv("Authorization")).map(|h| h.value.to_string());
            log.lock().unwrap().push((text, auth));
            req.respond(tiny_http::Response::from_string(body).with_status_code(status)).unwrap();
        }
    });
    Mock { url, seen, handle: Some(handle) }
}

fn tool_reply(name: &str, args: Value) -> String {
    json!({"choices": [{"message": {"role": "assistant", "content": "", "tool_calls": [
        {"id": format!("call-{name}"), "type": "function", "function": {"name": name, "arguments": args.to_string()}}
    ]}}]})
    .to_string()
}

fn text_only() -> TrialBundle {
    let mut r = director_records(1, 0).remove(0);
    r.image = None;
    bundle(&r)
}

fn config(url: &str) -> RemoteConfig {
    let mut c = RemoteConfig::new(url, "test-model");
    c.backoff_ms = 1;
    c
}

#[test]
fn think_then_submit_over_http() {
    let mut m = mock(vec![
        (200, tool_reply("think", json!({"thoughts": "The figure faces down."}))),
        (200, tool_reply("submit", json!({"answer": "9"}))),
    ]);
    std::env::set_var("VPT_MOCK_KEY", "sk-secret-value");
    let mut c = config(&m.url);
    c.api_key_env = Some("VPT_MOCK_KEY".into());
    c.reasoning_effort = Some("medium".into());
    let subject = RemoteSubject::new(c).unwrap();
    let mut r = rft_records(RftSet::Test2, 1, 0).remove(0);
    r.image = None;
    let t = run_trial(&subject, &bundle(&r), DEFAULT_MAX_TURNS);
    m.handle.take().unwrap().join().unwrap();

    assert_eq!(t.answer.as_deref(), Some("9"));
    assert_eq!(t.tool_calls.len(), 2);
    let seen = m.seen.lock().unwrap();
    assert_eq!(seen[0].1.as_deref(), Some("Bearer sk-secret-value"));
    let first: Value = serde_json::from_str(&seen[0].0).unwrap();
    assert_eq!(first["model"], "test-model");
    assert_eq!(first["temperature"], 1.0);
    assert_eq!(first["reasoning_effort"], "medium");
    assert_eq!(first["tools"][0]["function"]["name"], "think");
    assert_eq!(first["tools"][1]["function"]["description"], "Submit an answer for evaluation.");
    assert_eq!(first["messages"][0]["role"], "system");
    let second: Value = serde_json::from_str(&seen[1].0).unwrap();
    let msgs = second["messages"].as_array().unwrap();
    let assistant = msgs.iter().find(|m| m["role"] == "assistant").unwrap();
    assert_eq!(assistant["tool_calls"][0]["function"]["name"], "think");
    assert!(msgs.iter().any(|m| m["role"] == "tool" && m["tool_call_id"] == "call-think"));
    // schema text is sent verbatim, key order included
    assert!(seen[0].0.contains(r#""function":{
  "name": "submit",
  "description": "Submit an answer for evaluation.","#));
}

#[test]
fn retries_server_errors_then_succeeds() {
    let mut m = mock(vec![
        (500, "boom".into()),
        (429, "slow down".into()),
        (200, tool_reply("submit", json!({"answer": "LEFT"}))),
    ]);
    let subject = RemoteSubject::new(config(&m.url)).unwrap();
    let t = run_trial(&subject, &text_only(), 3);
    m.handle.take().unwrap().join().unwrap();
    assert_eq!(t.answer.as_deref(), Some("LEFT"));
    assert_eq!(m.seen.lock().unwrap().len(), 3);
}

#[test]
fn gives_up_after_max_attempts() {
    let mut m = mock((0..5).map(|_| (503, "unavailable".to_string())).collect());
    let subject = RemoteSubject::new(config(&m.url)).unwrap();
    let t = run_trial(&subject, &text_only(), 3);
    m.handle.take().unwrap().join().unwrap();
    assert_eq!(t.failure, Some(FailureReason::TransportError));
    assert_eq!(m.seen.lock().unwrap().len(), 5);
}

#[test]
fn client_errors_are_not_retried() {
    let mut m = mock(vec![(400, "bad request".into())]);
    let subject = RemoteSubject::new(config(&m.url)).unwrap();
    let t = run_trial(&subject, &text_only(), 3);
    m.handle.take().unwrap().join().unwrap();
    assert_eq!(t.failure, Some(FailureReason::TransportError));
    assert_eq!(m.seen.lock().unwrap().len(), 1);
}

#[test]
fn malformed_output_is_data_not_retried() {
    let mut m = mock(vec![(200, r#"{"choices":[{"message":{"tool_calls":[{"function":{"name":"submit","arguments":"{not json"}}]}}]}"#.into())]);
    let subject = RemoteSubject::new(config(&m.url)).unwrap();
    let t = run_trial(&subject, &text_only(), 3);
    m.handle.take().unwrap().join().unwrap();
    assert_eq!(t.failure, Some(FailureReason::MalformedToolCall));
    assert_eq!(m.seen.lock().unwrap().len(), 1);
}

#[test]
fn image_is_inlined_as_base64() {
    let tmp = tempfile::tempdir().unwrap();
    let r = &rft_records(RftSet::Test2, 1, 0)[0];
    let path = tmp.path().join(r.image.as_ref().unwrap());
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(&path, b"\x89PNG fake").unwrap();
    let subject = RemoteSubject::new(config("http://127.0.0.1:9/unused")).unwrap();
    let b = TrialBundle::from_record(r, tmp.path());
    let t = vpt_core::transcript::Transcript { messages: b.opening_messages(), ..Default::default() };
    let body: Value = serde_json::from_str(&subject.request_body(&b, &t).unwrap()).unwrap();
    let url = body["messages"][3]["content"][0]["image_url"]["url"].as_str().unwrap();
    assert_eq!(url, "data:image/png;base64,iVBORyBmYWtl");
}
