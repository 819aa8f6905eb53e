//! Wire-format tests for the OpenAI-compatible HTTP clients against a tiny
//! in-process HTTP server on the loopback interface.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use stylodisp::provider::{HttpProviderConfig, ProviderError};

/// Serves scripted (status, body) responses; records each request body.
fn scripted_server(
    responses: Vec<(u16, String)>,
) -> (String, mpsc::Receiver<String>, thread::JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind loopback");
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    let handle = thread::spawn(move || {
        for (status, body) in responses {
            let (stream, _) = listener.accept().expect("accept");
            let mut reader = BufReader::new(stream);
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let mut content_length = 0usize;
            loop {
                let mut header = String::new();
                reader.read_line(&mut header).unwrap();
                let header = header.trim_end().to_string();
                if header.is_empty() {
                    break;
                }
                if let Some(v) = header.to_ascii_lowercase().strip_prefix("content-length:") {
                    content_length = v.trim().parse().unwrap_or(0);
                }
            }
            let mut request_body = vec![0u8; content_length];
            reader.read_exact(&mut request_body).unwrap();
            tx.send(String::from_utf8_lossy(&request_body).to_string()).unwrap();
            let reason = if status == 200 { "OK" } else { "ERR" };
            let response = format!(
                "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\n\
                 content-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            let mut stream = reader.into_inner();
            stream.write_all(response.as_bytes()).unwrap();
        }
    });
    (format!("http://{addr}/v1"), rx, handle)
}

#[test]
fn chat_completion_round_trip() {
    let (endpoint, requests, server) = scripted_server(vec![(
        200,
        r#"{"choices":[{"message":{"role":"assistant","content":"rewritten text"}}]}"#.to_string(),
    )]);
    std::env::set_var("STYLODISP_HTTP_TEST_KEY_A", "secret");
    let config = HttpProviderConfig::new(&endpoint, "STYLODISP_HTTP_TEST_KEY_A");
    let completion = config.chat_complete("gpt-4o", "Ré écris ce texte", 1.0, 512).unwrap();
    assert_eq!(completion, "rewritten text");

    let body: serde_json::Value = serde_json::from_str(&requests.recv().unwrap()).unwrap();
    assert_eq!(body["model"], "gpt-4o");
    assert_eq!(body["messages"][0]["role"], "user");
    assert_eq!(body["messages"][0]["content"], "Ré écris ce texte");
    assert_eq!(body["temperature"], 1.0);
    assert_eq!(body["max_tokens"], 512);
    server.join().unwrap();
}

#[test]
fn embeddings_reorder_by_index_field() {
    let (endpoint, requests, server) = scripted_server(vec![(
        200,
        r#"{"data":[{"index":1,"embedding":[3.0,4.0]},{"index":0,"embedding":[1.0,2.0]}]}"#
            .to_string(),
    )]);
    std::env::set_var("STYLODISP_HTTP_TEST_KEY_B", "secret");
    let config = HttpProviderConfig::new(&endpoint, "STYLODISP_HTTP_TEST_KEY_B");
    let vectors = config
        .embed("emb-model", &["premier".to_string(), "second".to_string()])
        .unwrap();
    assert_eq!(vectors, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);

    let body: serde_json::Value = serde_json::from_str(&requests.recv().unwrap()).unwrap();
    assert_eq!(body["input"].as_array().unwrap().len(), 2);
    server.join().unwrap();
}

#[test]
fn rate_limit_and_auth_statuses_map_to_typed_errors() {
    let (endpoint, _requests, server) = scripted_server(vec![
        (429, r#"{"error":"slow down"}"#.to_string()),
        (401, r#"{"error":"bad key"}"#.to_string()),
    ]);
    std::env::set_var("STYLODISP_HTTP_TEST_KEY_C", "secret");
    let config = HttpProviderConfig::new(&endpoint, "STYLODISP_HTTP_TEST_KEY_C");
    assert!(matches!(
        config.chat_complete("m", "p", 1.0, 16),
        Err(ProviderError::RateLimit(_))
    ));
    assert!(matches!(
        config.chat_complete("m", "p", 1.0, 16),
        Err(ProviderError::Auth(_))
    ));
    server.join().unwrap();
}

#[test]
fn missing_key_env_fails_before_any_network() {
    let config = HttpProviderConfig::new(
        "http://127.0.0.1:9/v1", // nothing listens here; must not matter
        "STYLODISP_HTTP_TEST_KEY_UNSET",
    );
    match config.chat_complete("m", "p", 1.0, 16) {
        Err(ProviderError::Auth(message)) => {
            assert!(message.contains("STYLODISP_HTTP_TEST_KEY_UNSET"))
        }
        other => panic!("expected auth error, got {other:?}"),
    }
}
