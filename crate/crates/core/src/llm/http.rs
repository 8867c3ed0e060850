use std::io;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Backend, BackendError};

pub const API_KEY_ENV: &str = "ACE_API_KEY";
pub const API_BASE_ENV: &str = "ACE_API_BASE";
const DEFAULT_BASE: &str = "https://api.openai.com/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    /// Full chat-completions URL.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub timeout_ms: u64,
    /// Retries after the first attempt.
    pub max_retries: u32,
    /// First backoff delay; doubles after each failed attempt.
    pub backoff_ms: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            endpoint: format!("{DEFAULT_BASE}/chat/completions"),
            model: "gpt-4-0613".into(),
            temperature: 0.0,
            timeout_ms: 60_000,
            max_retries: 3,
            backoff_ms: 500,
        }
    }
}

impl HttpConfig {
    /// Defaults with the endpoint taken from `ACE_API_BASE` when set.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Ok(base) = std::env::var(API_BASE_ENV) {
            cfg.endpoint = format!("{}/chat/completions", base.trim_end_matches('/'));
        }
        cfg
    }
}

/// OpenAI-compatible chat-completions client. Each prompt is sent as one
/// user message. Transport failures, 429 and 5xx are retried with
/// exponential backoff. The API key is read from `ACE_API_KEY` at
/// construction and never serialized.
pub struct HttpBackend {
    config: HttpConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
    name: String,
}

enum Failure {
    Timeout,
    Transient(String),
    Fatal(BackendError),
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self::with_key(config, api_key)
    }

    pub fn with_key(config: HttpConfig, api_key: Option<String>) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_millis(config.timeout_ms)).build();
        let name = format!("http:{}", config.model);
        Self { config, api_key, agent, name }
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn attempt(&self, body: &serde_json::Value) -> Result<String, Failure> {
        let mut req = self.agent.post(&self.config.endpoint).set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        match req.send_json(body) {
            Ok(resp) => {
                let v: serde_json::Value = resp.into_json().map_err(|e| {
                    if is_timeout(&e) {
                        Failure::Timeout
                    } else {
                        Failure::Fatal(BackendError::BadResponse(e.to_string()))
                    }
                })?;
                v.pointer("/choices/0/message/content").and_then(|c| c.as_str()).map(str::to_string).ok_or_else(|| {
                    Failure::Fatal(BackendError::BadResponse("missing choices[0].message.content".into()))
                })
            }
            Err(ureq::Error::Status(code, resp)) => {
                let body = resp.into_string().unwrap_or_default();
                if code == 429 || code >= 500 {
                    Err(Failure::Transient(format!("HTTP status {code}")))
                } else {
                    Err(Failure::Fatal(BackendError::HttpStatus { code, body }))
                }
            }
            Err(ureq::Error::Transport(t)) => {
                if t.kind() == ureq::ErrorKind::Io && is_timeout_transport(&t) {
                    Err(Failure::Timeout)
                } else {
                    Err(Failure::Transient(t.to_string()))
                }
            }
        }
    }
}

fn is_timeout(e: &io::Error) -> bool {
    matches!(e.kind(), io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock)
}

fn is_timeout_transport(t: &ureq::Transport) -> bool {
    let mut source = std::error::Error::source(t);
    while let Some(err) = source {
        if let Some(io) = err.downcast_ref::<io::Error>() {
            return is_timeout(io);
        }
        source = err.source();
    }
    t.to_string().contains("timed out")
}

impl Backend for HttpBackend {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let body = json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        });
        let attempts = self.config.max_retries + 1;
        let mut delay = self.config.backoff_ms;
        let mut all_timeouts = true;
        let mut last = String::new();
        for n in 0..attempts {
            if n > 0 {
                std::thread::sleep(Duration::from_millis(delay));
                delay = delay.saturating_mul(2);
            }
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Timeout) => last = "timed out".into(),
                Err(Failure::Transient(msg)) => {
                    all_timeouts = false;
                    last = msg;
                }
            }
        }
        if all_timeouts {
            Err(BackendError::Timeout { attempts })
        } else {
            Err(BackendError::RetryExhausted { attempts, last })
        }
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn deterministic(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    /// Serves the given (status, body) responses in order, one per
    /// connection, recording each request body.
    fn stub(responses: Vec<(u16, String)>) -> (String, Arc<AtomicUsize>, std::thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = Arc::clone(&hits);
        let handle = std::thread::spawn(move || {
            let mut bodies = Vec::new();
            for (status, body) in responses {
                let (mut stream, _) = listener.accept().unwrap();
                counter.fetch_add(1, Ordering::SeqCst);
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                bodies.push(String::from_utf8(buf).unwrap());
                let resp = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(resp.as_bytes()).unwrap();
            }
            bodies
        });
        (url, hits, handle)
    }

    fn ok_body(text: &str) -> String {
        json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
    }

    fn config(endpoint: String, max_retries: u32) -> HttpConfig {
        HttpConfig { endpoint, max_retries, backoff_ms: 1, timeout_ms: 2_000, ..HttpConfig::default() }
    }

    #[test]
    fn returns_reply_verbatim() {
        let (url, _, handle) = stub(vec![(200, ok_body("click(1, 2)\n"))]);
        let b = HttpBackend::with_key(config(url, 0), Some("k".into()));
        assert_eq!(b.complete("hi").unwrap(), "click(1, 2)\n");
        let bodies = handle.join().unwrap();
        let sent: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
        assert_eq!(sent["messages"][0]["content"], "hi");
        assert_eq!(sent["temperature"], 0.0);
    }

    #[test]
    fn retries_server_errors() {
        let (url, hits, handle) = stub(vec![(500, "{}".into()), (500, "{}".into()), (200, ok_body("done"))]);
        let b = HttpBackend::with_key(config(url, 3), None);
        assert_eq!(b.complete("x").unwrap(), "done");
        handle.join().unwrap();
        assert_eq!(hits.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn client_error_is_not_retried() {
        let (url, hits, handle) = stub(vec![(401, "nope".into())]);
        let b = HttpBackend::with_key(config(url, 3), None);
        assert_eq!(b.complete("x"), Err(BackendError::HttpStatus { code: 401, body: "nope".into() }));
        handle.join().unwrap();
        assert_eq!(hits.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn unreachable_endpoint_exhausts_retries() {
        let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
        let b = HttpBackend::with_key(config(format!("http://127.0.0.1:{port}/v1/chat/completions"), 2), None);
        assert!(matches!(b.complete("x"), Err(BackendError::RetryExhausted { attempts: 3, .. })));
    }

    #[test]
    fn slow_server_times_out() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let (mut s, _) = listener.accept().unwrap();
            let mut buf = [0u8; 1024];
            let _ = s.read(&mut buf);
            std::thread::sleep(Duration::from_millis(400));
        });
        let cfg = HttpConfig { timeout_ms: 100, ..config(url, 0) };
        assert_eq!(HttpBackend::with_key(cfg, None).complete("x"), Err(BackendError::Timeout { attempts: 1 }));
        handle.join().unwrap();
    }
}
