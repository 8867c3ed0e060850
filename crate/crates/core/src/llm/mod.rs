//! Language model backends.
//!
//! Every module that talks to a model goes through [`Backend::complete`]
//! with a single self-contained prompt; no conversation state is kept
//! between calls. [`ScriptedBackend`] answers from a rule table and is what
//! tests and the bundled fixtures use. [`HttpBackend`] speaks the
//! chat-completions JSON protocol.

mod http;
mod scripted;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::{HttpBackend, HttpConfig, API_BASE_ENV, API_KEY_ENV};
pub use scripted::{Matcher, RuleSet, ScriptRule, ScriptedBackend};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("no rule matches prompt {prompt_hash} ({preview:?})")]
    NoRule { prompt_hash: String, preview: String },
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("HTTP status {code}: {body}")]
    HttpStatus { code: u16, body: String },
    #[error("gave up after {attempts} attempt(s): {last}")]
    RetryExhausted { attempts: u32, last: String },
    #[error("bad response: {0}")]
    BadResponse(String),
    #[error("bad configuration: {0}")]
    Config(String),
}

/// A text-completion model.
pub trait Backend: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, BackendError>;
    fn name(&self) -> &str;
    /// Whether identical prompts always get identical replies.
    fn deterministic(&self) -> bool;
}

impl<B: Backend + ?Sized> Backend for &B {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        (**self).complete(prompt)
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn deterministic(&self) -> bool {
        (**self).deterministic()
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        (**self).complete(prompt)
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn deterministic(&self) -> bool {
        (**self).deterministic()
    }
}

/// One logged backend call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    pub index: u64,
    pub backend: String,
    pub prompt: String,
    /// The reply, or the error message prefixed with `error: `.
    pub reply: String,
    pub ok: bool,
}

/// Wraps a backend and records every call with a monotonically increasing
/// index. Safe to share across threads.
pub struct Recorder<B> {
    inner: B,
    next: AtomicU64,
    records: Mutex<Vec<CallRecord>>,
}

impl<B: Backend> Recorder<B> {
    pub fn new(inner: B) -> Self {
        Self { inner, next: AtomicU64::new(0), records: Mutex::new(Vec::new()) }
    }

    /// Removes and returns the calls logged so far.
    pub fn drain(&self) -> Vec<CallRecord> {
        let mut recs = std::mem::take(&mut *self.records.lock().unwrap_or_else(|e| e.into_inner()));
        recs.sort_by_key(|r| r.index);
        recs
    }

    pub fn calls(&self) -> u64 {
        self.next.load(Ordering::SeqCst)
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: Backend> Backend for Recorder<B> {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let index = self.next.fetch_add(1, Ordering::SeqCst);
        let result = self.inner.complete(prompt);
        let (reply, ok) = match &result {
            Ok(r) => (r.clone(), true),
            Err(e) => (format!("error: {e}"), false),
        };
        let rec = CallRecord { index, backend: self.inner.name().to_string(), prompt: prompt.to_string(), reply, ok };
        self.records.lock().unwrap_or_else(|e| e.into_inner()).push(rec);
        result
    }

    fn name(&self) -> &str {
        self.inner.name()
    }

    fn deterministic(&self) -> bool {
        self.inner.deterministic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn recorder_indices_are_unique_under_concurrency() {
        let rules = RuleSet::new("t", vec![ScriptRule::contains("", "ok")]);
        let rec = Arc::new(Recorder::new(ScriptedBackend::new(rules).unwrap()));
        let handles: Vec<_> = (0..4)
            .map(|t| {
                let rec = Arc::clone(&rec);
                std::thread::spawn(move || {
                    for i in 0..50 {
                        rec.complete(&format!("{t}-{i}")).unwrap();
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        let calls = rec.drain();
        assert_eq!(calls.len(), 200);
        assert!(calls.iter().enumerate().all(|(i, c)| c.index == i as u64));
        assert!(rec.drain().is_empty());
    }
}
