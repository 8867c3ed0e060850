use std::sync::Mutex;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{Backend, BackendError};
use crate::sha256_hex;

/// How a rule recognizes a prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matcher {
    /// SHA-256 hex of the exact prompt.
    Hash(String),
    Contains(String),
    Regex(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptRule {
    #[serde(flatten)]
    pub matcher: Matcher,
    pub reply: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_uses: Option<u32>,
}

impl ScriptRule {
    pub fn exact(prompt: &str, reply: impl Into<String>) -> Self {
        Self { matcher: Matcher::Hash(sha256_hex(prompt.as_bytes())), reply: reply.into(), max_uses: None }
    }

    pub fn contains(needle: impl Into<String>, reply: impl Into<String>) -> Self {
        Self { matcher: Matcher::Contains(needle.into()), reply: reply.into(), max_uses: None }
    }

    pub fn regex(pattern: impl Into<String>, reply: impl Into<String>) -> Self {
        Self { matcher: Matcher::Regex(pattern.into()), reply: reply.into(), max_uses: None }
    }

    pub fn max_uses(mut self, n: u32) -> Self {
        self.max_uses = Some(n);
        self
    }
}

/// A named rule table; the on-disk form of a scripted backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    pub name: String,
    pub rules: Vec<ScriptRule>,
}

impl RuleSet {
    pub fn new(name: impl Into<String>, rules: Vec<ScriptRule>) -> Self {
        Self { name: name.into(), rules }
    }
}

enum Compiled {
    Hash(String),
    Contains(String),
    Regex(Regex),
}

impl Compiled {
    fn matches(&self, prompt: &str, hash: &str) -> bool {
        match self {
            Compiled::Hash(h) => h.eq_ignore_ascii_case(hash),
            Compiled::Contains(s) => prompt.contains(s.as_str()),
            Compiled::Regex(r) => r.is_match(prompt),
        }
    }
}

/// Replies from a rule table: the first rule that matches the prompt and
/// still has uses left wins. A prompt no rule answers is an error.
pub struct ScriptedBackend {
    name: String,
    rules: Vec<(Compiled, ScriptRule)>,
    uses: Mutex<Vec<u32>>,
}

impl ScriptedBackend {
    pub fn new(set: RuleSet) -> Result<Self, BackendError> {
        let mut rules = Vec::with_capacity(set.rules.len());
        for rule in set.rules {
            let compiled = match &rule.matcher {
                Matcher::Hash(h) => Compiled::Hash(h.clone()),
                Matcher::Contains(s) => Compiled::Contains(s.clone()),
                Matcher::Regex(p) => {
                    Compiled::Regex(Regex::new(p).map_err(|e| BackendError::Config(format!("rule pattern: {e}")))?)
                }
            };
            rules.push((compiled, rule));
        }
        let uses = Mutex::new(vec![0; rules.len()]);
        Ok(Self { name: format!("scripted:{}", set.name), rules, uses })
    }

    pub fn from_json(text: &str) -> Result<Self, BackendError> {
        let set: RuleSet = serde_json::from_str(text).map_err(|e| BackendError::Config(e.to_string()))?;
        Self::new(set)
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let hash = sha256_hex(prompt.as_bytes());
        let mut uses = self.uses.lock().unwrap_or_else(|e| e.into_inner());
        for (i, (m, rule)) in self.rules.iter().enumerate() {
            if rule.max_uses.is_some_and(|n| uses[i] >= n) {
                continue;
            }
            if m.matches(prompt, &hash) {
                uses[i] += 1;
                return Ok(rule.reply.clone());
            }
        }
        let preview: String = prompt.chars().take(80).collect();
        Err(BackendError::NoRule { prompt_hash: hash, preview })
    }

    fn name(&self) -> &str {
        &self.name
    }

    /// Usage limits make replies depend on call history.
    fn deterministic(&self) -> bool {
        self.rules.iter().all(|(_, r)| r.max_uses.is_none())
    }
}
