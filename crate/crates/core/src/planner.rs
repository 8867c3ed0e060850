//! Hierarchical planning from a tutorial transcript.
//!
//! A plan is two levels deep: milestones, each with an ordered list of
//! subtasks. The model writes it as an outline,
//!
//! ```text
//! 1. Open the export dialog
//!  a. Click the File menu
//!  b. Click Export
//! 2. Export
//!  a. Press ctrl+e
//! ```
//!
//! which [`parse_outline`] reads strictly: milestones numbered from 1,
//! subtasks lettered from `a` within each milestone, nothing else except
//! blank lines and an optional code fence. The agent only ever walks the
//! leaves in order ([`next_leaf`]) and asks for the milestone of the current
//! leaf ([`parent`]).

use std::fmt::Write as _;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{Backend, BackendError};
use crate::prompts::{self, PromptError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Milestone {
    pub text: String,
    pub subtasks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanTree {
    pub milestones: Vec<Milestone>,
}

/// Position of the current leaf. `done` is set once the last leaf has
/// been passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PlanCursor {
    pub milestone: usize,
    pub subtask: usize,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("outline line {line}: {message}")]
pub struct PlanFormatError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("plan reply rejected after a retry: {0}")]
    Format(#[from] PlanFormatError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("plan cursor is already past the last subtask")]
    AlreadyDone,
}

const MAX_SUBTASKS: usize = 26;

impl PlanTree {
    /// Builds a tree, giving each milestone without subtasks a single
    /// subtask equal to its own text.
    pub fn new(milestones: Vec<Milestone>) -> Result<Self, PlanFormatError> {
        if milestones.is_empty() {
            return Err(PlanFormatError { line: 0, message: "no milestones".into() });
        }
        let mut out = Vec::with_capacity(milestones.len());
        for (i, mut m) in milestones.into_iter().enumerate() {
            m.text = m.text.trim().to_string();
            if m.text.is_empty() || m.subtasks.iter().any(|s| s.trim().is_empty()) {
                return Err(PlanFormatError { line: 0, message: format!("milestone {} has empty text", i + 1) });
            }
            if m.subtasks.len() > MAX_SUBTASKS {
                return Err(PlanFormatError { line: 0, message: format!("milestone {} has too many subtasks", i + 1) });
            }
            if m.subtasks.is_empty() {
                m.subtasks.push(m.text.clone());
            }
            out.push(m);
        }
        Ok(Self { milestones: out })
    }

    /// A one-milestone, one-subtask tree.
    pub fn single(milestone: &str, subtask: &str) -> Self {
        Self { milestones: vec![Milestone { text: milestone.to_string(), subtasks: vec![subtask.to_string()] }] }
    }

    pub fn leaf_count(&self) -> usize {
        self.milestones.iter().map(|m| m.subtasks.len()).sum()
    }

    /// All leaves in traversal order with their milestone index.
    pub fn leaves(&self) -> Vec<(usize, &str)> {
        self.milestones.iter().enumerate().flat_map(|(i, m)| m.subtasks.iter().map(move |s| (i, s.as_str()))).collect()
    }

    pub fn subtask(&self, cursor: PlanCursor) -> Result<&str, PlanError> {
        if cursor.done {
            return Err(PlanError::AlreadyDone);
        }
        Ok(&self.milestones[cursor.milestone].subtasks[cursor.subtask])
    }

    /// The outline form this module parses.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, m) in self.milestones.iter().enumerate() {
            let _ = writeln!(out, "{}. {}", i + 1, m.text);
            for (j, s) in m.subtasks.iter().enumerate() {
                let _ = writeln!(out, " {}. {}", char::from(b'a' + j as u8), s);
            }
        }
        out
    }
}

fn strip_fence(text: &str) -> &str {
    let t = text.trim();
    let Some(rest) = t.strip_prefix("```") else { return t };
    let rest = rest.split_once('\n').map(|(_, r)| r).unwrap_or("");
    rest.trim_end().strip_suffix("```").unwrap_or(rest)
}

/// Parses a model reply in outline form.
pub fn parse_outline(text: &str) -> Result<PlanTree, PlanFormatError> {
    let milestone_re = Regex::new(r"^(\d+)[.)]\s+(\S.*)$").expect("static pattern");
    let subtask_re = Regex::new(r"^([a-z])[.)]\s+(\S.*)$").expect("static pattern");
    let mut milestones: Vec<Milestone> = Vec::new();
    for (i, raw) in strip_fence(text).lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| PlanFormatError { line: line_no, message };
        if let Some(c) = milestone_re.captures(line) {
            let n: usize = c[1].parse().map_err(|_| err("milestone number out of range".into()))?;
            if n != milestones.len() + 1 {
                return Err(err(format!("expected milestone {}, found {n}", milestones.len() + 1)));
            }
            milestones.push(Milestone { text: c[2].trim().to_string(), subtasks: Vec::new() });
        } else if let Some(c) = subtask_re.captures(line) {
            let Some(m) = milestones.last_mut() else {
                return Err(err("subtask before the first milestone".into()));
            };
            let letter = c[1].as_bytes()[0];
            let expected = b'a' + m.subtasks.len() as u8;
            if letter != expected {
                return Err(err(format!("expected subtask {}, found {}", expected as char, letter as char)));
            }
            m.subtasks.push(c[2].trim().to_string());
        } else {
            return Err(err(format!("not an outline line: {line:?}")));
        }
    }
    PlanTree::new(milestones)
}

/// Sends `prompt`, parses the reply as an outline, and on a format error
/// reprompts once with the error before giving up.
fn ask_for_outline(prompt: &str, llm: &dyn Backend) -> Result<PlanTree, PlanError> {
    let reply = llm.complete(prompt)?;
    match parse_outline(&reply) {
        Ok(tree) => Ok(tree),
        Err(first) => {
            let retry = prompts::format_retry(prompt, &first.to_string(), &reply);
            Ok(parse_outline(&llm.complete(&retry)?)?)
        }
    }
}

/// Extracts the tutorial's own plan from its transcript.
pub fn extract_raw_plan(transcript: &str, llm: &dyn Backend) -> Result<PlanTree, PlanError> {
    if transcript.trim().is_empty() {
        return Err(PlanError::EmptyInput("transcript"));
    }
    let prompt = prompts::render(prompts::PLAN_EXTRACT, &[("transcript", transcript.trim_end())])?;
    ask_for_outline(&prompt, llm)
}

/// Rewrites a tutorial plan to fit the user's query.
pub fn refine_plan(raw: &PlanTree, query: &str, llm: &dyn Backend) -> Result<PlanTree, PlanError> {
    if query.trim().is_empty() {
        return Err(PlanError::EmptyInput("query"));
    }
    let plan = raw.render();
    let prompt = prompts::render(prompts::PLAN_REFINE, &[("query", query.trim_end()), ("plan", &plan)])?;
    ask_for_outline(&prompt, llm)
}

/// Plans from the query alone, for runs without a transcript.
pub fn plan_from_query(query: &str, llm: &dyn Backend) -> Result<PlanTree, PlanError> {
    if query.trim().is_empty() {
        return Err(PlanError::EmptyInput("query"));
    }
    let prompt = prompts::render(prompts::PLAN_QUERY, &[("query", query.trim_end())])?;
    ask_for_outline(&prompt, llm)
}

/// Advances to the following leaf, crossing into the next milestone when
/// the current one is exhausted.
pub fn next_leaf(tree: &PlanTree, cursor: PlanCursor) -> Result<PlanCursor, PlanError> {
    if cursor.done {
        return Err(PlanError::AlreadyDone);
    }
    let m = &tree.milestones[cursor.milestone];
    Ok(if cursor.subtask + 1 < m.subtasks.len() {
        PlanCursor { subtask: cursor.subtask + 1, ..cursor }
    } else if cursor.milestone + 1 < tree.milestones.len() {
        PlanCursor { milestone: cursor.milestone + 1, subtask: 0, done: false }
    } else {
        PlanCursor { done: true, ..cursor }
    })
}

/// The milestone text of the current leaf.
pub fn parent(tree: &PlanTree, cursor: PlanCursor) -> Result<&str, PlanError> {
    if cursor.done {
        return Err(PlanError::AlreadyDone);
    }
    Ok(&tree.milestones[cursor.milestone].text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{RuleSet, ScriptRule, ScriptedBackend};

    fn backend(rules: Vec<ScriptRule>) -> ScriptedBackend {
        ScriptedBackend::new(RuleSet::new("t", rules)).unwrap()
    }

    fn tree() -> PlanTree {
        parse_outline("1. Open panel\n a. s11\n b. s12\n2. Export\n a. s21").unwrap()
    }

    #[test]
    fn extracts_two_milestones() {
        let b = backend(vec![ScriptRule::contains(
            prompts::PLAN_EXTRACT,
            "1. Open panel\n a. click menu\n2. Export\n a. press hotkey",
        )]);
        let t = extract_raw_plan("first open the panel, then export", &b).unwrap();
        assert_eq!(t.milestones.len(), 2);
        assert_eq!(t.milestones.iter().map(|m| m.subtasks.len()).collect::<Vec<_>>(), [1, 1]);
    }

    #[test]
    fn empty_transcript_is_rejected() {
        let b = backend(vec![]);
        assert_eq!(extract_raw_plan("  \n", &b), Err(PlanError::EmptyInput("transcript")));
    }

    #[test]
    fn prose_twice_is_a_format_error() {
        let b = backend(vec![ScriptRule::contains("", "Sure! First you open the panel.")]);
        assert!(matches!(extract_raw_plan("x", &b), Err(PlanError::Format(_))));
    }

    #[test]
    fn reprompt_recovers() {
        let b = backend(vec![
            ScriptRule::contains(prompts::RETRY_FORMAT, "```\n1. Go\n```"),
            ScriptRule::contains(prompts::PLAN_EXTRACT, "Here you go:\n1. Go"),
        ]);
        let t = extract_raw_plan("x", &b).unwrap();
        assert_eq!(t, PlanTree::single("Go", "Go"));
    }

    #[test]
    fn refine_applies_query() {
        let raw = tree();
        let b = backend(vec![ScriptRule::contains(
            "type AssistGUI instead",
            "1. Open panel\n a. type AssistGUI\n2. Export\n a. s21",
        )]);
        let refined = refine_plan(&raw, "type AssistGUI instead", &b).unwrap();
        assert!(refined.milestones[0].subtasks[0].contains("AssistGUI"));
        let echo = backend(vec![ScriptRule::contains(prompts::PLAN_REFINE, raw.render())]);
        assert_eq!(refine_plan(&raw, "anything", &echo).unwrap(), raw);
    }

    #[test]
    fn outline_is_strict() {
        assert!(parse_outline("").is_err());
        assert!(parse_outline(" a. orphan").is_err());
        assert!(parse_outline("2. skipped one").is_err());
        assert!(parse_outline("1. x\n b. skipped a").is_err());
        assert!(parse_outline("1. x\n - bullet").is_err());
        assert_eq!(parse_outline(&tree().render()).unwrap(), tree());
    }

    #[test]
    fn traversal() {
        let t = tree();
        let c = PlanCursor::default();
        let c1 = next_leaf(&t, c).unwrap();
        assert_eq!((c1.milestone, c1.subtask), (0, 1));
        let c2 = next_leaf(&t, c1).unwrap();
        assert_eq!((c2.milestone, c2.subtask, c2.done), (1, 0, false));
        assert_eq!(parent(&t, c2).unwrap(), "Export");
        assert_eq!(parent(&t, c1).unwrap(), "Open panel");
        let end = next_leaf(&t, c2).unwrap();
        assert!(end.done);
        assert_eq!(next_leaf(&t, end), Err(PlanError::AlreadyDone));
        assert_eq!(parent(&t, end), Err(PlanError::AlreadyDone));
    }
}
