//! Choosing the next action.
//!
//! Each step the actor first moves the plan cursor (stay on the subtask
//! unless the critic says it is finished), then asks the model for the
//! next action script given the parsed screen, the current subtask and its
//! milestone, the last action, the critique of that action and a short
//! history. One call per step; a reply that fails to parse or names an
//! unknown key gets exactly one repair call.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{parse, validate, ActionScript, Violation};
use crate::critic::Critique;
use crate::gui::{serialize, UiDocument};
use crate::llm::{Backend, BackendError};
use crate::planner::{next_leaf, PlanCursor, PlanError, PlanTree};
use crate::prompts::{self, PromptError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActorConfig {
    pub history_window: usize,
    pub subtask_step_cap: usize,
    pub episode_step_cap: usize,
}

impl Default for ActorConfig {
    fn default() -> Self {
        Self { history_window: 8, subtask_step_cap: 6, episode_step_cap: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub subtask: String,
    pub action: ActionScript,
    pub critique: Critique,
}

/// The actor's conditioning for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentStep {
    pub prev_action: ActionScript,
    pub obs_doc: UiDocument,
    pub subtask: String,
    pub milestone: String,
    pub critique: Critique,
    /// Oldest first, at most the configured window.
    pub history: Vec<HistoryEntry>,
    /// Screen size in pixels.
    pub screen: (u32, u32),
}

/// Appends to a history, dropping the oldest entries past `window`.
pub fn push_history(history: &mut Vec<HistoryEntry>, entry: HistoryEntry, window: usize) {
    history.push(entry);
    if history.len() > window {
        let excess = history.len() - window;
        history.drain(..excess);
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActorError {
    #[error("action reply rejected after repair: {error}")]
    Format { error: String, reply: String },
    #[error("action outside the screen: {0:?}")]
    Bounds(Vec<Violation>),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// Stays on the subtask unless the critique says it is finished.
pub fn advance_subtask(cursor: PlanCursor, critique: &Critique, tree: &PlanTree) -> Result<PlanCursor, PlanError> {
    if cursor.done {
        return Err(PlanError::AlreadyDone);
    }
    if critique.finished {
        next_leaf(tree, cursor)
    } else {
        Ok(cursor)
    }
}

fn one_line(script: &ActionScript) -> String {
    script.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Builds the actor prompt for `step`.
pub fn actor_prompt(step: &AgentStep) -> Result<String, PromptError> {
    let prev = if step.prev_action.is_empty() { "(none)".to_string() } else { step.prev_action.render() };
    let mut history = String::new();
    for h in &step.history {
        let _ = writeln!(history, "- [{}] {} => {}", h.subtask, one_line(&h.action), h.critique.render());
    }
    if history.is_empty() {
        history.push_str("(none)");
    }
    let (w, h) = step.screen;
    prompts::render(
        prompts::ACTOR_NEXT,
        &[
            ("width", &w.to_string()),
            ("height", &h.to_string()),
            ("screen", serialize(&step.obs_doc).trim_end()),
            ("milestone", &step.milestone),
            ("subtask", &step.subtask),
            ("prev_action", &prev),
            ("critique", &step.critique.render()),
            ("history", history.trim_end()),
        ],
    )
}

enum Checked {
    Ok(ActionScript),
    Repairable(String),
    Bounds(Vec<Violation>),
}

fn check(reply: &str, screen: (u32, u32)) -> Checked {
    let script = match parse(reply) {
        Ok(s) => s,
        Err(e) => return Checked::Repairable(e.to_string()),
    };
    let violations = validate(&script, screen.0, screen.1);
    let bounds: Vec<_> = violations.iter().filter(|v| matches!(v, Violation::OutOfBounds { .. })).cloned().collect();
    if !bounds.is_empty() {
        return Checked::Bounds(bounds);
    }
    if let Some(Violation::UnknownKey { key, .. }) =
        violations.iter().find(|v| matches!(v, Violation::UnknownKey { .. }))
    {
        return Checked::Repairable(format!("unknown key {key:?}"));
    }
    Checked::Ok(script)
}

/// Asks for the next action script. The result always parses, names only
/// known keys and stays on screen.
pub fn next_action(step: &AgentStep, llm: &dyn Backend) -> Result<ActionScript, ActorError> {
    let prompt = actor_prompt(step)?;
    let reply = llm.complete(&prompt)?;
    let error = match check(&reply, step.screen) {
        Checked::Ok(s) => return Ok(s),
        Checked::Bounds(v) => return Err(ActorError::Bounds(v)),
        Checked::Repairable(e) => e,
    };
    let repair = prompts::render(prompts::ACTOR_REPAIR, &[("prompt", &prompt), ("error", &error), ("reply", &reply)])?;
    let reply = llm.complete(&repair)?;
    match check(&reply, step.screen) {
        Checked::Ok(s) => Ok(s),
        Checked::Bounds(v) => Err(ActorError::Bounds(v)),
        Checked::Repairable(error) => Err(ActorError::Format { error, reply }),
    }
}
